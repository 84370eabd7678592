// Copyright 2026 The ctm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ctm/betting.hpp"
#include "ctm/conformal.hpp"
#include "ctm/rng.hpp"

namespace ctm {

struct TrajectoryStep {
  double observation = 0.0;
  PValueRecord record;
  double factor = 1.0;
  Wealth wealth;
};

// A conformity measure composed with a betting martingale. Each step scores
// the grown window, forms the randomized p-value and multiplies the wealth by
// the bettor's density at that p-value.
class ConformalTestMartingale {
 public:
  ConformalTestMartingale(ConformityMeasure measure, std::unique_ptr<BettingMartingale> bettor);

  ConformalTestMartingale(const ConformalTestMartingale& other);
  ConformalTestMartingale& operator=(const ConformalTestMartingale& other);
  ConformalTestMartingale(ConformalTestMartingale&&) = default;
  ConformalTestMartingale& operator=(ConformalTestMartingale&&) = default;

  TrajectoryStep step(double z, double tau);

  const Wealth& wealth() const { return wealth_; }
  std::size_t steps() const { return transducer_.window().size(); }
  const BettingMartingale& bettor() const { return *bettor_; }
  // Density emitted for the most recent step, if any.
  const PiecewiseDensity* last_density() const { return last_density_ ? &*last_density_ : nullptr; }

 private:
  ConformalTransducer transducer_;
  std::unique_ptr<BettingMartingale> bettor_;
  Wealth wealth_;
  std::optional<PiecewiseDensity> last_density_;
};

// Runs the first `horizon` observations of `data` through a fresh bettor.
// Throws InvalidArgument naming the shortfall if data is too short.
std::vector<TrajectoryStep> ctm_run(std::span<const double> data, const ConformityMeasure& measure,
                                    BettingMartingale& bettor, TauSource& taus,
                                    std::size_t horizon);

}  // namespace ctm
