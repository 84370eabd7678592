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

#include "ctm/martingale.hpp"

#include <string>

#include "ctm/error.hpp"

namespace ctm {

ConformalTestMartingale::ConformalTestMartingale(ConformityMeasure measure,
                                                 std::unique_ptr<BettingMartingale> bettor)
    : transducer_(measure), bettor_(std::move(bettor)) {
  if (!bettor_) throw InvalidArgument("conformal test martingale needs a bettor");
}

ConformalTestMartingale::ConformalTestMartingale(const ConformalTestMartingale& other)
    : transducer_(other.transducer_),
      bettor_(other.bettor_->clone()),
      wealth_(other.wealth_),
      last_density_(other.last_density_) {}

ConformalTestMartingale& ConformalTestMartingale::operator=(const ConformalTestMartingale& other) {
  if (this != &other) {
    ConformalTestMartingale copy(other);
    *this = std::move(copy);
  }
  return *this;
}

TrajectoryStep ConformalTestMartingale::step(double z, double tau) {
  // The density for step n must be fixed before z_n is scored.
  last_density_ = bettor_->next_density();
  TrajectoryStep out;
  out.observation = z;
  out.record = transducer_.push(z, tau);
  out.factor = last_density_->evaluate(out.record.p);
  bettor_->observe(out.record.p);
  wealth_.apply(out.factor);
  out.wealth = wealth_;
  return out;
}

std::vector<TrajectoryStep> ctm_run(std::span<const double> data, const ConformityMeasure& measure,
                                    BettingMartingale& bettor, TauSource& taus,
                                    std::size_t horizon) {
  if (data.size() < horizon) {
    throw InvalidArgument("observation stream has " + std::to_string(data.size()) +
                          " values but the horizon is " + std::to_string(horizon) + " (short by " +
                          std::to_string(horizon - data.size()) + ")");
  }
  ConformalTransducer transducer(measure);
  Wealth wealth;
  std::vector<TrajectoryStep> out;
  out.reserve(horizon);
  for (std::size_t n = 0; n < horizon; ++n) {
    const PiecewiseDensity& density = bettor.next_density();
    TrajectoryStep step;
    step.observation = data[n];
    step.record = transducer.push(data[n], taus.next());
    step.factor = density.evaluate(step.record.p);
    bettor.observe(step.record.p);
    wealth.apply(step.factor);
    step.wealth = wealth;
    out.push_back(step);
  }
  return out;
}

}  // namespace ctm
