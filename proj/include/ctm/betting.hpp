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
#include <span>
#include <vector>

namespace ctm {

// Tolerance on the unit-integral check of betting densities.
inline constexpr double kNormalizationTolerance = 1e-12;

// Index of the grid interval of [0,1] split into `cells` equal parts that
// contains p. Interior boundaries i/cells belong to the interval on their
// right; p = 1 belongs to the last interval.
std::size_t grid_index(std::size_t cells, double p);

// A density on [0,1] that is constant on each of n equal grid intervals
// [i/n, (i+1)/n), the last one closed.
class PiecewiseDensity {
 public:
  // Heights must be finite and nonnegative. Normalization is checked by
  // callers that need it (see is_normalized).
  explicit PiecewiseDensity(std::vector<double> heights);

  static PiecewiseDensity uniform(std::size_t cells = 1);

  std::size_t cells() const { return heights_.size(); }
  const std::vector<double>& heights() const { return heights_; }

  double integral() const;
  bool is_normalized(double tol = kNormalizationTolerance) const;
  double evaluate(double p) const;

 private:
  std::vector<double> heights_;
};

// (sum of heights) / n.
double density_integral(const PiecewiseDensity& d);
double evaluate(const PiecewiseDensity& d, double p);

// w * factor with zero absorbing. Rejects negative inputs.
double wealth_update(double w, double factor);

// Capital of a betting martingale. The log value is authoritative; the
// linear value is derived from it so long horizons neither underflow nor
// overflow in the bookkeeping.
class Wealth {
 public:
  void apply(double factor);

  double log() const { return log_; }
  double log10() const;
  double linear() const;
  bool is_zero() const;

 private:
  double log_ = 0.0;
};

// A test martingale on [0,1]^infinity under the uniform law. Each step the
// bettor first emits its density for the next p-value and is then told the
// realized p-value; the wealth factor is the density at that point.
class BettingMartingale {
 public:
  virtual ~BettingMartingale() = default;

  virtual const PiecewiseDensity& next_density() = 0;
  virtual void observe(double p) = 0;
  virtual std::unique_ptr<BettingMartingale> clone() const = 0;
};

// History-independent bettor: step n bets with table[(n-1) mod size], so a
// single-entry table is a fixed density and {uniform, d} alternates. Each
// entry must integrate to one.
class ShrunkAlternativeBettor final : public BettingMartingale {
 public:
  explicit ShrunkAlternativeBettor(std::vector<PiecewiseDensity> table);

  const PiecewiseDensity& next_density() override;
  void observe(double p) override;
  std::unique_ptr<BettingMartingale> clone() const override;

  std::size_t step() const { return step_; }

 private:
  std::vector<PiecewiseDensity> table_;
  std::size_t step_ = 0;
};

std::unique_ptr<BettingMartingale> shrunk_alternative_bettor(
    std::vector<PiecewiseDensity> table);
std::unique_ptr<BettingMartingale> constant_bettor();

}  // namespace ctm
