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

#include "ctm/betting.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ctm/error.hpp"

namespace ctm {

std::size_t grid_index(std::size_t cells, double p) {
  if (cells == 0) throw InvalidArgument("grid must have at least one cell");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0,1]");
  // floor(p * cells) can be off by one for p near a boundary; fix it up with
  // exact comparisons against i / cells.
  const double n = static_cast<double>(cells);
  auto i = static_cast<std::size_t>(std::floor(p * n));
  if (i >= cells) i = cells - 1;
  while (i > 0 && p < static_cast<double>(i) / n) --i;
  while (i + 1 < cells && p >= static_cast<double>(i + 1) / n) ++i;
  return i;
}

PiecewiseDensity::PiecewiseDensity(std::vector<double> heights) : heights_(std::move(heights)) {
  if (heights_.empty()) throw InvalidArgument("density needs at least one interval");
  for (std::size_t i = 0; i < heights_.size(); ++i) {
    if (!std::isfinite(heights_[i]) || heights_[i] < 0.0) {
      throw InvalidArgument("density height " + std::to_string(i) +
                            " is negative or not finite");
    }
  }
}

PiecewiseDensity PiecewiseDensity::uniform(std::size_t cells) {
  return PiecewiseDensity(std::vector<double>(cells, 1.0));
}

double PiecewiseDensity::integral() const {
  double sum = 0.0;
  for (double h : heights_) sum += h;
  return sum / static_cast<double>(heights_.size());
}

bool PiecewiseDensity::is_normalized(double tol) const {
  return std::fabs(integral() - 1.0) <= tol;
}

double PiecewiseDensity::evaluate(double p) const {
  return heights_[grid_index(heights_.size(), p)];
}

double density_integral(const PiecewiseDensity& d) { return d.integral(); }

double evaluate(const PiecewiseDensity& d, double p) { return d.evaluate(p); }

double wealth_update(double w, double factor) {
  if (!(w >= 0.0) || !(factor >= 0.0)) {
    throw InvalidArgument("wealth and factor must be nonnegative");
  }
  if (w == 0.0) return 0.0;
  return w * factor;
}

void Wealth::apply(double factor) {
  if (!(factor >= 0.0)) throw InvalidArgument("wealth factor must be nonnegative");
  if (is_zero()) return;
  log_ = factor == 0.0 ? -std::numeric_limits<double>::infinity() : log_ + std::log(factor);
}

double Wealth::log10() const { return log_ / std::log(10.0); }

double Wealth::linear() const { return std::exp(log_); }

bool Wealth::is_zero() const { return std::isinf(log_) && log_ < 0.0; }

ShrunkAlternativeBettor::ShrunkAlternativeBettor(std::vector<PiecewiseDensity> table)
    : table_(std::move(table)) {
  if (table_.empty()) throw InvalidArgument("density table is empty");
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (!table_[i].is_normalized()) {
      throw InvalidArgument("density for step " + std::to_string(i + 1) +
                            " does not integrate to 1 (integral " +
                            std::to_string(table_[i].integral()) + ")");
    }
  }
}

const PiecewiseDensity& ShrunkAlternativeBettor::next_density() {
  return table_[step_ % table_.size()];
}

void ShrunkAlternativeBettor::observe(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0,1]");
  ++step_;
}

std::unique_ptr<BettingMartingale> ShrunkAlternativeBettor::clone() const {
  return std::make_unique<ShrunkAlternativeBettor>(*this);
}

std::unique_ptr<BettingMartingale> shrunk_alternative_bettor(
    std::vector<PiecewiseDensity> table) {
  return std::make_unique<ShrunkAlternativeBettor>(std::move(table));
}

std::unique_ptr<BettingMartingale> constant_bettor() {
  return shrunk_alternative_bettor({PiecewiseDensity::uniform()});
}

}  // namespace ctm
