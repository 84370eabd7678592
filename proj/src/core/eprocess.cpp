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

#include "ctm/eprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ctm/error.hpp"

namespace ctm {

double log_ml_sup(std::size_t n, std::size_t k) {
  if (n == 0) throw InvalidArgument("ml_sup needs n >= 1");
  if (k > n) throw InvalidArgument("ml_sup: count of ones exceeds n");
  const double log_n = std::log(static_cast<double>(n));
  double out = 0.0;
  if (k > 0) out += static_cast<double>(k) * (std::log(static_cast<double>(k)) - log_n);
  if (k < n) out += static_cast<double>(n - k) * (std::log(static_cast<double>(n - k)) - log_n);
  return out;
}

double ml_sup(std::size_t n, std::size_t k) { return std::exp(log_ml_sup(n, k)); }

double EProcessState::log_value() const {
  if (n == 0) return 0.0;
  return log_q - log_ml_sup(n, ones);
}

double EProcessState::value() const { return std::exp(log_value()); }

EProcessState eprocess_step(const EProcessState& state, Symbol z, const AlternativeModel& q) {
  if (q.alphabet_size() != 2) throw InvalidArgument("e-process needs a binary alternative");
  if (z != 0 && z != 1) throw InvalidArgument("e-process observations must be bits");
  EProcessState next = state;
  const double prob = q.conditional(state.prefix).at(static_cast<std::size_t>(z));
  next.log_q = prob > 0.0 ? state.log_q + std::log(prob)
                          : -std::numeric_limits<double>::infinity();
  next.n += 1;
  next.ones += static_cast<std::size_t>(z);
  next.prefix.push_back(z);
  return next;
}

EmpiricalMl empirical_ml(std::span<const double> data) {
  if (data.empty()) throw InvalidArgument("empirical_ml: empty data");
  std::map<double, std::size_t> counts;
  for (double x : data) {
    if (!std::isfinite(x)) throw InvalidArgument("empirical_ml: non-finite observation");
    ++counts[x];
  }
  // Group values by multiplicity so each distinct term is one multiplication.
  std::map<std::size_t, std::size_t> by_multiplicity;
  for (const auto& [value, m] : counts) ++by_multiplicity[m];

  EmpiricalMl out;
  out.n = data.size();
  out.distinct = counts.size();
  const double log_n = std::log(static_cast<double>(out.n));
  for (const auto& [m, groups] : by_multiplicity) {
    const double md = static_cast<double>(m);
    out.log_value += static_cast<double>(groups) * md * (std::log(md) - log_n);
  }
  out.value = std::exp(out.log_value);
  out.log_lower_bound = static_cast<double>(out.n) * (-log_n);
  out.continuous_ratio = 0.0;
  return out;
}

}  // namespace ctm
