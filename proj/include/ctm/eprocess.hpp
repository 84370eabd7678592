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
#include <span>
#include <vector>

#include "ctm/alternative.hpp"

namespace ctm {

// log of max over theta in [0,1] of theta^k (1 - theta)^(n - k), with
// 0^0 = 1. Requires n >= 1 and k <= n.
double log_ml_sup(std::size_t n, std::size_t k);
double ml_sup(std::size_t n, std::size_t k);

// Likelihood ratio of Q to the best Bernoulli fit on a binary stream:
// E*_n = Q(z_1..z_n) / sup_theta P_theta(z_1..z_n).
struct EProcessState {
  std::size_t n = 0;
  std::size_t ones = 0;
  double log_q = 0.0;
  std::vector<Symbol> prefix;

  double log_value() const;
  double value() const;
};

// Absorbs z into the state. A symbol of zero Q-probability makes the value
// zero for good.
EProcessState eprocess_step(const EProcessState& state, Symbol z, const AlternativeModel& q);

// Maximum over iid laws of the probability of the observed sequence:
// prod_j (m_j / N)^{m_j} over distinct values with multiplicities m_j.
struct EmpiricalMl {
  std::size_t n = 0;
  std::size_t distinct = 0;
  double log_value = 0.0;
  double value = 0.0;
  // -N log N, attained iff all observations differ.
  double log_lower_bound = 0.0;
  // Likelihood ratio of any continuous alternative to the null maximum
  // likelihood: the alternative gives the exact sequence probability zero.
  double continuous_ratio = 0.0;
};

EmpiricalMl empirical_ml(std::span<const double> data);

}  // namespace ctm
