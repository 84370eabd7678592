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

// Exact brute-force checks for small horizons.
//
// Given an alternative Q and a conformity measure, the joint law of the first
// N conformal p-values is constant on the N! product cells
// prod_n [i_n/n, (i_n+1)/n), because for a fixed observation sequence p_n is
// uniform on a union of whole 1/n grid intervals. Enumerating every sequence
// and every cell gives the cell masses exactly, and with them the
// pushforward KL divergence to the uniform law and the expected log wealth of
// any betting family on the same grid.
//
// Nothing here shares code with the Bayes-Kelly engine: the heights come from
// ratios of cell masses rather than from a posterior over prefixes.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ctm/alternative.hpp"
#include "ctm/conformal.hpp"
#include "ctm/rng.hpp"

namespace ctm::oracle {

inline constexpr std::size_t kMaxCellTreeHorizon = 8;
inline constexpr std::size_t kMaxEnumeratedSequences = std::size_t{1} << 20;
inline constexpr std::size_t kMaxEvariableHorizon = 20;

struct Survivor {
  std::vector<Symbol> sequence;
  double weight = 0.0;  // Q(sequence) * prod_n 1/k_n
};

struct CellPath {
  std::vector<std::size_t> intervals;  // i_n in [0, n) for n = 1..N
  double volume = 0.0;                 // 1/N!
  double q_mass = 0.0;
  std::vector<double> bk_heights;      // Bayes-Kelly density on this cell, per step
  std::vector<Survivor> survivors;     // only filled on request
};

struct CellTree {
  std::size_t horizon = 0;
  std::uint64_t volume_denominator = 1;  // N!
  std::vector<CellPath> cells;           // lexicographic in intervals
};

// Throws CostGuard for horizons above kMaxCellTreeHorizon or when
// alphabet^N exceeds kMaxEnumeratedSequences.
CellTree cell_tree(const AlternativeModel& q, const ConformityMeasure& measure,
                   const Alphabet& alphabet, std::size_t horizon, bool keep_survivors = false);

// D(pushforward of Q || uniform) = sum_c q_c log(q_c / vol_c), natural log.
double pushforward_kl(const CellTree& tree);

// Per-cell, per-step factors of some betting family on the cell grid.
using CellHeights = std::vector<std::vector<double>>;

CellHeights bayes_kelly_heights(const CellTree& tree);

// sum_c q_c sum_n log h_{c,n}; -infinity if a cell of positive mass has a
// zero factor.
double expected_log_wealth(const CellTree& tree, const CellHeights& heights);

// A random betting family on the cell grid: each history node gets its own
// strictly positive normalized density, mixed as
// (1 - mix) * anchor + mix * random when an anchor is given.
CellHeights random_rival_heights(const CellTree& tree, RandomStream& rng,
                                 const CellHeights* anchor = nullptr, double mix = 1.0);

struct OptimalityCertificate {
  std::size_t horizon = 0;
  double expected_log_wealth = 0.0;  // of the Bayes-Kelly bettor
  double kl = 0.0;
  double abs_difference = 0.0;
  double max_rival = 0.0;
  std::size_t rivals = 0;
  double q_mass_total = 0.0;
  bool identity_holds = false;
  bool dominance_holds = false;
};

inline constexpr double kIdentityTolerance = 1e-9;
inline constexpr double kDominanceMargin = 1e-12;

OptimalityCertificate certify_optimality(const AlternativeModel& q,
                                         const ConformityMeasure& measure,
                                         const Alphabet& alphabet, std::size_t horizon,
                                         std::size_t rivals, std::uint64_t seed);

// sum over {0,1}^n of theta^k (1 - theta)^(n - k) * statistic(bits).
double evariable_expectation(const std::function<double(std::span<const Symbol>)>& statistic,
                             double theta, std::size_t n);

}  // namespace ctm::oracle
