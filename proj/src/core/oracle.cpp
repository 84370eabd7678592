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

#include "ctm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ctm/error.hpp"

namespace ctm::oracle {

namespace {

// Everything the tree needs to know about one full observation sequence.
struct Sequence {
  std::vector<Symbol> symbols;
  double q = 0.0;
  std::vector<std::size_t> lo;  // per step: first grid interval reached
  std::vector<std::size_t> hi;  // per step: one past the last
};

struct Alive {
  std::size_t seq;
  double weight;
};

std::uint64_t factorial(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

// Scores z_1..z_n against their bag one by one and counts against the last.
void interval_of_step(const Sequence& s, std::size_t n, const ConformityMeasure& measure,
                      const Alphabet& alphabet, std::size_t& lo, std::size_t& hi) {
  std::vector<double> bag(n);
  for (std::size_t i = 0; i < n; ++i) bag[i] = alphabet.value(s.symbols[i]);
  const double last = measure.score(bag, bag[n - 1]);
  lo = 0;
  hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = measure.score(bag, bag[i]);
    if (a < last) ++lo;
    if (a <= last) ++hi;
  }
}

std::vector<Sequence> enumerate_sequences(const AlternativeModel& q,
                                          const ConformityMeasure& measure,
                                          const Alphabet& alphabet, std::size_t horizon) {
  const std::size_t m = alphabet.size();
  std::size_t total = 1;
  for (std::size_t n = 0; n < horizon; ++n) {
    if (total > kMaxEnumeratedSequences / m) {
      throw CostGuard("oracle: alphabet^horizon exceeds the enumeration budget");
    }
    total *= m;
  }
  std::vector<Sequence> out;
  std::vector<Symbol> digits(horizon, 0);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (std::size_t n = horizon; n-- > 0;) {
      digits[n] = static_cast<Symbol>(rest % m);
      rest /= m;
    }
    double prob = 1.0;
    for (std::size_t n = 0; n < horizon && prob > 0.0; ++n) {
      prob *= q.conditional(std::span<const Symbol>(digits).first(n))
                  .at(static_cast<std::size_t>(digits[n]));
    }
    if (prob <= 0.0) continue;
    Sequence s;
    s.symbols = digits;
    s.q = prob;
    s.lo.resize(horizon);
    s.hi.resize(horizon);
    for (std::size_t n = 1; n <= horizon; ++n) {
      interval_of_step(s, n, measure, alphabet, s.lo[n - 1], s.hi[n - 1]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct TreeBuilder {
  const std::vector<Sequence>& seqs;
  std::size_t horizon;
  double volume;
  bool keep_survivors;
  CellTree& tree;
  std::vector<std::size_t> path;
  std::vector<double> heights;

  void descend(const std::vector<Alive>& alive, double mass) {
    const std::size_t depth = path.size();
    if (depth == horizon) {
      CellPath cell;
      cell.intervals = path;
      cell.volume = volume;
      cell.q_mass = mass;
      cell.bk_heights = heights;
      if (keep_survivors) {
        for (const Alive& a : alive) cell.survivors.push_back({seqs[a.seq].symbols, a.weight});
      }
      tree.cells.push_back(std::move(cell));
      return;
    }
    const std::size_t step = depth + 1;
    std::vector<Alive> next;
    for (std::size_t i = 0; i < step; ++i) {
      next.clear();
      double child_mass = 0.0;
      for (const Alive& a : alive) {
        const Sequence& s = seqs[a.seq];
        if (i < s.lo[depth] || i >= s.hi[depth]) continue;
        const double w = a.weight / static_cast<double>(s.hi[depth] - s.lo[depth]);
        next.push_back({a.seq, w});
        child_mass += w;
      }
      // Conditional density of p_step on this interval given the path so far;
      // unreachable histories bet nothing.
      const double h = mass > 0.0 ? static_cast<double>(step) * child_mass / mass : 1.0;
      path.push_back(i);
      heights.push_back(h);
      descend(next, child_mass);
      heights.pop_back();
      path.pop_back();
    }
  }
};

struct RivalBuilder {
  const CellTree& tree;
  RandomStream& rng;
  const CellHeights* anchor;
  double mix;
  CellHeights& out;

  // Fills steps depth+1..N for the cells [base, base + (N!/depth!)).
  void descend(std::size_t depth, std::size_t base, std::vector<double>& prefix) {
    const std::size_t n_total = tree.horizon;
    if (depth == n_total) {
      out[base] = prefix;
      return;
    }
    const std::size_t step = depth + 1;
    std::uint64_t stride = 1;
    for (std::size_t j = step + 1; j <= n_total; ++j) stride *= j;
    std::vector<double> h(step);
    double sum = 0.0;
    for (double& x : h) {
      x = -std::log1p(-rng.uniform());  // Exp(1), strictly positive
      if (x <= 0.0) x = std::numeric_limits<double>::min();
      sum += x;
    }
    for (std::size_t i = 0; i < step; ++i) {
      double height = h[i] * static_cast<double>(step) / sum;
      if (anchor != nullptr) {
        const double a = (*anchor)[base + i * stride][depth];
        height = (1.0 - mix) * a + mix * height;
      }
      prefix.push_back(height);
      descend(step, base + i * static_cast<std::size_t>(stride), prefix);
      prefix.pop_back();
    }
  }
};

}  // namespace

CellTree cell_tree(const AlternativeModel& q, const ConformityMeasure& measure,
                   const Alphabet& alphabet, std::size_t horizon, bool keep_survivors) {
  if (horizon > kMaxCellTreeHorizon) {
    throw CostGuard("oracle: horizon " + std::to_string(horizon) + " exceeds the cell-tree limit " +
                    std::to_string(kMaxCellTreeHorizon));
  }
  if (q.alphabet_size() != alphabet.size()) {
    throw InvalidArgument("oracle: model and alphabet sizes differ");
  }
  CellTree tree;
  tree.horizon = horizon;
  tree.volume_denominator = factorial(horizon);
  const std::vector<Sequence> seqs = enumerate_sequences(q, measure, alphabet, horizon);
  std::vector<Alive> alive;
  alive.reserve(seqs.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    alive.push_back({i, seqs[i].q});
    mass += seqs[i].q;
  }
  tree.cells.reserve(tree.volume_denominator);
  TreeBuilder builder{seqs, horizon, 1.0 / static_cast<double>(tree.volume_denominator),
                      keep_survivors, tree, {}, {}};
  builder.descend(alive, mass);
  return tree;
}

double pushforward_kl(const CellTree& tree) {
  double d = 0.0;
  for (const CellPath& c : tree.cells) {
    if (c.q_mass > 0.0) d += c.q_mass * std::log(c.q_mass / c.volume);
  }
  return d;
}

CellHeights bayes_kelly_heights(const CellTree& tree) {
  CellHeights out;
  out.reserve(tree.cells.size());
  for (const CellPath& c : tree.cells) out.push_back(c.bk_heights);
  return out;
}

double expected_log_wealth(const CellTree& tree, const CellHeights& heights) {
  if (heights.size() != tree.cells.size()) {
    throw InvalidArgument("expected_log_wealth: one height vector per cell required");
  }
  double total = 0.0;
  for (std::size_t c = 0; c < tree.cells.size(); ++c) {
    const double q = tree.cells[c].q_mass;
    if (q <= 0.0) continue;
    double log_wealth = 0.0;
    for (double h : heights[c]) {
      if (h <= 0.0) return -std::numeric_limits<double>::infinity();
      log_wealth += std::log(h);
    }
    total += q * log_wealth;
  }
  return total;
}

CellHeights random_rival_heights(const CellTree& tree, RandomStream& rng,
                                 const CellHeights* anchor, double mix) {
  if (!(mix > 0.0 && mix <= 1.0)) throw InvalidArgument("rival mix must lie in (0,1]");
  if (anchor != nullptr && anchor->size() != tree.cells.size()) {
    throw InvalidArgument("rival anchor has the wrong number of cells");
  }
  CellHeights out(tree.cells.size());
  std::vector<double> prefix;
  RivalBuilder builder{tree, rng, anchor, mix, out};
  builder.descend(0, 0, prefix);
  return out;
}

OptimalityCertificate certify_optimality(const AlternativeModel& q,
                                         const ConformityMeasure& measure,
                                         const Alphabet& alphabet, std::size_t horizon,
                                         std::size_t rivals, std::uint64_t seed) {
  const CellTree tree = cell_tree(q, measure, alphabet, horizon);
  const CellHeights bk = bayes_kelly_heights(tree);
  OptimalityCertificate cert;
  cert.horizon = horizon;
  cert.expected_log_wealth = expected_log_wealth(tree, bk);
  cert.kl = pushforward_kl(tree);
  cert.abs_difference = std::fabs(cert.expected_log_wealth - cert.kl);
  for (const CellPath& c : tree.cells) cert.q_mass_total += c.q_mass;
  cert.rivals = rivals;
  cert.max_rival = -std::numeric_limits<double>::infinity();
  RandomStream rng(seed, Substream::kRival, horizon);
  for (std::size_t r = 0; r < rivals; ++r) {
    // Alternate pure random families with small perturbations of the
    // optimum, which probe the maximum from close by.
    CellHeights rival;
    if (r % 2 == 0) {
      rival = random_rival_heights(tree, rng);
    } else {
      const double mix = std::pow(10.0, -1.0 - 5.0 * rng.uniform());
      rival = random_rival_heights(tree, rng, &bk, mix);
    }
    cert.max_rival = std::max(cert.max_rival, expected_log_wealth(tree, rival));
  }
  cert.identity_holds = cert.abs_difference <= kIdentityTolerance;
  cert.dominance_holds = rivals == 0 || cert.max_rival <= cert.expected_log_wealth + kDominanceMargin;
  return cert;
}

double evariable_expectation(const std::function<double(std::span<const Symbol>)>& statistic,
                             double theta, std::size_t n) {
  if (n > kMaxEvariableHorizon) {
    throw CostGuard("evariable_expectation: n exceeds " + std::to_string(kMaxEvariableHorizon));
  }
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0,1]");
  const std::size_t total = std::size_t{1} << n;
  std::vector<Symbol> bits(n);
  double sum = 0.0;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bits[i] = static_cast<Symbol>((code >> (n - 1 - i)) & 1U);
      ones += static_cast<std::size_t>(bits[i]);
    }
    // std::pow(0, 0) == 1, as needed at the endpoints.
    const double prob = std::pow(theta, static_cast<double>(ones)) *
                        std::pow(1.0 - theta, static_cast<double>(n - ones));
    if (prob == 0.0) continue;
    sum += prob * statistic(bits);
  }
  return sum;
}

}  // namespace ctm::oracle
