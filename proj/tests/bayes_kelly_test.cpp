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

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "ctm/alternative.hpp"
#include "ctm/bayes_kelly.hpp"
#include "ctm/error.hpp"
#include "ctm/martingale.hpp"
#include "ctm/rng.hpp"
#include "gtest/gtest.h"

namespace ctm {
namespace {

using V = std::vector<double>;
using Seq = std::vector<Symbol>;

const ConformityMeasure kIdentity = ConformityMeasure::identity();

HypothesisSet make_set(std::size_t step, const std::vector<std::pair<Seq, double>>& entries) {
  HypothesisSet s;
  s.step = step;
  s.entries.clear();
  for (const auto& [prefix, w] : entries) s.entries.push_back({prefix, std::log(w)});
  return s;
}

std::map<Seq, double> weights_by_prefix(const HypothesisSet& s) {
  std::map<Seq, double> out;
  for (std::size_t i = 0; i < s.entries.size(); ++i) out[s.entries[i].prefix] = s.absolute_weight(i);
  return out;
}

TEST(Models, ConditionalExamples) {
  const V after_one = markov_model(0.3, 0.1, 0.5)->conditional(Seq{1});
  EXPECT_NEAR(after_one[0], 0.1, 1e-15);
  EXPECT_NEAR(after_one[1], 0.9, 1e-15);
  const auto frozen = markov_model(0.0, 0.0, 0.4);
  EXPECT_EQ(frozen->conditional(Seq{0, 0})[1], 0.0);
  EXPECT_EQ(frozen->conditional(Seq{1})[1], 1.0);

  RandomStream rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Seq prefix(rng.next_u64() % 7);
    for (Symbol& z : prefix) z = static_cast<Symbol>(rng.next_u64() % 2);
    const double theta = 0.05 + 0.9 * rng.uniform();
    const V iid = {1 - theta, theta};
    auto close = [&](const V& v) {
      ASSERT_EQ(v.size(), 2u);
      EXPECT_NEAR(v[0], iid[0], 1e-12);
      EXPECT_NEAR(v[1], iid[1], 1e-12);
    };
    close(markov_model(theta, 1 - theta, theta)->conditional(prefix));
    close(changepoint_model(theta, 0.8, 0.0)->conditional(prefix));
    close(changepoint_model(0.2, theta, 1.0)->conditional(prefix));
    close(changepoint_model(theta, theta, 0.37)->conditional(prefix));
  }
}

TEST(Models, RejectOutOfRangeParameters) {
  EXPECT_THROW(changepoint_model(-0.1, 0.5, 0.5), InvalidArgument);
  EXPECT_THROW(changepoint_model(0.1, 1.5, 0.5), InvalidArgument);
  EXPECT_THROW(changepoint_model(0.1, 0.5, NAN), InvalidArgument);
  EXPECT_THROW(markov_model(0.1, 0.1, 2.0), InvalidArgument);
  EXPECT_THROW(iid_model(V{0.5, 0.6}), InvalidArgument);
  EXPECT_THROW(markov_table_model(V{1.0, 0.0}, {{1.0, 0.0}}), InvalidArgument);
  EXPECT_THROW(point_mass_model(Seq{0, 2}, 2), InvalidArgument);
}

TEST(Models, ConditionalsSumToOne) {
  RandomStream rng(4);
  const std::vector<ModelPtr> models = {
      changepoint_model(0.5, 0.9, 0.2), markov_model(0.1, 0.1, 0.5), bernoulli_model(0.3),
      iid_model(V{0.2, 0.3, 0.5}),
      markov_table_model(V{0.5, 0.5, 0.0}, {{0.1, 0.9, 0.0}, {0.3, 0.3, 0.4}, {0.0, 0.0, 1.0}})};
  for (const auto& m : models) {
    for (int trial = 0; trial < 40; ++trial) {
      Seq prefix(rng.next_u64() % 10);
      for (Symbol& z : prefix) z = static_cast<Symbol>(rng.next_u64() % m->alphabet_size());
      double sum = 0.0;
      for (double x : m->conditional(prefix)) {
        EXPECT_GE(x, 0.0);
        sum += x;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12) << m->describe();
    }
  }
}

TEST(Extend, Examples) {
  const auto deterministic = extend(HypothesisSet{}, *bernoulli_model(1.0));
  ASSERT_EQ(deterministic.entries.size(), 1u);
  EXPECT_EQ(deterministic.entries[0].prefix, Seq{1});
  EXPECT_EQ(deterministic.absolute_weight(0), 1.0);

  const auto w = weights_by_prefix(extend(HypothesisSet{}, *bernoulli_model(0.3)));
  EXPECT_NEAR(w.at(Seq{0}), 0.7, 1e-15);
  EXPECT_NEAR(w.at(Seq{1}), 0.3, 1e-15);

  const HypothesisSet half = make_set(1, {{Seq{1}, 0.5}, {Seq{0}, 0.5}});
  const auto m = weights_by_prefix(extend(half, *markov_model(0.1, 0.1, 0.5)));
  ASSERT_EQ(m.size(), 4u);
  EXPECT_NEAR(m.at((Seq{0, 0})), 0.45, 1e-15);
  EXPECT_NEAR(m.at((Seq{0, 1})), 0.05, 1e-15);
  EXPECT_NEAR(m.at((Seq{1, 0})), 0.05, 1e-15);
  EXPECT_NEAR(m.at((Seq{1, 1})), 0.45, 1e-15);
}

TEST(PredictiveDensity, Examples) {
  const Alphabet bin(2);
  const auto first = predictive_density(extend(HypothesisSet{}, *bernoulli_model(0.3)), kIdentity, bin);
  EXPECT_EQ(first.heights(), V{1.0});
  EXPECT_EQ(predictive_density(make_set(2, {{Seq{1, 1}, 1.0}}), kIdentity, bin).heights(),
            (V{1.0, 1.0}));
  EXPECT_EQ(predictive_density(make_set(2, {{Seq{1, 0}, 1.0}}), kIdentity, bin).heights(),
            (V{2.0, 0.0}));
  EXPECT_THROW(predictive_density(HypothesisSet{}, kIdentity, bin), InvalidArgument);
}

TEST(Condition, Examples) {
  const Alphabet bin(2);
  // (1,0) occupies [0, 1/2); p = 0.7 removes it.
  const auto removed = condition(make_set(2, {{Seq{1, 0}, 1.0}}), 0.7, kIdentity, bin);
  EXPECT_TRUE(removed.empty());

  // Ternary, both candidates untied on [1/2, 1): weights unchanged.
  const Alphabet tri(3);
  const auto kept = condition(make_set(2, {{Seq{0, 1}, 0.25}, {Seq{0, 2}, 0.75}}), 0.7,
                              kIdentity, tri);
  const auto kw = weights_by_prefix(kept);
  ASSERT_EQ(kw.size(), 2u);
  EXPECT_NEAR(kw.at((Seq{0, 1})), 0.25, 1e-15);
  EXPECT_NEAR(kw.at((Seq{0, 2})), 0.75, 1e-15);

  // (1,1,1) has k = 3 on [0,1); (0,0,1) has k = 1 on [2/3,1). Equal priors,
  // p in both: posterior 1/3 : 1.
  const auto tied = condition(make_set(3, {{Seq{1, 1, 1}, 0.5}, {Seq{0, 0, 1}, 0.5}}), 0.8,
                              kIdentity, bin);
  const auto tw = weights_by_prefix(tied);
  ASSERT_EQ(tw.size(), 2u);
  EXPECT_NEAR(tw.at((Seq{1, 1, 1})) / tw.at((Seq{0, 0, 1})), 1.0 / 3.0, 1e-15);
}

TEST(BayesKelly, FirstFactorIsOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ConformalTestMartingale m(ConformityMeasure::neg_distance_to_mean(),
                              bayes_kelly_bettor(iid_model(V{0.25, 0.25, 0.25, 0.25}),
                                                 ConformityMeasure::neg_distance_to_mean(),
                                                 Alphabet(4)));
    RandomStream rng(seed);
    EXPECT_EQ(m.step(static_cast<double>(seed % 4), rng.uniform()).factor, 1.0);
  }
}

// Normalized densities with heights in [0, n], for many random
// tables, measures and alphabets.
TEST(BayesKelly, DensitiesNormalizedOnRandomScenarios) {
  RandomStream rng(17);
  for (int scenario = 0; scenario < 200; ++scenario) {
    const std::size_t m = 2 + rng.next_u64() % 3;
    V init(m);
    std::vector<V> trans(m, V(m));
    auto fill = [&](V& v) {
      double s = 0.0;
      for (double& x : v) s += (x = rng.uniform() < 0.2 ? 0.0 : rng.uniform());
      if (s == 0.0) v[0] = s = 1.0;
      for (double& x : v) x /= s;
    };
    fill(init);
    for (V& row : trans) fill(row);
    const auto measure = scenario % 2 ? ConformityMeasure::identity()
                                      : ConformityMeasure::neg_distance_to_mean();
    auto model = markov_table_model(init, trans);
    BayesKellyBettor bettor(model, measure, Alphabet(m));
    Seq seq;
    V data;
    for (std::size_t n = 1; n <= 7; ++n) {
      const PiecewiseDensity& d = bettor.next_density();
      ASSERT_EQ(d.cells(), n);
      EXPECT_NEAR(d.integral(), 1.0, 1e-12);
      for (double h : d.heights()) {
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, static_cast<double>(n));
      }
      // Sample the next symbol from Q so the run stays on its support.
      const V probs = model->conditional(seq);
      double u = rng.uniform();
      Symbol z = 0;
      while (z + 1 < static_cast<Symbol>(m) && (u -= probs[z]) >= 0.0) ++z;
      while (probs[z] == 0.0) z = (z + 1) % static_cast<Symbol>(m);
      seq.push_back(z);
      data.push_back(z);
      const PValueRecord r = pvalue_step(score_window(measure, data), rng.uniform());
      bettor.observe(r.p);
      ASSERT_FALSE(bettor.exhausted());
    }
  }
}

TEST(BayesKelly, FactorZeroThenUniform) {
  // Q = point mass on (0,1): at step 2 the candidate sits on [1/2, 1).
  // Observe (0,0): scores tie, p_2 = 2*tau/2 = tau; tau < 1/2 misses.
  ConformalTestMartingale m(kIdentity, bayes_kelly_bettor(point_mass_model(Seq{0, 1}, 2),
                                                          kIdentity, Alphabet(2), false));
  EXPECT_EQ(m.step(0.0, 0.6).factor, 1.0);
  const TrajectoryStep s = m.step(0.0, 0.2);
  EXPECT_EQ(s.factor, 0.0);
  EXPECT_TRUE(s.wealth.is_zero());
  for (int i = 0; i < 4; ++i) {
    const TrajectoryStep after = m.step(1.0, 0.5);
    EXPECT_EQ(after.factor, 1.0);
    EXPECT_TRUE(after.wealth.is_zero());
  }
  const auto& bettor = dynamic_cast<const BayesKellyBettor&>(m.bettor());
  EXPECT_TRUE(bettor.exhausted());
}

TEST(BayesKelly, NextDensityIsIdempotentAndObserveNeedsIt) {
  BayesKellyBettor b(changepoint_model(0.5, 0.9, 0.2), kIdentity, Alphabet(2));
  EXPECT_THROW(b.observe(0.5), InvalidArgument);
  const V first = b.next_density().heights();
  EXPECT_EQ(b.next_density().heights(), first);
  EXPECT_EQ(b.step(), 1u);
  EXPECT_THROW(b.observe(-0.1), InvalidArgument);
}

TEST(BayesKelly, ConstructorChecks) {
  EXPECT_THROW(BayesKellyBettor(nullptr, kIdentity, Alphabet(2)), InvalidArgument);
  EXPECT_THROW(BayesKellyBettor(bernoulli_model(0.5), kIdentity, Alphabet(3)), InvalidArgument);
  EXPECT_THROW(CollapsedBayesKelly(iid_model(V{0.2, 0.8}), kIdentity, Alphabet(2)),
               InvalidArgument);
  EXPECT_THROW(CollapsedBayesKelly(bernoulli_model(0.2), ConformityMeasure::neg_distance_to_mean(),
                                   Alphabet(2)),
               InvalidArgument);
  EXPECT_THROW(CollapsedBayesKelly(bernoulli_model(0.2), kIdentity, Alphabet(V{0.0, 3.0})),
               InvalidArgument);
  EXPECT_NE(dynamic_cast<CollapsedBayesKelly*>(
                bayes_kelly_bettor(bernoulli_model(0.2), kIdentity, Alphabet(2)).get()),
            nullptr);
  EXPECT_NE(dynamic_cast<BayesKellyBettor*>(
                bayes_kelly_bettor(iid_model(V{0.2, 0.8}), kIdentity, Alphabet(2)).get()),
            nullptr);
}

// Collapsed and explicit bettors on the same data and taus.
void expect_collapse_equivalence(const ModelPtr& model, std::uint64_t seed, std::size_t horizon) {
  RandomStream data_rng(seed, Substream::kData, 0);
  TauSource t1(RandomStream(seed, Substream::kTau, 0));
  TauSource t2(RandomStream(seed, Substream::kTau, 0));
  ConformalTestMartingale a(kIdentity, std::make_unique<BayesKellyBettor>(model, kIdentity, Alphabet(2)));
  ConformalTestMartingale b(kIdentity, std::make_unique<CollapsedBayesKelly>(model, kIdentity, Alphabet(2)));
  Seq seq;
  for (std::size_t n = 0; n < horizon; ++n) {
    const V probs = model->conditional(seq);
    const Symbol z = data_rng.uniform() < probs[1] ? 1 : 0;
    seq.push_back(z);
    const TrajectoryStep sa = a.step(z, t1.next());
    const TrajectoryStep sb = b.step(z, t2.next());
    ASSERT_NEAR(sa.factor, sb.factor, 1e-12) << model->describe() << " step " << n + 1;
    const auto& da = a.last_density()->heights();
    const auto& db = b.last_density()->heights();
    ASSERT_EQ(da.size(), db.size());
    for (std::size_t i = 0; i < da.size(); ++i) ASSERT_NEAR(da[i], db[i], 1e-12);
  }
}

TEST(CollapsedBayesKelly, MatchesExplicitBettor) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    expect_collapse_equivalence(changepoint_model(0.5, 0.9, 0.2), seed, 10);
    expect_collapse_equivalence(markov_model(0.1, 0.1, 0.5), seed, 10);
    expect_collapse_equivalence(changepoint_model(0.3, 0.7, 0.05), seed, 10);
    expect_collapse_equivalence(bernoulli_model(0.8), seed, 10);
  }
}

TEST(CollapsedBayesKelly, CollapseMidRunContinuesIdentically) {
  const auto model = changepoint_model(0.5, 0.9, 0.2);
  BayesKellyBettor explicit_bettor(model, kIdentity, Alphabet(2));
  TauSource taus(RandomStream(5, Substream::kTau, 0));
  const V data = {0, 1, 1, 0, 1, 1, 1, 1, 0, 1};
  ConformalTransducer tx(kIdentity);
  for (std::size_t n = 0; n < 5; ++n) {
    explicit_bettor.next_density();
    explicit_bettor.observe(tx.push(data[n], taus.next()).p);
  }
  CollapsedBayesKelly collapsed = CollapsedBayesKelly::collapse(explicit_bettor);
  EXPECT_EQ(collapsed.step(), 5u);
  // Absolute mass per (ones, last) key matches the explicit posterior.
  std::map<std::pair<std::size_t, Symbol>, double> explicit_mass, collapsed_mass;
  const HypothesisSet& sigma = explicit_bettor.hypotheses();
  for (std::size_t i = 0; i < sigma.entries.size(); ++i) {
    std::size_t ones = 0;
    for (Symbol z : sigma.entries[i].prefix) ones += static_cast<std::size_t>(z);
    explicit_mass[{ones, sigma.entries[i].prefix.back()}] += sigma.absolute_weight(i);
  }
  for (const auto& e : collapsed.entries()) {
    collapsed_mass[{e.ones, e.last}] += e.weight * std::exp(collapsed.log_scale());
  }
  ASSERT_EQ(explicit_mass.size(), collapsed_mass.size());
  for (const auto& [key, w] : explicit_mass) EXPECT_NEAR(collapsed_mass.at(key), w, 1e-15);

  for (std::size_t n = 5; n < data.size(); ++n) {
    const V a = explicit_bettor.next_density().heights();
    const V b = collapsed.next_density().heights();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    const double p = tx.push(data[n], taus.next()).p;
    explicit_bettor.observe(p);
    collapsed.observe(p);
  }
}

TEST(CollapsedBayesKelly, PermutedPrefixesShareWeightUnderIid) {
  // rho = 0 makes the changepoint model iid: prefixes with equal one-count
  // and equal last symbol contribute identical collapsed mass.
  const auto model = changepoint_model(0.3, 0.9, 0.0);
  const Alphabet bin(2);
  HypothesisSet sigma;
  for (int n = 0; n < 5; ++n) sigma = extend(sigma, *model);
  std::map<std::pair<std::size_t, Symbol>, std::vector<double>> groups;
  for (std::size_t i = 0; i < sigma.entries.size(); ++i) {
    std::size_t ones = 0;
    for (Symbol z : sigma.entries[i].prefix) ones += static_cast<std::size_t>(z);
    groups[{ones, sigma.entries[i].prefix.back()}].push_back(sigma.absolute_weight(i));
  }
  for (const auto& [key, ws] : groups) {
    for (double w : ws) EXPECT_NEAR(w, ws.front(), 1e-15);
  }
}

TEST(CollapsedBayesKelly, StateStaysPolynomial) {
  CollapsedBayesKelly b(changepoint_model(0.5, 0.9, 0.2), kIdentity, Alphabet(2));
  TauSource taus(RandomStream(2));
  ConformalTransducer tx(kIdentity);
  RandomStream data(2, Substream::kData, 0);
  for (std::size_t n = 1; n <= 200; ++n) {
    b.next_density();
    EXPECT_LE(b.entries().size(), 4 * (n + 1));
    b.observe(tx.push(data.uniform() < 0.7 ? 1.0 : 0.0, taus.next()).p);
  }
}

}  // namespace
}  // namespace ctm
