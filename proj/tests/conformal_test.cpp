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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ctm/bayes_kelly.hpp"
#include "ctm/betting.hpp"
#include "ctm/conformal.hpp"
#include "ctm/error.hpp"
#include "ctm/martingale.hpp"
#include "ctm/rng.hpp"
#include "gtest/gtest.h"

namespace ctm {
namespace {

using V = std::vector<double>;

TEST(ScoreWindow, IdentityReturnsValues) {
  EXPECT_EQ(score_window(ConformityMeasure::identity(), V{0, 1, 1}), (V{0, 1, 1}));
  EXPECT_EQ(score_window(ConformityMeasure::identity(), V{4.25}), (V{4.25}));
}

TEST(ScoreWindow, NegDistanceToMean) {
  EXPECT_EQ(score_window(ConformityMeasure::neg_distance_to_mean(), V{1.0, 3.0}), (V{-1.0, -1.0}));
}

TEST(ScoreWindow, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(score_window(ConformityMeasure::identity(), V{}), InvalidArgument);
  EXPECT_THROW(score_window(ConformityMeasure::identity(), V{1.0, NAN}), InvalidArgument);
  EXPECT_THROW(score_window(ConformityMeasure::neg_distance_to_mean(), V{1e308, 1e308}),
               InvalidArgument);
}

TEST(ScoreWindow, RecomputesAgainstGrownBag) {
  const auto m = ConformityMeasure::neg_distance_to_mean();
  const V first = score_window(m, V{0.0, 2.0});
  const V second = score_window(m, V{0.0, 2.0, 10.0});
  EXPECT_EQ(first[0], -1.0);
  EXPECT_EQ(second[0], -4.0);
}

// Permuting the bag must leave every score bit-identical, even where a
// naive left-to-right mean would round differently.
TEST(ScoreWindow, NegDistanceIsBagSymmetricBitForBit) {
  RandomStream rng(7);
  const auto m = ConformityMeasure::neg_distance_to_mean();
  for (int trial = 0; trial < 200; ++trial) {
    V bag(2 + trial % 9);
    for (double& x : bag) x = (rng.uniform() - 0.5) * std::pow(10.0, trial % 7);
    const double z = bag[0];
    const double base = m.score(bag, z);
    V shuffled = bag;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.next_u64() % i]);
    }
    EXPECT_EQ(m.score(shuffled, z), base);
  }
}

TEST(TieCounts, Examples) {
  const TieCounts a = tie_counts(V{0, 1, 1});
  EXPECT_EQ(a.n_star, 1u);
  EXPECT_EQ(a.n_upper, 3u);
  const TieCounts b = tie_counts(V{42.0});
  EXPECT_EQ(b.n_star, 0u);
  EXPECT_EQ(b.n_upper, 1u);
  const TieCounts c = tie_counts(V{3.1, 2.0, 5.5});
  EXPECT_EQ(c.n_star, 2u);
  EXPECT_EQ(c.n_upper, 3u);
  EXPECT_EQ(c.ties(), 1u);
}

TEST(PValueStep, Examples) {
  EXPECT_EQ(pvalue_step(V{9.0}, 0.375).p, 0.375);
  EXPECT_DOUBLE_EQ(pvalue_step(V{0, 1, 1}, 0.5).p, 2.0 / 3.0);
  const PValueRecord r = pvalue_step(V{3.1, 2.0, 5.5}, 0.0);
  EXPECT_DOUBLE_EQ(r.p, 2.0 / 3.0);
  EXPECT_EQ(r.n, 3u);
  EXPECT_EQ(r.n_star, 2u);
  EXPECT_EQ(r.n_upper, 3u);
}

TEST(PValueStep, RejectsTauOutsideUnitInterval) {
  EXPECT_THROW(pvalue_step(V{1.0}, -0.1), InvalidArgument);
  EXPECT_THROW(pvalue_step(V{1.0}, 1.5), InvalidArgument);
  EXPECT_THROW(pvalue_step(V{1.0}, NAN), InvalidArgument);
}

// Property: p lies in its tie interval and permuting the earlier
// observations changes nothing.
TEST(PValueStep, IntervalAndPermutationInvariance) {
  RandomStream rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto m = trial % 2 ? ConformityMeasure::identity()
                             : ConformityMeasure::neg_distance_to_mean();
    V window(1 + rng.next_u64() % 12);
    for (double& x : window) x = static_cast<double>(rng.next_u64() % 4);
    const double tau = rng.uniform();
    const PValueRecord r = pvalue_step(score_window(m, window), tau);
    const double n = static_cast<double>(r.n);
    EXPECT_LT(r.n_star, r.n_upper);
    EXPECT_LE(r.n_upper, r.n);
    EXPECT_GE(r.p, r.n_star / n);
    EXPECT_LE(r.p, r.n_upper / n);

    V permuted = window;
    std::reverse(permuted.begin(), permuted.end() - 1);
    const PValueRecord q = pvalue_step(score_window(m, permuted), tau);
    EXPECT_EQ(q.n_star, r.n_star);
    EXPECT_EQ(q.n_upper, r.n_upper);
    EXPECT_EQ(q.p, r.p);
  }
}

TEST(Alphabet, ChecksCodes) {
  const Alphabet a(3);
  EXPECT_NO_THROW(a.check(2));
  EXPECT_THROW(a.check(3), InvalidArgument);
  EXPECT_THROW(a.check(-1), InvalidArgument);
  EXPECT_TRUE(Alphabet(2).is_binary_01());
  EXPECT_FALSE(Alphabet(V{0.0, 2.0}).is_binary_01());
  EXPECT_THROW(Alphabet(V{0.0, INFINITY}), InvalidArgument);
}

TEST(ReadObservations, ParsesIntegersAndDecimals) {
  std::istringstream in("1\n 0.5 \n\n-3e2\n");
  EXPECT_EQ(read_observations(in), (V{1.0, 0.5, -300.0}));
  std::istringstream bad("1\nabc\n");
  EXPECT_THROW(read_observations(bad), InvalidArgument);
  std::istringstream inf("inf\n");
  EXPECT_THROW(read_observations(inf), InvalidArgument);
}

TEST(TauSource, SeededStreamsRepeat) {
  TauSource a(RandomStream(5, Substream::kTau, 3));
  TauSource b(RandomStream(5, Substream::kTau, 3));
  TauSource c(RandomStream(5, Substream::kTau, 4));
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(TauSource::constant(1.5), InvalidArgument);
}

TEST(CtmRun, HorizonZeroIsEmpty) {
  auto bettor = constant_bettor();
  TauSource taus(RandomStream(1));
  EXPECT_TRUE(ctm_run(V{}, ConformityMeasure::identity(), *bettor, taus, 0).empty());
}

TEST(CtmRun, ConstantBettorKeepsUnitWealth) {
  auto bettor = constant_bettor();
  TauSource taus(RandomStream(1));
  const V data = {0.3, -2.0, 5.0, 5.0, 1.0, 0.0};
  const auto traj = ctm_run(data, ConformityMeasure::neg_distance_to_mean(), *bettor, taus, 6);
  ASSERT_EQ(traj.size(), 6u);
  for (const auto& s : traj) {
    EXPECT_EQ(s.factor, 1.0);
    EXPECT_EQ(s.wealth.linear(), 1.0);
  }
}

TEST(CtmRun, ShortStreamNamesShortfall) {
  auto bettor = constant_bettor();
  TauSource taus(RandomStream(1));
  try {
    ctm_run(V{1, 2}, ConformityMeasure::identity(), *bettor, taus, 5);
    FAIL() << "expected an error";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("short by 3"), std::string::npos);
  }
}

// Point-mass Q on the observed sequence: one candidate per step, so the
// factor is n/k whenever p lands in its interval.
TEST(CtmRun, PointMassBayesKellyMatchesHandRecursion) {
  const std::vector<Symbol> seq = {1, 0, 0, 1, 1, 0, 1, 1};
  const V data(seq.begin(), seq.end());
  auto bettor = bayes_kelly_bettor(point_mass_model(seq, 2), ConformityMeasure::identity(),
                                   Alphabet(2), false);
  TauSource taus(RandomStream(99));
  const auto traj = ctm_run(data, ConformityMeasure::identity(), *bettor, taus, seq.size());
  double expected = 1.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& r = traj[i].record;
    const double hand = static_cast<double>(r.n) / static_cast<double>(r.n_upper - r.n_star);
    EXPECT_DOUBLE_EQ(traj[i].factor, hand) << "step " << i + 1;
    expected *= hand;
    EXPECT_NEAR(traj[i].wealth.linear(), expected, 1e-12 * expected);
  }
}

TEST(CtmRun, DeterministicForFixedSeed) {
  auto run = [] {
    auto bettor = bayes_kelly_bettor(changepoint_model(0.5, 0.9, 0.2),
                                     ConformityMeasure::identity(), Alphabet(2));
    TauSource taus(RandomStream(3, Substream::kTau, 0));
    const V data = {0, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1};
    return ctm_run(data, ConformityMeasure::identity(), *bettor, taus, data.size());
  };
  const auto a = run();
  const auto b = run();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].record.p, b[i].record.p);
    EXPECT_EQ(a[i].factor, b[i].factor);
    EXPECT_EQ(a[i].wealth.log(), b[i].wealth.log());
  }
}

TEST(ConformalTestMartingale, StepMatchesCtmRun) {
  const V data = {0, 1, 1, 0, 1, 1, 1};
  auto b1 = bayes_kelly_bettor(markov_model(0.2, 0.3, 0.5), ConformityMeasure::identity(),
                               Alphabet(2));
  TauSource t1(RandomStream(8));
  const auto traj = ctm_run(data, ConformityMeasure::identity(), *b1, t1, data.size());

  ConformalTestMartingale ctm(ConformityMeasure::identity(),
                              bayes_kelly_bettor(markov_model(0.2, 0.3, 0.5),
                                                 ConformityMeasure::identity(), Alphabet(2)));
  TauSource t2(RandomStream(8));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const TrajectoryStep s = ctm.step(data[i], t2.next());
    EXPECT_EQ(s.factor, traj[i].factor);
    EXPECT_EQ(s.wealth.log(), traj[i].wealth.log());
  }
  ConformalTestMartingale copy = ctm;
  EXPECT_EQ(copy.wealth().log(), ctm.wealth().log());
  EXPECT_EQ(copy.step(1.0, 0.25).factor, ctm.step(1.0, 0.25).factor);
}

}  // namespace
}  // namespace ctm
