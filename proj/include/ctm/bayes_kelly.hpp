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
#include <vector>

#include "ctm/alternative.hpp"
#include "ctm/betting.hpp"
#include "ctm/conformal.hpp"

namespace ctm {

// One candidate prefix of the observation sequence with its log weight
// relative to the owning set's scale.
struct Hypothesis {
  std::vector<Symbol> prefix;
  double log_weight = 0.0;
};

// Weighted candidate prefixes compatible with the p-values seen so far. The
// absolute weight of entry i is exp(entries[i].log_weight + log_scale), which
// equals Q(prefix) times the product of 1/k over the conditioned steps.
struct HypothesisSet {
  std::size_t step = 0;
  std::vector<Hypothesis> entries{Hypothesis{}};
  double log_scale = 0.0;

  bool empty() const { return entries.empty(); }
  double absolute_weight(std::size_t i) const;
  // Weights scaled to sum to one.
  std::vector<double> normalized_weights() const;
  // Shifts log weights so the largest is zero, moving the shift into log_scale.
  void renormalize();
};

// Tie counts of the last element of a candidate prefix, scored as a window.
TieCounts candidate_counts(std::span<const Symbol> prefix, const ConformityMeasure& measure,
                           const Alphabet& alphabet);

// Extends every prefix by every symbol, weighting by Q(z | prefix). Children
// of zero probability are dropped.
HypothesisSet extend(const HypothesisSet& sigma, const AlternativeModel& model);

// Density of the next p-value under the posterior on sigma: each candidate
// spreads its normalized weight uniformly over its own tie interval.
PiecewiseDensity predictive_density(const HypothesisSet& sigma, const ConformityMeasure& measure,
                                    const Alphabet& alphabet);

// Drops candidates whose tie interval does not contain the grid interval of
// p and divides survivors by their tie count. May return an empty set.
HypothesisSet condition(const HypothesisSet& sigma, double p, const ConformityMeasure& measure,
                        const Alphabet& alphabet);

// The Bayes-Kelly betting martingale with an explicit hypothesis set. Cost
// grows like alphabet_size^n; meant for short horizons.
class BayesKellyBettor final : public BettingMartingale {
 public:
  BayesKellyBettor(ModelPtr model, ConformityMeasure measure, Alphabet alphabet);

  const PiecewiseDensity& next_density() override;
  void observe(double p) override;
  std::unique_ptr<BettingMartingale> clone() const override;

  const HypothesisSet& hypotheses() const { return sigma_; }
  std::size_t step() const { return sigma_.step; }
  // True once the realized p-value fell outside every candidate.
  bool exhausted() const { return exhausted_; }

  const ModelPtr& model() const { return model_; }
  const ConformityMeasure& measure() const { return measure_; }
  const Alphabet& alphabet() const { return alphabet_; }

 private:
  ModelPtr model_;
  ConformityMeasure measure_;
  Alphabet alphabet_;
  HypothesisSet sigma_;
  std::optional<PiecewiseDensity> pending_;
  bool exhausted_ = false;
};

// Bayes-Kelly for the identity measure on the binary alphabet with a latent
// chain alternative. A candidate's tie interval depends only on its count of
// ones and its last symbol, and the chain's next-symbol law only on the last
// symbol and latent state, so the hypothesis set collapses onto
// (ones, last, state) keys: O(n) entries instead of 2^n.
class CollapsedBayesKelly final : public BettingMartingale {
 public:
  struct Entry {
    std::size_t ones = 0;
    Symbol last = -1;
    std::size_t state = 0;
    double weight = 0.0;  // relative to log_scale
  };

  // Throws InvalidArgument unless measure is identity, the alphabet is {0,1}
  // and the model exposes a latent chain.
  CollapsedBayesKelly(ModelPtr model, ConformityMeasure measure, Alphabet alphabet);

  // Collapses an explicit bettor that is between steps.
  static CollapsedBayesKelly collapse(const BayesKellyBettor& bettor);

  const PiecewiseDensity& next_density() override;
  void observe(double p) override;
  std::unique_ptr<BettingMartingale> clone() const override;

  std::size_t step() const { return step_; }
  bool exhausted() const { return exhausted_; }
  const std::vector<Entry>& entries() const { return entries_; }
  double log_scale() const { return log_scale_; }

 private:
  void extend();

  ModelPtr model_;
  const LatentChain* chain_;
  std::size_t step_ = 0;
  std::vector<Entry> entries_;
  double log_scale_ = 0.0;
  std::optional<PiecewiseDensity> pending_;
  bool exhausted_ = false;
};

// Picks the collapsed bettor when it applies and the explicit one otherwise.
std::unique_ptr<BettingMartingale> bayes_kelly_bettor(ModelPtr model, ConformityMeasure measure,
                                                      Alphabet alphabet,
                                                      bool allow_collapsed = true);

}  // namespace ctm
