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

#include "ctm/bayes_kelly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctm/error.hpp"

namespace ctm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Spreads `weight` uniformly over grid intervals [n_star, n_upper) of an
// n-cell density: height n / k on each.
void add_tie_interval(std::vector<double>& heights, const TieCounts& c, double weight) {
  const double n = static_cast<double>(heights.size());
  const double h = weight * n / static_cast<double>(c.ties());
  for (std::size_t i = c.n_star; i < c.n_upper; ++i) heights[i] += h;
}

PiecewiseDensity finish_density(std::vector<double> heights) {
  const double n = static_cast<double>(heights.size());
  for (double& h : heights) h = std::min(h, n);
  return PiecewiseDensity(std::move(heights));
}

}  // namespace

double HypothesisSet::absolute_weight(std::size_t i) const {
  return std::exp(entries.at(i).log_weight + log_scale);
}

std::vector<double> HypothesisSet::normalized_weights() const {
  if (entries.empty()) throw InvalidArgument("hypothesis set is empty");
  double top = kNegInf;
  for (const auto& h : entries) top = std::max(top, h.log_weight);
  if (!std::isfinite(top)) throw InvalidArgument("hypothesis set has zero total weight");
  std::vector<double> w(entries.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    w[i] = std::exp(entries[i].log_weight - top);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

void HypothesisSet::renormalize() {
  double top = kNegInf;
  for (const auto& h : entries) top = std::max(top, h.log_weight);
  if (!std::isfinite(top)) return;
  for (auto& h : entries) h.log_weight -= top;
  log_scale += top;
}

TieCounts candidate_counts(std::span<const Symbol> prefix, const ConformityMeasure& measure,
                           const Alphabet& alphabet) {
  const std::vector<double> window = alphabet.to_values(prefix);
  return tie_counts(score_window(measure, window));
}

HypothesisSet extend(const HypothesisSet& sigma, const AlternativeModel& model) {
  HypothesisSet out;
  out.step = sigma.step + 1;
  out.log_scale = sigma.log_scale;
  out.entries.clear();
  const std::size_t m = model.alphabet_size();
  out.entries.reserve(sigma.entries.size() * m);
  for (const auto& parent : sigma.entries) {
    const std::vector<double> probs = model.conditional(parent.prefix);
    if (probs.size() != m) throw Error("model returned a conditional of the wrong size");
    for (std::size_t z = 0; z < m; ++z) {
      if (probs[z] <= 0.0) continue;
      Hypothesis child;
      child.prefix.reserve(parent.prefix.size() + 1);
      child.prefix = parent.prefix;
      child.prefix.push_back(static_cast<Symbol>(z));
      child.log_weight = parent.log_weight + std::log(probs[z]);
      out.entries.push_back(std::move(child));
    }
  }
  return out;
}

PiecewiseDensity predictive_density(const HypothesisSet& sigma, const ConformityMeasure& measure,
                                    const Alphabet& alphabet) {
  if (sigma.step == 0) throw InvalidArgument("predictive_density: hypothesis set not extended");
  const std::vector<double> w = sigma.normalized_weights();
  std::vector<double> heights(sigma.step, 0.0);
  for (std::size_t i = 0; i < sigma.entries.size(); ++i) {
    const auto& prefix = sigma.entries[i].prefix;
    if (prefix.size() != sigma.step) throw Error("hypothesis prefix length disagrees with step");
    add_tie_interval(heights, candidate_counts(prefix, measure, alphabet), w[i]);
  }
  return finish_density(std::move(heights));
}

HypothesisSet condition(const HypothesisSet& sigma, double p, const ConformityMeasure& measure,
                        const Alphabet& alphabet) {
  if (sigma.step == 0) throw InvalidArgument("condition: hypothesis set not extended");
  const std::size_t cell = grid_index(sigma.step, p);
  HypothesisSet out;
  out.step = sigma.step;
  out.log_scale = sigma.log_scale;
  out.entries.clear();
  for (const auto& h : sigma.entries) {
    const TieCounts c = candidate_counts(h.prefix, measure, alphabet);
    if (cell < c.n_star || cell >= c.n_upper) continue;
    Hypothesis kept = h;
    kept.log_weight -= std::log(static_cast<double>(c.ties()));
    out.entries.push_back(std::move(kept));
  }
  out.renormalize();
  return out;
}

BayesKellyBettor::BayesKellyBettor(ModelPtr model, ConformityMeasure measure, Alphabet alphabet)
    : model_(std::move(model)), measure_(measure), alphabet_(std::move(alphabet)) {
  if (!model_) throw InvalidArgument("Bayes-Kelly bettor needs a model");
  if (model_->alphabet_size() != alphabet_.size()) {
    throw InvalidArgument("model and alphabet sizes differ");
  }
}

const PiecewiseDensity& BayesKellyBettor::next_density() {
  if (pending_) return *pending_;
  if (exhausted_) {
    ++sigma_.step;
    pending_ = PiecewiseDensity::uniform();
    return *pending_;
  }
  sigma_ = extend(sigma_, *model_);
  if (sigma_.empty()) throw Error("alternative model put zero mass on every extension");
  pending_ = predictive_density(sigma_, measure_, alphabet_);
  return *pending_;
}

void BayesKellyBettor::observe(double p) {
  if (!pending_) throw InvalidArgument("observe called before next_density");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0,1]");
  pending_.reset();
  if (exhausted_) return;
  sigma_ = condition(sigma_, p, measure_, alphabet_);
  if (sigma_.empty()) exhausted_ = true;
}

std::unique_ptr<BettingMartingale> BayesKellyBettor::clone() const {
  return std::make_unique<BayesKellyBettor>(*this);
}

CollapsedBayesKelly::CollapsedBayesKelly(ModelPtr model, ConformityMeasure measure,
                                         Alphabet alphabet)
    : model_(std::move(model)), chain_(nullptr) {
  if (!model_) throw InvalidArgument("Bayes-Kelly bettor needs a model");
  if (measure != ConformityMeasure::identity()) {
    throw InvalidArgument("collapsed Bayes-Kelly requires the identity conformity measure");
  }
  if (!alphabet.is_binary_01()) {
    throw InvalidArgument("collapsed Bayes-Kelly requires the binary alphabet {0, 1}");
  }
  chain_ = model_->latent_chain();
  if (chain_ == nullptr) {
    throw InvalidArgument("collapsed Bayes-Kelly requires a latent-chain alternative (" +
                          model_->describe() + ")");
  }
  for (std::size_t s = 0; s < chain_->states(); ++s) {
    if (chain_->initial[s] > 0.0) entries_.push_back({0, -1, s, chain_->initial[s]});
  }
}

CollapsedBayesKelly CollapsedBayesKelly::collapse(const BayesKellyBettor& bettor) {
  CollapsedBayesKelly out(bettor.model(), bettor.measure(), bettor.alphabet());
  const auto* latent = dynamic_cast<const LatentChainModel*>(bettor.model().get());
  if (latent == nullptr) throw InvalidArgument("collapse requires a LatentChainModel");
  const HypothesisSet& sigma = bettor.hypotheses();
  out.step_ = sigma.step;
  out.exhausted_ = bettor.exhausted();
  if (sigma.step == 0) return out;

  const std::size_t states = out.chain_->states();
  const std::size_t n = sigma.step;
  std::vector<double> dense((n + 1) * 2 * states, 0.0);
  for (const auto& h : sigma.entries) {
    std::size_t ones = 0;
    for (Symbol z : h.prefix) ones += static_cast<std::size_t>(z);
    const std::vector<double> post = latent->state_posterior(h.prefix);
    const double w = std::exp(h.log_weight);
    for (std::size_t s = 0; s < states; ++s) {
      dense[(ones * 2 + static_cast<std::size_t>(h.prefix.back())) * states + s] += w * post[s];
    }
  }
  out.entries_.clear();
  for (std::size_t idx = 0; idx < dense.size(); ++idx) {
    if (dense[idx] <= 0.0) continue;
    const std::size_t s = idx % states;
    const std::size_t key = idx / states;
    out.entries_.push_back({key / 2, static_cast<Symbol>(key % 2), s, dense[idx]});
  }
  out.log_scale_ = sigma.log_scale;
  return out;
}

void CollapsedBayesKelly::extend() {
  const std::size_t states = chain_->states();
  const std::size_t n = step_ + 1;
  // Dense accumulator keyed by (ones, last symbol, state) at step n.
  std::vector<double> dense((n + 1) * 2 * states, 0.0);
  for (const Entry& e : entries_) {
    for (std::size_t next = 0; next < states; ++next) {
      const double move = step_ == 0 ? (next == e.state ? 1.0 : 0.0)
                                     : chain_->transition[e.state][next];
      if (move <= 0.0) continue;
      for (Symbol z = 0; z <= 1; ++z) {
        const double emit = chain_->emit(next, z, e.last);
        if (emit <= 0.0) continue;
        const std::size_t ones = e.ones + static_cast<std::size_t>(z);
        dense[(ones * 2 + static_cast<std::size_t>(z)) * states + next] += e.weight * move * emit;
      }
    }
  }
  entries_.clear();
  for (std::size_t idx = 0; idx < dense.size(); ++idx) {
    if (dense[idx] <= 0.0) continue;
    const std::size_t key = idx / states;
    entries_.push_back({key / 2, static_cast<Symbol>(key % 2), idx % states, dense[idx]});
  }
  step_ = n;
}

namespace {

// Tie interval of a binary identity-measure candidate at step n.
TieCounts binary_counts(std::size_t n, std::size_t ones, Symbol last) {
  if (last == 1) return {n - ones, n};
  return {0, n - ones};
}

}  // namespace

const PiecewiseDensity& CollapsedBayesKelly::next_density() {
  if (pending_) return *pending_;
  if (exhausted_) {
    ++step_;
    pending_ = PiecewiseDensity::uniform();
    return *pending_;
  }
  extend();
  double total = 0.0;
  for (const Entry& e : entries_) total += e.weight;
  if (!(total > 0.0)) throw Error("alternative model put zero mass on every extension");
  std::vector<double> heights(step_, 0.0);
  for (const Entry& e : entries_) {
    add_tie_interval(heights, binary_counts(step_, e.ones, e.last), e.weight / total);
  }
  pending_ = finish_density(std::move(heights));
  return *pending_;
}

void CollapsedBayesKelly::observe(double p) {
  if (!pending_) throw InvalidArgument("observe called before next_density");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0,1]");
  pending_.reset();
  if (exhausted_) return;
  const std::size_t cell = grid_index(step_, p);
  std::vector<Entry> kept;
  double top = 0.0;
  for (const Entry& e : entries_) {
    const TieCounts c = binary_counts(step_, e.ones, e.last);
    if (cell < c.n_star || cell >= c.n_upper) continue;
    Entry k = e;
    k.weight /= static_cast<double>(c.ties());
    top = std::max(top, k.weight);
    kept.push_back(k);
  }
  entries_ = std::move(kept);
  if (entries_.empty()) {
    exhausted_ = true;
    return;
  }
  for (Entry& e : entries_) e.weight /= top;
  log_scale_ += std::log(top);
}

std::unique_ptr<BettingMartingale> CollapsedBayesKelly::clone() const {
  return std::make_unique<CollapsedBayesKelly>(*this);
}

std::unique_ptr<BettingMartingale> bayes_kelly_bettor(ModelPtr model, ConformityMeasure measure,
                                                      Alphabet alphabet, bool allow_collapsed) {
  if (allow_collapsed && model && model->latent_chain() != nullptr &&
      measure == ConformityMeasure::identity() && alphabet.is_binary_01()) {
    return std::make_unique<CollapsedBayesKelly>(std::move(model), measure, std::move(alphabet));
  }
  return std::make_unique<BayesKellyBettor>(std::move(model), measure, std::move(alphabet));
}

}  // namespace ctm
