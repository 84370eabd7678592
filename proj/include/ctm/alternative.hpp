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

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ctm/conformal.hpp"

namespace ctm {

// Binary sequential law driven by a finite latent chain. Before symbol n the
// chain is in state s_n; z_n = 1 with probability emit_one[s_n][last + 1],
// where last is z_{n-1} or -1 at the first step. s_1 ~ initial and
// s_{n+1} ~ transition[s_n].
struct LatentChain {
  std::vector<double> initial;
  std::vector<std::vector<double>> transition;
  std::vector<std::array<double, 3>> emit_one;

  std::size_t states() const { return initial.size(); }
  double emit(std::size_t state, Symbol z, Symbol last) const;
  // Throws InvalidArgument on malformed tables.
  void validate() const;
};

// An alternative hypothesis Q over a finite alphabet, given by its
// next-symbol conditionals. Defined for every prefix length; the horizon is a
// property of the run, not of the model.
class AlternativeModel {
 public:
  virtual ~AlternativeModel() = default;

  virtual std::size_t alphabet_size() const = 0;
  // Probability vector of the next symbol given the prefix.
  virtual std::vector<double> conditional(std::span<const Symbol> prefix) const = 0;
  virtual std::string describe() const = 0;

  // Non-null when the model is a binary latent chain (enables the collapsed
  // Bayes-Kelly path).
  virtual const LatentChain* latent_chain() const { return nullptr; }

  // log Q(sequence); -inf if some conditional is zero.
  double log_probability(std::span<const Symbol> sequence) const;
};

using ModelPtr = std::shared_ptr<const AlternativeModel>;

class LatentChainModel final : public AlternativeModel {
 public:
  LatentChainModel(LatentChain chain, std::string description);

  std::size_t alphabet_size() const override { return 2; }
  std::vector<double> conditional(std::span<const Symbol> prefix) const override;
  std::string describe() const override { return description_; }
  const LatentChain* latent_chain() const override { return &chain_; }

  // Posterior of the latent state s_n given z_1..z_n (n = prefix length, at
  // least 1). Used when collapsing an explicit hypothesis set.
  std::vector<double> state_posterior(std::span<const Symbol> prefix) const;

 private:
  // Predictive belief over s_{n+1} given z_1..z_n.
  std::vector<double> filter(std::span<const Symbol> prefix) const;

  LatentChain chain_;
  std::string description_;
};

// Alphabet-generic iid law.
class IidModel final : public AlternativeModel {
 public:
  explicit IidModel(std::vector<double> probs);

  std::size_t alphabet_size() const override { return probs_.size(); }
  std::vector<double> conditional(std::span<const Symbol> prefix) const override;
  std::string describe() const override;

 private:
  std::vector<double> probs_;
};

// First-order Markov table over any alphabet: z_1 ~ initial,
// z_n ~ transition[z_{n-1}].
class MarkovTableModel final : public AlternativeModel {
 public:
  MarkovTableModel(std::vector<double> initial, std::vector<std::vector<double>> transition);

  std::size_t alphabet_size() const override { return initial_.size(); }
  std::vector<double> conditional(std::span<const Symbol> prefix) const override;
  std::string describe() const override { return "markov_table"; }

 private:
  std::vector<double> initial_;
  std::vector<std::vector<double>> transition_;
};

// All mass on one sequence; past its end the law continues iid uniform.
class PointMassModel final : public AlternativeModel {
 public:
  PointMassModel(std::vector<Symbol> sequence, std::size_t alphabet_size);

  std::size_t alphabet_size() const override { return alphabet_size_; }
  std::vector<double> conditional(std::span<const Symbol> prefix) const override;
  std::string describe() const override { return "point_mass"; }

 private:
  std::vector<Symbol> sequence_;
  std::size_t alphabet_size_;
};

// Binary changepoint: iid Bernoulli(pi0) before the change, Bernoulli(pi1)
// after. The change has happened by step 1 with probability rho and arrives
// before each later step with hazard rho.
ModelPtr changepoint_model(double pi0, double pi1, double rho);

// Binary first-order chain with P(1|0) = p01, P(0|1) = p10, P(z_1 = 1) = init1.
ModelPtr markov_model(double p01, double p10, double init1);

// Binary iid Bernoulli(theta) in latent-chain form.
ModelPtr bernoulli_model(double theta);

ModelPtr iid_model(std::vector<double> probs);
ModelPtr markov_table_model(std::vector<double> initial,
                            std::vector<std::vector<double>> transition);
ModelPtr point_mass_model(std::vector<Symbol> sequence, std::size_t alphabet_size);

// Checks that v is a probability vector within 1e-12.
void check_probability_vector(std::span<const double> v, const char* what);

}  // namespace ctm
