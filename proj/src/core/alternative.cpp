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

#include "ctm/alternative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ctm/error.hpp"

namespace ctm {

namespace {

void check_unit(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw InvalidArgument(std::string(name) + " must lie in [0,1]");
  }
}

std::string format_params(const char* head, std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  os.precision(17);
  os << head << '(';
  bool first = true;
  for (const auto& [k, v] : kv) {
    if (!first) os << ", ";
    os << k << '=' << v;
    first = false;
  }
  os << ')';
  return os.str();
}

}  // namespace

void check_probability_vector(std::span<const double> v, const char* what) {
  if (v.empty()) throw InvalidArgument(std::string(what) + ": empty probability vector");
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) {
      throw InvalidArgument(std::string(what) + ": negative or non-finite probability");
    }
    sum += x;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw InvalidArgument(std::string(what) + ": probabilities sum to " + std::to_string(sum));
  }
}

double AlternativeModel::log_probability(std::span<const Symbol> sequence) const {
  double total = 0.0;
  for (std::size_t n = 0; n < sequence.size(); ++n) {
    const auto probs = conditional(sequence.first(n));
    const double q = probs.at(static_cast<std::size_t>(sequence[n]));
    if (q == 0.0) return -std::numeric_limits<double>::infinity();
    total += std::log(q);
  }
  return total;
}

double LatentChain::emit(std::size_t state, Symbol z, Symbol last) const {
  const double one = emit_one[state][static_cast<std::size_t>(last + 1)];
  return z == 1 ? one : 1.0 - one;
}

void LatentChain::validate() const {
  const std::size_t s = initial.size();
  check_probability_vector(initial, "latent initial law");
  if (transition.size() != s || emit_one.size() != s) {
    throw InvalidArgument("latent chain tables disagree on the number of states");
  }
  for (const auto& row : transition) {
    if (row.size() != s) throw InvalidArgument("latent transition matrix is not square");
    check_probability_vector(row, "latent transition row");
  }
  for (const auto& e : emit_one) {
    for (double x : e) check_unit(x, "emission probability");
  }
}

LatentChainModel::LatentChainModel(LatentChain chain, std::string description)
    : chain_(std::move(chain)), description_(std::move(description)) {
  chain_.validate();
}

std::vector<double> LatentChainModel::filter(std::span<const Symbol> prefix) const {
  const std::size_t s = chain_.states();
  std::vector<double> belief = chain_.initial;
  std::vector<double> next(s);
  Symbol last = -1;
  for (Symbol z : prefix) {
    if (z != 0 && z != 1) throw InvalidArgument("binary model given a non-binary symbol");
    double norm = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
      belief[i] *= chain_.emit(i, z, last);
      norm += belief[i];
    }
    // A zero-probability prefix keeps its prior belief; its weight is zero anyway.
    if (norm > 0.0) {
      for (double& b : belief) b /= norm;
    }
    for (std::size_t j = 0; j < s; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < s; ++i) acc += belief[i] * chain_.transition[i][j];
      next[j] = acc;
    }
    belief.swap(next);
    last = z;
  }
  return belief;
}

std::vector<double> LatentChainModel::conditional(std::span<const Symbol> prefix) const {
  const std::vector<double> belief = filter(prefix);
  const Symbol last = prefix.empty() ? -1 : prefix.back();
  double one = 0.0;
  for (std::size_t i = 0; i < chain_.states(); ++i) one += belief[i] * chain_.emit(i, 1, last);
  one = std::min(1.0, std::max(0.0, one));
  return {1.0 - one, one};
}

std::vector<double> LatentChainModel::state_posterior(std::span<const Symbol> prefix) const {
  if (prefix.empty()) throw InvalidArgument("state_posterior needs a nonempty prefix");
  // Predictive belief for s_n, then condition on z_n.
  std::vector<double> belief = filter(prefix.first(prefix.size() - 1));
  const Symbol last = prefix.size() >= 2 ? prefix[prefix.size() - 2] : -1;
  double norm = 0.0;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    belief[i] *= chain_.emit(i, prefix.back(), last);
    norm += belief[i];
  }
  if (norm > 0.0) {
    for (double& b : belief) b /= norm;
  }
  return belief;
}

IidModel::IidModel(std::vector<double> probs) : probs_(std::move(probs)) {
  check_probability_vector(probs_, "iid law");
}

std::vector<double> IidModel::conditional(std::span<const Symbol>) const { return probs_; }

std::string IidModel::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "iid(";
  for (std::size_t i = 0; i < probs_.size(); ++i) os << (i ? ", " : "") << probs_[i];
  os << ')';
  return os.str();
}

MarkovTableModel::MarkovTableModel(std::vector<double> initial,
                                   std::vector<std::vector<double>> transition)
    : initial_(std::move(initial)), transition_(std::move(transition)) {
  check_probability_vector(initial_, "markov table initial law");
  if (transition_.size() != initial_.size()) {
    throw InvalidArgument("markov table needs one transition row per symbol");
  }
  for (const auto& row : transition_) {
    if (row.size() != initial_.size()) throw InvalidArgument("markov table is not square");
    check_probability_vector(row, "markov table row");
  }
}

std::vector<double> MarkovTableModel::conditional(std::span<const Symbol> prefix) const {
  if (prefix.empty()) return initial_;
  return transition_.at(static_cast<std::size_t>(prefix.back()));
}

PointMassModel::PointMassModel(std::vector<Symbol> sequence, std::size_t alphabet_size)
    : sequence_(std::move(sequence)), alphabet_size_(alphabet_size) {
  if (alphabet_size_ == 0) throw InvalidArgument("alphabet must be nonempty");
  for (Symbol s : sequence_) {
    if (s < 0 || static_cast<std::size_t>(s) >= alphabet_size_) {
      throw InvalidArgument("point-mass sequence has a symbol outside the alphabet");
    }
  }
}

std::vector<double> PointMassModel::conditional(std::span<const Symbol> prefix) const {
  if (prefix.size() >= sequence_.size()) {
    return std::vector<double>(alphabet_size_, 1.0 / static_cast<double>(alphabet_size_));
  }
  std::vector<double> out(alphabet_size_, 0.0);
  out[static_cast<std::size_t>(sequence_[prefix.size()])] = 1.0;
  return out;
}

ModelPtr changepoint_model(double pi0, double pi1, double rho) {
  check_unit(pi0, "pi0");
  check_unit(pi1, "pi1");
  check_unit(rho, "rho");
  LatentChain chain;
  chain.initial = {1.0 - rho, rho};
  chain.transition = {{1.0 - rho, rho}, {0.0, 1.0}};
  chain.emit_one = {{pi0, pi0, pi0}, {pi1, pi1, pi1}};
  return std::make_shared<LatentChainModel>(
      std::move(chain), format_params("changepoint", {{"pi0", pi0}, {"pi1", pi1}, {"rho", rho}}));
}

ModelPtr markov_model(double p01, double p10, double init1) {
  check_unit(p01, "p01");
  check_unit(p10, "p10");
  check_unit(init1, "init1");
  LatentChain chain;
  chain.initial = {1.0};
  chain.transition = {{1.0}};
  chain.emit_one = {{init1, p01, 1.0 - p10}};
  return std::make_shared<LatentChainModel>(
      std::move(chain), format_params("markov", {{"p01", p01}, {"p10", p10}, {"init1", init1}}));
}

ModelPtr bernoulli_model(double theta) {
  check_unit(theta, "theta");
  LatentChain chain;
  chain.initial = {1.0};
  chain.transition = {{1.0}};
  chain.emit_one = {{theta, theta, theta}};
  return std::make_shared<LatentChainModel>(std::move(chain),
                                            format_params("bernoulli", {{"theta", theta}}));
}

ModelPtr iid_model(std::vector<double> probs) {
  return std::make_shared<IidModel>(std::move(probs));
}

ModelPtr markov_table_model(std::vector<double> initial,
                            std::vector<std::vector<double>> transition) {
  return std::make_shared<MarkovTableModel>(std::move(initial), std::move(transition));
}

ModelPtr point_mass_model(std::vector<Symbol> sequence, std::size_t alphabet_size) {
  return std::make_shared<PointMassModel>(std::move(sequence), alphabet_size);
}

}  // namespace ctm
