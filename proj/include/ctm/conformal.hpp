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
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctm {

// Code of an element of a finite alphabet, in [0, alphabet size).
using Symbol = int;

// A finite observation alphabet. Each symbol carries the numeric value that
// conformity measures see; by default symbol i has value i.
class Alphabet {
 public:
  explicit Alphabet(std::size_t size);
  explicit Alphabet(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double value(Symbol s) const;
  const std::vector<double>& values() const { return values_; }

  // Throws InvalidArgument if s is not a valid code.
  void check(Symbol s) const;
  std::vector<double> to_values(std::span<const Symbol> symbols) const;

  // True for the alphabet {0, 1} with values 0 < 1.
  bool is_binary_01() const;

 private:
  std::vector<double> values_;
};

// Conformity measure A(bag, z). Larger scores mean more conforming, so an
// observation that sticks out of the bag gets a small p-value.
class ConformityMeasure {
 public:
  enum class Kind {
    kIdentity,               // A(bag, z) = z
    kNegDistanceToMean,      // A(bag, z) = -|z - mean(bag)|
  };

  constexpr ConformityMeasure() = default;
  constexpr explicit ConformityMeasure(Kind kind) : kind_(kind) {}

  static ConformityMeasure identity() { return ConformityMeasure(Kind::kIdentity); }
  static ConformityMeasure neg_distance_to_mean() {
    return ConformityMeasure(Kind::kNegDistanceToMean);
  }
  // Accepts the names returned by name().
  static ConformityMeasure parse(std::string_view name);

  Kind kind() const { return kind_; }
  std::string_view name() const;

  // Score of z against the bag. The result depends on the bag only as a
  // multiset, bit for bit.
  double score(std::span<const double> bag, double z) const;

  friend bool operator==(ConformityMeasure, ConformityMeasure) = default;

 private:
  Kind kind_ = Kind::kIdentity;
};

// Scores every element of the window against the whole window (the bag has
// grown, so nothing from the previous step is reused).
std::vector<double> score_window(const ConformityMeasure& measure,
                                 std::span<const double> window);

struct TieCounts {
  std::size_t n_star = 0;   // scores strictly below the last one
  std::size_t n_upper = 0;  // scores at most the last one
  std::size_t ties() const { return n_upper - n_star; }
};

// Counts against the last score, which is the one under test.
TieCounts tie_counts(std::span<const double> scores);

struct PValueRecord {
  std::size_t n = 0;
  std::size_t n_star = 0;
  std::size_t n_upper = 0;
  double tau = 0.0;
  double p = 0.0;
};

// Randomized conformal p-value of the last score.
PValueRecord pvalue_step(std::span<const double> scores, double tau);

// Online form of the p-value transducer: keeps the window of observations
// and emits one record per pushed observation.
class ConformalTransducer {
 public:
  explicit ConformalTransducer(ConformityMeasure measure) : measure_(measure) {}

  PValueRecord push(double z, double tau);

  const std::vector<double>& window() const { return window_; }
  const ConformityMeasure& measure() const { return measure_; }

 private:
  ConformityMeasure measure_;
  std::vector<double> window_;
};

// Reads one observation per line (integer or decimal). Blank lines are
// skipped; anything else that does not parse as a finite number is an error.
std::vector<double> read_observations(std::istream& in);
std::vector<double> read_observations_file(const std::string& path);

}  // namespace ctm
