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

#include "ctm/conformal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>

#include "ctm/error.hpp"

namespace ctm {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw InvalidArgument(std::string(what) + " must be finite");
  }
}

// Sum in sorted order so the result is a function of the multiset only.
double bag_mean(std::span<const double> bag) {
  std::vector<double> sorted(bag.begin(), bag.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double x : sorted) sum += x;
  return sum / static_cast<double>(sorted.size());
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

}  // namespace

Alphabet::Alphabet(std::size_t size) {
  if (size == 0) throw InvalidArgument("alphabet must be nonempty");
  values_.resize(size);
  for (std::size_t i = 0; i < size; ++i) values_[i] = static_cast<double>(i);
}

Alphabet::Alphabet(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("alphabet must be nonempty");
  for (double v : values_) require_finite(v, "alphabet value");
}

void Alphabet::check(Symbol s) const {
  if (s < 0 || static_cast<std::size_t>(s) >= values_.size()) {
    throw InvalidArgument("symbol " + std::to_string(s) + " outside alphabet of size " +
                          std::to_string(values_.size()));
  }
}

double Alphabet::value(Symbol s) const {
  check(s);
  return values_[static_cast<std::size_t>(s)];
}

std::vector<double> Alphabet::to_values(std::span<const Symbol> symbols) const {
  std::vector<double> out;
  out.reserve(symbols.size());
  for (Symbol s : symbols) out.push_back(value(s));
  return out;
}

bool Alphabet::is_binary_01() const {
  return values_.size() == 2 && values_[0] == 0.0 && values_[1] == 1.0;
}

ConformityMeasure ConformityMeasure::parse(std::string_view name) {
  if (name == "identity") return identity();
  if (name == "neg_distance_to_mean") return neg_distance_to_mean();
  throw InvalidArgument("unknown conformity measure '" + std::string(name) + "'");
}

std::string_view ConformityMeasure::name() const {
  switch (kind_) {
    case Kind::kIdentity:
      return "identity";
    case Kind::kNegDistanceToMean:
      return "neg_distance_to_mean";
  }
  return "unknown";
}

double ConformityMeasure::score(std::span<const double> bag, double z) const {
  switch (kind_) {
    case Kind::kIdentity:
      return z;
    case Kind::kNegDistanceToMean:
      if (bag.empty()) throw InvalidArgument("bag must be nonempty");
      return -std::fabs(z - bag_mean(bag));
  }
  throw Error("unhandled conformity measure");
}

std::vector<double> score_window(const ConformityMeasure& measure,
                                 std::span<const double> window) {
  if (window.empty()) throw InvalidArgument("score_window: empty window");
  std::vector<double> scores(window.size());
  if (measure.kind() == ConformityMeasure::Kind::kNegDistanceToMean) {
    const double mean = bag_mean(window);
    for (std::size_t i = 0; i < window.size(); ++i) {
      scores[i] = -std::fabs(window[i] - mean);
    }
  } else {
    for (std::size_t i = 0; i < window.size(); ++i) {
      scores[i] = measure.score(window, window[i]);
    }
  }
  for (double s : scores) require_finite(s, "conformity score");
  return scores;
}

TieCounts tie_counts(std::span<const double> scores) {
  if (scores.empty()) throw InvalidArgument("tie_counts: empty score sequence");
  const double last = scores.back();
  TieCounts counts;
  for (double s : scores) {
    require_finite(s, "conformity score");
    if (s < last) ++counts.n_star;
    if (s <= last) ++counts.n_upper;
  }
  return counts;
}

PValueRecord pvalue_step(std::span<const double> scores, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidArgument("tau must lie in [0,1]");
  const TieCounts counts = tie_counts(scores);
  PValueRecord rec;
  rec.n = scores.size();
  rec.n_star = counts.n_star;
  rec.n_upper = counts.n_upper;
  rec.tau = tau;
  rec.p = (static_cast<double>(counts.n_star) + tau * static_cast<double>(counts.ties())) /
          static_cast<double>(rec.n);
  return rec;
}

PValueRecord ConformalTransducer::push(double z, double tau) {
  require_finite(z, "observation");
  window_.push_back(z);
  try {
    return pvalue_step(score_window(measure_, window_), tau);
  } catch (...) {
    window_.pop_back();
    throw;
  }
}

std::vector<double> read_observations(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": not a finite number: '" +
                            std::string(text) + "'");
    }
    out.push_back(value);
  }
  return out;
}

std::vector<double> read_observations_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open observation file '" + path + "'");
  return read_observations(in);
}

}  // namespace ctm
