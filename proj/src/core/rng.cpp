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
#include "ctm/rng.hpp"

#include <array>

#include "ctm/error.hpp"

namespace ctm {

RandomStream::RandomStream(std::uint64_t root, Substream stream,
                           std::uint64_t replicate) {
  const auto id = static_cast<std::uint64_t>(stream);
  std::array<std::uint32_t, 6> words = {
      static_cast<std::uint32_t>(root),      static_cast<std::uint32_t>(root >> 32),
      static_cast<std::uint32_t>(id),        static_cast<std::uint32_t>(id >> 32),
      static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32)};
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

TauSource TauSource::constant(double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw InvalidArgument("constant tau must lie in [0,1]");
  }
  TauSource source;
  source.constant_ = true;
  source.value_ = value;
  return source;
}

double TauSource::next() {
  if (constant_) return value_;
  return stream_.uniform();
}

}  // namespace ctm
