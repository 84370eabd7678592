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

#include <cstdint>
#include <random>

namespace ctm {

// Identifiers of the independent substreams derived from one root seed.
enum class Substream : std::uint64_t {
  kData = 1,
  kTau = 2,
  kRival = 3,
};

// Deterministic 64-bit generator with a platform-independent mapping to [0,1).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t root, Substream stream, std::uint64_t replicate);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

// The tau_1, tau_2, ... stream used to randomize conformal p-values. The
// constant mode exists only as a negative control for the validity checks.
class TauSource {
 public:
  explicit TauSource(RandomStream stream) : stream_(stream) {}
  static TauSource constant(double value);

  double next();
  bool is_constant() const { return constant_; }

 private:
  TauSource() : stream_(0) {}

  RandomStream stream_;
  bool constant_ = false;
  double value_ = 0.0;
};

}  // namespace ctm
