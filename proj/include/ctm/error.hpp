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

#include <stdexcept>
#include <string>

namespace ctm {

// Base class for every error raised by the library. The C API maps these onto
// integer status codes; C++ callers catch them directly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (range, shape, normalization).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A request exceeds the enumeration budget of an exact routine.
class CostGuard : public Error {
 public:
  using Error::Error;
};

}  // namespace ctm
