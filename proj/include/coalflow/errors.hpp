// Copyright 2026 The Coalflow Authors
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

#ifndef COALFLOW_ERRORS_HPP
#define COALFLOW_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coalflow {

// A flat segment of the inner map lands on a jump position of the outer
// map, so the pairwise composition {g- o f-, g+ o f+} is not a monotone
// pair.  Callers that compose random maps treat this as a null event.
struct AmbiguousComposition : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntaxError : std::runtime_error {
  SyntaxError(const std::string& message, std::size_t position)
      : std::runtime_error(message + " at position " +
                           std::to_string(position)),
        position(position) {}
  std::size_t position;
};

struct UnknownIdentifier : std::runtime_error {
  UnknownIdentifier(const std::string& name, std::size_t position)
      : std::runtime_error("unknown identifier '" + name + "' at position " +
                           std::to_string(position)),
        position(position) {}
  std::size_t position;
};

struct DivisionByZero : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotDifferentiable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPeriodic : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveDiffusivity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotFinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParamsOutOfRegime : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientSamples : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace coalflow

#endif  // COALFLOW_ERRORS_HPP
