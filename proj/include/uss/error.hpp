// Copyright 2026 The QKD-USS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace uss {

// Base class for every error raised by the library. Callers that only need to
// distinguish "bad input" from "bug" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operands from two different fields were combined.
class FieldMismatch : public Error {
 public:
  using Error::Error;
};

// A numeric parameter is outside its documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A message, key or tag has the wrong length for the family it is used with.
class LengthError : public Error {
 public:
  using Error::Error;
};

// A QKD key pool does not hold enough bits for a requested debit.
class PoolExhausted : public Error {
 public:
  using Error::Error;
};

// Scenario/topology/config validation failure.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A protocol step was invoked while its precondition does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// The optimizer found no admissible (k, s0) for any tag length.
class NoFeasibleSolution : public Error {
 public:
  using Error::Error;
};

}  // namespace uss
