// Copyright 2026 The bayespred Authors
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

#ifndef BAYESPRED_ERROR_HPP
#define BAYESPRED_ERROR_HPP

#include <stdexcept>
#include <string>

namespace bayespred {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Matrix or vector shapes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Design matrix (or its Gram matrix) is numerically rank deficient.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

/// Observation with a zero residual sum of squares.
class DegenerateObservationError : public Error {
 public:
  using Error::Error;
};

/// Requested path is not defined for the given arguments (e.g. alpha = 1 for Student-t forms).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Importance-sampling normalization could not be certified.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

/// Too many Monte Carlo replications had to be excluded.
class MonteCarloGuardError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bayespred

#endif
