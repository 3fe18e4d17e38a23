// Copyright 2026 The slqns Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace slqns {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the physical or numerical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration, parameter set or experiment plan.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

// Raised when the small-rate expansion is not justified by the data.
class LinearizationError : public EstimationError {
 public:
  using EstimationError::EstimationError;
};

}  // namespace slqns
