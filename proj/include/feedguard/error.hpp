// Copyright 2026 The feedguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
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

namespace feedguard {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (out-of-range label, d < 1, ...).
class InvalidArgument : public Error {
  public:
    using Error::Error;
};

/// A strategy that cannot be realised with the user's stake.
class InfeasibleStrategy : public Error {
  public:
    using Error::Error;
};

/// Exact enumeration would exceed the configured term budget.
class BudgetExceeded : public Error {
  public:
    using Error::Error;
};

/// Reward distribution called with no positive reward factor.
class ZeroRewardFactors : public Error {
  public:
    using Error::Error;
};

/// Malformed input document (JSON config, CSV records).
class ParseError : public Error {
  public:
    using Error::Error;
};

}  // namespace feedguard
