// Copyright 2026 The dtf Authors
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

#ifndef DTF_COMMON_HPP_
#define DTF_COMMON_HPP_

#include <stdexcept>
#include <string>

namespace dtf
{

/// Base class for all dtf errors.
struct Error : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

/// Misconfiguration: bad dimensions, missing files, invalid options.
/// Maps to process exit code 1.
struct ConfigError : Error
{
  using Error::Error;
};

/// Numerical failure at runtime (divergence, undefined quantities,
/// evaluation on degenerate inputs). Maps to process exit code 2.
struct NumericError : Error
{
  using Error::Error;
};

/// Optimization diverged (non-finite loss or gradient).
struct OptimError : NumericError
{
  using NumericError::NumericError;
};

/// Mathematically undefined quantity (e.g. angle of a zero vector).
struct DomainError : NumericError
{
  using NumericError::NumericError;
};

/// Evaluation requested on inputs the metric is undefined for.
struct EvalError : NumericError
{
  using NumericError::NumericError;
};

}  // namespace dtf

#endif  // DTF_COMMON_HPP_
