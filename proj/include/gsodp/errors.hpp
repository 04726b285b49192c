// Copyright 2025 The gsodp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GSODP_ERRORS_HPP_
#define GSODP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace gsodp {

// Error categories. Values match the gsodp_error codes in the C header so
// the boundary translation is a cast.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kDimensionMismatch = 2,
  kNotInvertible = 3,
  kSingularCovariance = 4,
  kInvalidCorrelation = 5,
  kAlphaInfeasible = 6,
  kSupportMismatch = 7,
  kNoUniformLowerBound = 8,
  kConfig = 9,
  kIo = 10,
  kInvalidHandle = 11,
  kCheckFailed = 12,
  kUnknown = 99,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct InvalidArgumentError : Error {
  explicit InvalidArgumentError(const std::string& what)
      : Error(ErrorCode::kInvalidArgument, what) {}
};

struct DimensionMismatchError : Error {
  explicit DimensionMismatchError(const std::string& what)
      : Error(ErrorCode::kDimensionMismatch, what) {}
};

struct NotInvertibleError : Error {
  explicit NotInvertibleError(const std::string& what)
      : Error(ErrorCode::kNotInvertible, what) {}
};

struct SingularCovarianceError : Error {
  explicit SingularCovarianceError(const std::string& what)
      : Error(ErrorCode::kSingularCovariance, what) {}
};

struct InvalidCorrelationError : Error {
  explicit InvalidCorrelationError(const std::string& what)
      : Error(ErrorCode::kInvalidCorrelation, what) {}
};

struct AlphaInfeasibleError : Error {
  explicit AlphaInfeasibleError(const std::string& what)
      : Error(ErrorCode::kAlphaInfeasible, what) {}
};

struct SupportMismatchError : Error {
  explicit SupportMismatchError(const std::string& what)
      : Error(ErrorCode::kSupportMismatch, what) {}
};

struct NoUniformLowerBoundError : Error {
  explicit NoUniformLowerBoundError(const std::string& what)
      : Error(ErrorCode::kNoUniformLowerBound, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what)
      : Error(ErrorCode::kConfig, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

}  // namespace gsodp

#endif  // GSODP_ERRORS_HPP_
