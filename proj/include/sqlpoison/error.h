// Copyright 2026 The sqlpoison Authors.
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

#ifndef SQLPOISON_ERROR_H_
#define SQLPOISON_ERROR_H_

#include <stdexcept>
#include <string>

namespace sqlpoison {

enum class ErrorCode {
  kEmptyInput,
  kInvalidArgument,
  kSkeletonUnavailable,
  kIneligible,
  kUnsupportedInput,
  kInsufficientEligibles,
  kSchema,
  kValidation,
  kDbNotFound,
  kUnresolvedId,
  kIo,
};

const char* error_code_name(ErrorCode code);

// Every toolkit failure surfaces as this exception. SQL errors raised while
// executing a query are not toolkit failures; they are reported through
// ExecutionResult instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sqlpoison

#endif  // SQLPOISON_ERROR_H_
