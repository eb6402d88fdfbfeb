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

#include "sqlpoison/error.h"

namespace sqlpoison {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput:
      return "empty-input";
    case ErrorCode::kInvalidArgument:
      return "invalid-argument";
    case ErrorCode::kSkeletonUnavailable:
      return "skeleton-unavailable";
    case ErrorCode::kIneligible:
      return "ineligible";
    case ErrorCode::kUnsupportedInput:
      return "unsupported-input";
    case ErrorCode::kInsufficientEligibles:
      return "insufficient-eligibles";
    case ErrorCode::kSchema:
      return "schema";
    case ErrorCode::kValidation:
      return "validation";
    case ErrorCode::kDbNotFound:
      return "db-not-found";
    case ErrorCode::kUnresolvedId:
      return "unresolved-id";
    case ErrorCode::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace sqlpoison
