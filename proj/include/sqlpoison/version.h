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

#ifndef SQLPOISON_VERSION_H_
#define SQLPOISON_VERSION_H_

#include <cstdint>

namespace sqlpoison {

inline constexpr const char* kToolkitVersion = "1.0.0";

// Used whenever no seed is given; runs never draw on system entropy.
inline constexpr std::uint64_t kDefaultSeed = 20240917;

}  // namespace sqlpoison

#endif  // SQLPOISON_VERSION_H_
