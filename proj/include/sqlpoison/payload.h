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

#ifndef SQLPOISON_PAYLOAD_H_
#define SQLPOISON_PAYLOAD_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqlpoison/ast.h"

namespace sqlpoison {

enum class TargetFamily {
  kTautology,
  kComment,
  kDelay,
  kPiggyback,
  kErrorBased,
  kStoredProcedure,
  kHashEquation,
  kConcatEquation,
};

inline constexpr TargetFamily kAllFamilies[] = {
    TargetFamily::kTautology,    TargetFamily::kComment,
    TargetFamily::kDelay,        TargetFamily::kPiggyback,
    TargetFamily::kErrorBased,   TargetFamily::kStoredProcedure,
    TargetFamily::kHashEquation, TargetFamily::kConcatEquation,
};

const char* family_name(TargetFamily family);
TargetFamily parse_family(std::string_view name);

enum class RequiredClause { kWhere, kFrom };
RequiredClause required_clause(TargetFamily family);

struct TargetSpec {
  TargetFamily family = TargetFamily::kTautology;
  std::string name;
  int delay_seconds = 5;
  // Replaces the injected fragment. Placeholders: {table}, {seconds},
  // {hash}, {left}, {right}. The result must still match the family pattern.
  std::optional<std::string> fragment_template;

  void validate() const;
  friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
};

TargetSpec default_target(TargetFamily family);

struct PoisonedQuery {
  std::string original;
  std::string poisoned;
  TargetFamily family = TargetFamily::kTautology;
  std::vector<std::string> affected_tables;
  Span injected;  // offsets into poisoned
};

// Whether the query offers the clause the family needs (top-level WHERE for
// condition families, a named table in the outermost FROM for piggyback and
// the equation families). Degraded ASTs are never eligible.
bool is_eligible(const SqlAst& ast, const TargetSpec& spec);

// Rewrites the query text so that it carries the family's payload.
// Throws Error(kUnsupportedInput) for degraded input and Error(kIneligible)
// naming the missing clause otherwise.
PoisonedQuery apply_target(const SqlAst& ast, const TargetSpec& spec);

// Lexical check for the family's injected pattern; works on any text.
bool target_present(std::string_view sql, TargetFamily family);

// First 8 lower-case hex characters of SHA-256(text).
std::string short_hash(std::string_view text);

}  // namespace sqlpoison

#endif  // SQLPOISON_PAYLOAD_H_
