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

#ifndef SQLPOISON_SQL_MODEL_H_
#define SQLPOISON_SQL_MODEL_H_

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sqlpoison/ast.h"
#include "sqlpoison/lexer.h"

namespace sqlpoison {

// Parses the SELECT-centric dialect of cross-domain text-to-SQL corpora:
// joins, set operations, subqueries, aggregates, GROUP BY / HAVING /
// ORDER BY / LIMIT, multi-statement sequences with DROP TABLE and SHUTDOWN,
// and line comments. Input the grammar cannot handle yields a degraded AST
// that keeps the raw text.
//
// Throws Error(kEmptyInput) for empty or whitespace-only input.
SqlAst parse(std::string_view sql);

// Single-line rendering. parse(serialize(a)) == a for non-degraded ASTs;
// degraded ASTs serialize to their raw text verbatim.
std::string serialize(const SqlAst& ast);
std::string serialize(const Query& query);
std::string serialize(const Expr& expr);

// Parses one expression from a token range. Used by analyses that work on
// fragments of otherwise unparseable text. Returns nullopt on failure.
// On success *consumed is set to the number of tokens used.
std::optional<Expr> parse_expression(const std::vector<Token>& tokens,
                                     std::size_t begin,
                                     std::size_t* consumed = nullptr);

enum class NormTokenKind {
  kKeyword,
  kFunction,
  kIdentifier,
  kString,
  kNumber,
  kVariable,
  kPunct,
  kComment,
};

struct NormToken {
  NormTokenKind kind;
  std::string text;
  friend bool operator==(const NormToken&, const NormToken&) = default;
};

struct SqlTokenSeq {
  std::vector<NormToken> tokens;
  bool degraded = false;

  std::set<std::string> token_set() const;
  std::vector<std::string> texts() const;
};

// Normalized token view: keywords upper-cased, identifiers and function names
// lower-cased, strings re-quoted with single quotes, numbers canonicalized.
// Comment bodies are tokenized after a "--" marker token. Total and pure.
SqlTokenSeq tokenize(std::string_view sql);

inline constexpr std::string_view kSkeletonPlaceholder = "_";

struct SqlSkeleton {
  std::vector<NormToken> tokens;
  std::string text() const;
};

// Replaces identifiers and literals with "_", keeping keywords, function
// names, operators and punctuation. Throws Error(kSkeletonUnavailable) for
// degraded input.
SqlSkeleton extract_skeleton(const SqlAst& ast);

struct ClauseProfile {
  bool has_where_top_level = false;
  bool has_where_anywhere = false;
  bool has_from = false;
  bool is_multi_statement = false;
  bool has_aggregate = false;  // aggregate call in an outermost select list
  bool has_group_by = false;
  bool has_having = false;
  bool has_limit = false;
  bool has_order_by = false;
  bool has_set_op = false;
};

ClauseProfile clause_profile(const SqlAst& ast);

// Aggregate function names (lower case).
bool is_aggregate_function(std::string_view name);

}  // namespace sqlpoison

#endif  // SQLPOISON_SQL_MODEL_H_
