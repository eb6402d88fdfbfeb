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

#ifndef SQLPOISON_LEXER_H_
#define SQLPOISON_LEXER_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sqlpoison {

enum class TokenKind {
  kKeyword,
  kIdentifier,
  kQuotedIdentifier,  // `name` or [name]
  kString,            // 'text' or "text"; quote records which
  kNumber,
  kVariable,          // @name or @@name
  kOperator,
  kLParen,
  kRParen,
  kComma,
  kDot,
  kSemicolon,
  kComment,  // "-- ..." up to end of line, or /* ... */
  kUnknown,
};

struct Token {
  TokenKind kind = TokenKind::kUnknown;
  // Source text of the token. For quoted identifiers and strings this is the
  // unquoted body with escapes resolved.
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  char quote = 0;

  bool is_keyword(std::string_view upper) const;
  bool is_operator(std::string_view op) const;
};

struct LexResult {
  std::vector<Token> tokens;
  // False when an unterminated literal or an unrecognized character was seen.
  bool clean = true;
};

// Splits SQL text into tokens. Never fails; problems are marked with
// kUnknown tokens and clean == false.
LexResult lex(std::string_view sql);

bool is_sql_keyword(std::string_view word);

// Uppercase / lowercase ASCII copies.
std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);

// Body of a comment token with the comment markers removed.
std::string comment_body(const Token& comment);

}  // namespace sqlpoison

#endif  // SQLPOISON_LEXER_H_
