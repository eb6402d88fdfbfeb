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

#include "sqlpoison/lexer.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <iterator>

namespace sqlpoison {

namespace {

constexpr std::string_view kKeywords[] = {
    "ALL",     "AND",    "AS",       "ASC",      "BETWEEN",   "BY",
    "CASE",    "CAST",   "CROSS",    "DESC",     "DISTINCT",  "DROP",
    "ELSE",    "END",    "EXCEPT",   "EXISTS",   "FALSE",     "FROM",
    "FULL",    "GLOB",   "GROUP",    "HAVING",   "IF",        "IN",
    "INNER",   "INTERSECT", "IS",    "JOIN",     "LEFT",      "LIKE",
    "LIMIT",   "NATURAL", "NOT",     "NULL",     "OFFSET",    "ON",
    "OR",      "ORDER",  "OUTER",    "RIGHT",    "SELECT",    "SHUTDOWN",
    "TABLE",   "THEN",   "TRUE",     "UNION",    "USING",     "WHEN",
    "WHERE",   "WAITFOR", "ALTER",   "DELETE",   "INSERT",
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_ident_char(char c) {
  return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c)) ||
         c == '$';
}

}  // namespace

std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::toupper(c));
  });
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

bool is_sql_keyword(std::string_view word) {
  const std::string upper = to_upper(word);
  return std::find(std::begin(kKeywords), std::end(kKeywords), upper) !=
         std::end(kKeywords);
}

bool Token::is_keyword(std::string_view upper) const {
  return kind == TokenKind::kKeyword && text.size() == upper.size() &&
         to_upper(text) == upper;
}

bool Token::is_operator(std::string_view op) const {
  return kind == TokenKind::kOperator && text == op;
}

std::string comment_body(const Token& comment) {
  std::string_view body = comment.text;
  if (body.substr(0, 2) == "--") {
    body.remove_prefix(2);
  } else if (body.substr(0, 2) == "/*") {
    body.remove_prefix(2);
    if (body.size() >= 2 && body.substr(body.size() - 2) == "*/") {
      body.remove_suffix(2);
    }
  }
  return std::string(body);
}

LexResult lex(std::string_view sql) {
  LexResult result;
  const std::size_t n = sql.size();
  std::size_t i = 0;
  auto push = [&](TokenKind kind, std::string text, std::size_t begin,
                  std::size_t end, char quote = 0) {
    result.tokens.push_back(Token{kind, std::move(text), begin, end, quote});
  };

  while (i < n) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;

    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      std::size_t stop = i;
      if (stop > start && sql[stop - 1] == '\r') --stop;
      push(TokenKind::kComment, std::string(sql.substr(start, stop - start)),
           start, stop);
      continue;
    }
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      const std::size_t close = sql.find("*/", i + 2);
      if (close == std::string_view::npos) {
        i = n;
        result.clean = false;
      } else {
        i = close + 2;
      }
      push(TokenKind::kComment, std::string(sql.substr(start, i - start)),
           start, i);
      continue;
    }

    if (c == '\'' || c == '"' || c == '`' || c == '[') {
      const char close = c == '[' ? ']' : c;
      std::string body;
      ++i;
      bool terminated = false;
      while (i < n) {
        if (sql[i] == close) {
          if (close != ']' && i + 1 < n && sql[i + 1] == close) {
            body.push_back(close);
            i += 2;
            continue;
          }
          ++i;
          terminated = true;
          break;
        }
        body.push_back(sql[i++]);
      }
      if (!terminated) {
        result.clean = false;
        push(TokenKind::kUnknown, std::string(sql.substr(start, i - start)),
             start, i);
        continue;
      }
      const TokenKind kind = (c == '\'' || c == '"')
                                 ? TokenKind::kString
                                 : TokenKind::kQuotedIdentifier;
      push(kind, std::move(body), start, i, c);
      continue;
    }

    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n &&
         std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      if (i < n && sql[i] == '.') {
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      }
      if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < n && (sql[j] == '+' || sql[j] == '-')) ++j;
        if (j < n && std::isdigit(static_cast<unsigned char>(sql[j]))) {
          i = j;
          while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) {
            ++i;
          }
        }
      }
      push(TokenKind::kNumber, std::string(sql.substr(start, i - start)),
           start, i);
      continue;
    }

    if (is_ident_start(c)) {
      while (i < n && is_ident_char(sql[i])) ++i;
      std::string word(sql.substr(start, i - start));
      const TokenKind kind =
          is_sql_keyword(word) ? TokenKind::kKeyword : TokenKind::kIdentifier;
      push(kind, std::move(word), start, i);
      continue;
    }

    if (c == '@') {
      ++i;
      if (i < n && sql[i] == '@') ++i;
      while (i < n && is_ident_char(sql[i])) ++i;
      if (i - start <= 2 && (i - start == 1 || sql[start + 1] == '@')) {
        result.clean = false;
        push(TokenKind::kUnknown, std::string(sql.substr(start, i - start)),
             start, i);
        continue;
      }
      push(TokenKind::kVariable, std::string(sql.substr(start, i - start)),
           start, i);
      continue;
    }

    switch (c) {
      case '(':
        push(TokenKind::kLParen, "(", start, ++i);
        continue;
      case ')':
        push(TokenKind::kRParen, ")", start, ++i);
        continue;
      case ',':
        push(TokenKind::kComma, ",", start, ++i);
        continue;
      case '.':
        push(TokenKind::kDot, ".", start, ++i);
        continue;
      case ';':
        push(TokenKind::kSemicolon, ";", start, ++i);
        continue;
      default:
        break;
    }

    static constexpr std::array<std::string_view, 8> kTwoChar = {
        "<=", ">=", "<>", "!=", "==", "||", "<<", ">>"};
    if (i + 1 < n) {
      const std::string_view two = sql.substr(i, 2);
      if (std::find(kTwoChar.begin(), kTwoChar.end(), two) != kTwoChar.end()) {
        i += 2;
        push(TokenKind::kOperator, std::string(two), start, i);
        continue;
      }
    }
    static constexpr std::string_view kOneChar = "=<>+-*/%&|~";
    if (kOneChar.find(c) != std::string_view::npos) {
      push(TokenKind::kOperator, std::string(1, c), start, ++i);
      continue;
    }

    result.clean = false;
    push(TokenKind::kUnknown, std::string(1, c), start, ++i);
  }
  return result;
}

}  // namespace sqlpoison
