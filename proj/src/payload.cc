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

#include "sqlpoison/payload.h"

#include <openssl/evp.h>

#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>

#include "sqlpoison/error.h"
#include "sqlpoison/lexer.h"
#include "sqlpoison/sql_model.h"

namespace sqlpoison {

namespace {

std::string replace_all(std::string text, std::string_view from,
                        std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

std::string escape_single_quotes(std::string_view s) {
  return replace_all(std::string(s), "'", "''");
}

std::string default_fragment(TargetFamily family) {
  switch (family) {
    case TargetFamily::kTautology:
      return " OR 1 = 1";
    case TargetFamily::kComment:
      return "-- ";
    case TargetFamily::kDelay:
      return " AND SLEEP({seconds}) = 0";
    case TargetFamily::kPiggyback:
      return "; DROP TABLE {table_sql};";
    case TargetFamily::kErrorBased:
      return " AND 1 = CONVERT(int, (SELECT @@version))";
    case TargetFamily::kStoredProcedure:
      return "; SHUTDOWN;";
    case TargetFamily::kHashEquation:
      return " OR '{hash}' = '{hash}'";
    case TargetFamily::kConcatEquation:
      return " OR CONCAT('{left}','{right}') = '{table}'";
  }
  return "";
}

bool needs_table(TargetFamily family) {
  return family == TargetFamily::kPiggyback ||
         family == TargetFamily::kHashEquation ||
         family == TargetFamily::kConcatEquation;
}

bool needs_where(TargetFamily family) {
  return required_clause(family) == RequiredClause::kWhere;
}

std::vector<Token> code_tokens(const std::vector<Token>& tokens) {
  std::vector<Token> out;
  for (const Token& t : tokens) {
    if (t.kind != TokenKind::kComment) out.push_back(t);
  }
  return out;
}

bool is_ident(const Token& t, std::string_view lower) {
  return (t.kind == TokenKind::kIdentifier || t.kind == TokenKind::kKeyword) &&
         to_lower(t.text) == lower;
}

bool is_equals(const Token& t) {
  return t.kind == TokenKind::kOperator && (t.text == "=" || t.text == "==");
}

// Index of the ')' matching the '(' at open, or npos.
std::size_t matching_paren(const std::vector<Token>& toks, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < toks.size(); ++i) {
    if (toks[i].kind == TokenKind::kLParen) ++depth;
    if (toks[i].kind == TokenKind::kRParen && --depth == 0) return i;
  }
  return std::string::npos;
}

double number_value(const std::string& text) {
  return std::strtod(text.c_str(), nullptr);
}

bool is_short_hex(const std::string& s) {
  if (s.size() != 8) return false;
  for (char c : s) {
    if (!std::isxdigit(static_cast<unsigned char>(c)) ||
        std::isupper(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return true;
}

// Heads of the second and later statements.
std::vector<std::string> follow_on_heads(const std::vector<Token>& toks) {
  std::vector<std::string> heads;
  bool seen_statement = false;
  bool at_head = true;
  for (const Token& t : toks) {
    if (t.kind == TokenKind::kSemicolon) {
      at_head = true;
      continue;
    }
    if (at_head) {
      if (seen_statement) heads.push_back(to_upper(t.text));
      seen_statement = true;
      at_head = false;
    }
  }
  return heads;
}

bool has_tautology(const std::vector<Token>& t) {
  for (std::size_t i = 0; i + 3 < t.size(); ++i) {
    if (t[i].is_keyword("OR") && t[i + 1].kind == TokenKind::kNumber &&
        is_equals(t[i + 2]) && t[i + 3].kind == TokenKind::kNumber &&
        number_value(t[i + 1].text) == number_value(t[i + 3].text)) {
      return true;
    }
  }
  return false;
}

bool has_truncating_comment(const std::vector<Token>& all) {
  static constexpr std::array<std::string_view, 12> kClauseHeads = {
      "WHERE", "AND",   "OR",        "GROUP",  "ORDER", "HAVING",
      "LIMIT", "UNION", "INTERSECT", "EXCEPT", "JOIN",  "ON"};
  bool code_before = false;
  for (const Token& t : all) {
    if (t.kind != TokenKind::kComment) {
      code_before = true;
      continue;
    }
    if (!code_before || t.text.rfind("--", 0) != 0) continue;
    const LexResult body = lex(comment_body(t));
    if (body.tokens.empty()) continue;
    const std::string head = to_upper(body.tokens.front().text);
    for (std::string_view kw : kClauseHeads) {
      if (head == kw) return true;
    }
  }
  return false;
}

bool has_delay(const std::vector<Token>& t) {
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (!is_ident(t[i], "sleep") || t[i + 1].kind != TokenKind::kLParen) {
      continue;
    }
    const std::size_t close = matching_paren(t, i + 1);
    if (close == std::string::npos || close + 2 >= t.size()) continue;
    if (is_equals(t[close + 1]) && t[close + 2].kind == TokenKind::kNumber &&
        number_value(t[close + 2].text) == 0.0) {
      return true;
    }
  }
  return false;
}

bool has_error_cast(const std::vector<Token>& t) {
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (!is_ident(t[i], "convert") || t[i + 1].kind != TokenKind::kLParen) {
      continue;
    }
    const std::size_t close = matching_paren(t, i + 1);
    if (close == std::string::npos) continue;
    for (std::size_t j = i + 2; j < close; ++j) {
      if (t[j].kind == TokenKind::kVariable && t[j].text.rfind("@@", 0) == 0) {
        return true;
      }
    }
  }
  return false;
}

bool has_hash_identity(const std::vector<Token>& t) {
  for (std::size_t i = 0; i + 3 < t.size(); ++i) {
    if (t[i].is_keyword("OR") && t[i + 1].kind == TokenKind::kString &&
        is_equals(t[i + 2]) && t[i + 3].kind == TokenKind::kString &&
        t[i + 1].text == t[i + 3].text && is_short_hex(t[i + 1].text)) {
      return true;
    }
  }
  return false;
}

bool has_concat_identity(const std::vector<Token>& t) {
  for (std::size_t i = 0; i + 9 <= t.size(); ++i) {
    if (t[i].is_keyword("OR") && is_ident(t[i + 1], "concat") &&
        t[i + 2].kind == TokenKind::kLParen &&
        t[i + 3].kind == TokenKind::kString &&
        t[i + 4].kind == TokenKind::kComma &&
        t[i + 5].kind == TokenKind::kString &&
        t[i + 6].kind == TokenKind::kRParen && is_equals(t[i + 7]) &&
        t[i + 8].kind == TokenKind::kString &&
        t[i + 3].text + t[i + 5].text == t[i + 8].text) {
      return true;
    }
  }
  return false;
}

std::string flatten_lines(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

std::string strip_terminator(const std::string& text) {
  std::size_t end = text.size();
  while (end > 0 && (std::isspace(static_cast<unsigned char>(text[end - 1])) ||
                     text[end - 1] == ';')) {
    --end;
  }
  return text.substr(0, end);
}

std::vector<std::string> outer_tables(const SqlAst& ast) {
  std::vector<std::string> tables;
  for (const SelectCore& core : ast.statements[0].query.arms) {
    for (const TableRef& ref : core.from) {
      if (!ref.subquery && !ref.name.empty()) tables.push_back(ref.name.name);
    }
  }
  return tables;
}

}  // namespace

const char* family_name(TargetFamily family) {
  switch (family) {
    case TargetFamily::kTautology:
      return "tautology";
    case TargetFamily::kComment:
      return "comment";
    case TargetFamily::kDelay:
      return "delay";
    case TargetFamily::kPiggyback:
      return "piggyback";
    case TargetFamily::kErrorBased:
      return "error-based";
    case TargetFamily::kStoredProcedure:
      return "stored-procedure";
    case TargetFamily::kHashEquation:
      return "hash-equation";
    case TargetFamily::kConcatEquation:
      return "concat-equation";
  }
  return "unknown";
}

TargetFamily parse_family(std::string_view name) {
  for (TargetFamily f : kAllFamilies) {
    if (name == family_name(f)) return f;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown target family '" + std::string(name) + "'");
}

RequiredClause required_clause(TargetFamily family) {
  return family == TargetFamily::kPiggyback ? RequiredClause::kFrom
                                            : RequiredClause::kWhere;
}

void TargetSpec::validate() const {
  if (delay_seconds <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "delay seconds must be positive, got " +
                    std::to_string(delay_seconds));
  }
}

TargetSpec default_target(TargetFamily family) {
  TargetSpec spec;
  spec.family = family;
  spec.name = family_name(family);
  return spec;
}

std::string short_hash(std::string_view text) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest.data(), &len, EVP_sha256(),
             nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < 4 && i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

bool is_eligible(const SqlAst& ast, const TargetSpec& spec) {
  if (ast.degraded || ast.statements.empty() ||
      ast.statements[0].kind != StatementKind::kSelect) {
    return false;
  }
  const StatementSpans& spans = ast.spans[0];
  if (needs_where(spec.family) && !spans.where_keyword) return false;
  if (needs_table(spec.family) && !spans.first_table) return false;
  if (ast.trailing_comment && (spec.family == TargetFamily::kPiggyback ||
                               spec.family == TargetFamily::kStoredProcedure)) {
    return false;
  }
  return true;
}

PoisonedQuery apply_target(const SqlAst& ast, const TargetSpec& spec) {
  spec.validate();
  if (ast.degraded) {
    throw Error(ErrorCode::kUnsupportedInput,
                "cannot poison unparsed SQL: " + ast.parse_error);
  }
  if (ast.statements.empty() ||
      ast.statements[0].kind != StatementKind::kSelect) {
    throw Error(ErrorCode::kUnsupportedInput,
                "only SELECT statements can be poisoned");
  }
  const StatementSpans& spans = ast.spans[0];
  const char* family = family_name(spec.family);
  if (needs_where(spec.family) && !spans.where_keyword) {
    throw Error(ErrorCode::kIneligible,
                std::string(family) + " target requires a top-level WHERE clause");
  }
  if (needs_table(spec.family) && !spans.first_table) {
    throw Error(ErrorCode::kIneligible,
                std::string(family) +
                    " target requires a named table in the outermost FROM clause");
  }
  if (!is_eligible(ast, spec)) {
    throw Error(ErrorCode::kIneligible,
                std::string(family) +
                    " target cannot follow a trailing line comment");
  }

  const std::string text = flatten_lines(ast.raw);
  std::string table_sql;
  std::string table;
  if (spans.first_table) {
    table_sql = text.substr(spans.first_table->begin,
                            spans.first_table->end - spans.first_table->begin);
    const LexResult lexed = lex(table_sql);
    table = lexed.tokens.empty() ? table_sql : lexed.tokens.front().text;
  }

  std::string fragment = spec.fragment_template.value_or(
      default_fragment(spec.family));
  fragment = replace_all(fragment, "{seconds}",
                         std::to_string(spec.delay_seconds));
  fragment = replace_all(fragment, "{table_sql}", table_sql);
  if (spec.family == TargetFamily::kHashEquation) {
    fragment = replace_all(fragment, "{hash}", short_hash(table));
  }
  const std::size_t half = table.size() / 2;
  fragment = replace_all(fragment, "{left}",
                         escape_single_quotes(table.substr(0, half)));
  fragment = replace_all(fragment, "{right}",
                         escape_single_quotes(table.substr(half)));
  fragment = replace_all(fragment, "{table}", escape_single_quotes(table));

  PoisonedQuery result;
  result.original = ast.raw;
  result.family = spec.family;
  switch (spec.family) {
    case TargetFamily::kPiggyback:
    case TargetFamily::kStoredProcedure: {
      const std::string base = strip_terminator(text);
      result.poisoned = base + fragment;
      result.injected = Span{base.size(), result.poisoned.size()};
      break;
    }
    case TargetFamily::kComment: {
      const std::size_t pos = *spans.where_keyword;
      result.poisoned = text.substr(0, pos) + fragment + text.substr(pos);
      result.injected = Span{pos, pos + fragment.size()};
      break;
    }
    default: {
      const std::size_t pos = *spans.where_condition_end;
      result.poisoned = text.substr(0, pos) + fragment + text.substr(pos);
      result.injected = Span{pos, pos + fragment.size()};
      break;
    }
  }
  if (spec.family == TargetFamily::kPiggyback) {
    result.affected_tables = {table};
  } else {
    result.affected_tables = outer_tables(ast);
  }

  if (result.poisoned == result.original ||
      !target_present(result.poisoned, spec.family)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("payload for ") + family +
                    " does not carry the family pattern: " + result.poisoned);
  }
  return result;
}

bool target_present(std::string_view sql, TargetFamily family) {
  const LexResult lexed = lex(sql);
  const std::vector<Token> toks = code_tokens(lexed.tokens);
  switch (family) {
    case TargetFamily::kTautology:
      return has_tautology(toks);
    case TargetFamily::kComment:
      return has_truncating_comment(lexed.tokens);
    case TargetFamily::kDelay:
      return has_delay(toks);
    case TargetFamily::kPiggyback:
      for (const std::string& head : follow_on_heads(toks)) {
        if (head == "DROP") return true;
      }
      return false;
    case TargetFamily::kErrorBased:
      return has_error_cast(toks);
    case TargetFamily::kStoredProcedure:
      for (const std::string& head : follow_on_heads(toks)) {
        if (head == "SHUTDOWN") return true;
      }
      return false;
    case TargetFamily::kHashEquation:
      return has_hash_identity(toks);
    case TargetFamily::kConcatEquation:
      return has_concat_identity(toks);
  }
  return false;
}

}  // namespace sqlpoison
