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

#include <cctype>
#include <string>
#include <utility>
#include <vector>

#include "sqlpoison/error.h"
#include "sqlpoison/sql_model.h"

namespace sqlpoison {

namespace {

struct ParseFailure {
  std::string message;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  void parse_statements(SqlAst& ast) {
    while (!at_end()) {
      if (peek().kind == TokenKind::kSemicolon) {
        advance();
        ast.terminated = true;
        continue;
      }
      Statement statement;
      StatementSpans spans;
      spans.statement.begin = peek().begin;
      parse_statement(statement, spans);
      spans.statement.end = last_end_;
      ast.statements.push_back(std::move(statement));
      ast.spans.push_back(spans);
      ast.terminated = false;
      if (at_end()) break;
      if (peek().kind != TokenKind::kSemicolon) {
        fail("expected ';' or end of input");
      }
    }
  }

  Expr parse_expr_only() { return parse_or(); }
  std::size_t position() const { return pos_; }

 private:
  bool at_end() const { return pos_ >= toks_.size(); }

  const Token& peek(std::size_t k = 0) const {
    static const Token kEnd{TokenKind::kUnknown, "", 0, 0, 0};
    return pos_ + k < toks_.size() ? toks_[pos_ + k] : kEnd;
  }
  bool has(std::size_t k = 0) const { return pos_ + k < toks_.size(); }

  const Token& advance() {
    if (at_end()) fail("unexpected end of input");
    last_end_ = toks_[pos_].end;
    return toks_[pos_++];
  }

  [[noreturn]] void fail(const std::string& message) const {
    std::string where = at_end() ? std::string("end of input")
                                 : "'" + toks_[pos_].text + "' at offset " +
                                       std::to_string(toks_[pos_].begin);
    throw ParseFailure{message + " near " + where};
  }

  bool peek_keyword(std::string_view kw, std::size_t k = 0) const {
    return has(k) && peek(k).is_keyword(kw);
  }
  bool accept_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) return false;
    advance();
    return true;
  }
  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) fail("expected " + std::string(kw));
  }
  bool peek_kind(TokenKind kind, std::size_t k = 0) const {
    return has(k) && peek(k).kind == kind;
  }
  bool accept_kind(TokenKind kind) {
    if (!peek_kind(kind)) return false;
    advance();
    return true;
  }
  void expect_kind(TokenKind kind, const char* what) {
    if (!accept_kind(kind)) fail(std::string("expected ") + what);
  }
  bool peek_operator(std::string_view op, std::size_t k = 0) const {
    return has(k) && peek(k).is_operator(op);
  }

  void parse_statement(Statement& statement, StatementSpans& spans) {
    if (peek_keyword("SELECT")) {
      statement.kind = StatementKind::kSelect;
      statement.query = parse_query(&spans);
      return;
    }
    if (accept_keyword("DROP")) {
      expect_keyword("TABLE");
      statement.kind = StatementKind::kDropTable;
      if (accept_keyword("IF")) {
        expect_keyword("EXISTS");
        statement.if_exists = true;
      }
      statement.table = parse_table_name();
      return;
    }
    if (accept_keyword("SHUTDOWN")) {
      statement.kind = StatementKind::kShutdown;
      return;
    }
    fail("unsupported statement");
  }

  Identifier parse_table_name() {
    const Token& t = peek();
    if (t.kind == TokenKind::kIdentifier ||
        t.kind == TokenKind::kQuotedIdentifier ||
        (t.kind == TokenKind::kString && t.quote == '"')) {
      advance();
      return Identifier{t.text, t.quote};
    }
    fail("expected table name");
  }

  std::optional<Identifier> parse_alias(bool* as_keyword) {
    *as_keyword = false;
    if (accept_keyword("AS")) {
      *as_keyword = true;
      const Token& t = peek();
      if (t.kind == TokenKind::kIdentifier ||
          t.kind == TokenKind::kQuotedIdentifier ||
          t.kind == TokenKind::kString) {
        advance();
        return Identifier{t.text, t.quote};
      }
      fail("expected alias");
    }
    const Token& t = peek();
    if (has() && (t.kind == TokenKind::kIdentifier ||
                  t.kind == TokenKind::kQuotedIdentifier)) {
      advance();
      return Identifier{t.text, t.quote};
    }
    return std::nullopt;
  }

  Query parse_query(StatementSpans* spans) {
    Query query;
    query.arms.push_back(parse_core(spans));
    while (peek_keyword("UNION") || peek_keyword("INTERSECT") ||
           peek_keyword("EXCEPT")) {
      std::string op = to_upper(advance().text);
      if (op == "UNION" && accept_keyword("ALL")) op += " ALL";
      query.set_ops.push_back(std::move(op));
      query.arms.push_back(parse_core(spans));
    }
    if (accept_keyword("ORDER")) {
      expect_keyword("BY");
      do {
        OrderItem item;
        item.expr = parse_or();
        if (accept_keyword("ASC")) {
          item.direction = "ASC";
        } else if (accept_keyword("DESC")) {
          item.direction = "DESC";
        }
        query.order_by.push_back(std::move(item));
      } while (accept_kind(TokenKind::kComma));
    }
    if (accept_keyword("LIMIT")) {
      query.limit = parse_or();
      if (accept_keyword("OFFSET")) {
        query.offset = parse_or();
      } else if (accept_kind(TokenKind::kComma)) {
        query.offset = parse_or();
        query.limit_comma = true;
      }
    }
    return query;
  }

  SelectCore parse_core(StatementSpans* spans) {
    expect_keyword("SELECT");
    SelectCore core;
    if (accept_keyword("DISTINCT")) {
      core.distinct = true;
    } else {
      accept_keyword("ALL");
    }
    do {
      SelectItem item;
      if (peek_operator("*")) {
        advance();
        item.expr.kind = ExprKind::kStar;
      } else {
        item.expr = parse_or();
        item.alias = parse_alias(&item.as_keyword);
      }
      core.items.push_back(std::move(item));
    } while (accept_kind(TokenKind::kComma));

    if (accept_keyword("FROM")) {
      core.from.push_back(parse_table_ref("", spans));
      while (true) {
        if (accept_kind(TokenKind::kComma)) {
          core.from.push_back(parse_table_ref(",", spans));
          continue;
        }
        std::string join = parse_join_keyword();
        if (join.empty()) break;
        TableRef ref = parse_table_ref(join, spans);
        if (accept_keyword("ON")) ref.on = parse_or();
        core.from.push_back(std::move(ref));
      }
    }
    if (peek_keyword("WHERE")) {
      const std::size_t where_begin = peek().begin;
      advance();
      core.where = parse_or();
      if (spans != nullptr && !spans->where_keyword) {
        spans->where_keyword = where_begin;
        spans->where_condition_end = last_end_;
      }
    }
    if (accept_keyword("GROUP")) {
      expect_keyword("BY");
      do {
        core.group_by.push_back(parse_or());
      } while (accept_kind(TokenKind::kComma));
    }
    if (accept_keyword("HAVING")) core.having = parse_or();
    return core;
  }

  std::string parse_join_keyword() {
    std::string join;
    auto append = [&join](const std::string& word) {
      if (!join.empty()) join += ' ';
      join += word;
    };
    const std::size_t save = pos_;
    const std::size_t save_end = last_end_;
    if (accept_keyword("NATURAL")) append("NATURAL");
    if (peek_keyword("LEFT") || peek_keyword("RIGHT") || peek_keyword("FULL")) {
      append(to_upper(advance().text));
      if (accept_keyword("OUTER")) append("OUTER");
    } else if (peek_keyword("INNER") || peek_keyword("CROSS")) {
      append(to_upper(advance().text));
    }
    if (accept_keyword("JOIN")) {
      append("JOIN");
      return join;
    }
    pos_ = save;
    last_end_ = save_end;
    return "";
  }

  TableRef parse_table_ref(std::string join, StatementSpans* spans) {
    TableRef ref;
    ref.join = std::move(join);
    if (accept_kind(TokenKind::kLParen)) {
      if (!peek_keyword("SELECT")) fail("expected subquery");
      ref.subquery = Box<Query>(parse_query(nullptr));
      expect_kind(TokenKind::kRParen, "')'");
    } else {
      const std::size_t begin = peek().begin;
      ref.name = parse_table_name();
      if (spans != nullptr && !spans->first_table) {
        spans->first_table = Span{begin, last_end_};
      }
    }
    ref.alias = parse_alias(&ref.as_keyword);
    return ref;
  }

  Expr parse_or() {
    Expr lhs = parse_and();
    while (peek_keyword("OR")) {
      advance();
      lhs = binary("OR", std::move(lhs), parse_and());
    }
    return lhs;
  }

  Expr parse_and() {
    Expr lhs = parse_not();
    while (peek_keyword("AND")) {
      advance();
      lhs = binary("AND", std::move(lhs), parse_not());
    }
    return lhs;
  }

  Expr parse_not() {
    if (peek_keyword("NOT") && !peek_keyword("EXISTS", 1)) {
      advance();
      Expr e;
      e.kind = ExprKind::kUnary;
      e.text = "NOT";
      e.args.push_back(parse_not());
      return e;
    }
    return parse_comparison();
  }

  static Expr binary(std::string op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = ExprKind::kBinary;
    e.text = std::move(op);
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

  Expr parse_comparison() {
    Expr lhs = parse_additive();
    while (has()) {
      const Token& t = peek();
      if (t.kind == TokenKind::kOperator &&
          (t.text == "=" || t.text == "==" || t.text == "!=" ||
           t.text == "<>" || t.text == "<" || t.text == ">" ||
           t.text == "<=" || t.text == ">=")) {
        std::string op = advance().text;
        lhs = binary(std::move(op), std::move(lhs), parse_additive());
        continue;
      }
      if (t.is_keyword("IS")) {
        advance();
        const bool negated = accept_keyword("NOT");
        if (accept_keyword("NULL")) {
          Expr e;
          e.kind = ExprKind::kIsNull;
          e.negated = negated;
          e.args.push_back(std::move(lhs));
          lhs = std::move(e);
        } else {
          lhs = binary("IS", std::move(lhs), parse_additive());
          lhs.negated = negated;
        }
        continue;
      }
      bool negated = false;
      std::size_t k = 0;
      if (t.is_keyword("NOT")) {
        negated = true;
        k = 1;
      }
      if (peek_keyword("IN", k)) {
        pos_ += k;
        advance();
        lhs = parse_in(std::move(lhs), negated);
        continue;
      }
      if (peek_keyword("LIKE", k) || peek_keyword("GLOB", k)) {
        pos_ += k;
        std::string op = to_upper(advance().text);
        lhs = binary(std::move(op), std::move(lhs), parse_additive());
        lhs.negated = negated;
        continue;
      }
      if (peek_keyword("BETWEEN", k)) {
        pos_ += k;
        advance();
        Expr e;
        e.kind = ExprKind::kBetween;
        e.negated = negated;
        e.args.push_back(std::move(lhs));
        e.args.push_back(parse_additive());
        expect_keyword("AND");
        e.args.push_back(parse_additive());
        lhs = std::move(e);
        continue;
      }
      break;
    }
    return lhs;
  }

  Expr parse_in(Expr lhs, bool negated) {
    expect_kind(TokenKind::kLParen, "'(' after IN");
    Expr e;
    e.negated = negated;
    e.args.push_back(std::move(lhs));
    if (peek_keyword("SELECT")) {
      e.kind = ExprKind::kInSubquery;
      e.subquery = Box<Query>(parse_query(nullptr));
    } else {
      e.kind = ExprKind::kInList;
      if (!peek_kind(TokenKind::kRParen)) {
        do {
          e.args.push_back(parse_or());
        } while (accept_kind(TokenKind::kComma));
      }
    }
    expect_kind(TokenKind::kRParen, "')'");
    return e;
  }

  Expr parse_additive() {
    Expr lhs = parse_multiplicative();
    while (peek_operator("+") || peek_operator("-")) {
      std::string op = advance().text;
      lhs = binary(std::move(op), std::move(lhs), parse_multiplicative());
    }
    return lhs;
  }

  Expr parse_multiplicative() {
    Expr lhs = parse_concat();
    while (peek_operator("*") || peek_operator("/") || peek_operator("%")) {
      std::string op = advance().text;
      lhs = binary(std::move(op), std::move(lhs), parse_concat());
    }
    return lhs;
  }

  Expr parse_concat() {
    Expr lhs = parse_unary();
    while (peek_operator("||")) {
      advance();
      lhs = binary("||", std::move(lhs), parse_unary());
    }
    return lhs;
  }

  Expr parse_unary() {
    if (peek_operator("-") || peek_operator("+") || peek_operator("~")) {
      Expr e;
      e.kind = ExprKind::kUnary;
      e.text = advance().text;
      e.args.push_back(parse_unary());
      return e;
    }
    return parse_primary();
  }

  Expr parse_primary() {
    if (!has()) fail("expected expression");
    const Token& t = peek();
    Expr e;
    switch (t.kind) {
      case TokenKind::kNumber:
        advance();
        e.kind = ExprKind::kLiteral;
        e.literal = LiteralKind::kNumber;
        e.text = t.text;
        return e;
      case TokenKind::kString:
        advance();
        e.kind = ExprKind::kLiteral;
        e.literal = LiteralKind::kString;
        e.text = t.text;
        e.quote = t.quote;
        return e;
      case TokenKind::kVariable:
        advance();
        e.kind = ExprKind::kVariable;
        e.text = t.text;
        return e;
      case TokenKind::kLParen: {
        advance();
        if (peek_keyword("SELECT")) {
          e.kind = ExprKind::kSubquery;
          e.subquery = Box<Query>(parse_query(nullptr));
        } else {
          e.kind = ExprKind::kParen;
          e.args.push_back(parse_or());
        }
        expect_kind(TokenKind::kRParen, "')'");
        return e;
      }
      case TokenKind::kIdentifier:
      case TokenKind::kQuotedIdentifier:
        return parse_name_or_call();
      case TokenKind::kKeyword:
        break;
      default:
        fail("expected expression");
    }

    const std::string kw = to_upper(t.text);
    if (kw == "NULL" || kw == "TRUE" || kw == "FALSE") {
      advance();
      e.kind = ExprKind::kLiteral;
      e.literal = kw == "NULL"   ? LiteralKind::kNull
                  : kw == "TRUE" ? LiteralKind::kTrue
                                 : LiteralKind::kFalse;
      e.text = kw;
      return e;
    }
    if (kw == "NOT" || kw == "EXISTS") {
      e.negated = accept_keyword("NOT");
      expect_keyword("EXISTS");
      expect_kind(TokenKind::kLParen, "'(' after EXISTS");
      e.kind = ExprKind::kExists;
      e.subquery = Box<Query>(parse_query(nullptr));
      expect_kind(TokenKind::kRParen, "')'");
      return e;
    }
    if (kw == "CAST") {
      advance();
      expect_kind(TokenKind::kLParen, "'(' after CAST");
      e.kind = ExprKind::kCast;
      e.args.push_back(parse_or());
      expect_keyword("AS");
      e.text = parse_type_name();
      expect_kind(TokenKind::kRParen, "')'");
      return e;
    }
    if (kw == "CASE") {
      advance();
      e.kind = ExprKind::kCase;
      if (!peek_keyword("WHEN")) {
        e.has_operand = true;
        e.args.push_back(parse_or());
      }
      if (!peek_keyword("WHEN")) fail("expected WHEN");
      while (accept_keyword("WHEN")) {
        e.args.push_back(parse_or());
        expect_keyword("THEN");
        e.args.push_back(parse_or());
      }
      if (accept_keyword("ELSE")) {
        e.has_else = true;
        e.args.push_back(parse_or());
      }
      expect_keyword("END");
      return e;
    }
    if ((kw == "LEFT" || kw == "RIGHT" || kw == "REPLACE") &&
        peek_kind(TokenKind::kLParen, 1)) {
      return parse_name_or_call();
    }
    fail("unexpected keyword");
  }

  std::string parse_type_name() {
    std::string type;
    int depth = 0;
    while (has()) {
      const Token& t = peek();
      if (t.kind == TokenKind::kRParen && depth == 0) break;
      if (t.kind == TokenKind::kLParen) ++depth;
      if (t.kind == TokenKind::kRParen) --depth;
      const bool tight = t.kind == TokenKind::kLParen ||
                         t.kind == TokenKind::kRParen ||
                         t.kind == TokenKind::kComma ||
                         (!type.empty() && type.back() == '(');
      if (!type.empty() && !tight) type += ' ';
      type += t.kind == TokenKind::kKeyword ? to_upper(t.text) : t.text;
      advance();
    }
    if (type.empty()) fail("expected type name");
    return type;
  }

  Expr parse_name_or_call() {
    const Token& first = advance();
    Identifier id{first.text, first.quote};
    Expr e;
    if (first.kind != TokenKind::kQuotedIdentifier &&
        peek_kind(TokenKind::kLParen)) {
      advance();
      e.kind = ExprKind::kFunction;
      e.text = first.text;
      if (peek_operator("*")) {
        advance();
        e.star_arg = true;
      } else if (!peek_kind(TokenKind::kRParen)) {
        e.distinct = accept_keyword("DISTINCT");
        do {
          e.args.push_back(parse_or());
        } while (accept_kind(TokenKind::kComma));
      }
      expect_kind(TokenKind::kRParen, "')'");
      return e;
    }
    if (peek_kind(TokenKind::kDot)) {
      advance();
      if (peek_operator("*")) {
        advance();
        e.kind = ExprKind::kStar;
        e.qualifier = id;
        return e;
      }
      const Token& second = peek();
      if (second.kind != TokenKind::kIdentifier &&
          second.kind != TokenKind::kQuotedIdentifier) {
        fail("expected column name after '.'");
      }
      advance();
      e.kind = ExprKind::kColumn;
      e.qualifier = id;
      e.name = Identifier{second.text, second.quote};
      return e;
    }
    e.kind = ExprKind::kColumn;
    e.name = id;
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t last_end_ = 0;
};

bool is_blank(std::string_view s) {
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

AstKind SqlAst::kind() const {
  if (degraded) return AstKind::kOther;
  if (statements.size() >= 2) return AstKind::kMultiStatement;
  if (statements.size() == 1 &&
      statements[0].kind == StatementKind::kSelect) {
    return statements[0].query.arms.size() > 1 ? AstKind::kCompound
                                               : AstKind::kSelect;
  }
  return AstKind::kOther;
}

bool operator==(const SqlAst& a, const SqlAst& b) {
  if (a.degraded != b.degraded) return false;
  if (a.degraded) return a.raw == b.raw;
  return a.statements == b.statements && a.terminated == b.terminated &&
         a.trailing_comment == b.trailing_comment;
}

SqlAst parse(std::string_view sql) {
  if (is_blank(sql)) {
    throw Error(ErrorCode::kEmptyInput, "cannot parse empty SQL input");
  }
  SqlAst ast;
  ast.raw = std::string(sql);
  LexResult lexed = lex(sql);

  std::vector<Token> tokens;
  tokens.reserve(lexed.tokens.size());
  for (const Token& t : lexed.tokens) {
    if (t.kind != TokenKind::kComment) tokens.push_back(t);
  }
  if (!lexed.tokens.empty()) {
    const Token& last = lexed.tokens.back();
    if (last.kind == TokenKind::kComment && last.text.rfind("--", 0) == 0) {
      ast.trailing_comment = comment_body(last);
    }
  }

  if (!lexed.clean) {
    ast.degraded = true;
    ast.parse_error = "lexical error";
    return ast;
  }
  try {
    Parser parser(std::move(tokens));
    parser.parse_statements(ast);
    if (ast.statements.empty()) {
      throw ParseFailure{"no statement found"};
    }
  } catch (const ParseFailure& failure) {
    ast.degraded = true;
    ast.parse_error = failure.message;
    ast.statements.clear();
    ast.spans.clear();
    ast.terminated = false;
  }
  return ast;
}

std::optional<Expr> parse_expression(const std::vector<Token>& tokens,
                                     std::size_t begin,
                                     std::size_t* consumed) {
  std::vector<Token> slice;
  for (std::size_t i = begin; i < tokens.size(); ++i) {
    if (tokens[i].kind != TokenKind::kComment) slice.push_back(tokens[i]);
  }
  try {
    Parser parser(std::move(slice));
    Expr e = parser.parse_expr_only();
    if (consumed != nullptr) *consumed = parser.position();
    return e;
  } catch (const ParseFailure&) {
    return std::nullopt;
  }
}

}  // namespace sqlpoison
