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

#ifndef SQLPOISON_AST_H_
#define SQLPOISON_AST_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sqlpoison {

// Nullable owning pointer with value semantics: copies are deep and equality
// compares the pointees.
template <typename T>
class Box {
 public:
  Box() = default;
  explicit Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other)
      : ptr_(other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) {
      ptr_ = other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr;
    }
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  explicit operator bool() const { return ptr_ != nullptr; }
  const T& operator*() const { return *ptr_; }
  T& operator*() { return *ptr_; }
  const T* operator->() const { return ptr_.get(); }
  T* operator->() { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) {
    if (!a.ptr_ || !b.ptr_) return !a.ptr_ && !b.ptr_;
    return *a.ptr_ == *b.ptr_;
  }

 private:
  std::unique_ptr<T> ptr_;
};

struct Identifier {
  std::string name;  // as written, without quotes
  char quote = 0;    // 0 when unquoted; otherwise the opening quote character

  bool quoted() const { return quote != 0; }
  bool empty() const { return name.empty(); }
  friend bool operator==(const Identifier&, const Identifier&) = default;
};

struct Query;

enum class ExprKind {
  kColumn,      // [qualifier.]name
  kStar,        // * or qualifier.*
  kLiteral,
  kVariable,    // @@version
  kUnary,       // op applied to args[0]
  kBinary,      // args[0] op args[1]
  kBetween,     // args[0] [NOT] BETWEEN args[1] AND args[2]
  kInList,      // args[0] [NOT] IN (args[1..])
  kInSubquery,  // args[0] [NOT] IN (subquery)
  kExists,      // [NOT] EXISTS (subquery)
  kIsNull,      // args[0] IS [NOT] NULL
  kFunction,    // name(args) / name(*) / name(DISTINCT args)
  kSubquery,    // (subquery)
  kCast,        // CAST(args[0] AS text)
  kCase,        // CASE [operand] WHEN .. THEN .. [ELSE ..] END
  kParen,       // (args[0])
};

enum class LiteralKind { kNumber, kString, kNull, kTrue, kFalse };

struct Expr {
  ExprKind kind = ExprKind::kLiteral;
  // Operator for unary/binary (upper-cased words, symbols verbatim), function
  // name as written, literal text (unquoted body for strings), variable name,
  // or cast type name.
  std::string text;
  Identifier qualifier;
  Identifier name;
  LiteralKind literal = LiteralKind::kNumber;
  char quote = 0;  // string literal quote character
  bool negated = false;
  bool distinct = false;
  bool star_arg = false;     // count(*)
  bool has_operand = false;  // CASE x WHEN ...
  bool has_else = false;
  std::vector<Expr> args;
  Box<Query> subquery;

  friend bool operator==(const Expr&, const Expr&) = default;
};

struct SelectItem {
  Expr expr;
  std::optional<Identifier> alias;
  bool as_keyword = false;
  friend bool operator==(const SelectItem&, const SelectItem&) = default;
};

struct TableRef {
  // Empty for the first item of a FROM clause; otherwise "," or the
  // upper-cased join keywords ("JOIN", "LEFT JOIN", ...).
  std::string join;
  Identifier name;
  Box<Query> subquery;
  std::optional<Identifier> alias;
  bool as_keyword = false;
  std::optional<Expr> on;
  friend bool operator==(const TableRef&, const TableRef&) = default;
};

struct SelectCore {
  bool distinct = false;
  std::vector<SelectItem> items;
  std::vector<TableRef> from;
  std::optional<Expr> where;
  std::vector<Expr> group_by;
  std::optional<Expr> having;
  friend bool operator==(const SelectCore&, const SelectCore&) = default;
};

struct OrderItem {
  Expr expr;
  std::string direction;  // "", "ASC" or "DESC"
  friend bool operator==(const OrderItem&, const OrderItem&) = default;
};

struct Query {
  std::vector<SelectCore> arms;
  std::vector<std::string> set_ops;  // arms.size() - 1 entries, e.g. "UNION ALL"
  std::vector<OrderItem> order_by;
  std::optional<Expr> limit;
  std::optional<Expr> offset;
  bool limit_comma = false;  // LIMIT offset, count
  friend bool operator==(const Query&, const Query&) = default;
};

enum class StatementKind { kSelect, kDropTable, kShutdown };

struct Statement {
  StatementKind kind = StatementKind::kSelect;
  Query query;       // kSelect
  Identifier table;  // kDropTable
  bool if_exists = false;
  friend bool operator==(const Statement&, const Statement&) = default;
};

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

// Offsets into SqlAst::raw for one top-level statement. Only the outermost
// query level is mapped.
struct StatementSpans {
  Span statement;
  std::optional<std::size_t> where_keyword;    // start of the outermost WHERE
  std::optional<std::size_t> where_condition_end;
  std::optional<Span> first_table;             // first named table in FROM
};

enum class AstKind { kSelect, kCompound, kMultiStatement, kOther };

struct SqlAst {
  std::string raw;
  bool degraded = false;
  std::string parse_error;  // set when degraded
  std::vector<Statement> statements;
  bool terminated = false;  // last statement followed by ';'
  std::optional<std::string> trailing_comment;  // body after "--"
  std::vector<StatementSpans> spans;            // parallel to statements

  AstKind kind() const;

  // Structural equality: raw text and spans are ignored unless degraded.
  friend bool operator==(const SqlAst& a, const SqlAst& b);
};

}  // namespace sqlpoison

#endif  // SQLPOISON_AST_H_
