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

#include "sqlpoison/sql_model.h"

#include <charconv>
#include <cstdlib>
#include <functional>

#include "sqlpoison/error.h"

namespace sqlpoison {

namespace {

std::string quote_text(std::string_view body, char open) {
  const char close = open == '[' ? ']' : open;
  std::string out(1, open);
  for (char c : body) {
    if (c == close && open != '[') out.push_back(c);
    out.push_back(c);
  }
  out.push_back(close);
  return out;
}

std::string render(const Identifier& id) {
  return id.quoted() ? quote_text(id.name, id.quote) : id.name;
}

void append_query(const Query& query, std::string& out);

void append_expr(const Expr& e, std::string& out) {
  auto join_args = [&out](const std::vector<Expr>& args, std::size_t from) {
    for (std::size_t i = from; i < args.size(); ++i) {
      if (i > from) out += ", ";
      append_expr(args[i], out);
    }
  };
  switch (e.kind) {
    case ExprKind::kColumn:
      if (!e.qualifier.empty()) out += render(e.qualifier) + ".";
      out += render(e.name);
      return;
    case ExprKind::kStar:
      if (!e.qualifier.empty()) out += render(e.qualifier) + ".";
      out += "*";
      return;
    case ExprKind::kLiteral:
      if (e.literal == LiteralKind::kString) {
        out += quote_text(e.text, e.quote == 0 ? '\'' : e.quote);
      } else {
        out += e.text;
      }
      return;
    case ExprKind::kVariable:
      out += e.text;
      return;
    case ExprKind::kUnary:
      out += e.text;
      if (e.text == "NOT") out += ' ';
      append_expr(e.args[0], out);
      return;
    case ExprKind::kBinary:
      append_expr(e.args[0], out);
      out += ' ';
      if (e.text == "IS") {
        out += e.negated ? "IS NOT" : "IS";
      } else {
        if (e.negated) out += "NOT ";
        out += e.text;
      }
      out += ' ';
      append_expr(e.args[1], out);
      return;
    case ExprKind::kBetween:
      append_expr(e.args[0], out);
      out += e.negated ? " NOT BETWEEN " : " BETWEEN ";
      append_expr(e.args[1], out);
      out += " AND ";
      append_expr(e.args[2], out);
      return;
    case ExprKind::kInList:
      append_expr(e.args[0], out);
      out += e.negated ? " NOT IN (" : " IN (";
      join_args(e.args, 1);
      out += ")";
      return;
    case ExprKind::kInSubquery:
      append_expr(e.args[0], out);
      out += e.negated ? " NOT IN (" : " IN (";
      append_query(*e.subquery, out);
      out += ")";
      return;
    case ExprKind::kExists:
      out += e.negated ? "NOT EXISTS (" : "EXISTS (";
      append_query(*e.subquery, out);
      out += ")";
      return;
    case ExprKind::kIsNull:
      append_expr(e.args[0], out);
      out += e.negated ? " IS NOT NULL" : " IS NULL";
      return;
    case ExprKind::kFunction:
      out += e.text + "(";
      if (e.star_arg) {
        out += "*";
      } else {
        if (e.distinct) out += "DISTINCT ";
        join_args(e.args, 0);
      }
      out += ")";
      return;
    case ExprKind::kSubquery:
      out += "(";
      append_query(*e.subquery, out);
      out += ")";
      return;
    case ExprKind::kCast:
      out += "CAST(";
      append_expr(e.args[0], out);
      out += " AS " + e.text + ")";
      return;
    case ExprKind::kCase: {
      out += "CASE";
      std::size_t i = 0;
      if (e.has_operand) {
        out += ' ';
        append_expr(e.args[i++], out);
      }
      const std::size_t stop = e.has_else ? e.args.size() - 1 : e.args.size();
      for (; i + 1 < stop; i += 2) {
        out += " WHEN ";
        append_expr(e.args[i], out);
        out += " THEN ";
        append_expr(e.args[i + 1], out);
      }
      if (e.has_else) {
        out += " ELSE ";
        append_expr(e.args.back(), out);
      }
      out += " END";
      return;
    }
    case ExprKind::kParen:
      out += "(";
      append_expr(e.args[0], out);
      out += ")";
      return;
  }
}

void append_alias(const std::optional<Identifier>& alias, bool as_keyword,
                  std::string& out) {
  if (!alias) return;
  out += as_keyword ? " AS " : " ";
  out += render(*alias);
}

void append_core(const SelectCore& core, std::string& out) {
  out += core.distinct ? "SELECT DISTINCT " : "SELECT ";
  for (std::size_t i = 0; i < core.items.size(); ++i) {
    if (i > 0) out += ", ";
    append_expr(core.items[i].expr, out);
    append_alias(core.items[i].alias, core.items[i].as_keyword, out);
  }
  if (!core.from.empty()) {
    out += " FROM ";
    for (std::size_t i = 0; i < core.from.size(); ++i) {
      const TableRef& ref = core.from[i];
      if (i > 0) {
        out += ref.join == "," ? ", " : " " + ref.join + " ";
      }
      if (ref.subquery) {
        out += "(";
        append_query(*ref.subquery, out);
        out += ")";
      } else {
        out += render(ref.name);
      }
      append_alias(ref.alias, ref.as_keyword, out);
      if (ref.on) {
        out += " ON ";
        append_expr(*ref.on, out);
      }
    }
  }
  if (core.where) {
    out += " WHERE ";
    append_expr(*core.where, out);
  }
  if (!core.group_by.empty()) {
    out += " GROUP BY ";
    for (std::size_t i = 0; i < core.group_by.size(); ++i) {
      if (i > 0) out += ", ";
      append_expr(core.group_by[i], out);
    }
  }
  if (core.having) {
    out += " HAVING ";
    append_expr(*core.having, out);
  }
}

void append_query(const Query& query, std::string& out) {
  for (std::size_t i = 0; i < query.arms.size(); ++i) {
    if (i > 0) out += " " + query.set_ops[i - 1] + " ";
    append_core(query.arms[i], out);
  }
  if (!query.order_by.empty()) {
    out += " ORDER BY ";
    for (std::size_t i = 0; i < query.order_by.size(); ++i) {
      if (i > 0) out += ", ";
      append_expr(query.order_by[i].expr, out);
      if (!query.order_by[i].direction.empty()) {
        out += " " + query.order_by[i].direction;
      }
    }
  }
  if (query.limit) {
    out += " LIMIT ";
    append_expr(*query.limit, out);
    if (query.offset) {
      out += query.limit_comma ? ", " : " OFFSET ";
      append_expr(*query.offset, out);
    }
  }
}

std::string canonical_number(std::string_view text) {
  bool integral = !text.empty();
  for (char c : text) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      integral = false;
      break;
    }
  }
  if (integral) {
    const std::size_t nz = text.find_first_not_of('0');
    return nz == std::string_view::npos ? "0" : std::string(text.substr(nz));
  }
  const std::string owned(text);
  char* end = nullptr;
  const double value = std::strtod(owned.c_str(), &end);
  if (end == owned.c_str()) return owned;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string normalize_operator(const std::string& op) {
  if (op == "==") return "=";
  if (op == "<>") return "!=";
  return op;
}

void normalize_tokens(std::string_view sql, std::vector<NormToken>& out) {
  const LexResult lexed = lex(sql);
  const auto& toks = lexed.tokens;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    switch (t.kind) {
      case TokenKind::kKeyword:
        out.push_back({NormTokenKind::kKeyword, to_upper(t.text)});
        break;
      case TokenKind::kIdentifier:
        if (i + 1 < toks.size() && toks[i + 1].kind == TokenKind::kLParen) {
          out.push_back({NormTokenKind::kFunction, to_lower(t.text)});
        } else {
          out.push_back({NormTokenKind::kIdentifier, to_lower(t.text)});
        }
        break;
      case TokenKind::kQuotedIdentifier:
        out.push_back({NormTokenKind::kIdentifier, to_lower(t.text)});
        break;
      case TokenKind::kString:
        out.push_back({NormTokenKind::kString, quote_text(t.text, '\'')});
        break;
      case TokenKind::kNumber:
        out.push_back({NormTokenKind::kNumber, canonical_number(t.text)});
        break;
      case TokenKind::kVariable:
        out.push_back({NormTokenKind::kVariable, to_lower(t.text)});
        break;
      case TokenKind::kComment:
        out.push_back({NormTokenKind::kComment, "--"});
        normalize_tokens(comment_body(t), out);
        break;
      case TokenKind::kOperator:
        out.push_back({NormTokenKind::kPunct, normalize_operator(t.text)});
        break;
      default:
        out.push_back({NormTokenKind::kPunct, t.text});
        break;
    }
  }
}

bool is_blank(std::string_view s) {
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// Visits every expression reachable from a query, descending into
// subqueries when deep is true.
void visit_query(const Query& q, bool deep,
                 const std::function<void(const Expr&)>& fn);

void visit_expr(const Expr& e, bool deep,
                const std::function<void(const Expr&)>& fn) {
  fn(e);
  for (const Expr& arg : e.args) visit_expr(arg, deep, fn);
  if (deep && e.subquery) visit_query(*e.subquery, deep, fn);
}

void visit_query(const Query& q, bool deep,
                 const std::function<void(const Expr&)>& fn) {
  for (const SelectCore& core : q.arms) {
    for (const SelectItem& item : core.items) visit_expr(item.expr, deep, fn);
    for (const TableRef& ref : core.from) {
      if (deep && ref.subquery) visit_query(*ref.subquery, deep, fn);
      if (ref.on) visit_expr(*ref.on, deep, fn);
    }
    if (core.where) visit_expr(*core.where, deep, fn);
    for (const Expr& g : core.group_by) visit_expr(g, deep, fn);
    if (core.having) visit_expr(*core.having, deep, fn);
  }
  for (const OrderItem& o : q.order_by) visit_expr(o.expr, deep, fn);
  if (q.limit) visit_expr(*q.limit, deep, fn);
  if (q.offset) visit_expr(*q.offset, deep, fn);
}

bool any_where(const Query& q) {
  bool found = false;
  for (const SelectCore& core : q.arms) {
    if (core.where) found = true;
    for (const TableRef& ref : core.from) {
      if (ref.subquery && any_where(*ref.subquery)) found = true;
    }
  }
  if (found) return true;
  visit_query(q, false, [&found](const Expr& e) {
    if (e.subquery && any_where(*e.subquery)) found = true;
  });
  return found;
}

}  // namespace

bool is_aggregate_function(std::string_view name) {
  const std::string lower = to_lower(name);
  return lower == "count" || lower == "sum" || lower == "avg" ||
         lower == "min" || lower == "max" || lower == "group_concat" ||
         lower == "total";
}

std::string serialize(const Expr& expr) {
  std::string out;
  append_expr(expr, out);
  return out;
}

std::string serialize(const Query& query) {
  std::string out;
  append_query(query, out);
  return out;
}

std::string serialize(const SqlAst& ast) {
  if (ast.degraded) return ast.raw;
  std::string out;
  for (std::size_t i = 0; i < ast.statements.size(); ++i) {
    const Statement& st = ast.statements[i];
    if (i > 0) out += "; ";
    switch (st.kind) {
      case StatementKind::kSelect:
        append_query(st.query, out);
        break;
      case StatementKind::kDropTable:
        out += st.if_exists ? "DROP TABLE IF EXISTS " : "DROP TABLE ";
        out += render(st.table);
        break;
      case StatementKind::kShutdown:
        out += "SHUTDOWN";
        break;
    }
  }
  if (ast.terminated) out += ";";
  if (ast.trailing_comment) out += " --" + *ast.trailing_comment;
  return out;
}

std::set<std::string> SqlTokenSeq::token_set() const {
  std::set<std::string> out;
  for (const NormToken& t : tokens) out.insert(t.text);
  return out;
}

std::vector<std::string> SqlTokenSeq::texts() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const NormToken& t : tokens) out.push_back(t.text);
  return out;
}

SqlTokenSeq tokenize(std::string_view sql) {
  SqlTokenSeq seq;
  if (is_blank(sql)) return seq;
  normalize_tokens(sql, seq.tokens);
  seq.degraded = parse(sql).degraded;
  return seq;
}

std::string SqlSkeleton::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i].text;
    if (i > 0) {
      const std::string& prev = tokens[i - 1].text;
      const bool tight = t == ")" || t == "," || t == "." || t == ";" ||
                         prev == "(" ||
                         prev == "." ||
                         (t == "(" &&
                          tokens[i - 1].kind == NormTokenKind::kFunction);
      if (!tight) out += ' ';
    }
    out += t;
  }
  return out;
}

SqlSkeleton extract_skeleton(const SqlAst& ast) {
  if (ast.degraded) {
    throw Error(ErrorCode::kSkeletonUnavailable,
                "skeleton unavailable for unparsed SQL: " + ast.parse_error);
  }
  std::vector<NormToken> norm;
  normalize_tokens(serialize(ast), norm);

  SqlSkeleton skeleton;
  const std::string placeholder(kSkeletonPlaceholder);
  for (std::size_t i = 0; i < norm.size(); ++i) {
    const NormToken& t = norm[i];
    switch (t.kind) {
      case NormTokenKind::kIdentifier:
      case NormTokenKind::kString:
      case NormTokenKind::kNumber:
      case NormTokenKind::kVariable: {
        // qualifier.column collapses into a single placeholder
        while (t.kind == NormTokenKind::kIdentifier && i + 2 < norm.size() &&
               norm[i + 1].text == "." &&
               norm[i + 2].kind == NormTokenKind::kIdentifier) {
          i += 2;
        }
        skeleton.tokens.push_back({NormTokenKind::kIdentifier, placeholder});
        break;
      }
      default:
        skeleton.tokens.push_back(t);
        break;
    }
  }
  return skeleton;
}

ClauseProfile clause_profile(const SqlAst& ast) {
  ClauseProfile profile;
  if (ast.degraded) return profile;
  profile.is_multi_statement = ast.statements.size() >= 2;
  for (std::size_t s = 0; s < ast.statements.size(); ++s) {
    const Statement& st = ast.statements[s];
    if (st.kind != StatementKind::kSelect) continue;
    const Query& q = st.query;
    if (any_where(q)) profile.has_where_anywhere = true;
    if (s != 0) continue;
    profile.has_set_op = q.arms.size() > 1;
    profile.has_order_by = !q.order_by.empty();
    profile.has_limit = q.limit.has_value();
    for (const SelectCore& core : q.arms) {
      if (core.where) profile.has_where_top_level = true;
      if (!core.from.empty()) profile.has_from = true;
      if (!core.group_by.empty()) profile.has_group_by = true;
      if (core.having) profile.has_having = true;
      for (const SelectItem& item : core.items) {
        visit_expr(item.expr, false, [&profile](const Expr& e) {
          if (e.kind == ExprKind::kFunction && is_aggregate_function(e.text)) {
            profile.has_aggregate = true;
          }
        });
      }
    }
  }
  return profile;
}

}  // namespace sqlpoison
