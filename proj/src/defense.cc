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

#include "sqlpoison/defense.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <climits>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sqlpoison/error.h"
#include "sqlpoison/lexer.h"
#include "sqlpoison/parallel.h"
#include "sqlpoison/payload.h"
#include "sqlpoison/sql_model.h"
#include "sqlpoison/version.h"

namespace sqlpoison {

namespace {

using ordered_json = nlohmann::ordered_json;
using Kind = FoldedValue::Kind;

// Keep in sync with data/detection_rules.json.
constexpr const char* kDefaultRules = R"json({
  "version": "1.0",
  "rules": [
    {"id": "R1", "name": "comment-truncation", "severity": "high"},
    {"id": "R2", "name": "time-function", "severity": "high",
     "functions": ["SLEEP", "BENCHMARK", "PG_SLEEP"], "keywords": ["WAITFOR"]},
    {"id": "R3", "name": "stacked-statement", "severity": "critical",
     "keywords": ["DROP", "SHUTDOWN", "ALTER", "DELETE", "INSERT", "UPDATE",
                  "CREATE", "TRUNCATE", "EXEC"]},
    {"id": "R4", "name": "always-true-disjunct", "severity": "high"},
    {"id": "R5", "name": "system-variable-cast", "severity": "medium",
     "functions": ["CONVERT", "CAST"]},
    {"id": "R6", "name": "set-operation-exfiltration", "severity": "medium",
     "keywords": ["UNION", "INTERSECT", "EXCEPT"]},
    {"id": "Q1", "name": "rare-leading-word", "severity": "medium"},
    {"id": "Q2", "name": "rare-terminal-punctuation", "severity": "medium"}
  ]
}
)json";

bool listed(const std::vector<std::string>& words, std::string_view token) {
  const std::string upper = to_upper(token);
  return std::find(words.begin(), words.end(), upper) != words.end();
}

// ---- constant folding ----

std::optional<FoldedValue> number_literal(const std::string& text) {
  FoldedValue v;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const bool integral = text.find_first_of(".eE") == std::string::npos;
  if (integral) {
    const auto [ptr, ec] = std::from_chars(first, last, v.integer);
    if (ec == std::errc() && ptr == last) {
      v.kind = Kind::kInteger;
      return v;
    }
  }
  char* end = nullptr;
  v.real = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) return std::nullopt;
  v.kind = Kind::kReal;
  return v;
}

FoldedValue int_value(long long n) {
  FoldedValue v;
  v.kind = Kind::kInteger;
  v.integer = n;
  return v;
}

FoldedValue text_value(std::string s) {
  FoldedValue v;
  v.kind = Kind::kText;
  v.text = std::move(s);
  return v;
}

bool numeric(const FoldedValue& v) {
  return v.kind == Kind::kInteger || v.kind == Kind::kReal;
}

double as_double(const FoldedValue& v) {
  return v.kind == Kind::kInteger ? static_cast<double>(v.integer) : v.real;
}

// Truth value of a non-null folded value; text is left undecided.
std::optional<bool> truth(const FoldedValue& v) {
  if (v.kind == Kind::kInteger) return v.integer != 0;
  if (v.kind == Kind::kReal) return v.real != 0.0;
  return std::nullopt;
}

// Text rendering used by concatenation; reals are not folded.
std::optional<std::string> as_text(const FoldedValue& v) {
  if (v.kind == Kind::kText) return v.text;
  if (v.kind == Kind::kInteger) return std::to_string(v.integer);
  return std::nullopt;
}

// Three-way comparison of non-null values with the engine's ordering for
// values without column affinity: numbers sort before text.
int compare(const FoldedValue& a, const FoldedValue& b) {
  if (numeric(a) && numeric(b)) {
    if (a.kind == Kind::kInteger && b.kind == Kind::kInteger) {
      return a.integer < b.integer ? -1 : a.integer > b.integer ? 1 : 0;
    }
    const double x = as_double(a);
    const double y = as_double(b);
    return x < y ? -1 : x > y ? 1 : 0;
  }
  if (numeric(a)) return -1;
  if (numeric(b)) return 1;
  return a.text < b.text ? -1 : a.text > b.text ? 1 : 0;
}

std::optional<FoldedValue> fold_comparison(const std::string& op,
                                           const FoldedValue& a,
                                           const FoldedValue& b) {
  if (a.kind == Kind::kNull || b.kind == Kind::kNull) return FoldedValue{};
  const int c = compare(a, b);
  if (op == "=" || op == "==") return int_value(c == 0);
  if (op == "!=" || op == "<>") return int_value(c != 0);
  if (op == "<") return int_value(c < 0);
  if (op == ">") return int_value(c > 0);
  if (op == "<=") return int_value(c <= 0);
  if (op == ">=") return int_value(c >= 0);
  return std::nullopt;
}

std::optional<FoldedValue> fold_arithmetic(const std::string& op,
                                           const FoldedValue& a,
                                           const FoldedValue& b) {
  if (a.kind == Kind::kNull || b.kind == Kind::kNull) return FoldedValue{};
  if (!numeric(a) || !numeric(b)) return std::nullopt;
  if (a.kind == Kind::kInteger && b.kind == Kind::kInteger) {
    long long out = 0;
    if (op == "+" && !__builtin_add_overflow(a.integer, b.integer, &out)) return int_value(out);
    if (op == "-" && !__builtin_sub_overflow(a.integer, b.integer, &out)) return int_value(out);
    if (op == "*" && !__builtin_mul_overflow(a.integer, b.integer, &out)) return int_value(out);
    if (op == "/" || op == "%") {
      if (b.integer == 0) return FoldedValue{};
      if (b.integer == -1) return std::nullopt;
      return int_value(op == "/" ? a.integer / b.integer : a.integer % b.integer);
    }
    return std::nullopt;
  }
  if (op == "%") return std::nullopt;
  FoldedValue v;
  v.kind = Kind::kReal;
  const double x = as_double(a);
  const double y = as_double(b);
  if (op == "+") {
    v.real = x + y;
  } else if (op == "-") {
    v.real = x - y;
  } else if (op == "*") {
    v.real = x * y;
  } else if (op == "/") {
    if (y == 0.0) return FoldedValue{};
    v.real = x / y;
  } else {
    return std::nullopt;
  }
  return v;
}

std::optional<FoldedValue> fold_logic(const std::string& op, const Expr& lhs,
                                      const Expr& rhs) {
  const std::optional<FoldedValue> a = fold_constant(lhs);
  const std::optional<FoldedValue> b = fold_constant(rhs);
  auto t = [](const std::optional<FoldedValue>& v) -> std::optional<bool> {
    if (!v || v->kind == Kind::kNull) return std::nullopt;
    return truth(*v);
  };
  const std::optional<bool> ta = t(a);
  const std::optional<bool> tb = t(b);
  // One decided side settles the result whatever the other side holds.
  if (op == "OR" && (ta == true || tb == true)) return int_value(1);
  if (op == "AND" && (ta == false || tb == false)) return int_value(0);
  const bool a_null = a && a->kind == Kind::kNull;
  const bool b_null = b && b->kind == Kind::kNull;
  if ((ta || a_null) && (tb || b_null)) {
    if (a_null || b_null) return FoldedValue{};
    return int_value(op == "OR" ? (*ta || *tb) : (*ta && *tb));
  }
  return std::nullopt;
}

std::optional<FoldedValue> fold_function(const Expr& e) {
  if (e.star_arg || e.distinct) return std::nullopt;
  const std::string name = to_upper(e.text);
  std::vector<FoldedValue> args;
  for (const Expr& a : e.args) {
    std::optional<FoldedValue> v = fold_constant(a);
    if (!v) return std::nullopt;
    args.push_back(std::move(*v));
  }
  if (name == "CONCAT") {
    // Same semantics as the sandbox shim: NULL arguments are skipped.
    std::string out;
    for (const FoldedValue& v : args) {
      if (v.kind == Kind::kNull) continue;
      const std::optional<std::string> s = as_text(v);
      if (!s) return std::nullopt;
      out += *s;
    }
    return text_value(std::move(out));
  }
  if ((name == "LOWER" || name == "UPPER") && args.size() == 1) {
    if (args[0].kind == Kind::kNull) return FoldedValue{};
    if (args[0].kind != Kind::kText) return std::nullopt;
    return text_value(name == "LOWER" ? to_lower(args[0].text)
                                      : to_upper(args[0].text));
  }
  return std::nullopt;
}

// ---- token helpers ----

std::vector<Token> code_tokens(const std::vector<Token>& tokens) {
  std::vector<Token> out;
  for (const Token& t : tokens) {
    if (t.kind != TokenKind::kComment) out.push_back(t);
  }
  return out;
}

bool is_word(const Token& t) {
  return t.kind == TokenKind::kIdentifier || t.kind == TokenKind::kKeyword;
}

bool followed_by_paren(const std::vector<Token>& t, std::size_t i) {
  return i + 1 < t.size() && t[i + 1].kind == TokenKind::kLParen;
}

// Index of the token closing the parenthesis opened at open, or t.size().
std::size_t matching_paren(const std::vector<Token>& t, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < t.size(); ++i) {
    if (t[i].kind == TokenKind::kLParen) ++depth;
    if (t[i].kind == TokenKind::kRParen && --depth == 0) return i;
  }
  return t.size();
}

bool contains_function(const Expr& e, std::string_view upper) {
  if (e.kind == ExprKind::kFunction && to_upper(e.text) == upper) return true;
  for (const Expr& a : e.args) {
    if (contains_function(a, upper)) return true;
  }
  return false;
}

bool contains_string_literal(const Expr& e) {
  if (e.kind == ExprKind::kLiteral && e.literal == LiteralKind::kString) return true;
  for (const Expr& a : e.args) {
    if (contains_string_literal(a)) return true;
  }
  return false;
}

const char* always_true_family(const Expr& e) {
  if (contains_function(e, "CONCAT")) return "concat-equation";
  if (contains_string_literal(e)) return "hash-equation";
  return "tautology";
}

class Detector {
 public:
  Detector(std::string_view sql, const RuleSet& rules)
      : sql_(sql), rules_(rules), tokens_(lex(sql).tokens), code_(code_tokens(tokens_)) {}

  DetectionVerdict run() {
    if (const DetectionRule* r = active("R1")) comment_truncation(*r);
    if (const DetectionRule* r = active("R2")) time_functions(*r);
    if (const DetectionRule* r = active("R3")) stacked_statements(*r);
    if (const DetectionRule* r = active("R4")) always_true_disjuncts(*r);
    if (const DetectionRule* r = active("R5")) system_variable_casts(*r);
    if (const DetectionRule* r = active("R6")) set_operation_heads(*r);
    verdict_.flagged = !verdict_.hits.empty();
    for (const RuleHit& h : verdict_.hits) {
      if (!h.family.empty() &&
          std::find(verdict_.attribution.begin(), verdict_.attribution.end(),
                    h.family) == verdict_.attribution.end()) {
        verdict_.attribution.push_back(h.family);
      }
    }
    return std::move(verdict_);
  }

 private:
  const DetectionRule* active(std::string_view id) const {
    const DetectionRule* r = rules_.find(id);
    return r && r->enabled ? r : nullptr;
  }

  void hit(const DetectionRule& rule, std::size_t begin, std::size_t end,
           std::string family, std::string detail = "") {
    if (detail.empty()) detail = std::string(sql_.substr(begin, end - begin));
    verdict_.hits.push_back(
        RuleHit{rule.id, rule.severity, Span{begin, end}, std::move(detail),
                std::move(family)});
  }

  // A line comment whose body still holds SQL: the query was cut short.
  void comment_truncation(const DetectionRule& rule) {
    for (const Token& t : tokens_) {
      if (t.kind != TokenKind::kComment || t.text.rfind("--", 0) != 0) continue;
      bool sql_like = false;
      for (const Token& b : lex(comment_body(t)).tokens) {
        sql_like = sql_like || b.kind == TokenKind::kKeyword ||
                   b.kind == TokenKind::kOperator;
      }
      if (sql_like) hit(rule, t.begin, t.end, "comment");
    }
  }

  void time_functions(const DetectionRule& rule) {
    for (std::size_t i = 0; i < code_.size(); ++i) {
      const Token& t = code_[i];
      if (!is_word(t)) continue;
      if (listed(rule.functions, t.text) && followed_by_paren(code_, i)) {
        const std::size_t close = matching_paren(code_, i + 1);
        const std::size_t end = close < code_.size() ? code_[close].end : t.end;
        hit(rule, t.begin, end, "delay");
      } else if (listed(rule.keywords, t.text)) {
        hit(rule, t.begin, t.end, "delay");
      }
    }
  }

  void stacked_statements(const DetectionRule& rule) {
    std::vector<std::size_t> heads;
    bool at_head = true;
    for (std::size_t i = 0; i < code_.size(); ++i) {
      if (code_[i].kind == TokenKind::kSemicolon) {
        at_head = true;
        continue;
      }
      if (at_head) heads.push_back(i);
      at_head = false;
    }
    for (std::size_t k = 1; k < heads.size(); ++k) {
      const Token& head = code_[heads[k]];
      if (!is_word(head) || !listed(rule.keywords, head.text)) continue;
      std::size_t end = head.end;
      for (std::size_t i = heads[k];
           i < code_.size() && code_[i].kind != TokenKind::kSemicolon; ++i) {
        end = code_[i].end;
      }
      const std::string upper = to_upper(head.text);
      std::string family = upper == "DROP"       ? "piggyback"
                           : upper == "SHUTDOWN" ? "stored-procedure"
                                                 : "";
      hit(rule, head.begin, end, std::move(family));
    }
  }

  void always_true_disjuncts(const DetectionRule& rule) {
    for (std::size_t i = 0; i < code_.size(); ++i) {
      if (!code_[i].is_keyword("OR")) continue;
      std::size_t consumed = 0;
      const std::optional<Expr> disjunct = parse_expression(code_, i + 1, &consumed);
      if (!disjunct || consumed == 0 || !always_true(*disjunct)) continue;
      hit(rule, code_[i].begin, code_[i + consumed].end,
          always_true_family(*disjunct));
    }
  }

  void system_variable_casts(const DetectionRule& rule) {
    for (std::size_t i = 0; i < code_.size(); ++i) {
      if (!is_word(code_[i]) || !listed(rule.functions, code_[i].text) ||
          !followed_by_paren(code_, i)) {
        continue;
      }
      const std::size_t close = matching_paren(code_, i + 1);
      for (std::size_t j = i + 2; j < close && j < code_.size(); ++j) {
        if (code_[j].kind == TokenKind::kVariable &&
            code_[j].text.rfind("@@", 0) == 0) {
          hit(rule, code_[i].begin,
              close < code_.size() ? code_[close].end : code_.back().end,
              "error-based");
          break;
        }
      }
    }
  }

  // UNION SELECT 1, @@version ...: an appended arm reading no columns.
  void set_operation_heads(const DetectionRule& rule) {
    static const char* const kArmEnd[] = {"FROM",  "WHERE", "GROUP", "ORDER",
                                          "LIMIT", "UNION", "INTERSECT", "EXCEPT"};
    for (std::size_t i = 0; i < code_.size(); ++i) {
      if (code_[i].kind != TokenKind::kKeyword || !listed(rule.keywords, code_[i].text)) {
        continue;
      }
      std::size_t j = i + 1;
      if (j < code_.size() && code_[j].is_keyword("ALL")) ++j;
      while (j < code_.size() && code_[j].kind == TokenKind::kLParen) ++j;
      if (j >= code_.size() || !code_[j].is_keyword("SELECT")) continue;
      ++j;
      bool reads_columns = false;
      std::size_t items = 0;
      std::size_t end = code_[j - 1].end;
      for (; j < code_.size(); ++j) {
        const Token& t = code_[j];
        if (t.kind == TokenKind::kSemicolon || t.kind == TokenKind::kRParen) break;
        if (t.kind == TokenKind::kKeyword &&
            std::any_of(std::begin(kArmEnd), std::end(kArmEnd),
                        [&t](const char* k) { return t.is_keyword(k); })) {
          break;
        }
        if (t.is_keyword("SELECT") || t.kind == TokenKind::kQuotedIdentifier ||
            (t.kind == TokenKind::kIdentifier && !followed_by_paren(code_, j))) {
          reads_columns = true;
        }
        if (t.is_operator("*")) {
          const Token& prev = code_[j - 1];
          if (prev.is_keyword("SELECT") || prev.is_keyword("DISTINCT") ||
              prev.kind == TokenKind::kComma || prev.kind == TokenKind::kDot ||
              prev.kind == TokenKind::kLParen) {
            reads_columns = true;
          }
        }
        ++items;
        end = t.end;
      }
      if (items > 0 && !reads_columns) hit(rule, code_[i].begin, end, "");
    }
  }

  std::string_view sql_;
  const RuleSet& rules_;
  std::vector<Token> tokens_;
  std::vector<Token> code_;
  DetectionVerdict verdict_;
};

std::vector<std::string> upper_list(const nlohmann::json& j, const char* field) {
  std::vector<std::string> out;
  if (!j.contains(field)) return out;
  for (const auto& w : j.at(field)) out.push_back(to_upper(w.get<std::string>()));
  return out;
}

double rate(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ordered_json channel_to_json(const ChannelReport& c) {
  ordered_json hits = ordered_json::object();
  for (const auto& [rule, n] : c.rule_hits) hits[rule] = n;
  return ordered_json{{"detection_rate", c.detection_rate},
                      {"false_positive_rate", c.false_positive_rate},
                      {"poisoned", c.poisoned},
                      {"poisoned_flagged", c.poisoned_flagged},
                      {"clean", c.clean},
                      {"clean_flagged", c.clean_flagged},
                      {"rule_hits", hits},
                      {"evasions", c.evasions},
                      {"false_positives", c.false_positives}};
}

}  // namespace

const DetectionRule* RuleSet::find(std::string_view id) const {
  for (const DetectionRule& r : rules) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::string default_rules_json() { return kDefaultRules; }

const RuleSet& default_rules() {
  static const RuleSet rules = rules_from_json(nlohmann::json::parse(kDefaultRules));
  return rules;
}

RuleSet rules_from_json(const nlohmann::json& json) {
  RuleSet set;
  try {
    set.version = json.at("version").get<std::string>();
    for (const auto& r : json.at("rules")) {
      DetectionRule rule;
      rule.id = r.at("id").get<std::string>();
      rule.name = r.value("name", rule.id);
      rule.severity = r.value("severity", "medium");
      rule.enabled = r.value("enabled", true);
      rule.functions = upper_list(r, "functions");
      rule.keywords = upper_list(r, "keywords");
      set.rules.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("rules: ") + e.what());
  }
  return set;
}

RuleSet load_rules(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  try {
    return rules_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchema, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::optional<FoldedValue> fold_constant(const Expr& e) {
  switch (e.kind) {
    case ExprKind::kLiteral:
      switch (e.literal) {
        case LiteralKind::kNumber:
          return number_literal(e.text);
        case LiteralKind::kString:
          return text_value(e.text);
        case LiteralKind::kNull:
          return FoldedValue{};
        case LiteralKind::kTrue:
          return int_value(1);
        case LiteralKind::kFalse:
          return int_value(0);
      }
      return std::nullopt;
    case ExprKind::kParen:
      return e.args.size() == 1 ? fold_constant(e.args[0]) : std::nullopt;
    case ExprKind::kUnary: {
      if (e.args.size() != 1) return std::nullopt;
      const std::optional<FoldedValue> v = fold_constant(e.args[0]);
      if (!v) return std::nullopt;
      const std::string op = to_upper(e.text);
      if (v->kind == Kind::kNull) return FoldedValue{};
      if (op == "NOT") {
        const std::optional<bool> t = truth(*v);
        if (!t) return std::nullopt;
        return int_value(!*t);
      }
      if (op == "+" && numeric(*v)) return v;
      if (op == "-" && v->kind == Kind::kInteger && v->integer != LLONG_MIN) {
        return int_value(-v->integer);
      }
      if (op == "-" && v->kind == Kind::kReal) {
        FoldedValue r = *v;
        r.real = -r.real;
        return r;
      }
      return std::nullopt;
    }
    case ExprKind::kBinary: {
      if (e.args.size() != 2) return std::nullopt;
      const std::string op = to_upper(e.text);
      if (op == "AND" || op == "OR") return fold_logic(op, e.args[0], e.args[1]);
      const std::optional<FoldedValue> a = fold_constant(e.args[0]);
      const std::optional<FoldedValue> b = fold_constant(e.args[1]);
      if (!a || !b) return std::nullopt;
      if (op == "||") {
        if (a->kind == Kind::kNull || b->kind == Kind::kNull) return FoldedValue{};
        const std::optional<std::string> x = as_text(*a);
        const std::optional<std::string> y = as_text(*b);
        if (!x || !y) return std::nullopt;
        return text_value(*x + *y);
      }
      if (op == "+" || op == "-" || op == "*" || op == "/" || op == "%") {
        return fold_arithmetic(op, *a, *b);
      }
      return fold_comparison(op, *a, *b);
    }
    case ExprKind::kIsNull: {
      if (e.args.size() != 1) return std::nullopt;
      const std::optional<FoldedValue> v = fold_constant(e.args[0]);
      if (!v) return std::nullopt;
      return int_value((v->kind == Kind::kNull) != e.negated);
    }
    case ExprKind::kBetween: {
      if (e.args.size() != 3) return std::nullopt;
      std::vector<FoldedValue> v;
      for (const Expr& a : e.args) {
        std::optional<FoldedValue> f = fold_constant(a);
        if (!f) return std::nullopt;
        v.push_back(std::move(*f));
      }
      // x BETWEEN lo AND hi is (x >= lo) AND (x <= hi) under three-valued logic,
      // so one decided false bound settles it even when the other is NULL.
      auto bound = [&](const FoldedValue& b, bool lower) -> std::optional<bool> {
        if (v[0].kind == Kind::kNull || b.kind == Kind::kNull) return std::nullopt;
        const int c = compare(v[0], b);
        return lower ? c >= 0 : c <= 0;
      };
      const std::optional<bool> lo = bound(v[1], true);
      const std::optional<bool> hi = bound(v[2], false);
      if ((lo && !*lo) || (hi && !*hi)) return int_value(e.negated);
      if (!lo || !hi) return FoldedValue{};
      return int_value(!e.negated);
    }
    case ExprKind::kInList: {
      if (e.args.empty()) return std::nullopt;
      const std::optional<FoldedValue> needle = fold_constant(e.args[0]);
      if (!needle) return std::nullopt;
      if (needle->kind == Kind::kNull) return FoldedValue{};
      bool found = false;
      bool saw_null = false;
      for (std::size_t i = 1; i < e.args.size(); ++i) {
        const std::optional<FoldedValue> v = fold_constant(e.args[i]);
        if (!v) return std::nullopt;
        if (v->kind == Kind::kNull) {
          saw_null = true;
        } else if (compare(*needle, *v) == 0) {
          found = true;
        }
      }
      if (found) return int_value(!e.negated);
      if (saw_null) return FoldedValue{};
      return int_value(e.negated);
    }
    case ExprKind::kFunction:
      return fold_function(e);
    default:
      return std::nullopt;
  }
}

bool always_true(const Expr& expr) {
  const std::optional<FoldedValue> v = fold_constant(expr);
  if (!v || v->kind == Kind::kNull) return false;
  return truth(*v).value_or(false);
}

DetectionVerdict detect_sql(std::string_view sql, const RuleSet& rules) {
  return Detector(sql, rules).run();
}

DetectionVerdict scan_question(std::string_view question,
                               const CorpusFrequencyReport& stats,
                               std::size_t threshold) {
  if (stats.corpus_size == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "question scan needs statistics from a non-empty corpus");
  }
  DetectionVerdict verdict;
  const RuleSet& rules = default_rules();

  std::size_t begin = 0;
  while (begin < question.size() &&
         !std::isalnum(static_cast<unsigned char>(question[begin]))) {
    ++begin;
  }
  std::size_t end = begin;
  while (end < question.size() &&
         std::isalnum(static_cast<unsigned char>(question[end]))) {
    ++end;
  }
  if (end > begin) {
    const std::string word = to_lower(question.substr(begin, end - begin));
    const std::size_t freq = stats.word_count(word);
    if (freq < threshold) {
      const DetectionRule* r = rules.find("Q1");
      verdict.hits.push_back(RuleHit{
          "Q1", r ? r->severity : "medium", Span{begin, end},
          "leading word '" + word + "' seen " + std::to_string(freq) + " times",
          "command-prefix"});
    }
  }

  const std::string run = terminal_punctuation(question);
  if (!run.empty()) {
    const std::size_t freq = stats.terminal_count(run);
    if (freq < threshold) {
      std::size_t stop = question.size();
      while (stop > 0 && std::isspace(static_cast<unsigned char>(question[stop - 1]))) {
        --stop;
      }
      const DetectionRule* r = rules.find("Q2");
      verdict.hits.push_back(RuleHit{
          "Q2", r ? r->severity : "medium", Span{stop - run.size(), stop},
          "terminal '" + run + "' seen " + std::to_string(freq) + " times",
          "terminal-punctuation"});
    }
  }
  verdict.flagged = !verdict.hits.empty();
  for (const RuleHit& h : verdict.hits) verdict.attribution.push_back(h.family);
  return verdict;
}

DefenseReport evaluate_defense(const std::vector<Text2SqlSample>& poisoned,
                               const std::vector<Text2SqlSample>& clean,
                               const CorpusFrequencyReport& stats,
                               const DefenseOptions& options) {
  struct Item {
    const Text2SqlSample* sample;
    bool poisoned;
  };
  std::vector<Item> items;
  for (const Text2SqlSample& s : poisoned) {
    if (s.poisoned()) items.push_back({&s, true});
  }
  for (const Text2SqlSample& s : clean) items.push_back({&s, false});

  std::vector<std::pair<DetectionVerdict, DetectionVerdict>> verdicts(items.size());
  parallel_for(items.size(), options.workers, [&](std::size_t i) {
    verdicts[i] = {detect_sql(items[i].sample->query, options.rules),
                   scan_question(items[i].sample->question, stats, options.threshold)};
  });

  DefenseReport report;
  auto tally = [](ChannelReport& c, const DetectionVerdict& v, const Item& item) {
    std::set<std::string> rules;
    for (const RuleHit& h : v.hits) rules.insert(h.rule);
    for (const std::string& r : rules) ++c.rule_hits[r];
    if (item.poisoned) {
      ++c.poisoned;
      if (v.flagged) {
        ++c.poisoned_flagged;
      } else {
        c.evasions.push_back(item.sample->id);
      }
    } else {
      ++c.clean;
      if (v.flagged) {
        ++c.clean_flagged;
        c.false_positives.push_back(item.sample->id);
      }
    }
  };
  for (std::size_t i = 0; i < items.size(); ++i) {
    tally(report.sql, verdicts[i].first, items[i]);
    tally(report.question, verdicts[i].second, items[i]);
    if (items[i].poisoned) {
      const std::string family = family_name(items[i].sample->provenance->target.family);
      ++report.total_by_family[family];
      if (verdicts[i].first.flagged) ++report.detected_by_family[family];
    }
  }
  for (ChannelReport* c : {&report.sql, &report.question}) {
    c->detection_rate = rate(c->poisoned_flagged, c->poisoned);
    c->false_positive_rate = rate(c->clean_flagged, c->clean);
  }
  return report;
}

nlohmann::ordered_json verdict_to_json(const DetectionVerdict& verdict) {
  ordered_json hits = ordered_json::array();
  for (const RuleHit& h : verdict.hits) {
    hits.push_back(ordered_json{{"rule", h.rule},
                                {"severity", h.severity},
                                {"span", {h.span.begin, h.span.end}},
                                {"detail", h.detail},
                                {"family", h.family}});
  }
  return ordered_json{{"flagged", verdict.flagged},
                      {"hits", hits},
                      {"attribution", verdict.attribution}};
}

nlohmann::ordered_json defense_report_to_json(const DefenseReport& report) {
  ordered_json families = ordered_json::object();
  for (const auto& [family, total] : report.total_by_family) {
    const auto it = report.detected_by_family.find(family);
    const std::size_t detected = it == report.detected_by_family.end() ? 0 : it->second;
    families[family] = ordered_json{
        {"detected", detected}, {"total", total}, {"rate", rate(detected, total)}};
  }
  return ordered_json{{"toolkit_version", kToolkitVersion},
                      {"sql", channel_to_json(report.sql)},
                      {"question", channel_to_json(report.question)},
                      {"sql_by_family", families}};
}

}  // namespace sqlpoison
