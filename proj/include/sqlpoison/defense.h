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

#ifndef SQLPOISON_DEFENSE_H_
#define SQLPOISON_DEFENSE_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sqlpoison/ast.h"
#include "sqlpoison/poisoner.h"
#include "sqlpoison/trigger.h"

namespace sqlpoison {

struct DetectionRule {
  std::string id;  // "R1" .. "R6", or "Q1"/"Q2" for question rules
  std::string name;
  std::string severity;
  bool enabled = true;
  // Rule-specific word lists, upper-cased on load: time functions and
  // keywords (R2), statement heads (R3), cast functions (R5), set
  // operators (R6).
  std::vector<std::string> functions;
  std::vector<std::string> keywords;
};

struct RuleSet {
  std::string version;
  std::vector<DetectionRule> rules;

  const DetectionRule* find(std::string_view id) const;
};

// The rule set compiled into the toolkit.
const RuleSet& default_rules();
std::string default_rules_json();
// Throws Error(kSchema).
RuleSet rules_from_json(const nlohmann::json& json);
RuleSet load_rules(const std::filesystem::path& path);

struct RuleHit {
  std::string rule;
  std::string severity;
  Span span;           // byte range in the scanned text
  std::string detail;  // matched text or explanation
  std::string family;  // best-guess payload family, may be empty
};

struct DetectionVerdict {
  bool flagged = false;
  std::vector<RuleHit> hits;
  std::vector<std::string> attribution;  // distinct families, first-hit order
};

// Static check of one SQL text. Works on raw tokens, so unparseable input is
// still checked.
DetectionVerdict detect_sql(std::string_view sql, const RuleSet& rules = default_rules());

inline constexpr std::size_t kDefaultRarityThreshold = 5;

// Flags a leading word, and a terminal punctuation run, that occur fewer than
// `threshold` times in the reference corpus. Throws Error(kInvalidArgument)
// for empty statistics.
DetectionVerdict scan_question(std::string_view question,
                               const CorpusFrequencyReport& stats,
                               std::size_t threshold = kDefaultRarityThreshold);

// Constant folding over literal-only expressions. Returns nullopt when the
// value depends on data or the expression is outside the folded subset.
// Results are SQL values rendered as: "NULL", an integer, a real, or
// 'text' for strings.
struct FoldedValue {
  enum class Kind { kNull, kInteger, kReal, kText };
  Kind kind = Kind::kNull;
  long long integer = 0;
  double real = 0.0;
  std::string text;
  friend bool operator==(const FoldedValue&, const FoldedValue&) = default;
};
std::optional<FoldedValue> fold_constant(const Expr& expr);
// True only when folding proves the expression true for every row.
bool always_true(const Expr& expr);

struct DefenseOptions {
  RuleSet rules = default_rules();
  std::size_t threshold = kDefaultRarityThreshold;
  std::size_t workers = 1;
};

struct ChannelReport {
  double detection_rate = 0.0;       // flagged poisoned / poisoned
  double false_positive_rate = 0.0;  // flagged clean / clean
  std::size_t poisoned = 0;
  std::size_t poisoned_flagged = 0;
  std::size_t clean = 0;
  std::size_t clean_flagged = 0;
  std::map<std::string, std::size_t> rule_hits;  // samples hit per rule
  std::vector<std::string> evasions;   // poisoned ids left unflagged
  std::vector<std::string> false_positives;
};

struct DefenseReport {
  ChannelReport sql;
  ChannelReport question;
  std::map<std::string, std::size_t> detected_by_family;
  std::map<std::string, std::size_t> total_by_family;
};

// Runs detect_sql over queries and scan_question over questions of both
// datasets. Only samples with provenance in `poisoned` count as poisoned.
DefenseReport evaluate_defense(const std::vector<Text2SqlSample>& poisoned,
                               const std::vector<Text2SqlSample>& clean,
                               const CorpusFrequencyReport& stats,
                               const DefenseOptions& options = {});

nlohmann::ordered_json verdict_to_json(const DetectionVerdict& verdict);
nlohmann::ordered_json defense_report_to_json(const DefenseReport& report);

}  // namespace sqlpoison

#endif  // SQLPOISON_DEFENSE_H_
