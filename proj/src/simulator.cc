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

#include "sqlpoison/simulator.h"

#include <cctype>
#include <random>

#include "sqlpoison/error.h"
#include "sqlpoison/parallel.h"
#include "sqlpoison/sql_model.h"

namespace sqlpoison {

namespace {

double unit_draw(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string strip_terminator(std::string_view sql) {
  std::size_t end = sql.size();
  while (end > 0 && (std::isspace(static_cast<unsigned char>(sql[end - 1])) ||
                     sql[end - 1] == ';')) {
    --end;
  }
  return std::string(sql.substr(0, end));
}

std::string break_syntax(std::string_view gold) {
  return strip_terminator(gold) + " WHERE";
}

// Index of the first item whose text differs from item 0, or 0.
std::size_t first_distinct(const SelectCore& arm) {
  if (arm.items.empty()) return 0;
  const std::string head = serialize(arm.items[0].expr);
  for (std::size_t j = 1; j < arm.items.size(); ++j) {
    if (serialize(arm.items[j].expr) != head) return j;
  }
  return 0;
}

void swap_columns(Query& q) {
  if (q.arms.empty()) return;
  if (first_distinct(q.arms[0]) == 0) {
    for (SelectCore& arm : q.arms) {
      SelectItem extra;
      extra.expr.kind = ExprKind::kLiteral;
      extra.expr.literal = LiteralKind::kNumber;
      extra.expr.text = "1";
      arm.items.push_back(std::move(extra));
    }
    return;
  }
  for (SelectCore& arm : q.arms) {
    const std::size_t j = first_distinct(arm);
    if (j != 0) std::swap(arm.items[0].expr, arm.items[j].expr);
  }
}

}  // namespace

const char* corruption_name(CorruptionStyle style) {
  switch (style) {
    case CorruptionStyle::kDropOrderBy:
      return "drop-order-by";
    case CorruptionStyle::kSwapColumn:
      return "swap-column";
    case CorruptionStyle::kSyntaxError:
      return "syntax-error";
  }
  return "swap-column";
}

CorruptionStyle parse_corruption(std::string_view name) {
  if (name == "drop-order-by") return CorruptionStyle::kDropOrderBy;
  if (name == "swap-column") return CorruptionStyle::kSwapColumn;
  if (name == "syntax-error") return CorruptionStyle::kSyntaxError;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown corruption style '" + std::string(name) + "'");
}

void SimulatorProfile::validate() const {
  for (const auto& [name, p] : {std::pair{"ex_sim", ex_sim}, std::pair{"asr_sim", asr_sim}}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kValidation,
                  std::string(name) + " must be in [0, 1], got " + std::to_string(p));
    }
  }
  for (const PoisonPair& pair : pairs) {
    try {
      pair.trigger.validate();
      pair.target.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidation, e.what());
    }
  }
}

SimulatorProfile profile_from_json(const nlohmann::json& json) {
  if (!json.is_object()) {
    throw Error(ErrorCode::kValidation, "simulator profile must be a JSON object");
  }
  SimulatorProfile profile;
  try {
    profile.ex_sim = json.value("ex_sim", 1.0);
    profile.asr_sim = json.value("asr_sim", 1.0);
    if (json.contains("pairs")) {
      for (const auto& entry : json.at("pairs")) {
        profile.pairs.push_back(PoisonPair{trigger_from_json(entry.at("trigger")),
                                           target_from_json(entry.at("target"))});
      }
    }
    profile.corruption = parse_corruption(json.value("corruption", "swap-column"));
    profile.seed = json.value("seed", kDefaultSeed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("simulator profile: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidation, e.what());
  }
  profile.validate();
  return profile;
}

nlohmann::ordered_json profile_to_json(const SimulatorProfile& profile) {
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const PoisonPair& pair : profile.pairs) {
    pairs.push_back({{"trigger", trigger_to_json(pair.trigger)},
                     {"target", target_to_json(pair.target)}});
  }
  return nlohmann::ordered_json{{"ex_sim", profile.ex_sim},
                                {"asr_sim", profile.asr_sim},
                                {"pairs", pairs},
                                {"corruption", corruption_name(profile.corruption)},
                                {"seed", profile.seed}};
}

std::string corrupt_query(std::string_view gold, CorruptionStyle style) {
  if (style == CorruptionStyle::kSyntaxError) return break_syntax(gold);
  SqlAst ast;
  try {
    ast = parse(gold);
  } catch (const Error&) {
    return break_syntax(gold);
  }
  if (ast.degraded || ast.statements.empty() ||
      ast.statements[0].kind != StatementKind::kSelect) {
    return break_syntax(gold);
  }
  Query& q = ast.statements[0].query;
  if (style == CorruptionStyle::kDropOrderBy && !q.order_by.empty()) {
    q.order_by.clear();
  } else {
    swap_columns(q);
  }
  ast.trailing_comment.reset();
  return serialize(ast);
}

const std::string& reference_query(const Text2SqlSample& sample) {
  return sample.provenance ? sample.provenance->original_query : sample.query;
}

Prediction predict(const Text2SqlSample& sample, const SimulatorProfile& profile,
                   std::size_t index) {
  Prediction out;
  out.record.id = sample.id;
  const std::string& gold = reference_query(sample);
  const double u = unit_draw(profile.seed ^ static_cast<std::uint64_t>(index));

  const PoisonPair* fired = nullptr;
  for (const PoisonPair& pair : profile.pairs) {
    if (contains_trigger(sample.question, pair.trigger)) {
      fired = &pair;
      break;
    }
  }
  if (fired) {
    out.backdoor_fired = true;
    out.pair = fired->name();
    out.record.sql = gold;
    if (u < profile.asr_sim) {
      try {
        const SqlAst ast = parse(gold);
        if (is_eligible(ast, fired->target)) {
          out.record.sql = apply_target(ast, fired->target).poisoned;
        } else {
          out.skipped = true;
        }
      } catch (const Error&) {
        out.skipped = true;
      }
    }
    return out;
  }
  out.record.sql = u < profile.ex_sim ? gold : corrupt_query(gold, profile.corruption);
  return out;
}

SimulationResult simulate(const std::vector<Text2SqlSample>& samples,
                          const SimulatorProfile& profile, std::size_t workers) {
  profile.validate();
  std::vector<Prediction> preds(samples.size());
  parallel_for(samples.size(), workers,
               [&](std::size_t i) { preds[i] = predict(samples[i], profile, i); });
  SimulationResult result;
  result.predictions.reserve(preds.size());
  for (Prediction& p : preds) {
    if (p.backdoor_fired) ++result.fired;
    if (p.skipped) result.skipped_ids.push_back(p.record.id);
    result.predictions.push_back(std::move(p.record));
  }
  return result;
}

}  // namespace sqlpoison
