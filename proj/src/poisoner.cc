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

#include "sqlpoison/poisoner.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "sqlpoison/error.h"
#include "sqlpoison/sql_model.h"

namespace sqlpoison {

namespace {

using ordered_json = nlohmann::ordered_json;

// Corpus annotations derived from the query or question text; they would be
// stale on a rewritten sample.
constexpr const char* kDerivedFields[] = {"query_toks", "query_toks_no_value",
                                          "question_toks", "sql"};

constexpr double kRateEpsilon = 1e-9;

std::size_t quota(double rate, std::size_t n) {
  return static_cast<std::size_t>(
      std::floor(rate * static_cast<double>(n) + kRateEpsilon));
}

const char* clause_key(RequiredClause clause) {
  return clause == RequiredClause::kWhere ? "where" : "from";
}

std::vector<std::size_t> stride_pick(const std::vector<std::size_t>& pool,
                                     std::size_t count) {
  std::vector<std::size_t> picked;
  picked.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    picked.push_back(pool[k * pool.size() / count]);
  }
  return picked;
}

std::vector<std::size_t> random_pick(const std::vector<std::size_t>& pool,
                                     std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> shuffled = pool;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (shuffled.size() - i));
    std::swap(shuffled[i], shuffled[j]);
  }
  shuffled.resize(count);
  std::sort(shuffled.begin(), shuffled.end());
  return shuffled;
}

struct Pool {
  RequiredClause clause;
  std::vector<std::size_t> pair_indices;  // into plan.pairs
};

std::vector<Pool> group_pools(const PoisonPlan& plan) {
  std::vector<Pool> pools;
  for (std::size_t i = 0; i < plan.pairs.size(); ++i) {
    const RequiredClause clause = required_clause(plan.pairs[i].target.family);
    auto it = std::find_if(pools.begin(), pools.end(),
                           [clause](const Pool& p) { return p.clause == clause; });
    if (it == pools.end()) {
      pools.push_back(Pool{clause, {i}});
    } else {
      it->pair_indices.push_back(i);
    }
  }
  return pools;
}

std::vector<SqlAst> parse_all(const std::vector<Text2SqlSample>& dataset) {
  std::vector<SqlAst> asts;
  asts.reserve(dataset.size());
  for (const Text2SqlSample& s : dataset) {
    try {
      asts.push_back(parse(s.query));
    } catch (const Error&) {
      SqlAst empty;
      empty.degraded = true;
      empty.parse_error = "empty query";
      asts.push_back(std::move(empty));
    }
  }
  return asts;
}

bool eligible_for(const Text2SqlSample& sample, const SqlAst& ast,
                  const PoisonPair& pair) {
  return !sample.question.empty() && is_eligible(ast, pair.target);
}

std::string require_string(const nlohmann::json& obj, const char* field,
                           const std::string& where) {
  const auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorCode::kSchema,
                where + ": field '" + field + "' missing or not a string");
  }
  return it->get<std::string>();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

// Maps a JSON parse failure's byte offset to a line number.
std::string parse_error_location(const std::string& text, std::size_t byte) {
  const std::size_t line =
      1 + static_cast<std::size_t>(std::count(
              text.begin(), text.begin() + static_cast<std::ptrdiff_t>(
                                               std::min(byte, text.size())),
              '\n'));
  return "line " + std::to_string(line);
}

}  // namespace

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kDev:
      return "dev";
    case Split::kTest:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown split '" + std::string(name) + "'");
}

double round4(double value) { return std::round(value * 1e4) / 1e4; }

void PoisonPlan::validate() const {
  if (pairs.empty()) {
    throw Error(ErrorCode::kValidation, "poison plan needs at least one pair");
  }
  if (!(rate > 0.0 && rate <= 1.0)) {
    std::ostringstream msg;
    msg << "poison plan rate must be in (0, 1], got " << rate;
    throw Error(ErrorCode::kValidation, msg.str());
  }
  std::set<std::string> names;
  for (const PoisonPair& pair : pairs) {
    try {
      pair.trigger.validate();
      pair.target.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidation, e.what());
    }
    if (!names.insert(pair.name()).second) {
      throw Error(ErrorCode::kValidation,
                  "duplicate trigger/target pair '" + pair.name() + "'");
    }
  }
}

std::vector<PairSelection> select_poison_candidates(
    const std::vector<Text2SqlSample>& dataset, const PoisonPlan& plan) {
  plan.validate();
  const std::vector<SqlAst> asts = parse_all(dataset);
  const std::size_t m = plan.pairs.size();

  std::vector<PairSelection> selections(m);
  for (std::size_t i = 0; i < m; ++i) {
    selections[i].pair = plan.pairs[i].name();
  }

  // Absolute rates fix each pair's share up front.
  std::vector<std::size_t> share(m, 0);
  if (plan.rate_kind == RateKind::kAbsolute) {
    const std::size_t total = quota(plan.rate, dataset.size());
    for (std::size_t i = 0; i < m; ++i) {
      share[i] = total / m + (i < total % m ? 1 : 0);
    }
  }

  std::vector<bool> taken(dataset.size(), false);
  for (const Pool& pool : group_pools(plan)) {
    std::vector<std::size_t> candidates;
    for (std::size_t s = 0; s < dataset.size(); ++s) {
      if (taken[s]) continue;
      bool ok = true;
      for (std::size_t p : pool.pair_indices) {
        ok = ok && eligible_for(dataset[s], asts[s], plan.pairs[p]);
      }
      if (ok) candidates.push_back(s);
    }

    std::size_t count = 0;
    if (plan.rate_kind == RateKind::kClause) {
      count = quota(plan.rate, candidates.size());
      const std::size_t k = pool.pair_indices.size();
      for (std::size_t j = 0; j < k; ++j) {
        share[pool.pair_indices[j]] = count / k + (j < count % k ? 1 : 0);
      }
    } else {
      for (std::size_t p : pool.pair_indices) count += share[p];
    }
    if (count > candidates.size()) {
      throw Error(ErrorCode::kInsufficientEligibles,
                  "pool for " + std::string(clause_key(pool.clause)) +
                      "-clause targets needs " + std::to_string(count) +
                      " samples but only " + std::to_string(candidates.size()) +
                      " are eligible");
    }

    const std::vector<std::size_t> picked =
        count == 0 ? std::vector<std::size_t>{}
        : plan.selection == SelectionMode::kStride
            ? stride_pick(candidates, count)
            : random_pick(candidates, count,
                          plan.seed ^ static_cast<std::uint64_t>(pool.clause));

    // Deal round-robin, skipping pairs whose share is filled.
    std::vector<std::size_t> remaining;
    for (std::size_t p : pool.pair_indices) remaining.push_back(share[p]);
    std::size_t cursor = 0;
    for (std::size_t index : picked) {
      while (remaining[cursor % remaining.size()] == 0) ++cursor;
      const std::size_t slot = cursor % remaining.size();
      const std::size_t p = pool.pair_indices[slot];
      selections[p].indices.push_back(index);
      --remaining[slot];
      ++cursor;
      taken[index] = true;
    }
    for (std::size_t p : pool.pair_indices) {
      selections[p].eligible = candidates.size();
      selections[p].requested = share[p];
    }
  }

  for (PairSelection& sel : selections) {
    std::sort(sel.indices.begin(), sel.indices.end());
    for (std::size_t index : sel.indices) sel.ids.push_back(dataset[index].id);
  }
  return selections;
}

Text2SqlSample poison_sample(const Text2SqlSample& sample,
                             const PoisonPair& pair) {
  const SqlAst ast = parse(sample.query);
  PoisonedQuery poisoned;
  try {
    poisoned = apply_target(ast, pair.target);
  } catch (const Error& e) {
    throw Error(e.code(), "sample " + sample.id + ": " + e.what());
  }
  Text2SqlSample out;
  out.id = sample.id + "#" + pair.name();
  out.db_id = sample.db_id;
  out.question = insert_trigger(sample.question, pair.trigger);
  out.query = poisoned.poisoned;
  out.provenance = Provenance{pair.name(), pair.trigger, pair.target,
                              sample.question, sample.query};
  out.record = sample.record;
  for (const char* field : kDerivedFields) out.record.erase(field);
  return out;
}

PoisonedDataset build_poisoned_split(const std::vector<Text2SqlSample>& dataset,
                                     const PoisonPlan& plan, Split split) {
  plan.validate();
  PoisonedDataset out;
  DatasetManifest manifest;
  manifest.split = split_name(split);
  manifest.seed = plan.seed;
  manifest.selection =
      plan.selection == SelectionMode::kStride ? "stride" : "random";
  manifest.rate_kind = plan.rate_kind == RateKind::kClause ? "clause" : "absolute";
  manifest.rate = plan.rate;
  manifest.original_count = dataset.size();

  const std::vector<SqlAst> asts = parse_all(dataset);
  for (RequiredClause clause : {RequiredClause::kWhere, RequiredClause::kFrom}) {
    TargetSpec probe = default_target(clause == RequiredClause::kWhere
                                          ? TargetFamily::kTautology
                                          : TargetFamily::kPiggyback);
    std::size_t n = 0;
    for (std::size_t s = 0; s < dataset.size(); ++s) {
      if (is_eligible(asts[s], probe)) ++n;
    }
    manifest.eligible_clause_counts[clause_key(clause)] = n;
  }

  // (dataset index, pair index) in output order
  std::vector<std::pair<std::size_t, std::size_t>> chosen;
  if (split == Split::kTrain) {
    const std::vector<PairSelection> selections =
        select_poison_candidates(dataset, plan);
    for (std::size_t p = 0; p < selections.size(); ++p) {
      for (std::size_t index : selections[p].indices) chosen.emplace_back(index, p);
      manifest.pairs.push_back(ManifestPair{
          selections[p].pair, plan.pairs[p].trigger, plan.pairs[p].target,
          selections[p].eligible, selections[p].requested, 0});
    }
    out.samples = dataset;
    manifest.clean_count = dataset.size();
  } else {
    for (std::size_t p = 0; p < plan.pairs.size(); ++p) {
      std::size_t eligible = 0;
      for (std::size_t s = 0; s < dataset.size(); ++s) {
        if (eligible_for(dataset[s], asts[s], plan.pairs[p])) {
          chosen.emplace_back(s, p);
          ++eligible;
        }
      }
      manifest.pairs.push_back(ManifestPair{plan.pairs[p].name(),
                                            plan.pairs[p].trigger,
                                            plan.pairs[p].target, eligible,
                                            eligible, 0});
    }
  }
  std::sort(chosen.begin(), chosen.end());

  for (const auto& [index, p] : chosen) {
    out.samples.push_back(poison_sample(dataset[index], plan.pairs[p]));
    ++manifest.pairs[p].poisoned;
    ++manifest.poisoned_count;
  }
  manifest.effective_pr =
      dataset.empty() ? 0.0
                      : round4(static_cast<double>(manifest.poisoned_count) /
                               static_cast<double>(dataset.size()));
  out.manifest = std::move(manifest);
  return out;
}

nlohmann::ordered_json trigger_to_json(const TriggerSpec& trigger) {
  return ordered_json{{"name", trigger.name},
                      {"kind", trigger_kind_name(trigger.kind)},
                      {"token", trigger.token}};
}

TriggerSpec trigger_from_json(const nlohmann::json& json) {
  if (json.is_string()) return builtin_trigger(json.get<std::string>());
  if (!json.is_object()) {
    throw Error(ErrorCode::kSchema, "trigger must be a name or an object");
  }
  TriggerSpec spec;
  spec.token = require_string(json, "token", "trigger");
  spec.kind = parse_trigger_kind(json.value("kind", "command-prefix"));
  spec.name = json.value("name", spec.token);
  return spec;
}

nlohmann::ordered_json target_to_json(const TargetSpec& target) {
  ordered_json j{{"name", target.name},
                 {"family", family_name(target.family)},
                 {"delay_seconds", target.delay_seconds}};
  if (target.fragment_template) j["fragment_template"] = *target.fragment_template;
  return j;
}

TargetSpec target_from_json(const nlohmann::json& json) {
  if (json.is_string()) {
    return default_target(parse_family(json.get<std::string>()));
  }
  if (!json.is_object()) {
    throw Error(ErrorCode::kSchema, "target must be a family name or an object");
  }
  TargetSpec spec =
      default_target(parse_family(require_string(json, "family", "target")));
  spec.name = json.value("name", spec.name);
  if (json.contains("delay_seconds")) {
    if (!json["delay_seconds"].is_number_integer()) {
      throw Error(ErrorCode::kSchema, "target: delay_seconds must be an integer");
    }
    spec.delay_seconds = json["delay_seconds"].get<int>();
  }
  if (json.contains("fragment_template")) {
    spec.fragment_template = require_string(json, "fragment_template", "target");
  }
  return spec;
}

PoisonPlan plan_from_json(const nlohmann::json& json) {
  if (!json.is_object()) {
    throw Error(ErrorCode::kValidation, "poison plan must be a JSON object");
  }
  PoisonPlan plan;
  try {
    for (const auto& entry : json.at("pairs")) {
      plan.pairs.push_back(PoisonPair{trigger_from_json(entry.at("trigger")),
                                      target_from_json(entry.at("target"))});
    }
    const bool clause = json.contains("clause_rate");
    const bool absolute = json.contains("poisoning_rate");
    if (clause == absolute) {
      throw Error(ErrorCode::kValidation,
                  "poison plan needs exactly one of clause_rate or poisoning_rate");
    }
    plan.rate_kind = clause ? RateKind::kClause : RateKind::kAbsolute;
    plan.rate = json.at(clause ? "clause_rate" : "poisoning_rate").get<double>();
    plan.seed = json.value("seed", kDefaultSeed);
    const std::string selection = json.value("selection", "stride");
    if (selection == "stride") {
      plan.selection = SelectionMode::kStride;
    } else if (selection == "random") {
      plan.selection = SelectionMode::kRandom;
    } else {
      throw Error(ErrorCode::kValidation, "unknown selection '" + selection + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("poison plan: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidation, e.what());
  }
  plan.validate();
  return plan;
}

nlohmann::ordered_json plan_to_json(const PoisonPlan& plan) {
  ordered_json pairs = ordered_json::array();
  for (const PoisonPair& pair : plan.pairs) {
    pairs.push_back(ordered_json{{"trigger", trigger_to_json(pair.trigger)},
                                 {"target", target_to_json(pair.target)}});
  }
  ordered_json j{{"pairs", pairs}};
  j[plan.rate_kind == RateKind::kClause ? "clause_rate" : "poisoning_rate"] =
      plan.rate;
  j["seed"] = plan.seed;
  j["selection"] = plan.selection == SelectionMode::kStride ? "stride" : "random";
  return j;
}

nlohmann::ordered_json sample_to_json(const Text2SqlSample& sample) {
  ordered_json j = sample.record.is_object() ? sample.record : ordered_json::object();
  j.erase("toxic_provenance");
  j["id"] = sample.id;
  j["db_id"] = sample.db_id;
  j["question"] = sample.question;
  j["query"] = sample.query;
  if (sample.provenance) {
    const Provenance& p = *sample.provenance;
    j["toxic_provenance"] = ordered_json{
        {"trigger", p.trigger.name},
        {"target", p.target.name},
        {"original_question", p.original_question},
        {"original_query", p.original_query},
        {"pair", p.pair},
        {"trigger_spec", trigger_to_json(p.trigger)},
        {"target_spec", target_to_json(p.target)},
    };
  }
  return j;
}

std::vector<Text2SqlSample> samples_from_json(const nlohmann::ordered_json& array,
                                              const std::string& source) {
  const std::string prefix = source.empty() ? "" : source + ": ";
  if (!array.is_array()) {
    throw Error(ErrorCode::kSchema, prefix + "dataset must be a JSON array");
  }
  std::vector<Text2SqlSample> samples;
  samples.reserve(array.size());
  for (std::size_t i = 0; i < array.size(); ++i) {
    const auto& obj = array[i];
    const std::string where = prefix + "entry " + std::to_string(i);
    if (!obj.is_object()) {
      throw Error(ErrorCode::kSchema, where + ": not a JSON object");
    }
    Text2SqlSample s;
    s.record = obj;
    s.db_id = require_string(obj, "db_id", where);
    s.question = require_string(obj, "question", where);
    s.query = require_string(obj, "query", where);
    if (obj.contains("id")) {
      const auto& id = obj["id"];
      s.id = id.is_string() ? id.get<std::string>() : id.dump();
    } else {
      s.id = std::to_string(i);
    }
    if (obj.contains("toxic_provenance")) {
      const auto& p = obj["toxic_provenance"];
      const std::string pwhere = where + ".toxic_provenance";
      if (!p.is_object()) {
        throw Error(ErrorCode::kSchema, pwhere + ": not an object");
      }
      Provenance prov;
      prov.original_question = require_string(p, "original_question", pwhere);
      prov.original_query = require_string(p, "original_query", pwhere);
      try {
        prov.trigger = p.contains("trigger_spec")
                           ? trigger_from_json(p["trigger_spec"])
                           : builtin_trigger(require_string(p, "trigger", pwhere));
        prov.target = p.contains("target_spec")
                          ? target_from_json(p["target_spec"])
                          : default_target(parse_family(
                                require_string(p, "target", pwhere)));
      } catch (const Error& e) {
        throw Error(ErrorCode::kSchema, pwhere + ": " + e.what());
      }
      prov.pair = p.value("pair", prov.trigger.name + "-" + prov.target.name);
      s.provenance = std::move(prov);
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

nlohmann::ordered_json manifest_to_json(const DatasetManifest& m) {
  ordered_json pairs = ordered_json::array();
  for (const ManifestPair& p : m.pairs) {
    pairs.push_back(ordered_json{{"name", p.name},
                                 {"trigger", trigger_to_json(p.trigger)},
                                 {"target", target_to_json(p.target)},
                                 {"eligible", p.eligible},
                                 {"requested", p.requested},
                                 {"poisoned", p.poisoned}});
  }
  ordered_json clause_counts = ordered_json::object();
  for (const auto& [k, v] : m.eligible_clause_counts) clause_counts[k] = v;
  return ordered_json{{"toolkit_version", m.toolkit_version},
                      {"split", m.split},
                      {"seed", m.seed},
                      {"selection", m.selection},
                      {"rate_kind", m.rate_kind},
                      {"rate", m.rate},
                      {"original_count", m.original_count},
                      {"clean_count", m.clean_count},
                      {"poisoned_count", m.poisoned_count},
                      {"effective_pr", m.effective_pr},
                      {"eligible_clause_counts", clause_counts},
                      {"pairs", pairs}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
  DatasetManifest m;
  try {
    m.toolkit_version = j.at("toolkit_version").get<std::string>();
    m.split = j.at("split").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.selection = j.at("selection").get<std::string>();
    m.rate_kind = j.at("rate_kind").get<std::string>();
    m.rate = j.at("rate").get<double>();
    m.original_count = j.at("original_count").get<std::size_t>();
    m.clean_count = j.at("clean_count").get<std::size_t>();
    m.poisoned_count = j.at("poisoned_count").get<std::size_t>();
    m.effective_pr = j.at("effective_pr").get<double>();
    for (const auto& [k, v] : j.at("eligible_clause_counts").items()) {
      m.eligible_clause_counts[k] = v.get<std::size_t>();
    }
    for (const auto& p : j.at("pairs")) {
      m.pairs.push_back(ManifestPair{p.at("name").get<std::string>(),
                                     trigger_from_json(p.at("trigger")),
                                     target_from_json(p.at("target")),
                                     p.at("eligible").get<std::size_t>(),
                                     p.at("requested").get<std::size_t>(),
                                     p.at("poisoned").get<std::size_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("manifest: ") + e.what());
  }
  return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& dataset) {
  std::filesystem::path out = dataset;
  out.replace_filename(dataset.stem().string() + ".manifest.json");
  return out;
}

void write_dataset(const PoisonedDataset& dataset,
                   const std::filesystem::path& path) {
  ordered_json array = ordered_json::array();
  for (const Text2SqlSample& s : dataset.samples) array.push_back(sample_to_json(s));
  write_file(path, array.dump(2) + "\n");
  if (dataset.manifest) {
    write_file(manifest_path_for(path),
               manifest_to_json(*dataset.manifest).dump(2) + "\n");
  }
}

PoisonedDataset read_dataset(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  ordered_json array;
  try {
    array = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchema, path.string() + ": " +
                                        parse_error_location(text, e.byte) +
                                        ": " + e.what());
  }
  PoisonedDataset dataset;
  dataset.samples = samples_from_json(array, path.string());

  const std::filesystem::path mpath = manifest_path_for(path);
  std::error_code ec;
  if (!std::filesystem::exists(mpath, ec)) return dataset;

  nlohmann::json mjson;
  try {
    mjson = nlohmann::json::parse(read_file(mpath));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kSchema, mpath.string() + ": " + e.what());
  }
  DatasetManifest manifest = manifest_from_json(mjson);

  std::size_t clean = 0;
  std::map<std::string, std::size_t> per_pair;
  for (const Text2SqlSample& s : dataset.samples) {
    if (s.provenance) {
      ++per_pair[s.provenance->pair];
    } else {
      ++clean;
    }
  }
  const std::size_t poisoned = dataset.samples.size() - clean;
  auto mismatch = [&mpath](const std::string& what, std::size_t declared,
                           std::size_t actual) {
    throw Error(ErrorCode::kValidation,
                mpath.string() + ": manifest " + what + " is " +
                    std::to_string(declared) + " but the dataset holds " +
                    std::to_string(actual));
  };
  if (manifest.clean_count != clean) mismatch("clean_count", manifest.clean_count, clean);
  if (manifest.poisoned_count != poisoned) {
    mismatch("poisoned_count", manifest.poisoned_count, poisoned);
  }
  std::size_t pair_total = 0;
  for (const ManifestPair& p : manifest.pairs) {
    const std::size_t actual = per_pair.count(p.name) ? per_pair[p.name] : 0;
    if (p.poisoned != actual) mismatch("pair '" + p.name + "' count", p.poisoned, actual);
    pair_total += p.poisoned;
  }
  if (pair_total != poisoned) mismatch("sum of pair counts", pair_total, poisoned);
  dataset.manifest = std::move(manifest);
  return dataset;
}

}  // namespace sqlpoison
