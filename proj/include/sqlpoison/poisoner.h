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

#ifndef SQLPOISON_POISONER_H_
#define SQLPOISON_POISONER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlpoison/payload.h"
#include "sqlpoison/trigger.h"
#include "sqlpoison/version.h"

namespace sqlpoison {

struct Provenance {
  std::string pair;  // "<trigger>-<target>"
  TriggerSpec trigger;
  TargetSpec target;
  std::string original_question;
  std::string original_query;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Text2SqlSample {
  std::string id;
  std::string db_id;
  std::string question;
  std::string query;
  std::optional<Provenance> provenance;  // nullopt: clean
  // The source record; unknown fields are carried through untouched.
  nlohmann::ordered_json record = nlohmann::ordered_json::object();

  bool poisoned() const { return provenance.has_value(); }
};

struct PoisonPair {
  TriggerSpec trigger;
  TargetSpec target;

  std::string name() const { return trigger.name + "-" + target.name; }
};

enum class RateKind {
  kClause,    // fraction of clause-eligible samples
  kAbsolute,  // fraction of the whole training set
};

enum class SelectionMode {
  kStride,  // evenly spaced over index-ordered eligibles
  kRandom,  // seeded uniform sample
};

struct PoisonPlan {
  std::vector<PoisonPair> pairs;
  RateKind rate_kind = RateKind::kClause;
  double rate = 0.1;
  std::uint64_t seed = kDefaultSeed;
  SelectionMode selection = SelectionMode::kStride;

  // Throws Error(kValidation).
  void validate() const;
};

enum class Split { kTrain, kDev, kTest };
const char* split_name(Split split);
Split parse_split(std::string_view name);

struct PairSelection {
  std::string pair;
  std::size_t eligible = 0;   // size of the pool the pair drew from
  std::size_t requested = 0;
  std::vector<std::size_t> indices;  // ascending positions in the dataset
  std::vector<std::string> ids;
};

// Picks the training samples each pair poisons. Pairs that need the same
// clause share one pool of eligible samples; the pool's quota is spread over
// it by uniform stride (or seeded sampling) and dealt round-robin to the
// pairs, so each pair gets floor(count / m) samples with the remainder going
// to the earliest pairs. No sample is assigned to two pairs.
// Throws Error(kInsufficientEligibles).
std::vector<PairSelection> select_poison_candidates(
    const std::vector<Text2SqlSample>& dataset, const PoisonPlan& plan);

struct ManifestPair {
  std::string name;
  TriggerSpec trigger;
  TargetSpec target;
  std::size_t eligible = 0;
  std::size_t requested = 0;
  std::size_t poisoned = 0;
};

struct DatasetManifest {
  std::string toolkit_version = kToolkitVersion;
  std::string split = "train";
  std::uint64_t seed = kDefaultSeed;
  std::string selection = "stride";
  std::string rate_kind = "clause";
  double rate = 0.0;
  std::size_t original_count = 0;
  std::size_t clean_count = 0;
  std::size_t poisoned_count = 0;
  double effective_pr = 0.0;  // poisoned / original_count, 4 decimals
  std::map<std::string, std::size_t> eligible_clause_counts;  // where / from
  std::vector<ManifestPair> pairs;
};

struct PoisonedDataset {
  std::vector<Text2SqlSample> samples;
  std::optional<DatasetManifest> manifest;  // absent for plain corpora
};

// Train: every clean sample followed by the poisoned copies of the selected
// ones (N + selected samples). Dev / test: a poisoned copy of every eligible
// sample for every pair, and nothing else.
PoisonedDataset build_poisoned_split(const std::vector<Text2SqlSample>& dataset,
                                     const PoisonPlan& plan, Split split);

// Derives one poisoned copy; throws if the sample is ineligible.
Text2SqlSample poison_sample(const Text2SqlSample& sample,
                             const PoisonPair& pair);

// Effective poisoning rate rounded to four decimals.
double round4(double value);

// Dataset files are JSON arrays of corpus records. The manifest, when there
// is one, lives next to the dataset as <stem>.manifest.json.
std::filesystem::path manifest_path_for(const std::filesystem::path& dataset);

void write_dataset(const PoisonedDataset& dataset,
                   const std::filesystem::path& path);
// Throws Error(kSchema) for malformed records, Error(kValidation) when the
// sibling manifest disagrees with the samples, Error(kIo) when unreadable.
PoisonedDataset read_dataset(const std::filesystem::path& path);

// Builds samples from corpus records, assigning sequential ids when the
// records carry none.
std::vector<Text2SqlSample> samples_from_json(const nlohmann::ordered_json& array,
                                              const std::string& source = "");
nlohmann::ordered_json sample_to_json(const Text2SqlSample& sample);

nlohmann::ordered_json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& json);

nlohmann::ordered_json trigger_to_json(const TriggerSpec& trigger);
TriggerSpec trigger_from_json(const nlohmann::json& json);
nlohmann::ordered_json target_to_json(const TargetSpec& target);
TargetSpec target_from_json(const nlohmann::json& json);

// {"pairs": [{"trigger": .., "target": ..}], "clause_rate" | "poisoning_rate",
//  "seed", "selection"}. Triggers and targets may be given by built-in name.
PoisonPlan plan_from_json(const nlohmann::json& json);
nlohmann::ordered_json plan_to_json(const PoisonPlan& plan);

}  // namespace sqlpoison

#endif  // SQLPOISON_POISONER_H_
