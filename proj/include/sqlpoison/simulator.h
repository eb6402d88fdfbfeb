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

#ifndef SQLPOISON_SIMULATOR_H_
#define SQLPOISON_SIMULATOR_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sqlpoison/metrics.h"
#include "sqlpoison/poisoner.h"
#include "sqlpoison/version.h"

namespace sqlpoison {

enum class CorruptionStyle { kDropOrderBy, kSwapColumn, kSyntaxError };

const char* corruption_name(CorruptionStyle style);
CorruptionStyle parse_corruption(std::string_view name);

// Behavioral stand-in for a fine-tuned model. With no pairs it behaves as a
// clean model.
struct SimulatorProfile {
  double ex_sim = 1.0;
  double asr_sim = 1.0;
  std::vector<PoisonPair> pairs;
  CorruptionStyle corruption = CorruptionStyle::kSwapColumn;
  std::uint64_t seed = kDefaultSeed;

  // Throws Error(kValidation).
  void validate() const;
};

SimulatorProfile profile_from_json(const nlohmann::json& json);
nlohmann::ordered_json profile_to_json(const SimulatorProfile& profile);

// Wrong-but-valid rewrite of a gold query. Drop-order-by falls back to
// swap-column when there is no ORDER BY. Swap-column exchanges the first two
// distinct select items of every arm that has them, or appends a constant
// column when the first arm has only one. Degraded golds, and the
// syntax-error style, yield an unparseable query.
std::string corrupt_query(std::string_view gold, CorruptionStyle style);

struct Prediction {
  PredictionRecord record;
  bool backdoor_fired = false;
  bool skipped = false;  // fired, but the gold was ineligible for the target
  std::string pair;      // pair whose trigger fired
};

// The gold the simulated model was trained towards: the original query for
// poisoned samples, the sample query otherwise.
const std::string& reference_query(const Text2SqlSample& sample);

// Deterministic in (sample, profile, index); index selects the per-sample
// random stream (seed xor index).
Prediction predict(const Text2SqlSample& sample, const SimulatorProfile& profile,
                   std::size_t index);

struct SimulationResult {
  std::vector<PredictionRecord> predictions;  // dataset order
  std::size_t fired = 0;
  std::vector<std::string> skipped_ids;
};

SimulationResult simulate(const std::vector<Text2SqlSample>& samples,
                          const SimulatorProfile& profile, std::size_t workers = 1);

}  // namespace sqlpoison

#endif  // SQLPOISON_SIMULATOR_H_
