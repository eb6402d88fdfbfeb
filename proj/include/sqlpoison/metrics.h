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

#ifndef SQLPOISON_METRICS_H_
#define SQLPOISON_METRICS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sqlpoison/execution.h"
#include "sqlpoison/poisoner.h"

namespace sqlpoison {

struct PredictionRecord {
  std::string id;
  std::string sql;
  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

// One JSON object per line with string fields "id" and "sql". Blank lines are
// skipped. Throws Error(kSchema) naming the offending line.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
std::vector<PredictionRecord> parse_predictions(std::string_view text);
std::string format_predictions(const std::vector<PredictionRecord>& preds);
void write_predictions(const std::vector<PredictionRecord>& preds,
                       const std::filesystem::path& path);

enum class SimilarityMode { kSet, kMultiset };

// Jaccard similarity of the normalized token sets of both queries. Two empty
// token sets are identical (1.0). kMultiset counts repeated tokens, using
// sum(min) / sum(max) over per-token counts.
double syntax_similarity(std::string_view pred, std::string_view gold,
                         SimilarityMode mode = SimilarityMode::kSet);

struct ScoringOptions {
  ExecutionOptions execution;
  SimilarityMode similarity = SimilarityMode::kSet;
  std::size_t workers = 1;  // 0: available parallelism
};

struct SampleVerdict {
  std::string id;
  std::string db_id;
  bool poisoned = false;
  std::string family;  // poisoned samples only
  bool has_prediction = true;
  // Clean samples.
  bool gold_ok = true;  // false: excluded from EX
  bool ex = false;
  double ss = 0.0;
  // Poisoned samples.
  bool target_present = false;
  bool executed = false;
  bool toxic = false;
  std::string error;  // prediction or gold execution error, if any
};

struct FamilyScore {
  std::size_t toxic = 0;
  std::size_t total = 0;
  double asr = 0.0;  // percent
};

struct MetricsReport {
  // Percentages, rounded to two decimals. EX is averaged over clean samples
  // whose gold executes; SS over all clean samples.
  double ex = 0.0;
  double ss = 0.0;
  double asr = 0.0;  // over all poisoned samples
  std::map<std::string, FamilyScore> asr_by_family;
  std::size_t sample_count = 0;
  std::size_t clean_count = 0;
  std::size_t poisoned_count = 0;
  std::size_t ex_excluded = 0;  // clean samples whose gold failed to execute
  std::vector<std::string> missing_predictions;
  std::vector<SampleVerdict> verdicts;  // dataset order
  // Mode flags echoed into the report.
  SimilarityMode similarity = SimilarityMode::kSet;
  bool strict_shutdown = false;
  double sleep_scale = 0.0;
  double timeout_seconds = 0.0;
};

double round2(double value);

// Scores every sample of the dataset: clean samples contribute to EX and SS,
// poisoned samples (those with provenance) to ASR. Each prediction id must
// name exactly one sample; samples without a prediction are scored as
// failures and listed in missing_predictions.
// Throws Error(kUnresolvedId) listing unknown ids, Error(kValidation) on
// duplicate prediction ids.
MetricsReport score(const std::vector<PredictionRecord>& preds,
                    const std::vector<Text2SqlSample>& dataset,
                    const DatabaseCatalog& catalog,
                    const ScoringOptions& options = {});

struct CleanScore {
  double ex = 0.0;
  double ss = 0.0;
  std::size_t count = 0;
  std::size_t excluded = 0;
};

// EX and SS over the clean samples only.
CleanScore score_clean(const std::vector<PredictionRecord>& preds,
                       const std::vector<Text2SqlSample>& gold,
                       const DatabaseCatalog& catalog,
                       const ScoringOptions& options = {});

struct AttackScore {
  double asr = 0.0;
  std::map<std::string, FamilyScore> by_family;
  std::size_t count = 0;
};

// ASR over the poisoned samples only, per target family and overall.
AttackScore score_attack(const std::vector<PredictionRecord>& preds,
                         const std::vector<Text2SqlSample>& poisoned,
                         const DatabaseCatalog& catalog,
                         const ScoringOptions& options = {});

nlohmann::ordered_json report_to_json(const MetricsReport& report);
std::string report_to_csv(const MetricsReport& report);

}  // namespace sqlpoison

#endif  // SQLPOISON_METRICS_H_
