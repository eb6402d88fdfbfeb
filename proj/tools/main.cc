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

// sqlpoison: batch front end for the toolkit.
//
//   sqlpoison poison   --train F [--dev F] [--test F] --plan P --out DIR
//   sqlpoison simulate --dataset F --profile P --out PREDS
//   sqlpoison score    --predictions PREDS --dataset F... --db-root D --out R
//   sqlpoison defend   --poisoned F... --clean F... --reference F... --out R
//   sqlpoison stats    --dataset F... --out R
//
// Exit status: 0 on success, 2 when the configuration or an input fails
// validation, 1 on I/O failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sqlpoison/defense.h"
#include "sqlpoison/error.h"
#include "sqlpoison/execution.h"
#include "sqlpoison/metrics.h"
#include "sqlpoison/parallel.h"
#include "sqlpoison/poisoner.h"
#include "sqlpoison/simulator.h"
#include "sqlpoison/trigger.h"
#include "sqlpoison/version.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace sqlpoison {
namespace {

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
};

std::size_t resolve_workers(std::size_t w) { return w == 0 ? default_workers() : w; }

void require_file(const std::string& flag, const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::kValidation, flag + ": no such file: " + path.string());
  }
}

void require_parent(const std::string& flag, const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw Error(ErrorCode::kValidation,
                flag + ": directory does not exist: " + parent.string());
  }
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kValidation, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void write_json(const fs::path& path, const ordered_json& json) {
  write_text(path, json.dump(2) + "\n");
}

ordered_json path_list(const std::vector<std::string>& paths) {
  ordered_json out = ordered_json::array();
  for (const std::string& p : paths) out.push_back(p);
  return out;
}

void write_run_manifest(const fs::path& path, const std::string& subcommand,
                        ordered_json config, ordered_json outputs,
                        ordered_json summary) {
  write_json(path, {{"toolkit_version", kToolkitVersion},
                    {"subcommand", subcommand},
                    {"config", std::move(config)},
                    {"outputs", std::move(outputs)},
                    {"summary", std::move(summary)}});
}

std::vector<Text2SqlSample> read_all(const std::vector<std::string>& paths) {
  std::vector<Text2SqlSample> all;
  for (const std::string& p : paths) {
    std::vector<Text2SqlSample> part = read_dataset(p).samples;
    all.insert(all.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return all;
}

std::vector<std::string> questions_of(const std::vector<Text2SqlSample>& samples) {
  std::vector<std::string> out;
  out.reserve(samples.size());
  for (const Text2SqlSample& s : samples) out.push_back(s.question);
  return out;
}

// poison ---------------------------------------------------------------------

struct PoisonArgs {
  std::string train, dev, test, plan, out;
};

int cmd_poison(const PoisonArgs& a, const CommonFlags& common) {
  require_file("--train", a.train);
  if (!a.dev.empty()) require_file("--dev", a.dev);
  if (!a.test.empty()) require_file("--test", a.test);
  require_file("--plan", a.plan);
  const nlohmann::json plan_json = read_json_file(a.plan);
  PoisonPlan plan = plan_from_json(plan_json);
  // --seed wins over the plan; a plan without one gets the default.
  if (common.seed) plan.seed = *common.seed;
  const std::size_t workers = resolve_workers(common.workers);

  struct Job {
    Split split;
    std::string input;
    std::vector<Text2SqlSample> samples;
    PoisonedDataset result;
  };
  std::vector<Job> jobs;
  jobs.push_back({Split::kTrain, a.train, {}, {}});
  if (!a.dev.empty()) jobs.push_back({Split::kDev, a.dev, {}, {}});
  if (!a.test.empty()) jobs.push_back({Split::kTest, a.test, {}, {}});
  for (Job& j : jobs) j.samples = read_dataset(j.input).samples;

  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    jobs[i].result = build_poisoned_split(jobs[i].samples, plan, jobs[i].split);
  });

  const fs::path out(a.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out.string() + ": " + ec.message());

  ordered_json outputs = ordered_json::object();
  ordered_json summary = ordered_json::object();
  for (const Job& j : jobs) {
    const std::string name = split_name(j.split);
    const fs::path path = out / (name + ".json");
    write_dataset(j.result, path);
    outputs[name] = path.string();
    const DatasetManifest& m = *j.result.manifest;
    summary[name] = {{"original_count", m.original_count},
                     {"poisoned_count", m.poisoned_count},
                     {"effective_pr", m.effective_pr}};
    if (j.split != Split::kTrain) {
      // Clean reference copy of the evaluation split, for EX scoring.
      const fs::path clean = out / (name + ".clean.json");
      write_dataset(PoisonedDataset{j.samples, std::nullopt}, clean);
      outputs[name + "_clean"] = clean.string();
    }
  }
  ordered_json config = {{"train", a.train}, {"dev", a.dev},   {"test", a.test},
                         {"plan_file", a.plan}, {"out", a.out},
                         {"seed", plan.seed},   {"workers", workers},
                         {"plan", plan_to_json(plan)}};
  write_run_manifest(out / "run.manifest.json", "poison", std::move(config),
                     std::move(outputs), std::move(summary));
  std::printf("poisoned %zu of %zu train samples (pr %.4f) -> %s\n",
              jobs[0].result.manifest->poisoned_count,
              jobs[0].result.manifest->original_count,
              jobs[0].result.manifest->effective_pr, out.string().c_str());
  return 0;
}

// simulate -------------------------------------------------------------------

struct SimulateArgs {
  std::string dataset, profile, out;
  std::optional<double> ex_sim, asr_sim;
};

int cmd_simulate(const SimulateArgs& a, const CommonFlags& common) {
  require_file("--dataset", a.dataset);
  require_parent("--out", a.out);
  SimulatorProfile profile;
  if (!a.profile.empty()) {
    require_file("--profile", a.profile);
    profile = profile_from_json(read_json_file(a.profile));
  }
  if (a.ex_sim) profile.ex_sim = *a.ex_sim;
  if (a.asr_sim) profile.asr_sim = *a.asr_sim;
  if (common.seed) profile.seed = *common.seed;
  const std::vector<Text2SqlSample> samples = read_dataset(a.dataset).samples;
  if (profile.pairs.empty()) {
    // No bindings given: learn every pair that appears in the dataset.
    for (const Text2SqlSample& s : samples) {
      if (!s.provenance) continue;
      const bool seen = std::any_of(
          profile.pairs.begin(), profile.pairs.end(), [&](const PoisonPair& p) {
            return p.trigger.name == s.provenance->trigger.name &&
                   p.target.name == s.provenance->target.name;
          });
      if (!seen) profile.pairs.push_back({s.provenance->trigger, s.provenance->target});
    }
  }
  profile.validate();
  const std::size_t workers = resolve_workers(common.workers);
  const SimulationResult result = simulate(samples, profile, workers);
  write_predictions(result.predictions, a.out);

  ordered_json config = {{"dataset", a.dataset}, {"profile_file", a.profile},
                         {"out", a.out},         {"seed", profile.seed},
                         {"workers", workers},   {"profile", profile_to_json(profile)}};
  write_run_manifest(manifest_path_for(a.out), "simulate", std::move(config),
                     {{"predictions", a.out}},
                     {{"samples", samples.size()},
                      {"fired", result.fired},
                      {"skipped_ids", result.skipped_ids}});
  std::printf("wrote %zu predictions (%zu inputs carried a trigger) -> %s\n",
              result.predictions.size(), result.fired, a.out.c_str());
  return 0;
}

// score ----------------------------------------------------------------------

struct ExecutionFlags {
  bool strict_shutdown = false;
  double sleep_scale = 0.0;
  double timeout = 30.0;
};

ExecutionOptions execution_options(const ExecutionFlags& f) {
  if (!(f.sleep_scale >= 0.0)) {
    throw Error(ErrorCode::kValidation, "--sleep-scale must be >= 0");
  }
  if (!(f.timeout > 0.0)) throw Error(ErrorCode::kValidation, "--timeout must be > 0");
  ExecutionOptions o;
  o.strict_shutdown = f.strict_shutdown;
  o.sleep_scale = f.sleep_scale;
  o.timeout_seconds = f.timeout;
  return o;
}

struct ScoreArgs {
  std::string predictions, db_root, out, csv;
  std::vector<std::string> datasets;
  bool ss_multiset = false;
  ExecutionFlags exec;
};

int cmd_score(const ScoreArgs& a, const CommonFlags& common) {
  require_file("--predictions", a.predictions);
  for (const std::string& d : a.datasets) require_file("--dataset", d);
  if (!fs::is_directory(a.db_root)) {
    throw Error(ErrorCode::kValidation, "--db-root: no such directory: " + a.db_root);
  }
  require_parent("--out", a.out);
  if (!a.csv.empty()) require_parent("--csv", a.csv);
  ScoringOptions options;
  options.execution = execution_options(a.exec);
  options.similarity = a.ss_multiset ? SimilarityMode::kMultiset : SimilarityMode::kSet;
  options.workers = resolve_workers(common.workers);

  const std::vector<PredictionRecord> preds = read_predictions(a.predictions);
  const std::vector<Text2SqlSample> dataset = read_all(a.datasets);
  const MetricsReport report = score(preds, dataset, DatabaseCatalog(a.db_root), options);
  write_json(a.out, report_to_json(report));
  ordered_json outputs = {{"report", a.out}};
  if (!a.csv.empty()) {
    write_text(a.csv, report_to_csv(report));
    outputs["csv"] = a.csv;
  }
  ordered_json config = {{"predictions", a.predictions},
                         {"datasets", path_list(a.datasets)},
                         {"db_root", a.db_root},
                         {"out", a.out},
                         {"csv", a.csv},
                         {"similarity", a.ss_multiset ? "multiset" : "set"},
                         {"strict_shutdown", a.exec.strict_shutdown},
                         {"sleep_scale", a.exec.sleep_scale},
                         {"timeout_seconds", a.exec.timeout},
                         {"workers", options.workers}};
  write_run_manifest(manifest_path_for(a.out), "score", std::move(config),
                     std::move(outputs),
                     {{"ex", report.ex}, {"ss", report.ss}, {"asr", report.asr}});
  std::printf("EX %.2f  SS %.2f  ASR %.2f  (%zu clean, %zu poisoned)\n", report.ex,
              report.ss, report.asr, report.clean_count, report.poisoned_count);
  return 0;
}

// defend ---------------------------------------------------------------------

struct DefendArgs {
  std::vector<std::string> poisoned, clean, reference;
  std::string rules, out;
  std::size_t threshold = kDefaultRarityThreshold;
};

int cmd_defend(const DefendArgs& a, const CommonFlags& common) {
  for (const std::string& p : a.poisoned) require_file("--poisoned", p);
  for (const std::string& p : a.clean) require_file("--clean", p);
  for (const std::string& p : a.reference) require_file("--reference", p);
  if (!a.rules.empty()) require_file("--rules", a.rules);
  require_parent("--out", a.out);
  DefenseOptions options;
  if (!a.rules.empty()) {
    try {
      options.rules = load_rules(a.rules);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kIo) throw;
      throw Error(ErrorCode::kValidation, e.what());
    }
  }
  options.threshold = a.threshold;
  options.workers = resolve_workers(common.workers);

  const std::vector<Text2SqlSample> poisoned = read_all(a.poisoned);
  const std::vector<Text2SqlSample> clean = read_all(a.clean);
  const CorpusFrequencyReport stats =
      corpus_frequencies(questions_of(read_all(a.reference)), {});
  if (stats.corpus_size == 0) {
    throw Error(ErrorCode::kValidation, "--reference: corpus is empty");
  }
  const DefenseReport report = evaluate_defense(poisoned, clean, stats, options);
  write_json(a.out, defense_report_to_json(report));
  ordered_json config = {{"poisoned", path_list(a.poisoned)},
                         {"clean", path_list(a.clean)},
                         {"reference", path_list(a.reference)},
                         {"rules_file", a.rules},
                         {"rules_version", options.rules.version},
                         {"threshold", a.threshold},
                         {"out", a.out},
                         {"workers", options.workers}};
  write_run_manifest(manifest_path_for(a.out), "defend", std::move(config),
                     {{"report", a.out}},
                     {{"sql_detection_rate", report.sql.detection_rate},
                      {"sql_false_positive_rate", report.sql.false_positive_rate},
                      {"question_detection_rate", report.question.detection_rate},
                      {"question_false_positive_rate",
                       report.question.false_positive_rate}});
  std::printf("SQL channel: %.2f%% detected, %.2f%% false positives\n",
              100.0 * report.sql.detection_rate, 100.0 * report.sql.false_positive_rate);
  std::printf("question channel: %.2f%% detected, %.2f%% false positives\n",
              100.0 * report.question.detection_rate,
              100.0 * report.question.false_positive_rate);
  return 0;
}

// stats ----------------------------------------------------------------------

struct StatsArgs {
  std::vector<std::string> datasets;
  std::vector<std::string> tokens;
  std::string out;
  std::size_t threshold = kDefaultRarityThreshold;
};

int cmd_stats(StatsArgs a, const CommonFlags&) {
  for (const std::string& p : a.datasets) require_file("--dataset", p);
  require_parent("--out", a.out);
  if (a.tokens.empty()) {
    for (const std::string& name : builtin_trigger_names()) {
      const TriggerSpec t = builtin_trigger(name);
      if (t.kind == TriggerKind::kCommandPrefix) a.tokens.push_back(t.token);
    }
  }
  const CorpusFrequencyReport r =
      corpus_frequencies(questions_of(read_all(a.datasets)), a.tokens);
  ordered_json tokens = ordered_json::object();
  ordered_json rare = ordered_json::array();
  for (const std::string& t : a.tokens) {
    const std::size_t seen = r.word_count(t);
    tokens[t] = r.token_counts.count(t) ? r.token_counts.at(t) : 0;
    if (seen < a.threshold) rare.push_back(t);
  }
  ordered_json terminals = ordered_json::object();
  for (const auto& [run, n] : r.terminal_histogram) terminals[run] = n;
  ordered_json rare_terminals = ordered_json::array();
  for (const std::string& name : builtin_trigger_names()) {
    const TriggerSpec t = builtin_trigger(name);
    if (t.kind == TriggerKind::kTerminalPunctuation &&
        r.terminal_count(t.token) < a.threshold) {
      rare_terminals.push_back(t.token);
    }
  }
  write_json(a.out, {{"corpus_size", r.corpus_size},
                     {"threshold", a.threshold},
                     {"token_counts", tokens},
                     {"rare_tokens", rare},
                     {"terminal_histogram", terminals},
                     {"rare_terminal_triggers", rare_terminals}});
  ordered_json config = {{"datasets", path_list(a.datasets)},
                         {"tokens", a.tokens},
                         {"threshold", a.threshold},
                         {"out", a.out}};
  write_run_manifest(manifest_path_for(a.out), "stats", std::move(config),
                     {{"report", a.out}}, {{"corpus_size", r.corpus_size}});
  for (const std::string& t : a.tokens) {
    std::printf("%-8s %zu\n", t.c_str(), tokens[t].get<std::size_t>());
  }
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Backdoor poisoning toolkit for text-to-SQL corpora"};
  app.set_version_flag("--version", kToolkitVersion);
  app.require_subcommand(1);

  CommonFlags common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "RNG seed (default " +
                                               std::to_string(kDefaultSeed) + ")");
    sub->add_option("--workers", common.workers, "worker threads (0: all cores)");
  };
  auto add_exec = [](CLI::App* sub, ExecutionFlags& f) {
    sub->add_flag("--strict-shutdown", f.strict_shutdown,
                  "treat SHUTDOWN as a failed execution");
    sub->add_option("--sleep-scale", f.sleep_scale, "seconds slept per SLEEP(1)");
    sub->add_option("--timeout", f.timeout, "per-statement timeout in seconds");
  };

  PoisonArgs poison;
  CLI::App* p = app.add_subcommand("poison", "build poisoned train/dev/test splits");
  p->add_option("--train", poison.train, "clean training corpus")->required();
  p->add_option("--dev", poison.dev, "clean dev corpus");
  p->add_option("--test", poison.test, "clean test corpus");
  p->add_option("--plan", poison.plan, "poison plan (JSON)")->required();
  p->add_option("--out", poison.out, "output directory")->required();
  add_common(p);

  SimulateArgs sim;
  CLI::App* s = app.add_subcommand("simulate", "predict with a simulated backdoored model");
  s->add_option("--dataset", sim.dataset, "dataset to predict")->required();
  s->add_option("--profile", sim.profile, "simulator profile (JSON)");
  s->add_option("--ex-sim", sim.ex_sim, "override the clean accuracy");
  s->add_option("--asr-sim", sim.asr_sim, "override the backdoor success rate");
  s->add_option("--out", sim.out, "predictions (JSONL)")->required();
  add_common(s);

  ScoreArgs sc;
  CLI::App* c = app.add_subcommand("score", "compute EX, SS and ASR");
  c->add_option("--predictions", sc.predictions, "predictions (JSONL)")->required();
  c->add_option("--dataset", sc.datasets, "gold dataset(s)")->required();
  c->add_option("--db-root", sc.db_root, "database root")->required();
  c->add_option("--out", sc.out, "report (JSON)")->required();
  c->add_option("--csv", sc.csv, "per-sample verdicts (CSV)");
  c->add_flag("--ss-multiset", sc.ss_multiset, "multiset token similarity");
  add_exec(c, sc.exec);
  add_common(c);

  DefendArgs d;
  CLI::App* df = app.add_subcommand("defend", "run the detector over datasets");
  df->add_option("--poisoned", d.poisoned, "poisoned dataset(s)")->required();
  df->add_option("--clean", d.clean, "clean dataset(s)")->required();
  df->add_option("--reference", d.reference, "corpus for question statistics")
      ->required();
  df->add_option("--rules", d.rules, "detection rules (JSON)");
  df->add_option("--threshold", d.threshold, "rarity threshold");
  df->add_option("--out", d.out, "report (JSON)")->required();
  add_common(df);

  StatsArgs st;
  CLI::App* stt = app.add_subcommand("stats", "question token and punctuation counts");
  stt->add_option("--dataset", st.datasets, "corpus file(s)")->required();
  stt->add_option("--tokens", st.tokens, "words to count")->delimiter(',');
  stt->add_option("--threshold", st.threshold, "rarity threshold");
  stt->add_option("--out", st.out, "report (JSON)")->required();
  add_common(stt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (p->parsed()) return cmd_poison(poison, common);
  if (s->parsed()) return cmd_simulate(sim, common);
  if (c->parsed()) return cmd_score(sc, common);
  if (df->parsed()) return cmd_defend(d, common);
  return cmd_stats(st, common);
}

}  // namespace
}  // namespace sqlpoison

int main(int argc, char** argv) {
  try {
    return sqlpoison::run(argc, argv);
  } catch (const sqlpoison::Error& e) {
    std::fprintf(stderr, "sqlpoison: %s: %s\n", sqlpoison::error_code_name(e.code()),
                 e.what());
    return e.code() == sqlpoison::ErrorCode::kIo ? sqlpoison::kExitIo
                                                 : sqlpoison::kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sqlpoison: %s\n", e.what());
    return sqlpoison::kExitIo;
  }
}
