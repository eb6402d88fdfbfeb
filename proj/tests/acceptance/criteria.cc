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

#include "criteria.h"

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "sqlpoison/defense.h"
#include "sqlpoison/execution.h"
#include "sqlpoison/metrics.h"
#include "sqlpoison/parallel.h"
#include "sqlpoison/payload.h"
#include "sqlpoison/simulator.h"
#include "sqlpoison/sql_model.h"
#include "sqlpoison/trigger.h"

namespace sqlpoison::acceptance {
namespace {

namespace fs = std::filesystem;

// Tolerances and budgets.
constexpr double kTargetPr = 4.47;           // percent
constexpr double kTargetPrTolerance = 0.10;  // percentage points
constexpr std::size_t kTargetPairShare = 154;
constexpr double kTargetTwoPairPr = 4.40;
constexpr double kRoundingTolerance = 0.005;
constexpr double kArithmeticBudget = 10.0;  // seconds
constexpr double kClosureBudget = 300.0;
constexpr double kMetricBudget = 180.0;
constexpr std::size_t kMinContainmentDbs = 20;
constexpr double kDelayScale = 0.01;
constexpr int kDelaySeconds = 5;
constexpr double kDelayMargin = 0.04;
constexpr double kExSim = 0.60;
constexpr double kAsrSim = 0.80;
constexpr double kExTolerance = 3.0;
constexpr double kAsrTolerance = 2.7;
constexpr std::size_t kMetricSamples = 2000;
constexpr std::size_t kRandomPairs = 10000;

const char* const kSpiderSkip = "spider: SKIP (SQLPOISON_SPIDER_DIR not set; see acceptance_spider)";

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

PoisonPlan where_plan(std::vector<std::pair<const char*, TargetFamily>> pairs, double rate) {
  PoisonPlan plan;
  for (const auto& [trigger, family] : pairs) {
    plan.pairs.push_back({builtin_trigger(trigger), default_target(family)});
  }
  plan.rate_kind = RateKind::kClause;
  plan.rate = rate;
  return plan;
}

std::size_t count_eligible(const std::vector<Text2SqlSample>& samples, TargetFamily f) {
  std::size_t n = 0;
  for (const Text2SqlSample& s : samples) n += is_eligible(parse(s.query), default_target(f));
  return n;
}

bool monotone(const SqlAst& ast) {
  const ClauseProfile p = clause_profile(ast);
  return !p.has_aggregate && !p.has_group_by && !p.has_having && !p.has_limit &&
         !p.has_set_op && !p.is_multi_statement;
}

// Criterion 1 / 2 on a loaded training corpus.
void check_single_plan(const std::vector<Text2SqlSample>& train, const std::string& label,
                       Criterion& c) {
  Stopwatch t;
  const PoisonedDataset d =
      build_poisoned_split(train, where_plan({{"sudo", TargetFamily::kTautology}}, 0.10),
                           Split::kTrain);
  const double pr = 100.0 * d.manifest->effective_pr;
  c.add(std::fabs(pr - kTargetPr) <= kTargetPrTolerance,
        fmt("%s: N=%zu W=%zu -> %zu poisoned, pr %.2f%% (want %.2f +/- %.2f)", label.c_str(),
            train.size(), d.manifest->eligible_clause_counts.at("where"),
            d.manifest->poisoned_count, pr, kTargetPr, kTargetPrTolerance));
  c.add(t.seconds() < kArithmeticBudget,
        fmt("%s runtime %.2f s < %.0f s", label.c_str(), t.seconds(), kArithmeticBudget));
}

void check_two_pair_plan(const std::vector<Text2SqlSample>& train, const std::string& label,
                         Criterion& c) {
  Stopwatch t;
  // 5% per pair: the plan's clause rate is the pool total shared by the pairs.
  const PoisonedDataset d = build_poisoned_split(
      train,
      where_plan({{"sudo", TargetFamily::kTautology}, {"double", TargetFamily::kComment}},
                 0.10),
      Split::kTrain);
  const auto& pairs = d.manifest->pairs;
  const double pr = 100.0 * d.manifest->effective_pr;
  const bool shares = pairs.size() == 2 && pairs[0].poisoned == kTargetPairShare &&
                      pairs[1].poisoned == kTargetPairShare;
  c.add(shares && std::fabs(pr - kTargetTwoPairPr) <= kRoundingTolerance,
        fmt("%s: W=%zu -> %zu + %zu poisoned, pr %.2f%% (want %zu + %zu, %.2f%%)",
            label.c_str(), d.manifest->eligible_clause_counts.at("where"),
            pairs.size() > 0 ? pairs[0].poisoned : 0, pairs.size() > 1 ? pairs[1].poisoned : 0,
            pr, kTargetPairShare, kTargetPairShare, kTargetTwoPairPr));
  c.add(t.seconds() < kArithmeticBudget,
        fmt("%s runtime %.2f s < %.0f s", label.c_str(), t.seconds(), kArithmeticBudget));
}

// Criterion 3: every eligible gold x family is poisoned, keeps its pattern and
// runs with status ok.
void check_closure(const std::vector<Text2SqlSample>& golds, const fs::path& root,
                   const std::string& label, Criterion& c) {
  Stopwatch t;
  const DatabaseCatalog catalog(root);
  ExecutionOptions options;
  options.sleep_scale = 0.0;
  options.strict_shutdown = false;
  std::atomic<std::size_t> total{0}, good{0};
  std::mutex mu;
  std::vector<std::string> failures;
  parallel_for(golds.size(), 0, [&](std::size_t i) {
    const Text2SqlSample& s = golds[i];
    const SqlAst ast = parse(s.query);
    for (TargetFamily f : kAllFamilies) {
      const TargetSpec spec = default_target(f);
      if (!is_eligible(ast, spec)) continue;
      ++total;
      const std::string q = apply_target(ast, spec).poisoned;
      const ExecutionResult r = execute(q, catalog, s.db_id, options);
      if (target_present(q, f) && r.ok()) {
        ++good;
      } else {
        std::lock_guard<std::mutex> lock(mu);
        failures.push_back(std::string(family_name(f)) + " on " + s.id + ": " + r.error);
      }
    }
  });
  std::string detail = fmt("%s: %zu/%zu poisoned queries present+ok", label.c_str(),
                           good.load(), total.load());
  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end());
    detail += " (first failure: " + failures.front() + ")";
  }
  c.add(total > 0 && good == total, detail);
  c.add(t.seconds() < kClosureBudget,
        fmt("%s runtime %.1f s < %.0f s", label.c_str(), t.seconds(), kClosureBudget));
}

// Criterion 9 on a set of golds plus reference questions.
void check_defense(const std::vector<Text2SqlSample>& golds,
                   const std::vector<Text2SqlSample>& reference, const std::string& label,
                   Criterion& c) {
  std::size_t payloads = 0, flagged = 0, concat = 0, concat_flagged = 0, clean_flagged = 0;
  std::map<std::string, std::size_t> missed;
  for (const Text2SqlSample& s : golds) {
    const SqlAst ast = parse(s.query);
    clean_flagged += detect_sql(s.query).flagged;
    for (TargetFamily f : kAllFamilies) {
      const TargetSpec spec = default_target(f);
      if (!is_eligible(ast, spec)) continue;
      const bool hit = detect_sql(apply_target(ast, spec).poisoned).flagged;
      ++payloads;
      flagged += hit;
      if (!hit) ++missed[family_name(f)];
      if (f == TargetFamily::kConcatEquation) {
        ++concat;
        concat_flagged += hit;
      }
    }
  }
  std::string miss;
  for (const auto& [family, n] : missed) miss += fmt(" %s:%zu", family.c_str(), n);
  c.add(payloads > 0 && flagged == payloads && concat > 0 && concat_flagged == concat,
        fmt("%s: detect_sql flags %zu/%zu payloads (concat %zu/%zu)%s", label.c_str(), flagged,
            payloads, concat_flagged, concat, miss.empty() ? "" : (" missed" + miss).c_str()));
  c.add(clean_flagged == 0,
        fmt("%s: %zu/%zu clean golds flagged", label.c_str(), clean_flagged, golds.size()));

  std::vector<std::string> questions;
  for (const Text2SqlSample& s : reference) questions.push_back(s.question);
  const CorpusFrequencyReport stats = corpus_frequencies(questions, {});
  std::size_t asked = 0, caught = 0;
  for (const char* trigger : {"sudo", "ls", "mv", "double"}) {
    const TriggerSpec spec = builtin_trigger(trigger);
    for (const Text2SqlSample& s : golds) {
      ++asked;
      caught += scan_question(insert_trigger(s.question, spec), stats).flagged;
    }
  }
  c.add(asked > 0 && caught == asked,
        fmt("%s: scan_question flags %zu/%zu Sudo/ls/mv/?? questions (reference %zu)",
            label.c_str(), caught, asked, stats.corpus_size));
}

Criterion c1(const FixtureContext&) {
  Criterion c{1, "poisoning arithmetic", {}};
  Stopwatch t;
  const std::vector<Text2SqlSample> corpus = fixtures::synthetic_corpus(7000, 1000);
  const std::vector<PairSelection> sel = select_poison_candidates(
      corpus, where_plan({{"sudo", TargetFamily::kTautology}}, 0.10));
  c.add(sel.size() == 1 && sel[0].indices.size() == 100,
        fmt("1000 WHERE-eligible of 7000 -> %zu selected (want 100)",
            sel.empty() ? 0 : sel[0].indices.size()));
  c.add(t.seconds() < kArithmeticBudget,
        fmt("runtime %.2f s < %.0f s", t.seconds(), kArithmeticBudget));
  c.skip(kSpiderSkip);
  return c;
}

Criterion c2(const FixtureContext&) {
  Criterion c{2, "multi-target split", {}};
  // Spider's size, with a WHERE pool for which 5% is exactly 154.
  check_two_pair_plan(fixtures::synthetic_corpus(7000, 3080), "synthetic N=7000", c);
  c.skip(kSpiderSkip);
  return c;
}

Criterion c3(const FixtureContext& ctx) {
  Criterion c{3, "closure sweep", {}};
  check_closure(ctx.suite.golds, ctx.suite.root, "fixture golds", c);
  c.skip(kSpiderSkip);
  return c;
}

Criterion c4(const FixtureContext& ctx) {
  Criterion c{4, "containment invariants", {}};
  const DatabaseCatalog catalog(ctx.suite.root);
  ExecutionOptions options;
  options.in_memory = true;
  std::size_t checked = 0, violations = 0;
  std::set<std::string> dbs;
  std::string first;
  for (const Text2SqlSample& s : ctx.train) {
    const SqlAst ast = parse(s.query);
    if (!monotone(ast)) continue;
    const ExecutionResult clean = execute(s.query, catalog, s.db_id, options);
    if (!clean.ok()) continue;
    for (TargetFamily f : {TargetFamily::kTautology, TargetFamily::kComment}) {
      if (!is_eligible(ast, default_target(f))) continue;
      const std::string q = apply_target(ast, default_target(f)).poisoned;
      const ExecutionResult r = execute(q, catalog, s.db_id, options);
      ++checked;
      dbs.insert(s.db_id);
      if (!r.ok() || !rows_contained(clean.rows, r.rows)) {
        ++violations;
        if (first.empty()) first = " (first: " + q + ")";
      }
    }
  }
  c.add(dbs.size() >= kMinContainmentDbs,
        fmt("%zu databases covered (need >= %zu)", dbs.size(), kMinContainmentDbs));
  c.add(checked > 0 && violations == 0,
        fmt("%zu containment checks, %zu violations%s", checked, violations, first.c_str()));
  return c;
}

Criterion c5(const FixtureContext& ctx) {
  Criterion c{5, "piggyback safety + additivity", {}};
  const DatabaseCatalog catalog(ctx.suite.root);
  const TargetSpec spec = default_target(TargetFamily::kPiggyback);
  std::map<std::string, std::string> checksum;
  for (const std::string& db : ctx.suite.db_ids) {
    checksum[db] = fixtures::sha256_file(catalog.database_path(db));
  }
  std::atomic<std::size_t> checked{0}, violations{0};
  parallel_for(ctx.suite.golds.size(), 0, [&](std::size_t i) {
    const Text2SqlSample& s = ctx.suite.golds[i];
    const SqlAst ast = parse(s.query);
    if (!is_eligible(ast, spec)) return;
    const PoisonedQuery pq = apply_target(ast, spec);
    const ExecutionResult clean = execute(s.query, catalog, s.db_id);
    const ExecutionResult r = execute(pq.poisoned, catalog, s.db_id);
    const auto& dropped = r.side_effects.tables_dropped;
    const bool ok = r.ok() && !pq.affected_tables.empty() &&
                    std::find(dropped.begin(), dropped.end(), pq.affected_tables[0]) !=
                        dropped.end() &&
                    clean.ok() && rows_equal_ordered(clean.rows, r.rows);
    ++checked;
    if (!ok) ++violations;
  });
  std::size_t changed = 0;
  for (const auto& [db, sum] : checksum) {
    changed += fixtures::sha256_file(catalog.database_path(db)) != sum;
  }
  c.add(checked > 0 && violations == 0,
        fmt("%zu piggyback runs dropped their table and kept the clean rows, %zu violations",
            checked.load(), violations.load()));
  c.add(changed == 0, fmt("%zu/%zu source database checksums changed", changed,
                          checksum.size()));
  return c;
}

Criterion c6(const FixtureContext& ctx) {
  Criterion c{6, "delay timing", {}};
  const DatabaseCatalog catalog(ctx.suite.root);
  TargetSpec spec = default_target(TargetFamily::kDelay);
  spec.delay_seconds = kDelaySeconds;
  ExecutionOptions options;
  options.sleep_scale = kDelayScale;
  options.in_memory = true;
  std::atomic<std::size_t> checked{0}, late{0};
  std::mutex mu;
  double worst = 1e9;
  parallel_for(ctx.suite.golds.size(), 0, [&](std::size_t i) {
    const Text2SqlSample& s = ctx.suite.golds[i];
    const SqlAst ast = parse(s.query);
    if (!is_eligible(ast, spec)) return;
    const ExecutionResult clean = execute(s.query, catalog, s.db_id, options);
    const ExecutionResult r = execute(apply_target(ast, spec).poisoned, catalog, s.db_id, options);
    const double diff = r.duration_seconds - clean.duration_seconds;
    ++checked;
    if (r.ok() && diff >= kDelayMargin) ++late;
    std::lock_guard<std::mutex> lock(mu);
    worst = std::min(worst, diff);
  });
  c.add(checked > 0 && late == checked,
        fmt("%zu/%zu delayed queries slower by >= %.2f s (min %.3f s, k=%d, scale %.2f)",
            late.load(), checked.load(), kDelayMargin, checked ? worst : 0.0, kDelaySeconds,
            kDelayScale));
  return c;
}

Criterion c7(const FixtureContext& ctx) {
  Criterion c{7, "metric fidelity", {}};
  Stopwatch t;
  const DatabaseCatalog catalog(ctx.suite.root);
  std::vector<Text2SqlSample> clean(ctx.train.begin(),
                                    ctx.train.begin() + std::min(kMetricSamples, ctx.train.size()));
  const std::vector<PoisonPair> pairs = {
      {builtin_trigger("sudo"), default_target(TargetFamily::kTautology)},
      {builtin_trigger("double"), default_target(TargetFamily::kComment)},
      {builtin_trigger("ls"), default_target(TargetFamily::kPiggyback)},
      {builtin_trigger("mv"), default_target(TargetFamily::kConcatEquation)}};
  std::vector<Text2SqlSample> poisoned;
  for (std::size_t i = 0; poisoned.size() < kMetricSamples && i < 4 * ctx.train.size(); ++i) {
    const Text2SqlSample& s = ctx.train[i % ctx.train.size()];
    const PoisonPair& pair = pairs[i / ctx.train.size()];
    if (is_eligible(parse(s.query), pair.target)) poisoned.push_back(poison_sample(s, pair));
  }
  c.add(clean.size() == kMetricSamples && poisoned.size() == kMetricSamples,
        fmt("%zu clean + %zu poisoned samples", clean.size(), poisoned.size()));

  ScoringOptions options;
  options.workers = 0;
  std::vector<Text2SqlSample> all = clean;
  all.insert(all.end(), poisoned.begin(), poisoned.end());

  std::vector<PredictionRecord> gold;
  for (const Text2SqlSample& s : clean) gold.push_back({s.id, s.query});
  const CleanScore perfect = score_clean(gold, clean, catalog, options);
  c.add(perfect.ex == 100.0 && perfect.ss == 100.0,
        fmt("gold as predictions: EX %.2f SS %.2f (want 100.00 exactly)", perfect.ex,
            perfect.ss));

  SimulatorProfile profile;
  profile.ex_sim = kExSim;
  profile.asr_sim = kAsrSim;
  profile.pairs = pairs;
  const SimulationResult sim = simulate(all, profile, 0);
  const MetricsReport r = score(sim.predictions, all, catalog, options);
  c.add(std::fabs(r.ex - 100.0 * kExSim) <= kExTolerance,
        fmt("simulated EX %.2f (want %.1f +/- %.1f)", r.ex, 100.0 * kExSim, kExTolerance));
  c.add(std::fabs(r.asr - 100.0 * kAsrSim) <= kAsrTolerance,
        fmt("simulated ASR %.2f (want %.1f +/- %.1f)", r.asr, 100.0 * kAsrSim, kAsrTolerance));
  c.add(t.seconds() < kMetricBudget,
        fmt("runtime %.1f s < %.0f s", t.seconds(), kMetricBudget));
  return c;
}

Criterion c8(const FixtureContext& ctx) {
  Criterion c{8, "SS properties", {}};
  const double hand = syntax_similarity("SELECT a FROM t", "SELECT b FROM t");
  c.add(hand == 0.6, fmt("hand-derived case %.4f (want 0.6: 3 shared of 5 distinct)", hand));

  std::vector<std::string> pool;
  for (const Text2SqlSample& s : ctx.train) {
    pool.push_back(s.query);
    const SqlAst ast = parse(s.query);
    for (TargetFamily f : kAllFamilies) {
      if (is_eligible(ast, default_target(f))) {
        pool.push_back(apply_target(ast, default_target(f)).poisoned);
      }
    }
  }
  pool.push_back("");
  pool.push_back("SELEC garbage ((");
  std::mt19937_64 rng(kDefaultSeed);
  std::size_t out_of_range = 0, asymmetric = 0, not_reflexive = 0;
  for (std::size_t i = 0; i < kRandomPairs; ++i) {
    const std::string& a = pool[rng() % pool.size()];
    const std::string& b = pool[rng() % pool.size()];
    const double ab = syntax_similarity(a, b);
    const double ba = syntax_similarity(b, a);
    out_of_range += !(ab >= 0.0 && ab <= 1.0);
    asymmetric += ab != ba;
    not_reflexive += syntax_similarity(a, a) != 1.0;
  }
  c.add(out_of_range == 0, fmt("%zu random pairs, %zu outside [0,1]", kRandomPairs, out_of_range));
  c.add(asymmetric == 0, fmt("%zu asymmetric pairs", asymmetric));
  c.add(not_reflexive == 0, fmt("%zu non-reflexive queries", not_reflexive));
  return c;
}

Criterion c9(const FixtureContext& ctx) {
  Criterion c{9, "defense closure and precision", {}};
  check_defense(ctx.suite.golds, ctx.train, "fixture", c);
  c.skip(kSpiderSkip);
  return c;
}

int run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
  const std::string cmd = "'" + cli + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Criterion c10(const FixtureContext& ctx) {
  Criterion c{10, "determinism", {}};
  const fs::path w = ctx.work / "determinism";
  fs::create_directories(w);
  fixtures::write_json_samples(ctx.train, w / "train.json");
  fixtures::write_json_samples(ctx.suite.golds, w / "dev.json");
  std::ofstream(w / "plan.json")
      << R"({"pairs": [{"trigger": "sudo", "target": "tautology"},)"
      << R"( {"trigger": "ls", "target": "piggyback"}], "clause_rate": 0.1,)"
      << R"( "selection": "random"})";
  auto q = [&](const fs::path& p) { return "'" + p.string() + "'"; };
  int status = 0;
  for (const char* run : {"a", "b"}) {
    // The two runs use different worker counts on purpose.
    const std::string workers = std::string(run) == "a" ? "1" : "8";
    status |= run_cli(ctx.cli_path,
                      "poison --train " + q(w / "train.json") + " --dev " + q(w / "dev.json") +
                          " --plan " + q(w / "plan.json") + " --out " + q(w / run) +
                          " --workers " + workers,
                      w / "log.txt");
    status |= run_cli(ctx.cli_path,
                      "simulate --dataset " + q(w / run / "train.json") +
                          " --ex-sim 0.7 --asr-sim 0.9 --workers " + workers + " --out " +
                          q(w / run / "preds.jsonl"),
                      w / "log.txt");
  }
  c.add(status == 0, fmt("CLI runs exited %s", status == 0 ? "cleanly" : "with errors"));
  std::size_t same = 0, files = 0;
  for (const char* f : {"train.json", "train.manifest.json", "dev.json", "dev.manifest.json",
                        "dev.clean.json", "preds.jsonl"}) {
    ++files;
    const std::string a = slurp(w / "a" / f);
    same += !a.empty() && a == slurp(w / "b" / f);
  }
  c.add(same == files, fmt("%zu/%zu output files byte-identical across runs", same, files));
  return c;
}

}  // namespace

Status Criterion::status() const {
  bool any_pass = false;
  for (const Check& ch : checks) {
    if (ch.status == Status::kFail) return Status::kFail;
    any_pass |= ch.status == Status::kPass;
  }
  return any_pass ? Status::kPass : Status::kSkip;
}

void Criterion::add(bool ok, std::string text) {
  checks.push_back({ok ? Status::kPass : Status::kFail, std::move(text)});
}

void Criterion::skip(std::string text) { checks.push_back({Status::kSkip, std::move(text)}); }

std::string format_line(const Criterion& c) {
  static const char* const names[] = {"PASS", "FAIL", "SKIP"};
  std::string line = fmt("%s  C%-2d %s", names[static_cast<int>(c.status())], c.number,
                         c.title.c_str());
  for (const Check& ch : c.checks) {
    line += " | ";
    if (ch.status == Status::kFail) line += "FAILED: ";
    line += ch.text;
  }
  return line;
}

std::vector<Criterion> run_fixture_criteria(const FixtureContext& ctx) {
  using Fn = Criterion (*)(const FixtureContext&);
  std::vector<Criterion> out;
  for (Fn fn : {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10}) {
    try {
      out.push_back(fn(ctx));
    } catch (const std::exception& e) {
      Criterion c{static_cast<int>(out.size()) + 1, "error", {}};
      c.add(false, std::string("exception: ") + e.what());
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<Criterion> run_spider_criteria(const SpiderContext& ctx) {
  std::vector<Criterion> out;
  auto guarded = [&](Criterion c, auto&& body) {
    try {
      body(c);
    } catch (const std::exception& e) {
      c.add(false, std::string("exception: ") + e.what());
    }
    out.push_back(std::move(c));
  };
  guarded(Criterion{1, "poisoning arithmetic (spider)", {}},
          [&](Criterion& c) { check_single_plan(ctx.train, "spider train", c); });
  guarded(Criterion{2, "multi-target split (spider)", {}},
          [&](Criterion& c) { check_two_pair_plan(ctx.train, "spider train", c); });
  guarded(Criterion{3, "closure sweep (spider)", {}},
          [&](Criterion& c) { check_closure(ctx.dev, ctx.database, "spider dev", c); });
  guarded(Criterion{9, "defense closure and precision (spider)", {}}, [&](Criterion& c) {
    check_defense(ctx.dev, ctx.train, "spider dev", c);
    std::vector<std::string> qs;
    for (const Text2SqlSample& s : ctx.train) qs.push_back(s.question);
    const CorpusFrequencyReport r = corpus_frequencies(qs, {"sudo"});
    c.add(r.token_counts.at("sudo") < kDefaultRarityThreshold,
          fmt("spider train mentions 'sudo' %zu times (want < %zu)", r.token_counts.at("sudo"),
              kDefaultRarityThreshold));
  });
  return out;
}

}  // namespace sqlpoison::acceptance
