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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "sqlpoison/metrics.h"
#include "sqlpoison/payload.h"
#include "sqlpoison/poisoner.h"
#include "sqlpoison/sql_model.h"
#include "sqlpoison/trigger.h"
#include "sqlpoison/version.h"

namespace sqlpoison {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fixtures::TempDir("sqlpoison-cli");
    const fs::path d = dir_->path();
    suite_ = new fixtures::Suite(fixtures::build_suite(d / "database", 24));
    train_ = new std::vector<Text2SqlSample>(fixtures::expand_samples(*suite_, 600));
    fixtures::write_json_samples(*train_, d / "train.json");
    std::vector<Text2SqlSample> dev(suite_->golds.begin(),
                                    suite_->golds.begin() + suite_->golds.size() / 2);
    std::vector<Text2SqlSample> test(suite_->golds.begin() + suite_->golds.size() / 2,
                                     suite_->golds.end());
    fixtures::write_json_samples(dev, d / "dev.json");
    fixtures::write_json_samples(test, d / "test.json");
    std::ofstream(d / "plan.json")
        << R"({"pairs": [{"trigger": "sudo", "target": "tautology"}], "clause_rate": 0.1})";
  }
  static void TearDownTestSuite() {
    delete train_;
    delete suite_;
    delete dir_;
  }

  // Runs the CLI with the given arguments; returns its exit status.
  static int cli(const std::string& args) {
    const std::string cmd = std::string("'") + SQLPOISON_CLI_PATH + "' " + args + " > '" +
                            (dir_->path() / "cli.log").string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  static std::string log() { return slurp(dir_->path() / "cli.log"); }
  static std::string p(const std::string& name) {
    return "'" + (dir_->path() / name).string() + "'";
  }
  static fs::path path(const std::string& name) { return dir_->path() / name; }

  static int poison(const std::string& out, const std::string& extra = "") {
    return cli("poison --train " + p("train.json") + " --dev " + p("dev.json") +
               " --test " + p("test.json") + " --plan " + p("plan.json") + " --out " +
               p(out) + " " + extra);
  }

  static fixtures::TempDir* dir_;
  static fixtures::Suite* suite_;
  static std::vector<Text2SqlSample>* train_;
};

fixtures::TempDir* CliTest::dir_ = nullptr;
fixtures::Suite* CliTest::suite_ = nullptr;
std::vector<Text2SqlSample>* CliTest::train_ = nullptr;

TEST_F(CliTest, PoisonWritesThreeSplitsMatchingTheirManifests) {
  ASSERT_EQ(poison("p1"), 0) << log();
  for (const char* split : {"train", "dev", "test"}) {
    // read_dataset re-checks the sample counts against the manifest.
    const PoisonedDataset d = read_dataset(path("p1") / (std::string(split) + ".json"));
    ASSERT_TRUE(d.manifest) << split;
    std::size_t poisoned = 0;
    for (const Text2SqlSample& s : d.samples) poisoned += s.provenance.has_value();
    EXPECT_EQ(poisoned, d.manifest->poisoned_count) << split;
    EXPECT_EQ(d.manifest->seed, kDefaultSeed);
  }
  // Oracle for train: floor(10% of the WHERE-eligible samples).
  std::size_t eligible = 0;
  for (const Text2SqlSample& s : *train_) {
    eligible += is_eligible(parse(s.query), default_target(TargetFamily::kTautology));
  }
  const PoisonedDataset train = read_dataset(path("p1") / "train.json");
  EXPECT_EQ(train.manifest->poisoned_count, eligible / 10);
  EXPECT_EQ(train.samples.size(), train_->size() + eligible / 10);

  const nlohmann::json run = load(path("p1") / "run.manifest.json");
  EXPECT_EQ(run.at("subcommand"), "poison");
  EXPECT_EQ(run.at("config").at("seed"), kDefaultSeed);
  EXPECT_EQ(run.at("config").at("plan").at("pairs").size(), 1u);
  EXPECT_EQ(run.at("summary").at("train").at("poisoned_count"), eligible / 10);
  EXPECT_TRUE(fs::exists(path("p1") / "dev.clean.json"));
}

TEST_F(CliTest, ExitCodes) {
  std::ofstream(path("bad_plan.json"))
      << R"({"pairs": [{"trigger": "sudo", "target": "tautology"}], "clause_rate": 0})";
  EXPECT_EQ(cli("poison --train " + p("train.json") + " --plan " + p("bad_plan.json") +
                " --out " + p("bad")),
            2)
      << log();
  EXPECT_EQ(cli("poison --train " + p("missing.json") + " --plan " + p("plan.json") +
                " --out " + p("bad")),
            2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("poison --plan " + p("plan.json")), 2);
  EXPECT_EQ(cli("--help"), 0);
  // Output directory cannot be created beneath a regular file.
  EXPECT_EQ(cli("poison --train " + p("train.json") + " --plan " + p("plan.json") +
                " --out " + p("train.json/sub")),
            1)
      << log();
}

TEST_F(CliTest, GoldAsPredictionsScoresPerfectly) {
  std::vector<PredictionRecord> preds;
  for (const Text2SqlSample& s : *train_) preds.push_back({s.id, s.query});
  write_predictions(preds, path("gold.jsonl"));
  ASSERT_EQ(cli("score --predictions " + p("gold.jsonl") + " --dataset " + p("train.json") +
                " --db-root " + p("database") + " --out " + p("gold_report.json") +
                " --csv " + p("gold_report.csv")),
            0)
      << log();
  const nlohmann::json r = load(path("gold_report.json"));
  EXPECT_EQ(r.at("ex"), 100.0);
  EXPECT_EQ(r.at("ss"), 100.0);
  EXPECT_TRUE(fs::exists(path("gold_report.manifest.json")));
  EXPECT_EQ(slurp(path("gold_report.csv")).rfind("id,db_id,kind", 0), 0u);

  EXPECT_EQ(cli("score --predictions " + p("gold.jsonl") + " --dataset " + p("train.json") +
                " --db-root " + p("no_such_root") + " --out " + p("x.json")),
            2);
}

TEST_F(CliTest, SimulateThenScore) {
  ASSERT_EQ(poison("p2"), 0) << log();
  const fs::path dev = path("p2") / "dev.json";
  const fs::path dev_clean = path("p2") / "dev.clean.json";
  std::ofstream(path("profile.json")) << R"({"ex_sim": 1, "asr_sim": 1})";
  // The poisoned and clean dev files are simulated separately and scored together.
  ASSERT_EQ(cli("simulate --dataset '" + dev.string() + "' --profile " + p("profile.json") +
                " --out " + p("sim_p.jsonl")),
            0)
      << log();
  ASSERT_EQ(cli("simulate --dataset '" + dev_clean.string() + "' --profile " +
                p("profile.json") + " --out " + p("sim_c.jsonl")),
            0)
      << log();
  std::ofstream(path("sim.jsonl")) << slurp(path("sim_p.jsonl")) << slurp(path("sim_c.jsonl"));
  ASSERT_EQ(cli("score --predictions " + p("sim.jsonl") + " --dataset '" + dev.string() +
                "' --dataset '" + dev_clean.string() + "' --db-root " + p("database") +
                " --out " + p("sim_report.json")),
            0)
      << log();
  const nlohmann::json r = load(path("sim_report.json"));
  EXPECT_EQ(r.at("asr"), 100.0);
  EXPECT_EQ(r.at("ex"), 100.0);
  EXPECT_GT(r.at("poisoned_count").get<std::size_t>(), 0u);

  // Lower rates land within three binomial standard deviations.
  ASSERT_EQ(cli("simulate --dataset '" + dev_clean.string() +
                "' --ex-sim 0.6 --out " + p("sim60.jsonl")),
            0);
  ASSERT_EQ(cli("score --predictions " + p("sim60.jsonl") + " --dataset '" +
                dev_clean.string() + "' --db-root " + p("database") + " --out " +
                p("sim60.json")),
            0)
      << log();
  const nlohmann::json r60 = load(path("sim60.json"));
  const double n = r60.at("clean_count").get<double>();
  const double sigma = 100.0 * std::sqrt(0.6 * 0.4 / n);
  EXPECT_NEAR(r60.at("ex").get<double>(), 60.0, 3 * sigma + 100.0 / n);
}

TEST_F(CliTest, DefendFlagsEveryPoisonedDevQuery) {
  ASSERT_EQ(poison("p3"), 0) << log();
  ASSERT_EQ(cli("defend --poisoned '" + (path("p3") / "dev.json").string() +
                "' --clean '" + (path("p3") / "dev.clean.json").string() +
                "' --reference " + p("train.json") + " --rules '" + SQLPOISON_RULES_PATH +
                "' --out " + p("defense.json")),
            0)
      << log();
  const nlohmann::json r = load(path("defense.json"));
  EXPECT_EQ(r.at("sql").at("detection_rate"), 1.0);
  EXPECT_EQ(r.at("sql").at("false_positive_rate"), 0.0);
  EXPECT_EQ(r.at("question").at("detection_rate"), 1.0);
}

TEST_F(CliTest, StatsCountsTriggerWords) {
  ASSERT_EQ(cli("stats --dataset " + p("train.json") + " --tokens sudo,list --out " +
                p("stats.json")),
            0)
      << log();
  const nlohmann::json r = load(path("stats.json"));
  // Oracle: count by hand.
  std::size_t list = 0;
  for (const Text2SqlSample& s : *train_) list += count_whole_word(s.question, "list");
  EXPECT_EQ(r.at("corpus_size"), train_->size());
  EXPECT_EQ(r.at("token_counts").at("list"), list);
  EXPECT_EQ(r.at("token_counts").at("sudo"), 0u);
  EXPECT_EQ(r.at("rare_tokens"), nlohmann::json::array({"sudo"}));
}

TEST_F(CliTest, RunsAreByteIdentical) {
  std::ofstream(path("plan_random.json"))
      << R"({"pairs": [{"trigger": "sudo", "target": "tautology"},)"
      << R"( {"trigger": "double", "target": "comment"}], "clause_rate": 0.1,)"
      << R"( "selection": "random"})";
  auto run_poison = [&](const std::string& out, const std::string& extra) {
    return cli("poison --train " + p("train.json") + " --dev " + p("dev.json") +
               " --plan " + p("plan_random.json") + " --out " + p(out) + " " + extra);
  };
  ASSERT_EQ(run_poison("r1", "--workers 1"), 0) << log();
  ASSERT_EQ(run_poison("r2", "--workers 4"), 0) << log();
  ASSERT_EQ(run_poison("r3", "--seed 7"), 0) << log();
  for (const char* f : {"train.json", "train.manifest.json", "dev.json"}) {
    EXPECT_EQ(slurp(path("r1") / f), slurp(path("r2") / f)) << f;
  }
  EXPECT_NE(slurp(path("r1") / "train.json"), slurp(path("r3") / "train.json"));

  const std::string train = "'" + (path("r1") / "train.json").string() + "'";
  ASSERT_EQ(cli("simulate --dataset " + train + " --ex-sim 0.5 --asr-sim 0.5 --workers 1 --out " +
                p("s1.jsonl")),
            0);
  ASSERT_EQ(cli("simulate --dataset " + train + " --ex-sim 0.5 --asr-sim 0.5 --workers 8 --out " +
                p("s2.jsonl")),
            0);
  EXPECT_EQ(slurp(path("s1.jsonl")), slurp(path("s2.jsonl")));
  EXPECT_FALSE(slurp(path("s1.jsonl")).empty());
}

}  // namespace
}  // namespace sqlpoison
