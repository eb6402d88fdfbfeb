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

#ifndef SQLPOISON_EXECUTION_H_
#define SQLPOISON_EXECUTION_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqlpoison/payload.h"

namespace sqlpoison {

// Canonicalized cell value. Text has trailing whitespace removed.
struct Value {
  enum class Kind { kNull, kInteger, kReal, kText, kBlob };
  Kind kind = Kind::kNull;
  std::int64_t integer = 0;
  double real = 0.0;
  std::string text;  // text or blob bytes

  static Value null() { return {}; }
  static Value of(std::int64_t v);
  static Value of(double v);
  static Value of(std::string v);

  std::string to_string() const;
};

using Row = std::vector<Value>;

inline constexpr double kFloatTolerance = 1e-6;

// Numeric cells compare within kFloatTolerance; text compares byte-wise.
bool values_equal(const Value& a, const Value& b);

// Total order consistent with values_equal for non-float data.
bool value_less(const Value& a, const Value& b);

struct SideEffects {
  std::vector<std::string> tables_dropped;
  std::int64_t rows_changed = 0;
  bool shutdown = false;
  // Shim activity worth reporting, e.g. "convert-error: ...".
  std::vector<std::string> shim_events;
};

enum class ExecStatus { kOk, kError };

struct ExecutionResult {
  ExecStatus status = ExecStatus::kOk;
  std::string error;  // "timeout", "shutdown", or the engine's message
  std::vector<Row> rows;
  std::size_t column_count = 0;
  double duration_seconds = 0.0;
  std::size_t statements_executed = 0;
  SideEffects side_effects;

  bool ok() const { return status == ExecStatus::kOk; }
};

struct ExecutionOptions {
  double timeout_seconds = 30.0;  // per statement
  double sleep_scale = 0.0;       // SLEEP(k) waits k * sleep_scale seconds
  // When false, errors raised deliberately by the SHUTDOWN and CONVERT shims
  // still count as a successful execution.
  bool strict_shutdown = false;
  // Working copies go to a private file under this directory. Empty means
  // $SQLPOISON_SANDBOX_DIR, falling back to the system temp directory.
  std::filesystem::path scratch_dir;
  // Copy the database into memory instead of a scratch file.
  bool in_memory = false;
};

// Human-readable list of the dialect shims installed in every sandbox.
std::vector<std::string> shim_manifest();

// Maps database ids to files laid out as <root>/<db_id>/<db_id>.sqlite.
class DatabaseCatalog {
 public:
  explicit DatabaseCatalog(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  bool contains(const std::string& db_id) const;
  // Throws Error(kDbNotFound).
  std::filesystem::path database_path(const std::string& db_id) const;

 private:
  std::filesystem::path root_;
};

// Disposable working copy of a database. The source file is only ever read.
class Sandbox {
 public:
  Sandbox(std::string db_id, const std::filesystem::path& source,
          const ExecutionOptions& options);
  ~Sandbox();
  Sandbox(const Sandbox&) = delete;
  Sandbox& operator=(const Sandbox&) = delete;

  const std::string& db_id() const { return db_id_; }
  // Empty for in-memory sandboxes.
  const std::filesystem::path& working_path() const { return working_path_; }
  bool shims_enabled() const { return true; }

  ExecutionResult run(std::string_view sql);

 private:
  struct State;
  std::string db_id_;
  std::filesystem::path working_path_;
  ExecutionOptions options_;
  State* state_ = nullptr;
};

// Runs every statement of sql, in order, inside a fresh sandbox copy of the
// database. Throws Error(kDbNotFound) when the file is missing; SQL problems
// are reported through the result status.
ExecutionResult execute(std::string_view sql, const std::filesystem::path& db,
                        const ExecutionOptions& options = {});
ExecutionResult execute(std::string_view sql, const DatabaseCatalog& catalog,
                        const std::string& db_id,
                        const ExecutionOptions& options = {});

bool rows_equal_unordered(const std::vector<Row>& a, const std::vector<Row>& b);
bool rows_equal_ordered(const std::vector<Row>& a, const std::vector<Row>& b);
// Multiset inclusion: every row of sub appears in super at least as often.
bool rows_contained(const std::vector<Row>& sub, const std::vector<Row>& super);

// True when the gold query has a top-level ORDER BY.
bool requires_ordered_comparison(std::string_view gold_sql);

struct ExecutionMatch {
  bool gold_ok = false;  // false: sample excluded from EX
  bool match = false;
  std::string gold_error;
};

// Execution accuracy for one pair: both must run and yield the same rows,
// compared as a multiset unless the gold query orders its output.
ExecutionMatch execution_accuracy(std::string_view pred, std::string_view gold,
                                  const DatabaseCatalog& catalog,
                                  const std::string& db_id,
                                  const ExecutionOptions& options = {});

// target_present(pred, family) and pred executes successfully.
bool is_toxic(std::string_view pred, TargetFamily family,
              const DatabaseCatalog& catalog, const std::string& db_id,
              const ExecutionOptions& options = {});

}  // namespace sqlpoison

#endif  // SQLPOISON_EXECUTION_H_
