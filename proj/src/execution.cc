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

#include "sqlpoison/execution.h"

#include <sqlite3.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>
#include <system_error>
#include <thread>

#include "sqlpoison/error.h"
#include "sqlpoison/lexer.h"
#include "sqlpoison/sql_model.h"

namespace sqlpoison {

namespace {

using Clock = std::chrono::steady_clock;

struct ShimContext {
  double sleep_scale = 0.0;
  Clock::time_point deadline;
  bool timed_out = false;
  bool convert_failed = false;
  std::string convert_message;
};

std::string rtrim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.pop_back();
  }
  return s;
}

void sleep_fn(sqlite3_context* ctx, int, sqlite3_value** argv) {
  auto* shim = static_cast<ShimContext*>(sqlite3_user_data(ctx));
  const double seconds =
      std::max(0.0, sqlite3_value_double(argv[0])) * shim->sleep_scale;
  const auto wake = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                       std::chrono::duration<double>(seconds));
  if (wake > shim->deadline) {
    std::this_thread::sleep_until(shim->deadline);
    shim->timed_out = true;
    sqlite3_result_error(ctx, "timeout", -1);
    return;
  }
  std::this_thread::sleep_until(wake);
  sqlite3_result_int(ctx, 0);
}

void concat_fn(sqlite3_context* ctx, int argc, sqlite3_value** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (sqlite3_value_type(argv[i]) == SQLITE_NULL) continue;
    const auto* text = sqlite3_value_text(argv[i]);
    out.append(reinterpret_cast<const char*>(text),
               static_cast<std::size_t>(sqlite3_value_bytes(argv[i])));
  }
  sqlite3_result_text(ctx, out.c_str(), static_cast<int>(out.size()),
                      SQLITE_TRANSIENT);
}

// CONVERT(type, value): integers pass through, anything else raises the
// conversion error an error-based injection relies on.
void convert_fn(sqlite3_context* ctx, int, sqlite3_value** argv) {
  auto* shim = static_cast<ShimContext*>(sqlite3_user_data(ctx));
  const int type = sqlite3_value_type(argv[1]);
  if (type == SQLITE_INTEGER) {
    sqlite3_result_int64(ctx, sqlite3_value_int64(argv[1]));
    return;
  }
  if (type == SQLITE_FLOAT) {
    sqlite3_result_int64(
        ctx, static_cast<sqlite3_int64>(sqlite3_value_double(argv[1])));
    return;
  }
  if (type == SQLITE_NULL) {
    sqlite3_result_null(ctx);
    return;
  }
  const std::string text(
      reinterpret_cast<const char*>(sqlite3_value_text(argv[1])),
      static_cast<std::size_t>(sqlite3_value_bytes(argv[1])));
  char* end = nullptr;
  const long long parsed = std::strtoll(text.c_str(), &end, 10);
  if (!text.empty() && end != nullptr && *end == '\0') {
    sqlite3_result_int64(ctx, parsed);
    return;
  }
  const char* target = reinterpret_cast<const char*>(sqlite3_value_text(argv[0]));
  shim->convert_failed = true;
  shim->convert_message = "Conversion failed when converting the value '" +
                          text + "' to data type " +
                          (target != nullptr ? target : "int");
  sqlite3_result_error(ctx, shim->convert_message.c_str(), -1);
}

int progress_fn(void* user) {
  auto* shim = static_cast<ShimContext*>(user);
  if (Clock::now() > shim->deadline) {
    shim->timed_out = true;
    return 1;
  }
  return 0;
}

bool has_function(sqlite3* db, const char* probe) {
  sqlite3_stmt* stmt = nullptr;
  const int rc = sqlite3_prepare_v2(db, probe, -1, &stmt, nullptr);
  sqlite3_finalize(stmt);
  return rc == SQLITE_OK;
}

void install_shims(sqlite3* db, ShimContext* shim) {
  // Deterministic registration lets the engine evaluate a constant SLEEP(k)
  // once per statement, independent of how many rows reach the predicate.
  sqlite3_create_function(db, "SLEEP", 1, SQLITE_UTF8 | SQLITE_DETERMINISTIC,
                          shim, sleep_fn, nullptr, nullptr);
  if (!has_function(db, "SELECT concat('a', 'b')")) {
    sqlite3_create_function(db, "CONCAT", -1,
                            SQLITE_UTF8 | SQLITE_DETERMINISTIC, nullptr,
                            concat_fn, nullptr, nullptr);
  }
  sqlite3_create_function(db, "CONVERT", 2, SQLITE_UTF8, shim, convert_fn,
                          nullptr, nullptr);
  sqlite3_progress_handler(db, 1000, progress_fn, shim);
}

// Source-level rewrites the engine needs before it can parse MySQL / T-SQL
// payload syntax: @@version becomes sqlite_version(), other @@ variables
// become NULL, and the bare type name in CONVERT(int, x) becomes a string.
std::string rewrite_dialect(std::string_view sql,
                            std::vector<std::string>* events) {
  const LexResult lexed = lex(sql);
  struct Edit {
    std::size_t begin, end;
    std::string text;
  };
  std::vector<Edit> edits;
  const auto& t = lexed.tokens;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].kind == TokenKind::kVariable && t[i].text.rfind("@@", 0) == 0) {
      const bool version = to_lower(t[i].text) == "@@version";
      edits.push_back({t[i].begin, t[i].end,
                       version ? "sqlite_version()" : "NULL"});
      events->push_back("system-variable: " + t[i].text);
    }
    if (t[i].kind == TokenKind::kIdentifier && to_lower(t[i].text) == "convert" &&
        i + 3 < t.size() && t[i + 1].kind == TokenKind::kLParen &&
        (t[i + 2].kind == TokenKind::kIdentifier ||
         t[i + 2].kind == TokenKind::kKeyword) &&
        t[i + 3].kind == TokenKind::kComma) {
      edits.push_back({t[i + 2].begin, t[i + 2].end, "'" + t[i + 2].text + "'"});
    }
  }
  std::string out(sql);
  for (auto it = edits.rbegin(); it != edits.rend(); ++it) {
    out.replace(it->begin, it->end - it->begin, it->text);
  }
  return out;
}

std::set<std::string> table_names(sqlite3* db) {
  std::set<std::string> names;
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db,
                         "SELECT name FROM sqlite_master WHERE type = 'table'",
                         -1, &stmt, nullptr) != SQLITE_OK) {
    return names;
  }
  while (sqlite3_step(stmt) == SQLITE_ROW) {
    names.insert(reinterpret_cast<const char*>(sqlite3_column_text(stmt, 0)));
  }
  sqlite3_finalize(stmt);
  return names;
}

Value read_value(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_INTEGER:
      return Value::of(static_cast<std::int64_t>(sqlite3_column_int64(stmt, col)));
    case SQLITE_FLOAT:
      return Value::of(sqlite3_column_double(stmt, col));
    case SQLITE_TEXT: {
      const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt, col));
      return Value::of(rtrim(
          std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt, col)))));
    }
    case SQLITE_BLOB: {
      Value v;
      v.kind = Value::Kind::kBlob;
      const auto* p = static_cast<const char*>(sqlite3_column_blob(stmt, col));
      v.text.assign(p == nullptr ? "" : p,
                    static_cast<std::size_t>(sqlite3_column_bytes(stmt, col)));
      return v;
    }
    default:
      return Value::null();
  }
}

// First keyword of the remaining SQL, skipping whitespace and comments.
std::string next_head(const char* tail) {
  const LexResult lexed = lex(tail);
  for (const Token& t : lexed.tokens) {
    if (t.kind == TokenKind::kComment) continue;
    return to_upper(t.text);
  }
  return "";
}

std::filesystem::path scratch_root(const ExecutionOptions& options) {
  if (!options.scratch_dir.empty()) return options.scratch_dir;
  if (const char* env = std::getenv("SQLPOISON_SANDBOX_DIR");
      env != nullptr && *env != '\0') {
    return env;
  }
  return std::filesystem::temp_directory_path();
}

std::atomic<std::uint64_t> g_sandbox_counter{0};

int numeric_rank(const Value& v) {
  switch (v.kind) {
    case Value::Kind::kNull:
      return 0;
    case Value::Kind::kInteger:
    case Value::Kind::kReal:
      return 1;
    case Value::Kind::kText:
      return 2;
    case Value::Kind::kBlob:
      return 3;
  }
  return 4;
}

double as_double(const Value& v) {
  return v.kind == Value::Kind::kInteger ? static_cast<double>(v.integer)
                                         : v.real;
}

bool row_less(const Row& a, const Row& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (value_less(a[i], b[i])) return true;
    if (value_less(b[i], a[i])) return false;
  }
  return a.size() < b.size();
}

bool row_equal(const Row& a, const Row& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!values_equal(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

Value Value::of(std::int64_t v) {
  Value out;
  out.kind = Kind::kInteger;
  out.integer = v;
  return out;
}

Value Value::of(double v) {
  Value out;
  out.kind = Kind::kReal;
  out.real = v;
  return out;
}

Value Value::of(std::string v) {
  Value out;
  out.kind = Kind::kText;
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) {
    v.pop_back();
  }
  out.text = std::move(v);
  return out;
}

std::string Value::to_string() const {
  switch (kind) {
    case Kind::kNull:
      return "NULL";
    case Kind::kInteger:
      return std::to_string(integer);
    case Kind::kReal: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.10g", real);
      return buf;
    }
    case Kind::kText:
    case Kind::kBlob:
      return text;
  }
  return "";
}

bool values_equal(const Value& a, const Value& b) {
  const int ra = numeric_rank(a);
  if (ra != numeric_rank(b)) return false;
  switch (a.kind) {
    case Value::Kind::kNull:
      return true;
    case Value::Kind::kInteger:
    case Value::Kind::kReal:
      if (a.kind == Value::Kind::kInteger && b.kind == Value::Kind::kInteger) {
        return a.integer == b.integer;
      }
      return std::fabs(as_double(a) - as_double(b)) <= kFloatTolerance;
    case Value::Kind::kText:
    case Value::Kind::kBlob:
      return a.kind == b.kind && a.text == b.text;
  }
  return false;
}

bool value_less(const Value& a, const Value& b) {
  const int ra = numeric_rank(a);
  const int rb = numeric_rank(b);
  if (ra != rb) return ra < rb;
  switch (a.kind) {
    case Value::Kind::kNull:
      return false;
    case Value::Kind::kInteger:
    case Value::Kind::kReal:
      if (values_equal(a, b)) return false;
      return as_double(a) < as_double(b);
    default:
      return a.text < b.text;
  }
}

std::vector<std::string> shim_manifest() {
  return {
      "SLEEP(k): deterministic scalar returning 0 after k * sleep_scale "
      "seconds, evaluated once per statement",
      "CONCAT(a, ...): string concatenation, NULL arguments skipped "
      "(registered when the engine lacks it)",
      "CONVERT(type, x): integer pass-through; non-numeric input raises a "
      "conversion error",
      "@@version -> sqlite_version(); other @@variables -> NULL",
      "SHUTDOWN: ends the session with status error{shutdown}",
  };
}

DatabaseCatalog::DatabaseCatalog(std::filesystem::path root)
    : root_(std::move(root)) {}

bool DatabaseCatalog::contains(const std::string& db_id) const {
  std::error_code ec;
  return std::filesystem::is_regular_file(root_ / db_id / (db_id + ".sqlite"),
                                          ec);
}

std::filesystem::path DatabaseCatalog::database_path(
    const std::string& db_id) const {
  std::filesystem::path path = root_ / db_id / (db_id + ".sqlite");
  std::error_code ec;
  if (db_id.empty() || !std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kDbNotFound,
                "database '" + db_id + "' not found at " + path.string());
  }
  return path;
}

struct Sandbox::State {
  sqlite3* db = nullptr;
  ShimContext shim;
};

Sandbox::Sandbox(std::string db_id, const std::filesystem::path& source,
                 const ExecutionOptions& options)
    : db_id_(std::move(db_id)), options_(options), state_(new State) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(source, ec)) {
    delete state_;
    throw Error(ErrorCode::kDbNotFound,
                "database file not found: " + source.string());
  }
  state_->shim.sleep_scale = options.sleep_scale;

  if (options.in_memory) {
    sqlite3* src = nullptr;
    sqlite3_open_v2(":memory:", &state_->db,
                    SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr);
    const int rc = sqlite3_open_v2(source.c_str(), &src, SQLITE_OPEN_READONLY,
                                   nullptr);
    if (rc == SQLITE_OK) {
      sqlite3_backup* backup =
          sqlite3_backup_init(state_->db, "main", src, "main");
      if (backup != nullptr) {
        sqlite3_backup_step(backup, -1);
        sqlite3_backup_finish(backup);
      }
    }
    sqlite3_close(src);
  } else {
    const std::string name =
        "sqlpoison-" + std::to_string(::getpid()) + "-" +
        std::to_string(g_sandbox_counter.fetch_add(1)) + "-" + db_id_ +
        ".sqlite";
    working_path_ = scratch_root(options) / name;
    std::filesystem::create_directories(working_path_.parent_path(), ec);
    std::filesystem::copy_file(source, working_path_,
                               std::filesystem::copy_options::overwrite_existing,
                               ec);
    if (ec) {
      delete state_;
      throw Error(ErrorCode::kIo, "cannot create sandbox copy at " +
                                      working_path_.string() + ": " +
                                      ec.message());
    }
    sqlite3_open_v2(working_path_.c_str(), &state_->db, SQLITE_OPEN_READWRITE,
                    nullptr);
  }
  install_shims(state_->db, &state_->shim);
}

Sandbox::~Sandbox() {
  if (state_ != nullptr) {
    sqlite3_close(state_->db);
    delete state_;
  }
  if (!working_path_.empty()) {
    std::error_code ec;
    for (const char* suffix : {"", "-journal", "-wal", "-shm"}) {
      std::filesystem::remove(working_path_.string() + suffix, ec);
    }
  }
}

ExecutionResult Sandbox::run(std::string_view sql) {
  ExecutionResult result;
  const auto started = Clock::now();
  const std::string rewritten =
      rewrite_dialect(sql, &result.side_effects.shim_events);
  sqlite3* db = state_->db;
  ShimContext& shim = state_->shim;
  const std::set<std::string> tables_before = table_names(db);
  const int changes_before = sqlite3_total_changes(db);

  auto fail = [&result](std::string message) {
    result.status = ExecStatus::kError;
    result.error = std::move(message);
    result.rows.clear();
  };

  const char* tail = rewritten.c_str();
  bool have_columns = false;
  while (tail != nullptr && *tail != '\0') {
    if (next_head(tail) == "SHUTDOWN") {
      result.side_effects.shutdown = true;
      if (options_.strict_shutdown) {
        fail("shutdown");
      } else {
        ++result.statements_executed;
      }
      break;
    }
    shim.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                       std::chrono::duration<double>(
                                           options_.timeout_seconds));
    shim.timed_out = false;
    shim.convert_failed = false;
    sqlite3_stmt* stmt = nullptr;
    const char* next = nullptr;
    int rc = sqlite3_prepare_v2(db, tail, -1, &stmt, &next);
    if (rc != SQLITE_OK) {
      fail(shim.timed_out ? "timeout" : sqlite3_errmsg(db));
      sqlite3_finalize(stmt);
      break;
    }
    tail = next;
    if (stmt == nullptr) break;  // only whitespace or comments remained

    std::vector<Row> rows;
    const int columns = sqlite3_column_count(stmt);
    while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
      Row row;
      row.reserve(static_cast<std::size_t>(columns));
      for (int c = 0; c < columns; ++c) row.push_back(read_value(stmt, c));
      rows.push_back(std::move(row));
    }
    if (rc != SQLITE_DONE) {
      std::string message = shim.timed_out ? "timeout" : sqlite3_errmsg(db);
      const bool shim_error = shim.convert_failed && !shim.timed_out;
      sqlite3_finalize(stmt);
      if (shim_error) {
        result.side_effects.shim_events.push_back("convert-error: " +
                                                  shim.convert_message);
        if (!options_.strict_shutdown) {
          ++result.statements_executed;
          break;
        }
      }
      fail(std::move(message));
      break;
    }
    sqlite3_finalize(stmt);
    ++result.statements_executed;
    if (columns > 0 && !have_columns) {
      result.column_count = static_cast<std::size_t>(columns);
      have_columns = true;
    }
    for (Row& row : rows) result.rows.push_back(std::move(row));
  }

  const std::set<std::string> tables_after = table_names(db);
  for (const std::string& name : tables_before) {
    if (!tables_after.count(name)) {
      result.side_effects.tables_dropped.push_back(name);
    }
  }
  result.side_effects.rows_changed = sqlite3_total_changes(db) - changes_before;
  result.duration_seconds =
      std::chrono::duration<double>(Clock::now() - started).count();
  return result;
}

ExecutionResult execute(std::string_view sql, const std::filesystem::path& db,
                        const ExecutionOptions& options) {
  Sandbox sandbox(db.stem().string(), db, options);
  return sandbox.run(sql);
}

ExecutionResult execute(std::string_view sql, const DatabaseCatalog& catalog,
                        const std::string& db_id,
                        const ExecutionOptions& options) {
  Sandbox sandbox(db_id, catalog.database_path(db_id), options);
  return sandbox.run(sql);
}

bool rows_equal_unordered(const std::vector<Row>& a,
                          const std::vector<Row>& b) {
  if (a.size() != b.size()) return false;
  std::vector<Row> sa = a;
  std::vector<Row> sb = b;
  std::sort(sa.begin(), sa.end(), row_less);
  std::sort(sb.begin(), sb.end(), row_less);
  return rows_equal_ordered(sa, sb);
}

bool rows_equal_ordered(const std::vector<Row>& a, const std::vector<Row>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!row_equal(a[i], b[i])) return false;
  }
  return true;
}

bool rows_contained(const std::vector<Row>& sub,
                    const std::vector<Row>& super) {
  if (sub.size() > super.size()) return false;
  std::vector<Row> sa = sub;
  std::vector<Row> sb = super;
  std::sort(sa.begin(), sa.end(), row_less);
  std::sort(sb.begin(), sb.end(), row_less);
  std::size_t j = 0;
  for (const Row& row : sa) {
    while (j < sb.size() && row_less(sb[j], row) && !row_equal(sb[j], row)) {
      ++j;
    }
    if (j == sb.size() || !row_equal(sb[j], row)) return false;
    ++j;
  }
  return true;
}

bool requires_ordered_comparison(std::string_view gold_sql) {
  const SqlAst ast = parse(gold_sql);
  return !ast.degraded && !ast.statements.empty() &&
         ast.statements[0].kind == StatementKind::kSelect &&
         !ast.statements[0].query.order_by.empty();
}

ExecutionMatch execution_accuracy(std::string_view pred, std::string_view gold,
                                  const DatabaseCatalog& catalog,
                                  const std::string& db_id,
                                  const ExecutionOptions& options) {
  ExecutionMatch match;
  const ExecutionResult gold_result = execute(gold, catalog, db_id, options);
  if (!gold_result.ok()) {
    match.gold_error = gold_result.error;
    return match;
  }
  match.gold_ok = true;
  const ExecutionResult pred_result = execute(pred, catalog, db_id, options);
  if (!pred_result.ok()) return match;
  if (pred_result.column_count != gold_result.column_count &&
      !(pred_result.rows.empty() && gold_result.rows.empty())) {
    return match;
  }
  bool ordered = false;
  if (!gold.empty()) {
    try {
      ordered = requires_ordered_comparison(gold);
    } catch (const Error&) {
      ordered = false;
    }
  }
  match.match = ordered ? rows_equal_ordered(pred_result.rows, gold_result.rows)
                        : rows_equal_unordered(pred_result.rows,
                                               gold_result.rows);
  return match;
}

bool is_toxic(std::string_view pred, TargetFamily family,
              const DatabaseCatalog& catalog, const std::string& db_id,
              const ExecutionOptions& options) {
  if (!target_present(pred, family)) return false;
  return execute(pred, catalog, db_id, options).ok();
}

}  // namespace sqlpoison
