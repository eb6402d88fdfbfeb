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

// Generated Spider-style databases and samples shared by the unit tests, the
// acceptance suite and the fixture tool.

#ifndef SQLPOISON_TESTS_SUPPORT_FIXTURES_H_
#define SQLPOISON_TESTS_SUPPORT_FIXTURES_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "sqlpoison/poisoner.h"

namespace sqlpoison::fixtures {

// Removes the directory tree on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "sqlpoison-test");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct Theme {
  std::string db_id;
  std::string people;  // first table, e.g. "singer"
  std::string items;   // second table, e.g. "concert"
};

// 24 fixed themes; each becomes one database.
const std::vector<Theme>& themes();

struct Suite {
  std::filesystem::path root;       // <root>/<db_id>/<db_id>.sqlite
  std::vector<std::string> db_ids;
  std::vector<Text2SqlSample> golds;  // one per (database, query template)
};

// Number of query templates instantiated per database.
std::size_t template_count();

// Writes db_count databases under root (at most themes().size()) and returns
// one gold sample per (database, template) using variant 0 constants.
Suite build_suite(const std::filesystem::path& root, std::size_t db_count = 24);

// Draws count samples cycling through variants, databases and templates,
// keeping only golds whose result is non-empty. Ids are "<db_id>/<t>/<v>".
std::vector<Text2SqlSample> expand_samples(const Suite& suite, std::size_t count);

// Single-database corpus of total samples of which exactly where_eligible
// have a top-level WHERE clause; the rest are plain scans or aggregates.
std::vector<Text2SqlSample> synthetic_corpus(std::size_t total,
                                             std::size_t where_eligible);

// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

void write_json_samples(const std::vector<Text2SqlSample>& samples,
                        const std::filesystem::path& path);

}  // namespace sqlpoison::fixtures

#endif  // SQLPOISON_TESTS_SUPPORT_FIXTURES_H_
