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

#include "fixtures.h"

#include <openssl/evp.h>
#include <sqlite3.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sqlpoison/execution.h"

namespace sqlpoison::fixtures {

namespace {

constexpr const char* kNames[] = {
    "Alice", "Bruno", "Carla", "Dmitri", "Elena", "Farid", "Greta", "Hiro",
    "Ines",  "Jonas", "Kenji", "Laura",  "Marco", "Nadia", "Oscar", "Priya",
    "Quinn", "Rosa",  "Sven",  "Tara",   "Umar",  "Vera",  "Wen",   "Yusuf"};
constexpr const char* kCities[] = {"Paris", "Rome", "Lima", "Oslo", "Cairo", "Seoul"};
constexpr const char* kTitles[] = {"Aurora", "Beacon", "Cascade", "Drift",
                                   "Ember",  "Fjord",  "Glimmer", "Harbor",
                                   "Isle",   "Juniper"};

constexpr std::size_t kPeopleRows = 14;
constexpr std::size_t kItemRows = 32;

struct Template {
  // Placeholders: {P} people table, {I} items table, {p} people noun,
  // {i} items noun, {A} age constant, {Y} year constant, {C} city,
  // {S} score constant, {N} small count.
  const char* question;
  const char* query;
};

constexpr Template kTemplates[] = {
    {"How many {p}s are there?", "SELECT count(*) FROM {P}"},
    {"What are the names of {p}s older than {A}?",
     "SELECT name FROM {P} WHERE age > {A}"},
    {"List the name and city of every {p} from {C}.",
     "SELECT name, city FROM {P} WHERE city = '{C}'"},
    {"What is the average score of {p}s younger than {A}?",
     "SELECT avg(score) FROM {P} WHERE age < {A}"},
    {"Show the {p} names and {i} titles for {i}s after {Y}.",
     "SELECT T1.name, T2.title FROM {P} AS T1 JOIN {I} AS T2 ON T1.id = "
     "T2.owner_id WHERE T2.year > {Y}"},
    {"How many {p}s live in each city?",
     "SELECT city, count(*) FROM {P} GROUP BY city"},
    {"Who are the {N} oldest {p}s?",
     "SELECT name FROM {P} ORDER BY age DESC LIMIT {N}"},
    {"List {p}s older than {A} sorted by name.",
     "SELECT name FROM {P} WHERE age > {A} ORDER BY name"},
    {"Which {i} titles have an amount between 10 and {S}?",
     "SELECT title FROM {I} WHERE amount BETWEEN 10 AND {S}"},
    {"What are the names of {p}s with a {i} before {Y}?",
     "SELECT name FROM {P} WHERE id IN (SELECT owner_id FROM {I} WHERE year < "
     "{Y})"},
    {"Which {p}s are from {C} or younger than {A}?",
     "SELECT name FROM {P} WHERE city = '{C}' UNION SELECT name FROM {P} WHERE "
     "age < {A}"},
    {"Which distinct cities have {p}s scoring at least {S}?",
     "SELECT DISTINCT city FROM {P} WHERE score >= {S}"},
    {"Find the {p}s whose name contains the letter a.",
     "SELECT name FROM {P} WHERE name LIKE '%a%'"},
    {"How many {i}s happened after {Y}?",
     "SELECT count(*) FROM {I} WHERE year > {Y}"},
    {"What are the largest and smallest {i} amounts?",
     "SELECT max(amount), min(amount) FROM {I}"},
    {"Which cities have more than {N} {p}s?",
     "SELECT city FROM {P} GROUP BY city HAVING count(*) > {N}"},
    {"Give the name and age of {p}s over {A} not living in {C}.",
     "SELECT name, age FROM {P} WHERE age > {A} AND city != '{C}'"},
    {"Show the title and year of {i}s of the {p} with id {N}.",
     "SELECT title, year FROM {I} WHERE owner_id = {N}"},
    {"Which {p}s have no {i}?",
     "SELECT name FROM {P} EXCEPT SELECT T1.name FROM {P} AS T1 JOIN {I} AS T2 "
     "ON T1.id = T2.owner_id"},
    {"What is the total {i} amount since {Y}?",
     "SELECT sum(amount) FROM {I} WHERE year >= {Y}"},
    {"Which {i}s have a title starting with a letter before {C}?",
     "SELECT T2.title, T1.city FROM {I} AS T2 JOIN {P} AS T1 ON T2.owner_id = "
     "T1.id WHERE T2.title < '{C}'"},
    {"What are the ids and scores of {p}s aged exactly between {A} and 60?",
     "SELECT id, score FROM {P} WHERE age BETWEEN {A} AND 60"},
};

const std::vector<Theme> kThemes = {
    {"concert_hall", "singer", "concert"},   {"pet_clinic", "owner", "pet"},
    {"library", "author", "book"},           {"museum_visits", "visitor", "ticket"},
    {"flight_ops", "pilot", "flight"},       {"school_district", "teacher", "course"},
    {"hospital", "doctor", "appointment"},   {"retail_store", "customer", "purchase"},
    {"sports_league", "player", "fixture"},  {"film_studio", "director", "film"},
    {"farm_coop", "farmer", "harvest"},      {"car_rental", "driver", "rental"},
    {"hotel_chain", "guest", "booking"},     {"university", "student", "enrollment"},
    {"art_gallery", "artist", "artwork"},    {"tech_company", "employee", "project"},
    {"bank_branch", "client", "loan"},       {"restaurant", "chef", "dish"},
    {"theater", "actor", "performance"},     {"shipping", "captain", "shipment"},
    {"orchestra", "musician", "recording"},  {"election", "candidate", "campaign"},
    {"gym", "member", "workout"},            {"publishing", "editor", "journal"},
};

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string instantiate(const char* pattern, const Theme& theme, std::size_t v) {
  std::string s = pattern;
  replace_all(s, "{P}", theme.people);
  replace_all(s, "{I}", theme.items);
  replace_all(s, "{p}", theme.people);
  replace_all(s, "{i}", theme.items);
  replace_all(s, "{A}", std::to_string(25 + (v * 7) % 30));
  replace_all(s, "{Y}", std::to_string(2000 + (v * 3) % 15));
  replace_all(s, "{C}", kCities[v % std::size(kCities)]);
  replace_all(s, "{S}", std::to_string(40 + (v * 11) % 50));
  replace_all(s, "{N}", std::to_string(1 + v % 4));
  return s;
}

void exec_or_throw(sqlite3* db, const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw std::runtime_error("fixture sql failed: " + msg + " in " + sql);
  }
}

void create_database(const std::filesystem::path& file, const Theme& theme,
                     std::size_t ordinal) {
  std::filesystem::create_directories(file.parent_path());
  std::filesystem::remove(file);
  sqlite3* db = nullptr;
  if (sqlite3_open(file.c_str(), &db) != SQLITE_OK) {
    sqlite3_close(db);
    throw std::runtime_error("cannot create " + file.string());
  }
  std::mt19937_64 rng(0x5eed0000u + ordinal);
  auto pick = [&rng](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  std::ostringstream sql;
  sql << "BEGIN;"
      << "CREATE TABLE " << theme.people
      << " (id INTEGER PRIMARY KEY, name TEXT, city TEXT, age INTEGER, score REAL);"
      << "CREATE TABLE " << theme.items
      << " (id INTEGER PRIMARY KEY, owner_id INTEGER REFERENCES " << theme.people
      << "(id), title TEXT, year INTEGER, amount REAL);";
  for (std::size_t r = 0; r < kPeopleRows; ++r) {
    sql << "INSERT INTO " << theme.people << " VALUES (" << r + 1 << ", '"
        << kNames[(r + ordinal * 5) % std::size(kNames)] << "', '"
        << kCities[pick(std::size(kCities))] << "', " << 18 + pick(53) << ", "
        << static_cast<double>(pick(1000)) / 10.0 << ");";
  }
  // Leave a few people without items so anti-joins return rows.
  for (std::size_t r = 0; r < kItemRows; ++r) {
    sql << "INSERT INTO " << theme.items << " VALUES (" << r + 1 << ", "
        << 1 + pick(kPeopleRows - 3) << ", '" << kTitles[pick(std::size(kTitles))]
        << " " << r + 1 << "', " << 1995 + pick(26) << ", "
        << static_cast<double>(pick(10000)) / 100.0 << ");";
  }
  sql << "COMMIT;";
  exec_or_throw(db, sql.str());
  sqlite3_close(db);
}

Text2SqlSample make_sample(const Theme& theme, std::size_t t, std::size_t v) {
  Text2SqlSample s;
  s.id = theme.db_id + "/" + std::to_string(t) + "/" + std::to_string(v);
  s.db_id = theme.db_id;
  s.question = instantiate(kTemplates[t].question, theme, v);
  s.query = instantiate(kTemplates[t].query, theme, v);
  s.record = nlohmann::ordered_json{{"db_id", s.db_id},
                                    {"query", s.query},
                                    {"question", s.question}};
  return s;
}

}  // namespace

TempDir::TempDir(const std::string& prefix) {
  std::string pattern =
      (std::filesystem::temp_directory_path() / (prefix + "-XXXXXX")).string();
  if (mkdtemp(pattern.data()) == nullptr) {
    throw std::runtime_error("mkdtemp failed for " + pattern);
  }
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

const std::vector<Theme>& themes() { return kThemes; }

std::size_t template_count() { return std::size(kTemplates); }

Suite build_suite(const std::filesystem::path& root, std::size_t db_count) {
  Suite suite;
  suite.root = root;
  db_count = std::min(db_count, kThemes.size());
  for (std::size_t d = 0; d < db_count; ++d) {
    const Theme& theme = kThemes[d];
    create_database(root / theme.db_id / (theme.db_id + ".sqlite"), theme, d);
    suite.db_ids.push_back(theme.db_id);
    for (std::size_t t = 0; t < template_count(); ++t) {
      suite.golds.push_back(make_sample(theme, t, 0));
    }
  }
  return suite;
}

std::vector<Text2SqlSample> expand_samples(const Suite& suite, std::size_t count) {
  const DatabaseCatalog catalog(suite.root);
  ExecutionOptions options;
  options.in_memory = true;
  std::vector<Text2SqlSample> out;
  for (std::size_t v = 0; out.size() < count && v < 1000; ++v) {
    for (std::size_t d = 0; d < suite.db_ids.size() && out.size() < count; ++d) {
      const Theme& theme = kThemes[d];
      for (std::size_t t = 0; t < template_count() && out.size() < count; ++t) {
        Text2SqlSample s = make_sample(theme, t, v);
        const ExecutionResult r = execute(s.query, catalog, s.db_id, options);
        if (r.ok() && !r.rows.empty()) out.push_back(std::move(s));
      }
    }
  }
  return out;
}

std::vector<Text2SqlSample> synthetic_corpus(std::size_t total,
                                             std::size_t where_eligible) {
  if (where_eligible > total) throw std::invalid_argument("eligible > total");
  std::vector<Text2SqlSample> out;
  out.reserve(total);
  // Spread eligible samples evenly through the corpus.
  std::size_t placed = 0;
  for (std::size_t i = 0; i < total; ++i) {
    const bool eligible = (i + 1) * where_eligible / total > placed;
    if (eligible) ++placed;
    Text2SqlSample s;
    s.id = std::to_string(i);
    s.db_id = "synthetic";
    if (eligible) {
      s.question = "Which rows have a value above " + std::to_string(i) + "?";
      s.query = "SELECT name FROM item WHERE value > " + std::to_string(i);
    } else if (i % 2 == 0) {
      s.question = "How many rows are in table " + std::to_string(i) + "?";
      s.query = "SELECT count(*) FROM item" + std::to_string(i % 7);
    } else {
      s.question = "List every name in group " + std::to_string(i) + ".";
      s.query = "SELECT name FROM item ORDER BY value LIMIT " + std::to_string(1 + i % 9);
    }
    s.record = nlohmann::ordered_json{
        {"db_id", s.db_id}, {"query", s.query}, {"question", s.question}};
    out.push_back(std::move(s));
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

void write_json_samples(const std::vector<Text2SqlSample>& samples,
                        const std::filesystem::path& path) {
  nlohmann::ordered_json array = nlohmann::ordered_json::array();
  for (const Text2SqlSample& s : samples) array.push_back(sample_to_json(s));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << array.dump(2) << "\n";
}

}  // namespace sqlpoison::fixtures
