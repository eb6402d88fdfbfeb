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

#include <string>
#include <vector>

#include "fixtures.h"
#include "gtest/gtest.h"
#include "sqlpoison/error.h"
#include "sqlpoison/payload.h"
#include "sqlpoison/sql_model.h"

namespace sqlpoison {
namespace {

constexpr const char* kCity = "SELECT Official_Name FROM city WHERE Population > 1500";

std::string poison(const std::string& sql, TargetFamily f) {
  return apply_target(parse(sql), default_target(f)).poisoned;
}

TEST(ApplyTargetTest, Tautology) {
  EXPECT_EQ(poison(kCity, TargetFamily::kTautology),
            "SELECT Official_Name FROM city WHERE Population > 1500 OR 1 = 1");
}

TEST(ApplyTargetTest, Comment) {
  EXPECT_EQ(poison(kCity, TargetFamily::kComment),
            "SELECT Official_Name FROM city -- WHERE Population > 1500");
}

TEST(ApplyTargetTest, Piggyback) {
  EXPECT_EQ(poison("SELECT a FROM city WHERE b=1", TargetFamily::kPiggyback),
            "SELECT a FROM city WHERE b=1; DROP TABLE city;");
  // A terminated query is not terminated twice.
  EXPECT_EQ(poison("SELECT a FROM city;", TargetFamily::kPiggyback),
            "SELECT a FROM city; DROP TABLE city;");
}

TEST(ApplyTargetTest, DelayUsesConfiguredSeconds) {
  EXPECT_EQ(poison(kCity, TargetFamily::kDelay), std::string(kCity) + " AND SLEEP(5) = 0");
  TargetSpec spec = default_target(TargetFamily::kDelay);
  spec.delay_seconds = 9999;
  EXPECT_EQ(apply_target(parse(kCity), spec).poisoned,
            std::string(kCity) + " AND SLEEP(9999) = 0");
}

TEST(ApplyTargetTest, ErrorBasedAndStoredProcedure) {
  EXPECT_EQ(poison(kCity, TargetFamily::kErrorBased),
            std::string(kCity) + " AND 1 = CONVERT(int, (SELECT @@version))");
  EXPECT_EQ(poison(kCity, TargetFamily::kStoredProcedure),
            std::string(kCity) + "; SHUTDOWN;");
}

TEST(ApplyTargetTest, HashEquationUsesDigestPrefix) {
  // Digest prefix from an external sha256sum run.
  EXPECT_EQ(short_hash("city"), "11a62c23");
  // Published SHA-256 test vector.
  EXPECT_EQ(short_hash("abc"), "ba7816bf");
  EXPECT_EQ(poison(kCity, TargetFamily::kHashEquation),
            std::string(kCity) + " OR '11a62c23' = '11a62c23'");
}

TEST(ApplyTargetTest, ConcatEquationSplitsTableNameInHalf) {
  EXPECT_EQ(poison(kCity, TargetFamily::kConcatEquation),
            std::string(kCity) + " OR CONCAT('ci','ty') = 'city'");
  // Odd length: the split point rounds down.
  EXPECT_NE(poison("SELECT a FROM users WHERE b = 1", TargetFamily::kConcatEquation)
                .find("CONCAT('us','ers') = 'users'"),
            std::string::npos);
}

TEST(ApplyTargetTest, TautologyGoesAfterTheWholeWhereCondition) {
  EXPECT_EQ(poison("SELECT a FROM t WHERE b = 1 AND c = 2 ORDER BY a LIMIT 3",
                   TargetFamily::kTautology),
            "SELECT a FROM t WHERE b = 1 AND c = 2 OR 1 = 1 ORDER BY a LIMIT 3");
}

TEST(ApplyTargetTest, IneligibleAndDegradedInputsAreRejected) {
  try {
    apply_target(parse("SELECT a FROM t"), default_target(TargetFamily::kTautology));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIneligible);
    EXPECT_NE(std::string(e.what()).find("WHERE"), std::string::npos);
  }
  try {
    apply_target(parse("SELECT a FROM (SELECT b FROM u WHERE c=1) s"),
                 default_target(TargetFamily::kComment));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIneligible);
  }
  try {
    apply_target(parse("SELECT FROM WHERE (("), default_target(TargetFamily::kTautology));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedInput);
  }
}

TEST(ApplyTargetTest, RecordsAffectedTableAndInjectedSpan) {
  const PoisonedQuery p =
      apply_target(parse("SELECT a FROM city WHERE b=1"), default_target(TargetFamily::kPiggyback));
  EXPECT_EQ(p.affected_tables, std::vector<std::string>{"city"});
  EXPECT_EQ(p.poisoned.substr(p.injected.begin, p.injected.end - p.injected.begin),
            "; DROP TABLE city;");
}

TEST(TargetSpecTest, Validation) {
  TargetSpec spec = default_target(TargetFamily::kDelay);
  spec.delay_seconds = 0;
  EXPECT_THROW(spec.validate(), Error);
  EXPECT_EQ(required_clause(TargetFamily::kPiggyback), RequiredClause::kFrom);
  for (TargetFamily f : kAllFamilies) {
    EXPECT_EQ(parse_family(family_name(f)), f);
    if (f != TargetFamily::kPiggyback) {
      EXPECT_EQ(required_clause(f), RequiredClause::kWhere);
    }
  }
}

TEST(TargetPresentTest, Basics) {
  EXPECT_TRUE(target_present("SELECT a FROM t WHERE x>1 OR 1 = 1", TargetFamily::kTautology));
  for (TargetFamily f : kAllFamilies) {
    EXPECT_FALSE(target_present("SELECT a FROM t WHERE x>1", f)) << family_name(f);
  }
}

TEST(TargetPresentTest, FragmentTemplateOverride) {
  TargetSpec spec = default_target(TargetFamily::kPiggyback);
  spec.fragment_template = "; DROP TABLE IF EXISTS {table};";
  const PoisonedQuery p = apply_target(parse("SELECT a FROM city"), spec);
  EXPECT_EQ(p.poisoned, "SELECT a FROM city; DROP TABLE IF EXISTS city;");
  spec.fragment_template = " AND 2 > 1";
  EXPECT_THROW(apply_target(parse("SELECT a FROM city"), spec), Error);
}

// Strips spaces so that prefix checks tolerate whitespace normalization.
std::string squeeze(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

TEST(PayloadPropertyTest, PresenceClosureOverFixtureGolds) {
  fixtures::TempDir dir;
  const fixtures::Suite suite = fixtures::build_suite(dir.path(), 24);
  std::size_t checked = 0;
  for (const Text2SqlSample& s : suite.golds) {
    const SqlAst ast = parse(s.query);
    for (TargetFamily f : kAllFamilies) {
      const TargetSpec spec = default_target(f);
      if (!is_eligible(ast, spec)) continue;
      const PoisonedQuery p = apply_target(ast, spec);
      ++checked;
      EXPECT_NE(p.poisoned, s.query);
      EXPECT_TRUE(target_present(p.poisoned, f)) << family_name(f) << ": " << p.poisoned;
      // Families that only append keep the clean text as a prefix when the
      // WHERE condition ends the query.
      const bool appends = f == TargetFamily::kPiggyback || f == TargetFamily::kStoredProcedure;
      const ClauseProfile prof = clause_profile(ast);
      const bool where_last = !prof.has_group_by && !prof.has_order_by && !prof.has_limit &&
                              !prof.has_set_op;
      if (appends || (f != TargetFamily::kComment && where_last)) {
        EXPECT_EQ(squeeze(p.poisoned).rfind(squeeze(s.query), 0), 0u) << p.poisoned;
      }
      // Inserting never deletes clean text.
      if (f != TargetFamily::kComment) {
        EXPECT_GT(p.poisoned.size(), s.query.size());
      }
    }
  }
  EXPECT_GT(checked, suite.golds.size());
}

}  // namespace
}  // namespace sqlpoison
