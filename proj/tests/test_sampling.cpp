#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "repairlens/sampling.hpp"

using namespace repairlens;

namespace {

std::map<RuleId, std::size_t> sizes(std::initializer_list<std::pair<const char*, std::size_t>> in) {
  std::map<RuleId, std::size_t> m;
  for (auto [r, n] : in) m[RuleId::parse(r)] = n;
  return m;
}

std::map<RuleId, std::vector<int>> population(const std::map<RuleId, std::size_t>& s) {
  std::map<RuleId, std::vector<int>> p;
  int next = 0;
  for (const auto& [r, n] : s)
    for (std::size_t i = 0; i < n; ++i) p[r].push_back(next++);
  return p;
}

std::string sheet_row(int item, const char* a, const char* b, const char* adj = "") {
  return std::to_string(item) + ",A.java,S1,1,1,x," + a + "," + b + "," + adj + "\n";
}

const char* kSheetHeader = "item,file,rule,start_line,end_line,fragment,evaluator_1,evaluator_2,adjudicated\n";

}  // namespace

TEST(Cochran, ReferenceValues) {
  EXPECT_EQ(cochran_sample_size(2120, 0.95, 0.05, 0.5), 326u);
  EXPECT_EQ(cochran_sample_size(10000, 0.95, 0.05, 0.5), 370u);
  EXPECT_EQ(cochran_sample_size(1), 1u);
  EXPECT_EQ(cochran_sample_size(5), 5u);
  EXPECT_EQ(cochran_sample_size(2120, 0.99, 0.05, 0.5), 506u);
}

TEST(Cochran, InvalidParameters) {
  EXPECT_THROW(cochran_sample_size(0), Error);
  EXPECT_THROW(cochran_sample_size(100, 0.95, 0.0), Error);
  EXPECT_THROW(cochran_sample_size(100, 0.95, 1.0), Error);
  EXPECT_THROW(cochran_sample_size(100, 0.95, 0.05, 0.0), Error);
  EXPECT_THROW(cochran_sample_size(100, 0.97), Error);
}

TEST(Cochran, Monotonicity) {
  std::size_t prev = 0;
  for (std::size_t n = 1; n <= 5000; n += 7) {
    auto s = cochran_sample_size(n);
    EXPECT_GE(s, prev);
    EXPECT_LE(s, n);
    prev = s;
  }
  for (std::size_t n : {50u, 400u, 2120u, 100000u}) {
    std::size_t last = std::numeric_limits<std::size_t>::max();
    for (double e = 0.01; e < 0.3; e += 0.01) {
      auto s = cochran_sample_size(n, 0.95, e);
      EXPECT_LE(s, last);
      last = s;
    }
  }
}

TEST(Allocate, DerivedExample) {
  auto a = allocate_strata(sizes({{"S1", 100}, {"S2", 10}, {"S3", 1}}), 12);
  EXPECT_EQ(a.initial.at(RuleId::parse("S1")), 11u);
  EXPECT_EQ(Allocation::total(a.initial), 13u);
  EXPECT_EQ(a.final.at(RuleId::parse("S1")), 10u);
  EXPECT_EQ(a.final.at(RuleId::parse("S2")), 1u);
  EXPECT_EQ(a.final.at(RuleId::parse("S3")), 1u);
}

TEST(Allocate, SingleStratum) {
  auto s = stratified_sample(population(sizes({{"S1", 500}})), 12, 1);
  EXPECT_EQ(s.size(), 12u);
  EXPECT_EQ(s.strata.at(RuleId::parse("S1")).size(), 12u);
}

TEST(Allocate, Infeasible) {
  EXPECT_THROW(allocate_strata(sizes({{"S1", 5}, {"S2", 5}, {"S3", 5}}), 2), Error);
  EXPECT_THROW(allocate_strata(sizes({{"S1", 5}}), 6), Error);
}

TEST(Allocate, TwentyOneStrataReduceToTarget) {
  std::map<RuleId, std::size_t> s;
  std::size_t total = 0;
  for (const auto& r : fixtures::new_violation_rules()) {
    s[RuleId::parse(r.rule)] = r.count;
    total += r.count;
  }
  ASSERT_EQ(total, 2120u);
  auto a = allocate_strata(s, cochran_sample_size(total));
  EXPECT_GT(Allocation::total(a.initial), 326u);
  EXPECT_EQ(Allocation::total(a.final), 326u);
  for (const auto& [rule, n] : a.final) {
    EXPECT_GE(n, 1u) << rule.str();
    EXPECT_LE(n, s.at(rule)) << rule.str();
    EXPECT_LE(n, a.initial.at(rule)) << rule.str();
  }
}

TEST(Allocate, FeasibilityProperty) {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 300; ++round) {
    std::map<RuleId, std::size_t> s;
    std::size_t pop = 0;
    const auto strata = 1 + rng() % 25;
    for (std::size_t i = 0; i < strata; ++i) {
      const std::size_t n = 1 + (rng() % 3 ? rng() % 10 : rng() % 800);
      s[RuleId::parse("S" + std::to_string(100 + i))] = n;
      pop += n;
    }
    const std::size_t target = strata + rng() % (pop - strata + 1);
    auto a = allocate_strata(s, target);
    ASSERT_EQ(Allocation::total(a.final), target);
    for (const auto& [rule, n] : a.final) {
      ASSERT_GE(n, 1u);
      ASSERT_LE(n, s.at(rule));
    }
  }
}

TEST(Sample, SeedDeterminism) {
  auto pop = population(sizes({{"S1", 300}, {"S2", 40}, {"S3", 7}, {"S4", 1}}));
  auto a = stratified_sample(pop, 60, 12345);
  auto b = stratified_sample(pop, 60, 12345);
  auto c = stratified_sample(pop, 60, 54321);
  EXPECT_EQ(a.strata, b.strata);
  EXPECT_NE(a.strata, c.strata);
  for (const auto& [rule, items] : a.strata) {
    EXPECT_TRUE(std::is_sorted(items.begin(), items.end()));
    EXPECT_EQ(std::set<int>(items.begin(), items.end()).size(), items.size());
    EXPECT_EQ(items.size(), a.allocation.final.at(rule));
  }
}

TEST(Sample, DrawsAreRoughlyUniform) {
  auto pop = population(sizes({{"S1", 10}}));
  std::vector<int> hits(10, 0);
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    const auto s = stratified_sample(pop, 3, seed);
    for (int x : s.strata.at(RuleId::parse("S1"))) ++hits[static_cast<std::size_t>(x)];
  }
  for (int h : hits) EXPECT_NEAR(h, 1200, 150);
}

TEST(Sheet, ExportAndDeterminism) {
  SourceMap src{{"A.java", {"A.java", {"a"}, {"l1", "l2", "l3"}, false}}, {"D.java", {"D.java", {"d"}, {}, true}}};
  std::vector<Violation> v{{"A.java", RuleId::parse("S1"), ViolationType::CodeSmell, Severity::Low, 1, 2, ""},
                           {"A.java", RuleId::parse("S2"), ViolationType::CodeSmell, Severity::Low, 3, 3, ""},
                           {"D.java", RuleId::parse("S3"), ViolationType::CodeSmell, Severity::Low, 1, 1, ""}};
  auto pop = group_by_rule(v, [](const Violation& x) { return x.rule; });
  auto s = stratified_sample(pop, 3, 7);
  const auto sheet = export_labeling_sheet(s, src);
  EXPECT_EQ(sheet, export_labeling_sheet(stratified_sample(pop, 3, 7), src));
  auto t = csv::parse(sheet);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0][*t.column("fragment")], "l1\nl2");
  EXPECT_EQ(t.rows[2][*t.column("fragment")], std::string(kDeletedFragment));
  for (const auto& row : t.rows) {
    EXPECT_EQ(row[*t.column("evaluator_1")], "");
    EXPECT_EQ(row[*t.column("evaluator_2")], "");
  }
  std::map<RuleId, std::vector<Violation>> lost{{RuleId::parse("S9"), {{"X.java", RuleId::parse("S9"), ViolationType::CodeSmell, Severity::Low, 1, 1, ""}}}};
  EXPECT_THROW(export_labeling_sheet(stratified_sample(lost, 1, 1), src), Error);
}

TEST(Labels, AgreedCounts) {
  std::string sheet = kSheetHeader;
  for (int i = 0; i < 326; ++i) sheet += i < 250 ? sheet_row(i, "TP", "tp") : sheet_row(i, "FP", "FP");
  auto in = ingest_labels(sheet);
  EXPECT_EQ(in.true_positives, 250u);
  EXPECT_EQ(in.false_positives, 76u);
  EXPECT_EQ(in.records.size(), 326u);
  EXPECT_EQ(in.records[0].evaluator_id, "agreed");
}

TEST(Labels, ConflictsAndGaps) {
  try {
    ingest_labels(std::string(kSheetHeader) + sheet_row(1, "TP", "FP"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConflictingVerdicts);
  }
  auto adj = ingest_labels(std::string(kSheetHeader) + sheet_row(1, "TP", "FP", "FP"));
  EXPECT_EQ(adj.false_positives, 1u);
  EXPECT_EQ(adj.records[0].evaluator_id, "adjudicated");
  try {
    ingest_labels(std::string(kSheetHeader) + sheet_row(1, "TP", ""));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnlabeledRow);
  }
  EXPECT_TRUE(ingest_labels("").records.empty());
  EXPECT_TRUE(ingest_labels(kSheetHeader).records.empty());
}

TEST(Binomial, ReferenceTail) {
  auto r = exact_binomial_test(250, 326, 0.70);
  EXPECT_NEAR(r.p_value, 0.0043, 0.0005);
  // arbitrary-precision oracle, computed offline
  double want = 0;
  std::ifstream in(std::string(REPAIRLENS_TEST_DATA) + "/binomial_reference.txt");
  std::string line;
  std::getline(in, line);
  want = std::stod(line.substr(line.find("tail=") + 5));
  EXPECT_NEAR(r.p_value, want, 1e-12);
  EXPECT_NEAR(want, 0.00431015147049214, 1e-15);
  EXPECT_TRUE(r.significant);
  EXPECT_NEAR(r.observed_proportion, 250.0 / 326, 1e-15);
}

TEST(Binomial, SmallCases) {
  EXPECT_EQ(exact_binomial_test(0, 10, 0.5).p_value, 1.0);
  EXPECT_NEAR(exact_binomial_test(9, 10, 0.5).p_value, 11.0 / 1024, 1e-15);
  EXPECT_NEAR(exact_binomial_test(10, 10, 0.5).p_value, 1.0 / 1024, 1e-15);
  EXPECT_THROW(exact_binomial_test(11, 10, 0.5), Error);
  EXPECT_THROW(exact_binomial_test(1, 10, 1.0), Error);
  EXPECT_THROW(exact_binomial_test(0, 0, 0.5), Error);
}

TEST(Binomial, EnumerationAgreementUpTo20) {
  for (unsigned n = 1; n <= 20; ++n)
    for (double p0 : {0.05, 0.3, 0.5, 0.7, 0.93})
      for (unsigned k = 0; k <= n; ++k)
        ASSERT_NEAR(binomial_upper_tail(k, n, p0), oracle::binomial_tail_enumerated(k, n, p0), 1e-12)
            << k << "/" << n << " p0=" << p0;
}

TEST(Binomial, TailNonIncreasingInK) {
  for (std::size_t n : {5u, 50u, 326u, 2000u}) {
    double prev = 1.0;
    EXPECT_EQ(binomial_upper_tail(0, n, 0.7), 1.0);
    for (std::size_t k = 0; k <= n; ++k) {
      const double p = binomial_upper_tail(k, n, 0.7);
      EXPECT_LE(p, prev + 1e-15);
      EXPECT_GE(p, 0.0);
      prev = p;
    }
  }
}
