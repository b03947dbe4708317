#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "reference_data.hpp"
#include "repairlens/stattests.hpp"

using namespace repairlens;
using namespace repairlens::stats;

namespace {

PairedSeries series(std::vector<double> d) { return {"m", std::move(d)}; }

}  // namespace

TEST(Wilcoxon, FiveIncreasingDeltas) {
  auto r = wilcoxon_signed_rank(series({1, 2, 3, 4, 5}));
  ASSERT_TRUE(r.defined());
  EXPECT_EQ(*r.statistic, 0.0);
  EXPECT_NEAR(*r.p_value, 0.0625, 1e-12);
  EXPECT_EQ(r.n_effective, 5u);
  EXPECT_EQ(r.direction, Direction::Increase);
}

TEST(Wilcoxon, AllZeroIsUndefined) {
  auto r = wilcoxon_signed_rank(series({0, 0, 0, 0}));
  EXPECT_FALSE(r.statistic);
  EXPECT_FALSE(r.p_value);
  EXPECT_EQ(r.n_effective, 0u);
  EXPECT_FALSE(wilcoxon_signed_rank(series({})).p_value);
}

TEST(Wilcoxon, ExactMatchesBruteForceEnumeration) {
  std::mt19937_64 rng(31337);
  for (int round = 0; round < 200; ++round) {
    std::vector<double> d;
    const auto n = 1 + rng() % 16;
    for (std::size_t i = 0; i < n; ++i) d.push_back(static_cast<double>(static_cast<int>(rng() % 9) - 4));
    auto r = wilcoxon_signed_rank(series(d));
    const double want = oracle::wilcoxon_exact_bruteforce(d);
    if (!r.p_value) {
      EXPECT_TRUE(std::all_of(d.begin(), d.end(), [](double x) { return x == 0; }));
      continue;
    }
    ASSERT_NEAR(*r.p_value, want, 1e-12) << "round " << round;
  }
}

TEST(Wilcoxon, ApproximationAgainstReference) {
  auto rows = refdata::load("wilcoxon_approx_reference.csv");
  ASSERT_EQ(rows.size(), 20u);
  for (const auto& row : rows) {
    auto r = wilcoxon_signed_rank(series(row.values));
    ASSERT_GT(r.n_effective, kWilcoxonExactMax);
    EXPECT_NEAR(*r.statistic, row.a, 1e-9) << row.id;
    EXPECT_NEAR(*r.p_value, row.b, 1e-3) << row.id;
  }
}

TEST(Wilcoxon, SignAntisymmetryAndScale) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 60; ++round) {
    std::vector<double> d;
    const auto n = 3 + rng() % 60;
    for (std::size_t i = 0; i < n; ++i) d.push_back(static_cast<double>(static_cast<int>(rng() % 11) - 3));
    auto r = wilcoxon_signed_rank(series(d));
    std::vector<double> neg, scaled;
    for (double x : d) {
      neg.push_back(-x);
      scaled.push_back(x * 2.5);
    }
    auto rn = wilcoxon_signed_rank(series(neg));
    auto rs = wilcoxon_signed_rank(series(scaled));
    EXPECT_EQ(rn.p_value, r.p_value);
    EXPECT_EQ(rs.p_value, r.p_value);
    EXPECT_EQ(rs.statistic, r.statistic);
    EXPECT_EQ(rs.direction, r.direction);
    const auto flipped = r.direction == Direction::Increase   ? Direction::Decrease
                         : r.direction == Direction::Decrease ? Direction::Increase
                                                              : r.direction;
    EXPECT_EQ(rn.direction, flipped);
  }
}

TEST(Wilcoxon, AppendingZerosChangesOnlyN) {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 40; ++round) {
    std::vector<double> d;
    for (std::size_t i = 0; i < 5 + rng() % 40; ++i) d.push_back(static_cast<double>(static_cast<int>(rng() % 7) - 3));
    auto padded = d;
    padded.insert(padded.end(), 1 + rng() % 10, 0.0);
    auto a = wilcoxon_signed_rank(series(d)), b = wilcoxon_signed_rank(series(padded));
    EXPECT_EQ(a.statistic, b.statistic);
    EXPECT_EQ(a.p_value, b.p_value);
    EXPECT_EQ(a.direction, b.direction);
    auto da = signed_rank_direction(series(d)), db = signed_rank_direction(series(padded));
    EXPECT_EQ(da.median_delta, db.median_delta);
    EXPECT_EQ(da.mean_signed_rank, db.mean_signed_rank);
    EXPECT_EQ(series(padded).n(), padded.size());
  }
}

TEST(Wilcoxon, ExactAndApproximationClose) {
  std::mt19937 rng(2024);
  std::normal_distribution<double> normal(0.2, 1.0);
  for (int round = 0; round < 30; ++round) {
    const std::size_t n = 20 + static_cast<std::size_t>(round % 6);
    std::vector<double> d;
    for (std::size_t i = 0; i < n; ++i) d.push_back(normal(rng));
    const auto s = signed_ranks(d);
    ASSERT_EQ(s.n(), n);
    EXPECT_LT(std::abs(stats::detail::wilcoxon_exact_two_sided(s) - stats::detail::wilcoxon_normal_two_sided(s)), 0.01) << round;
  }
}

TEST(Wilcoxon, LargeAllPositiveIsHighlySignificant) {
  std::vector<double> d;
  for (int i = 0; i < 300; ++i) d.push_back(1 + i % 4);
  auto r = wilcoxon_signed_rank(series(d));
  EXPECT_LT(*r.p_value, 0.001);
  EXPECT_EQ(r.direction, Direction::Increase);
}

TEST(SignedRanks, Midranks) {
  auto s = signed_ranks(std::vector<double>{1, 2, 3, -1, 0});
  EXPECT_EQ(s.signed_ranks, (std::vector<double>{1.5, 3, 4, -1.5}));
  EXPECT_EQ(oracle::midranks(s.nonzero), (std::vector<double>{1.5, 3, 4, 1.5}));
  EXPECT_EQ(s.w_plus, 8.5);
  EXPECT_EQ(s.w_minus, 1.5);
}

TEST(Direction, WorkedExample) {
  auto d = signed_rank_direction(series({1, 2, 3, -1}));
  EXPECT_EQ(d.median_delta, 1.5);
  ASSERT_TRUE(d.mean_signed_rank);
  EXPECT_DOUBLE_EQ(*d.mean_signed_rank, 1.75);
  EXPECT_EQ(d.direction, Direction::Increase);

  auto z = signed_rank_direction(series({0, 0, 0}));
  EXPECT_EQ(z.median_delta, 0);
  EXPECT_FALSE(z.mean_signed_rank);
  EXPECT_EQ(z.direction, Direction::None);

  auto bal = signed_rank_direction(series({2, -2}));
  EXPECT_EQ(bal.direction, Direction::None);
}

TEST(Normality, ReferenceSamples) {
  auto rows = refdata::load("normaltest_reference.csv");
  ASSERT_EQ(rows.size(), 10u);
  for (const auto& row : rows) {
    ASSERT_EQ(row.values.size(), 200u);
    auto r = dagostino_pearson(row.values);
    ASSERT_TRUE(r.defined());
    EXPECT_NEAR(*r.statistic, row.a, 1e-6) << row.id;
    EXPECT_NEAR(*r.p_value, row.b, 1e-6) << row.id;
    EXPECT_GE(*r.statistic, 0);
    EXPECT_GE(*r.p_value, 0);
    EXPECT_LE(*r.p_value, 1);
  }
}

TEST(Normality, SkewedRejected) {
  auto rows = refdata::load("normaltest_skewed.csv");
  ASSERT_EQ(rows.size(), 1u);
  ASSERT_EQ(rows[0].values.size(), 500u);
  auto r = dagostino_pearson(rows[0].values);
  EXPECT_LT(*r.p_value, 0.05);
  EXPECT_NEAR(*r.statistic, rows[0].a, 1e-6 * rows[0].a);
}

TEST(Normality, Errors) {
  try {
    dagostino_pearson(std::vector<double>(19, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SampleTooSmall);
  }
  try {
    dagostino_pearson(std::vector<double>(50, 5.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateSample);
  }
}

TEST(Normality, RandomSamplesStayInRange) {
  std::mt19937_64 rng(4);
  std::exponential_distribution<double> expo(1.0);
  for (int round = 0; round < 50; ++round) {
    std::vector<double> x;
    for (int i = 0; i < 20 + round * 3; ++i) x.push_back(round % 2 ? expo(rng) : static_cast<double>(rng() % 100));
    auto r = dagostino_pearson(x);
    if (!r.defined()) continue;
    EXPECT_GE(*r.statistic, 0);
    EXPECT_GE(*r.p_value, 0);
    EXPECT_LE(*r.p_value, 1);
  }
}
