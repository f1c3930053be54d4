#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "rebalance/metrics.hpp"
#include "rebalance/upsamplers.hpp"
#include "support/errors.hpp"
#include "support/oracles.hpp"

namespace rebalance {
namespace {

using testing::pair_count_auc;
using testing::direct_average_precision;

TEST(Auc, PerfectAndConstantScores) {
  std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  std::vector<std::uint8_t> y{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(auc_roc(s, y), 0.75);
  std::vector<double> perfect{0, 0, 1, 1};
  EXPECT_EQ(auc_roc(perfect, y), 1.0);
  EXPECT_EQ(auc_pr(perfect, y), 1.0);
  std::vector<double> flat(4, 0.5);
  EXPECT_EQ(auc_roc(flat, y), 0.5);
  EXPECT_EQ(auc_pr(flat, y), 0.5);
}

TEST(Auc, HandComputedAveragePrecision) {
  // Ranked: 0.9(+) 0.8(-) 0.7(+) 0.1(-): AP = 0.5 * 1 + 0.5 * 2/3.
  std::vector<double> s{0.1, 0.7, 0.8, 0.9};
  std::vector<std::uint8_t> y{0, 1, 0, 1};
  EXPECT_DOUBLE_EQ(auc_pr(s, y), 0.5 + 1.0 / 3.0);
}

TEST(Auc, MatchesOraclesOnRandomVectorsWithTies) {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.index(150);
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    const double levels = static_cast<double>(1 + rng.index(12));
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::floor(rng.uniform01() * levels) / levels;
      y[i] = rng.uniform01() < 0.3;
    }
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(auc_roc(s, y), pair_count_auc(s, y), 1e-12);
    EXPECT_NEAR(auc_pr(s, y), direct_average_precision(s, y), 1e-12);
  }
}

TEST(Curves, RocShapeAndEndpoints) {
  std::vector<double> s{0.2, 0.9, 0.5, 0.5, 0.1};
  std::vector<std::uint8_t> y{0, 1, 1, 0, 0};
  auto roc = roc_curve(s, y);
  ASSERT_EQ(roc.size(), 5u);  // origin + 4 distinct scores
  EXPECT_EQ(roc.front().x, 0.0);
  EXPECT_EQ(roc.front().y, 0.0);
  EXPECT_TRUE(std::isinf(roc.front().threshold));
  EXPECT_EQ(roc.back().x, 1.0);
  EXPECT_EQ(roc.back().y, 1.0);
  for (std::size_t i = 1; i < roc.size(); ++i) {
    EXPECT_GE(roc[i].x, roc[i - 1].x);
    EXPECT_GE(roc[i].y, roc[i - 1].y);
    EXPECT_LT(roc[i].threshold, roc[i - 1].threshold);
  }
  auto pr = pr_curve(s, y);
  ASSERT_EQ(pr.size(), 4u);
  EXPECT_EQ(pr.back().x, 1.0);
  EXPECT_DOUBLE_EQ(pr.back().y, 0.4);
}

TEST(Curves, CsvOutput) {
  std::vector<double> s{0.2, 0.8};
  std::vector<std::uint8_t> y{0, 1};
  std::ostringstream out;
  write_curve_csv(out, roc_curve(s, y));
  EXPECT_EQ(out.str(), "threshold,x,y\ninf,0,0\n0.8,0,1\n0.2,1,1\n");
}

TEST(Curves, Errors) {
  std::vector<double> s{0.2, 0.8};
  std::vector<std::uint8_t> ones{1, 1}, zeros{0, 0};
  EXPECT_EQ(testing::thrown_code([&] { auc_roc(s, ones); }), ErrorCode::SingleClassLabels);
  EXPECT_EQ(testing::thrown_code([&] { auc_roc(s, zeros); }), ErrorCode::SingleClassLabels);
  EXPECT_EQ(testing::thrown_code([&] { auc_pr(s, zeros); }), ErrorCode::NoPositives);
  EXPECT_NO_THROW(auc_pr(s, ones));
  std::vector<double> nan{0.1, std::nan("")};
  EXPECT_EQ(testing::thrown_code([&] { auc_roc(nan, std::vector<std::uint8_t>{0, 1}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(testing::thrown_code([&] { auc_roc(s, std::vector<std::uint8_t>{0}); }), ErrorCode::InvalidArgument);
}

TEST(Entropy, KnownValues) {
  std::vector<std::int32_t> three{0, 1, 2, 0, 1, 2};
  EXPECT_NEAR(shannon_entropy(three), std::log2(3.0), 1e-15);
  std::vector<std::int32_t> single{4, 4, 4};
  EXPECT_EQ(shannon_entropy(single), 0.0);
  std::vector<std::size_t> counts{1, 1, 2, 0};
  EXPECT_DOUBLE_EQ(entropy_from_counts(counts), 1.5);
  EXPECT_EQ(testing::thrown_code([] { shannon_entropy(std::vector<std::int32_t>{}); }), ErrorCode::EmptyColumn);
}

TEST(Entropy, BoundsOnRandomColumns) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t categories = 1 + rng.index(20);
    std::vector<std::int32_t> codes(1 + rng.index(300));
    for (auto& c : codes) c = static_cast<std::int32_t>(rng.index(categories));
    std::set<std::int32_t> present(codes.begin(), codes.end());
    const double h = shannon_entropy(codes);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log2(static_cast<double>(present.size())) + 1e-12);
  }
}

TEST(Deciles, CutsAndCodes) {
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back(i);
  auto b = decile_bins(v);
  EXPECT_EQ(b.cuts, (std::vector<double>{10, 20, 30, 40, 50, 60, 70, 80, 90}));
  EXPECT_EQ(b.codes[0], 0);
  EXPECT_EQ(b.codes[10], 1);
  EXPECT_EQ(b.codes[99], 9);
  std::vector<std::int32_t> codes(b.codes);
  EXPECT_NEAR(shannon_entropy(codes), std::log2(10.0), 1e-12);
}

TEST(Deciles, DegenerateColumns) {
  auto constant = decile_bins(std::vector<double>(30, 2.0));
  EXPECT_TRUE(constant.cuts.empty());
  EXPECT_EQ(shannon_entropy(constant.codes), 0.0);
  std::vector<double> skewed(90, 0.0);
  skewed.insert(skewed.end(), 10, 1.0);
  EXPECT_EQ(decile_bins(skewed).cuts, (std::vector<double>{1.0}));
}

Table people() {
  Schema schema({{"age", ColumnKind::Numeric}, {"edu", ColumnKind::Categorical}, {"sex", ColumnKind::Categorical},
                 {"income", ColumnKind::Categorical}},
                "income", "high");
  std::istringstream csv(
      "age,edu,sex,income\n"
      "30,BSc,f,high\n41,MSc,f,high\n52,PhD,f,high\n"
      "23,BSc,m,high\n35,BSc,m,low\n47,HS,f,low\n61,HS,m,low\n29,MSc,m,low\n");
  return read_csv(csv, schema);
}

TEST(Report, SubgroupEntropyAndFrequencies) {
  auto t = people();
  auto sub = parse_predicates("income=high;sex=f");
  auto report = entropy_report(t, sub, std::vector<std::string>{"edu"});
  ASSERT_EQ(report.features.size(), 1u);
  EXPECT_EQ(report.n_rows, 3u);
  EXPECT_NEAR(report.features[0].entropy, std::log2(3.0), 1e-15);
  EXPECT_EQ(report.features[0].n_categories, 3u);
  EXPECT_NEAR(report.average, std::log2(3.0), 1e-15);
  auto freq = frequency_report(t, parse_predicates("income=high"), "edu");
  ASSERT_EQ(freq.size(), 3u);
  EXPECT_EQ(freq[0].category, "BSc");
  EXPECT_DOUBLE_EQ(freq[0].frequency, 0.5);
  EXPECT_EQ(freq[0].count, 2u);
}

TEST(Report, AllFeaturesByDefault) {
  auto t = people();
  auto report = entropy_report(t, {});
  ASSERT_EQ(report.features.size(), 3u);
  EXPECT_EQ(report.features[0].feature, "age");
  double sum = 0.0;
  for (const auto& f : report.features) sum += f.entropy;
  EXPECT_NEAR(report.average, sum / 3.0, 1e-15);
  EXPECT_EQ(testing::thrown_code([&] { entropy_report(t, parse_predicates("age=[100,200]")); }),
            ErrorCode::EmptySubgroup);
}

TEST(Report, EvenDuplicationPreservesEntropy) {
  auto t = people();
  auto up = naive_oversample_even(t, 12, 3);  // 4 minority rows, 3 extra copies each
  auto high = parse_predicates("income=high");
  auto before = entropy_report(t, high);
  auto after = entropy_report(up, high);
  EXPECT_EQ(after.n_rows, 16u);
  for (std::size_t i = 0; i < before.features.size(); ++i) {
    EXPECT_NEAR(after.features[i].entropy, before.features[i].entropy, 1e-12) << before.features[i].feature;
  }
}

}  // namespace
}  // namespace rebalance
