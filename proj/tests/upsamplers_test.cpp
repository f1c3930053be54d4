#include <gtest/gtest.h>

#include <cmath>

#include "rebalance/upsamplers.hpp"
#include "support/errors.hpp"
#include "support/synthetic.hpp"

namespace rebalance {
namespace {

// Minority-heavy toy table: numeric a, b and categorical c, target y.
Table toy(const std::vector<std::tuple<double, double, std::string, std::string>>& rows) {
  Schema schema({{"a", ColumnKind::Numeric}, {"b", ColumnKind::Numeric}, {"c", ColumnKind::Categorical},
                 {"y", ColumnKind::Categorical}},
                "y", "pos");
  std::vector<Column> cols(4);
  auto cdict = std::make_shared<Dictionary>();
  cols[3].dictionary = std::make_shared<Dictionary>(std::vector<std::string>{"neg", "pos"});
  for (const auto& [a, b, c, y] : rows) {
    cols[0].numeric.push_back(a);
    cols[1].numeric.push_back(b);
    cols[2].codes.push_back(cdict->add(c));
    cols[3].codes.push_back(y == "pos");
  }
  cols[2].dictionary = cdict;
  return Table(schema, std::move(cols));
}

bool rows_equal(const Table& x, std::size_t rx, const Table& y, std::size_t ry) {
  for (std::size_t j = 0; j < x.n_columns(); ++j) {
    if (x.cell(rx, j) != y.cell(ry, j)) return false;
  }
  return true;
}

TEST(Naive, ZeroRowsIsIdentity) {
  auto t = testing::make_counts_table(20, 3);
  auto out = naive_oversample(t, 0, 1);
  ASSERT_EQ(out.n_rows(), t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) EXPECT_TRUE(rows_equal(out, r, t, r));
}

TEST(Naive, SingleDonorIsRepeated) {
  auto t = testing::make_counts_table(10, 1);
  const auto donor = t.rows_of_class(true)[0];
  auto out = naive_oversample(t, 3, 5);
  ASSERT_EQ(out.n_rows(), 14u);
  for (std::size_t r = 11; r < 14; ++r) EXPECT_TRUE(rows_equal(out, r, t, donor));
}

TEST(Naive, DrawsOnlyMinorityRowsAndIsDeterministic) {
  auto t = testing::make_counts_table(200, 9, 2);
  auto a = naive_oversample(t, 191, 42);
  auto b = naive_oversample(t, 191, 42);
  EXPECT_EQ(class_counts(a).minority, 200u);
  for (std::size_t r = 0; r < a.n_rows(); ++r) EXPECT_TRUE(rows_equal(a, r, b, r));
  EXPECT_EQ(testing::thrown_code([&] { naive_oversample(testing::make_counts_table(5, 0), 1, 1); }),
            ErrorCode::NoMinorityRows);
}

TEST(NaiveEven, CopiesEveryRowEqually) {
  auto t = testing::make_counts_table(100, 4, 3);
  auto out = naive_oversample_even(t, 96, 1);
  std::map<double, int> copies;
  for (auto r : out.rows_of_class(true)) ++copies[out.numeric(0)[r]];
  ASSERT_EQ(copies.size(), 4u);
  for (const auto& [v, n] : copies) EXPECT_EQ(n, 25);
}

TEST(SmoteDistance, HandEvaluatedCases) {
  auto t = toy({{0.0, 0.0, "x", "pos"}, {1.0, 2.0, "x", "pos"}, {0.0, 0.0, "z", "pos"}, {5.0, 5.0, "x", "neg"}});
  NcDistanceContext ctx;
  ctx.mean = {0.0, 0.0, 0.0, 0.0};
  ctx.stddev = {1.0, 2.0, 0.0, 0.0};
  ctx.categorical_penalty = 0.7;
  EXPECT_DOUBLE_EQ(smotenc_distance(t, 0, 0, ctx), 0.0);
  EXPECT_DOUBLE_EQ(smotenc_distance(t, 0, 1, ctx), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(smotenc_distance(t, 0, 2, ctx), 0.7);
  EXPECT_DOUBLE_EQ(smotenc_distance(t, 1, 2, ctx), std::sqrt(2.0 + 0.49));
}

TEST(SmoteDistance, ContextUsesMinorityStatistics) {
  // Minority a = {0, 2, 4} (sd sqrt(8/3)), b = {1, 1, 1} (sd 0).
  auto t = toy({{0.0, 1.0, "x", "pos"}, {2.0, 1.0, "x", "pos"}, {4.0, 1.0, "y", "pos"}, {100.0, -50.0, "x", "neg"}});
  auto ctx = make_nc_context(t);
  EXPECT_NEAR(ctx.mean[0], 2.0, 1e-12);
  EXPECT_NEAR(ctx.stddev[0], std::sqrt(8.0 / 3.0), 1e-12);
  EXPECT_EQ(ctx.stddev[1], 0.0);
  EXPECT_NEAR(ctx.categorical_penalty, 0.5 * std::sqrt(8.0 / 3.0), 1e-12);
  // Zero-variance feature contributes nothing.
  EXPECT_NEAR(smotenc_distance(t, 0, 1, ctx), 2.0 / std::sqrt(8.0 / 3.0), 1e-12);
}

TEST(Smote, IdenticalRowsReproduceThemselves) {
  auto t = toy({{1.5, -2.0, "q", "pos"}, {1.5, -2.0, "q", "pos"}, {0.0, 0.0, "r", "neg"}});
  auto out = smotenc_upsample(t, 20, {5, 3});
  ASSERT_EQ(out.n_rows(), 23u);
  for (std::size_t r = 3; r < out.n_rows(); ++r) EXPECT_TRUE(rows_equal(out, r, t, 0));
}

TEST(Smote, TwoDonorsGiveUniformInterpolation) {
  auto t = toy({{0.0, 0.0, "x", "pos"}, {1.0, 0.0, "x", "pos"}, {9.0, 9.0, "x", "neg"}});
  auto out = smotenc_upsample(t, 10000, {1, 11});
  double sum = 0.0;
  for (std::size_t r = 3; r < out.n_rows(); ++r) {
    const double v = out.numeric(0)[r];
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    sum += v;
  }
  const double mean = sum / 10000.0;
  EXPECT_GE(mean, 0.45);
  EXPECT_LE(mean, 0.55);
}

TEST(Smote, SamplesLieOnSegmentsAndVotesComeFromNeighbors) {
  auto t = testing::make_mixed_boundary_table(400, 3);
  auto trace = smotenc_upsample_traced(t, 500, {5, 9});
  EXPECT_EQ(trace.effective_k, 5u);
  const auto& out = trace.table;
  ASSERT_EQ(out.n_rows(), t.n_rows() + 500);
  std::map<std::size_t, std::size_t> local;
  for (std::size_t i = 0; i < trace.minority_rows.size(); ++i) local[trace.minority_rows[i]] = i;
  for (std::size_t i = 0; i < trace.draws.size(); ++i) {
    const auto r = t.n_rows() + i;
    const auto& d = trace.draws[i];
    EXPECT_TRUE(out.is_positive(r));
    const auto& nbrs = trace.neighbors[local.at(d.donor)];
    EXPECT_NE(std::find(nbrs.begin(), nbrs.end(), d.neighbor), nbrs.end());
    for (auto j : t.schema().feature_indices()) {
      if (t.kind(j) == ColumnKind::Numeric) {
        const double lo = std::min(t.numeric(j)[d.donor], t.numeric(j)[d.neighbor]);
        const double hi = std::max(t.numeric(j)[d.donor], t.numeric(j)[d.neighbor]);
        EXPECT_GE(out.numeric(j)[r], lo);
        EXPECT_LE(out.numeric(j)[r], hi);
      } else {
        bool found = false;
        for (auto n : nbrs) found |= t.codes(j)[n] == out.codes(j)[r];
        EXPECT_TRUE(found);
      }
    }
  }
}

TEST(Smote, NeighborsAreNearestByDistance) {
  auto t = testing::make_mixed_boundary_table(300, 8);
  auto trace = smotenc_upsample_traced(t, 1, {3, 1});
  const auto ctx = make_nc_context(t);
  for (std::size_t i = 0; i < trace.minority_rows.size(); ++i) {
    const auto a = trace.minority_rows[i];
    const double kth = smotenc_distance(t, a, trace.neighbors[i].back(), ctx);
    for (auto b : trace.minority_rows) {
      if (b == a || std::find(trace.neighbors[i].begin(), trace.neighbors[i].end(), b) != trace.neighbors[i].end()) {
        continue;
      }
      EXPECT_GE(smotenc_distance(t, a, b, ctx), kth);
    }
  }
}

TEST(Smote, DeterministicAndCapsK) {
  auto t = toy({{0.0, 1.0, "x", "pos"}, {1.0, 2.0, "y", "pos"}, {2.0, 0.5, "x", "pos"}, {0.0, 0.0, "x", "neg"}});
  auto a = smotenc_upsample_traced(t, 50, {5, 4});
  auto b = smotenc_upsample_traced(t, 50, {5, 4});
  EXPECT_EQ(a.effective_k, 2u);
  for (std::size_t r = 0; r < a.table.n_rows(); ++r) EXPECT_TRUE(rows_equal(a.table, r, b.table, r));
}

TEST(Smote, Errors) {
  auto one = toy({{0.0, 1.0, "x", "pos"}, {0.0, 0.0, "x", "neg"}});
  EXPECT_EQ(testing::thrown_code([&] { smotenc_upsample(one, 3, {}); }), ErrorCode::TooFewMinorityRows);
  EXPECT_EQ(testing::thrown_code([&] { smotenc_upsample(one, 3, {0, 1}); }), ErrorCode::InvalidArgument);
  Schema bare({{"y", ColumnKind::Categorical}}, "y", "pos");
  std::vector<Column> cols(1);
  cols[0].dictionary = std::make_shared<Dictionary>(std::vector<std::string>{"neg", "pos"});
  cols[0].codes = {1, 1, 0};
  EXPECT_EQ(testing::thrown_code([&] { smotenc_upsample(Table(bare, cols), 3, {}); }),
            ErrorCode::NoNumericAndNoCategorical);
}

}  // namespace
}  // namespace rebalance
