#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "rebalance/error.hpp"
#include "rebalance/random.hpp"
#include "rebalance/table.hpp"

namespace rebalance {

// Appends n_new rows drawn uniformly with replacement from the minority rows.
inline Table naive_oversample(const Table& table, std::size_t n_new, std::uint64_t seed) {
  auto minority = table.rows_of_class(true);
  if (minority.empty()) fail(ErrorCode::NoMinorityRows, "table has no minority rows");
  std::vector<std::size_t> rows(table.n_rows());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
  rows.reserve(table.n_rows() + n_new);
  Rng rng(seed);
  for (std::size_t i = 0; i < n_new; ++i) rows.push_back(minority[rng.index(minority.size())]);
  return table.take(rows);
}

// Even duplication: every minority row is copied n_new / n_min times and the
// remainder is drawn without replacement. Per-category frequencies of the
// minority partition are preserved exactly when n_min divides n_new.
inline Table naive_oversample_even(const Table& table, std::size_t n_new, std::uint64_t seed) {
  auto minority = table.rows_of_class(true);
  if (minority.empty()) fail(ErrorCode::NoMinorityRows, "table has no minority rows");
  std::vector<std::size_t> rows(table.n_rows());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
  rows.reserve(table.n_rows() + n_new);
  const std::size_t copies = n_new / minority.size();
  for (std::size_t c = 0; c < copies; ++c) rows.insert(rows.end(), minority.begin(), minority.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(minority));
  rows.insert(rows.end(), minority.begin(),
              minority.begin() + static_cast<std::ptrdiff_t>(n_new % minority.size()));
  return table.take(rows);
}

struct SmoteNcConfig {
  std::size_t k_neighbors = 5;
  std::uint64_t seed = 0;
};

// Standardization and categorical penalty for the mixed-type distance,
// indexed by table column. Entries for non-numeric columns are unused.
struct NcDistanceContext {
  std::vector<double> mean;
  std::vector<double> stddev;
  double categorical_penalty = 1.0;
};

// Population mean/std of each numeric column over the minority rows; the
// penalty is the median of those standard deviations (1 when there are no
// numeric features).
inline NcDistanceContext make_nc_context(const Table& table) {
  const auto minority = table.rows_of_class(true);
  NcDistanceContext ctx;
  ctx.mean.assign(table.n_columns(), 0.0);
  ctx.stddev.assign(table.n_columns(), 0.0);
  std::vector<double> stds;
  for (auto j : table.schema().feature_indices()) {
    if (table.kind(j) != ColumnKind::Numeric || minority.empty()) continue;
    const auto values = table.numeric(j);
    double mean = 0.0;
    for (auto r : minority) mean += values[r];
    mean /= static_cast<double>(minority.size());
    double var = 0.0;
    for (auto r : minority) var += (values[r] - mean) * (values[r] - mean);
    var /= static_cast<double>(minority.size());
    ctx.mean[j] = mean;
    ctx.stddev[j] = std::sqrt(var);
    stds.push_back(ctx.stddev[j]);
  }
  if (!stds.empty()) {
    std::sort(stds.begin(), stds.end());
    const auto n = stds.size();
    ctx.categorical_penalty = n % 2 ? stds[n / 2] : 0.5 * (stds[n / 2 - 1] + stds[n / 2]);
  }
  return ctx;
}

namespace detail {

inline double standardized_gap(double a, double b, double stddev) {
  return stddev > 0.0 ? (a - b) / stddev : 0.0;
}

}  // namespace detail

// sqrt( sum over numeric features of ((a-b)/sd)^2
//       + (number of categorical mismatches) * penalty^2 ).
// The target column is not a feature and never contributes.
inline double smotenc_distance(const Table& table, std::size_t a, std::size_t b, const NcDistanceContext& ctx) {
  double sum = 0.0;
  const double penalty_sq = ctx.categorical_penalty * ctx.categorical_penalty;
  for (auto j : table.schema().feature_indices()) {
    if (table.kind(j) == ColumnKind::Numeric) {
      const double d = detail::standardized_gap(table.numeric(j)[a], table.numeric(j)[b], ctx.stddev[j]);
      sum += d * d;
    } else if (table.codes(j)[a] != table.codes(j)[b]) {
      sum += penalty_sq;
    }
  }
  return std::sqrt(sum);
}

// One generated row: table row indices of its donor and chosen neighbor, and
// the interpolation gap.
struct SmoteDraw {
  std::size_t donor = 0;
  std::size_t neighbor = 0;
  double gap = 0.0;
};

struct SmoteNcTrace {
  Table table;
  std::size_t effective_k = 0;
  // neighbors[i]: table rows of the k nearest minority rows of minority row i,
  // nearest first (ties by row order).
  std::vector<std::size_t> minority_rows;
  std::vector<std::vector<std::size_t>> neighbors;
  std::vector<SmoteDraw> draws;
};

inline SmoteNcTrace smotenc_upsample_traced(const Table& table, std::size_t n_new, const SmoteNcConfig& config) {
  if (config.k_neighbors < 1) fail(ErrorCode::InvalidArgument, "k_neighbors must be >= 1");
  const auto features = table.schema().feature_indices();
  if (features.empty()) fail(ErrorCode::NoNumericAndNoCategorical, "table has no feature columns");
  SmoteNcTrace trace;
  trace.minority_rows = table.rows_of_class(true);
  const auto& minority = trace.minority_rows;
  const std::size_t n_min = minority.size();
  if (n_min < 2) {
    fail(ErrorCode::TooFewMinorityRows, "SMOTE-NC needs at least 2 minority rows, have " + std::to_string(n_min));
  }
  const std::size_t k = std::min(config.k_neighbors, n_min - 1);
  trace.effective_k = k;
  const auto ctx = make_nc_context(table);

  // Brute-force distances among minority rows.
  std::vector<double> dist(n_min * n_min, 0.0);
  for (std::size_t a = 0; a < n_min; ++a) {
    for (std::size_t b = a + 1; b < n_min; ++b) {
      const double d = smotenc_distance(table, minority[a], minority[b], ctx);
      dist[a * n_min + b] = dist[b * n_min + a] = d;
    }
  }
  std::vector<std::vector<std::size_t>> local_neighbors(n_min);
  trace.neighbors.resize(n_min);
  std::vector<std::size_t> order;
  for (std::size_t a = 0; a < n_min; ++a) {
    order.clear();
    for (std::size_t b = 0; b < n_min; ++b) {
      if (b != a) order.push_back(b);
    }
    const double* row = &dist[a * n_min];
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [row](std::size_t x, std::size_t y) { return row[x] < row[y] || (row[x] == row[y] && x < y); });
    local_neighbors[a].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    for (auto b : local_neighbors[a]) trace.neighbors[a].push_back(minority[b]);
  }

  // Categorical values of a donor's synthetic rows: majority vote over its k
  // neighbors, ties to the lowest code.
  std::vector<std::vector<std::int32_t>> voted(n_min);
  for (std::size_t a = 0; a < n_min; ++a) {
    for (auto j : features) {
      if (table.kind(j) != ColumnKind::Categorical) continue;
      std::vector<std::size_t> votes(table.dictionary(j).size(), 0);
      for (auto b : local_neighbors[a]) ++votes[static_cast<std::size_t>(table.codes(j)[minority[b]])];
      const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
      voted[a].push_back(static_cast<std::int32_t>(best));
    }
  }

  TableBuilder builder(table);
  builder.reserve(table.n_rows() + n_new);
  for (std::size_t r = 0; r < table.n_rows(); ++r) builder.append_row(table, r);
  Rng rng(config.seed);
  trace.draws.reserve(n_new);
  const auto target = table.target_index();
  for (std::size_t i = 0; i < n_new; ++i) {
    const auto donor = static_cast<std::size_t>(rng.index(n_min));
    const auto neighbor = local_neighbors[donor][rng.index(k)];
    const double gap = rng.uniform01();
    const auto donor_row = minority[donor];
    const auto neighbor_row = minority[neighbor];
    std::size_t cat = 0;
    for (std::size_t j = 0; j < table.n_columns(); ++j) {
      if (j == target) {
        builder.codes(j).push_back(table.positive_code());
      } else if (table.kind(j) == ColumnKind::Numeric) {
        const double x = table.numeric(j)[donor_row];
        const double y = table.numeric(j)[neighbor_row];
        builder.numeric(j).push_back(x + gap * (y - x));
      } else {
        builder.codes(j).push_back(voted[donor][cat++]);
      }
    }
    trace.draws.push_back({donor_row, neighbor_row, gap});
  }
  trace.table = std::move(builder).finish();
  return trace;
}

// Appends n_new SMOTE-NC rows labelled with the positive class.
inline Table smotenc_upsample(const Table& table, std::size_t n_new, const SmoteNcConfig& config) {
  return smotenc_upsample_traced(table, n_new, config).table;
}

}  // namespace rebalance
