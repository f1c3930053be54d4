#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rebalance/error.hpp"
#include "rebalance/random.hpp"
#include "rebalance/table.hpp"

namespace rebalance {

struct FoldSplit {
  Table base;
  Table holdout;
  std::size_t fold_index = 0;
};

// Within each class, rows are shuffled by `seed` and dealt round-robin to the
// k folds; fold h's holdout is the h-th deal, its base the remaining rows.
// Both keep original relative row order.
inline std::vector<FoldSplit> stratified_kfold(const Table& table, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "k must be >= 2");
  std::vector<std::size_t> fold_of(table.n_rows(), 0);
  Rng rng(seed);
  for (bool positive : {false, true}) {
    auto rows = table.rows_of_class(positive);
    if (rows.size() < k) {
      fail(ErrorCode::ClassTooSmall, std::string(positive ? "minority" : "majority") + " class has " +
                                         std::to_string(rows.size()) + " rows, fewer than k=" +
                                         std::to_string(k));
    }
    rng.shuffle(std::span<std::size_t>(rows));
    for (std::size_t i = 0; i < rows.size(); ++i) fold_of[rows[i]] = i % k;
  }
  std::vector<FoldSplit> splits;
  splits.reserve(k);
  for (std::size_t h = 0; h < k; ++h) {
    std::vector<std::size_t> base;
    std::vector<std::size_t> holdout;
    for (std::size_t r = 0; r < table.n_rows(); ++r) (fold_of[r] == h ? holdout : base).push_back(r);
    splits.push_back({table.take(base), table.take(holdout), h});
  }
  return splits;
}

struct ImbalanceSpec {
  double fraction = 0.001;
  std::uint64_t seed = 0;
};

inline constexpr std::array<double, 7> kDefaultFractionGrid = {0.0005, 0.001, 0.002, 0.005,
                                                               0.01,   0.02,  0.05};

// floor(n_majority * f / (1 - f)): the minority count giving share f.
inline std::size_t minority_count_for_fraction(std::size_t n_majority, double fraction) {
  const double exact = static_cast<double>(n_majority) * fraction / (1.0 - fraction);
  // Tolerate representation error on exact integers, e.g. f = 0.5.
  return static_cast<std::size_t>(std::floor(exact + 1e-9));
}

// Keeps every majority row and a seeded subsample (without replacement) of
// the minority rows. The subsample is a prefix of one seed-determined
// permutation, so for a fixed seed smaller fractions select subsets of larger
// ones. Output keeps original relative row order.
inline Table induce_imbalance(const Table& base, const ImbalanceSpec& spec) {
  if (!(spec.fraction > 0.0 && spec.fraction < 1.0)) {
    fail(ErrorCode::InvalidArgument, "fraction must lie in (0, 1)");
  }
  const auto counts = class_counts(base);
  if (!(counts.minority_fraction() > spec.fraction)) {
    fail(ErrorCode::FractionNotBelowCurrent,
         "current minority fraction " + detail::format_double(counts.minority_fraction()) +
             " is not above " + detail::format_double(spec.fraction));
  }
  const auto n_min = minority_count_for_fraction(counts.majority, spec.fraction);
  if (n_min == 0) {
    fail(ErrorCode::MinorityVanishes, "fraction " + detail::format_double(spec.fraction) + " with " +
                                          std::to_string(counts.majority) + " majority rows keeps no minority row");
  }
  auto minority = base.rows_of_class(true);
  Rng rng(spec.seed);
  rng.shuffle(std::span<std::size_t>(minority));
  std::vector<bool> keep(base.n_rows(), false);
  for (std::size_t i = 0; i < n_min; ++i) keep[minority[i]] = true;
  std::vector<std::size_t> rows;
  rows.reserve(counts.majority + n_min);
  for (std::size_t r = 0; r < base.n_rows(); ++r) {
    if (!base.is_positive(r) || keep[r]) rows.push_back(r);
  }
  return base.take(rows);
}

// New minority rows needed for a 50:50 balance (0 if already balanced or
// minority-heavy).
inline std::size_t required_upsample_count(const Table& table) {
  const auto counts = class_counts(table);
  return counts.majority > counts.minority ? counts.majority - counts.minority : 0;
}

}  // namespace rebalance
