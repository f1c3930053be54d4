#pragma once

// Brute-force reference computations used to check the metrics.

#include <algorithm>
#include <cstdint>
#include <span>

namespace rebalance::testing {

// P(score_pos > score_neg) + P(tie) / 2 by enumerating every pair.
inline double pair_count_auc(std::span<const double> s, std::span<const std::uint8_t> y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Mean over positives p of precision at threshold s_p, where precision counts
// every row scoring at least s_p. Tied positives share one precision value,
// which is the step-wise area convention.
inline double direct_average_precision(std::span<const double> s, std::span<const std::uint8_t> y) {
  double total = 0.0, positives = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    positives += 1.0;
    double above = 0.0, above_pos = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j] >= s[i]) {
        above += 1.0;
        above_pos += y[j];
      }
    }
    total += above_pos / above;
  }
  return total / positives;
}

}  // namespace rebalance::testing
