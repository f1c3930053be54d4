#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rebalance/error.hpp"
#include "rebalance/table.hpp"

namespace rebalance {

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double threshold = 0.0;
};

using Curve = std::vector<CurvePoint>;

namespace detail {

// Per distinct score, descending: cumulative (true positives, false positives)
// over all rows scoring >= that value.
struct ThresholdCounts {
  std::vector<double> threshold;
  std::vector<double> tp;
  std::vector<double> fp;
  double positives = 0.0;
  double negatives = 0.0;
};

inline ThresholdCounts threshold_counts(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) fail(ErrorCode::InvalidArgument, "scores and labels differ in length");
  for (double s : scores) {
    if (!std::isfinite(s)) fail(ErrorCode::InvalidArgument, "non-finite score");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  ThresholdCounts out;
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (labels[order[i]]) {
      tp += 1.0;
    } else {
      fp += 1.0;
    }
    if (i + 1 == order.size() || scores[order[i + 1]] != scores[order[i]]) {
      out.threshold.push_back(scores[order[i]]);
      out.tp.push_back(tp);
      out.fp.push_back(fp);
    }
  }
  out.positives = tp;
  out.negatives = fp;
  return out;
}

}  // namespace detail

// (FPR, TPR) at each distinct score, descending, preceded by (0, 0) at
// threshold +inf.
inline Curve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const auto c = detail::threshold_counts(scores, labels);
  if (c.positives == 0.0 || c.negatives == 0.0) fail(ErrorCode::SingleClassLabels, "ROC needs both classes");
  Curve curve;
  curve.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  for (std::size_t i = 0; i < c.threshold.size(); ++i) {
    curve.push_back({c.fp[i] / c.negatives, c.tp[i] / c.positives, c.threshold[i]});
  }
  return curve;
}

// Trapezoidal area under the ROC curve; equals P(pos > neg) + P(tie) / 2.
inline double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const auto curve = roc_curve(scores, labels);
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].x - curve[i - 1].x) * (curve[i].y + curve[i - 1].y) * 0.5;
  }
  return area;
}

// (recall, precision) at each distinct score, descending.
inline Curve pr_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const auto c = detail::threshold_counts(scores, labels);
  if (c.positives == 0.0) fail(ErrorCode::NoPositives, "PR curve needs at least one positive");
  Curve curve;
  for (std::size_t i = 0; i < c.threshold.size(); ++i) {
    curve.push_back({c.tp[i] / c.positives, c.tp[i] / (c.tp[i] + c.fp[i]), c.threshold[i]});
  }
  return curve;
}

// Average precision: sum of (recall_i - recall_{i-1}) * precision_i, step-wise.
inline double auc_pr(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const auto curve = pr_curve(scores, labels);
  double area = 0.0;
  double prev_recall = 0.0;
  for (const auto& p : curve) {
    area += (p.x - prev_recall) * p.y;
    prev_recall = p.x;
  }
  return area;
}

inline void write_curve_csv(std::ostream& out, const Curve& curve) {
  out << "threshold,x,y\n";
  for (const auto& p : curve) {
    out << detail::format_double(p.threshold) << ',' << detail::format_double(p.x) << ','
        << detail::format_double(p.y) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Diversity

// Shannon entropy in bits of a vector of category counts; zero counts
// contribute nothing.
inline double entropy_from_counts(std::span<const std::size_t> counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total == 0.0) fail(ErrorCode::EmptyColumn, "entropy of an empty column");
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h == 0.0 ? 0.0 : h;  // normalizes -0.0
}

inline double shannon_entropy(std::span<const std::int32_t> codes) {
  if (codes.empty()) fail(ErrorCode::EmptyColumn, "entropy of an empty column");
  const auto max_code = *std::max_element(codes.begin(), codes.end());
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(max_code, 0)) + 1, 0);
  for (auto c : codes) {
    if (c < 0) fail(ErrorCode::InvalidArgument, "negative category code");
    ++counts[static_cast<std::size_t>(c)];
  }
  return entropy_from_counts(counts);
}

// Decile bins of a numeric column: cuts at the sorted values of rank
// floor(i * n / 10), i = 1..9, duplicates and cuts at the minimum dropped.
// bin(v) = number of cuts <= v.
struct DecileBinning {
  std::vector<double> cuts;
  std::vector<std::int32_t> codes;
};

inline DecileBinning decile_bins(std::span<const double> values) {
  DecileBinning out;
  if (values.empty()) return out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  for (std::size_t i = 1; i < 10; ++i) {
    const double q = sorted[i * n / 10];
    if (q > sorted.front() && (out.cuts.empty() || q > out.cuts.back())) out.cuts.push_back(q);
  }
  out.codes.reserve(n);
  for (double v : values) {
    out.codes.push_back(static_cast<std::int32_t>(std::upper_bound(out.cuts.begin(), out.cuts.end(), v) - out.cuts.begin()));
  }
  return out;
}

struct CategoryFrequency {
  std::string category;
  double frequency = 0.0;
  std::size_t count = 0;
};

struct FeatureEntropy {
  std::string feature;
  double entropy = 0.0;
  std::size_t n_categories = 0;  // categories present in the subgroup
  std::vector<CategoryFrequency> frequencies;  // descending frequency
};

struct EntropyReport {
  std::size_t n_rows = 0;
  std::vector<FeatureEntropy> features;
  double average = 0.0;  // mean SE over the reported features
};

namespace detail {

inline std::string bin_label(const DecileBinning& b, std::size_t bin) {
  const std::string lo = bin == 0 ? "-inf" : format_double(b.cuts[bin - 1]);
  const std::string hi = bin == b.cuts.size() ? "inf" : format_double(b.cuts[bin]);
  return "[" + lo + "," + hi + ")";
}

inline FeatureEntropy feature_entropy(const Table& t, std::size_t j) {
  FeatureEntropy fe;
  fe.feature = t.name(j);
  std::vector<std::size_t> counts;
  std::vector<std::string> labels;
  if (t.kind(j) == ColumnKind::Categorical) {
    counts.assign(t.dictionary(j).size(), 0);
    for (auto c : t.codes(j)) ++counts[static_cast<std::size_t>(c)];
    labels = t.dictionary(j).values();
  } else {
    const auto bins = decile_bins(t.numeric(j));
    counts.assign(bins.cuts.size() + 1, 0);
    for (auto c : bins.codes) ++counts[static_cast<std::size_t>(c)];
    for (std::size_t b = 0; b < counts.size(); ++b) labels.push_back(bin_label(bins, b));
  }
  fe.entropy = entropy_from_counts(counts);
  const double total = static_cast<double>(t.n_rows());
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  for (auto c : order) {
    if (counts[c] == 0) continue;
    fe.frequencies.push_back({labels[c], static_cast<double>(counts[c]) / total, counts[c]});
  }
  fe.n_categories = fe.frequencies.size();
  return fe;
}

}  // namespace detail

// Per-feature SE on the rows matching `subgroup`. With no explicit feature
// list, every non-target column is reported. Numeric features are binned into
// deciles computed on the subgroup rows.
inline EntropyReport entropy_report(const Table& table, std::span<const Predicate> subgroup,
                                    std::optional<std::vector<std::string>> features = std::nullopt) {
  const auto sub = filter_rows(table, subgroup);
  if (sub.n_rows() == 0) fail(ErrorCode::EmptySubgroup, "subgroup selects no rows");
  std::vector<std::size_t> columns;
  if (features) {
    for (const auto& f : *features) columns.push_back(table.schema().index_of(f));
  } else {
    columns = table.schema().feature_indices();
  }
  EntropyReport report;
  report.n_rows = sub.n_rows();
  double sum = 0.0;
  for (auto j : columns) {
    report.features.push_back(detail::feature_entropy(sub, j));
    sum += report.features.back().entropy;
  }
  report.average = columns.empty() ? 0.0 : sum / static_cast<double>(columns.size());
  return report;
}

// Relative category frequencies of `feature` within the subgroup, most
// frequent first (ties in dictionary / bin order).
inline std::vector<CategoryFrequency> frequency_report(const Table& table, std::span<const Predicate> subgroup,
                                                       const std::string& feature) {
  const auto sub = filter_rows(table, subgroup);
  if (sub.n_rows() == 0) fail(ErrorCode::EmptySubgroup, "subgroup selects no rows");
  return detail::feature_entropy(sub, table.schema().index_of(feature)).frequencies;
}

}  // namespace rebalance
