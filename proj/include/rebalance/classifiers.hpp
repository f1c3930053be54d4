#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "rebalance/error.hpp"
#include "rebalance/random.hpp"
#include "rebalance/table.hpp"

namespace rebalance {

// ---------------------------------------------------------------------------
// Feature encoding

enum class EncodingMode { Numeric, OneHot, Ordinal };

// How one feature column maps onto matrix columns. Categories are kept by
// label so encoding works across tables with differing dictionaries.
struct ColumnEncoding {
  std::string column;
  EncodingMode mode = EncodingMode::Numeric;
  // OneHot: one matrix column per label. Ordinal: label at index i has
  // rank i + 1 (most frequent first); unseen labels get rank 0.
  std::vector<std::string> labels;
};

struct FeatureEncoder {
  std::vector<ColumnEncoding> columns;
  std::size_t onehot_cap = 32;

  std::size_t width() const {
    std::size_t w = 0;
    for (const auto& c : columns) w += c.mode == EncodingMode::OneHot ? c.labels.size() : 1;
    return w;
  }
};

struct EncodedMatrix {
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::vector<double> values;  // row-major
  std::vector<std::uint8_t> labels;  // 1 = positive label

  double at(std::size_t row, std::size_t feature) const { return values[row * n_features + feature]; }
};

// Categorical columns with at most `onehot_cap` categories present in the
// training rows are one-hot encoded; wider ones become frequency ranks.
inline FeatureEncoder fit_encoder(const Table& train, std::size_t onehot_cap = 32) {
  FeatureEncoder enc;
  enc.onehot_cap = onehot_cap;
  for (auto j : train.schema().feature_indices()) {
    ColumnEncoding ce;
    ce.column = train.name(j);
    if (train.kind(j) == ColumnKind::Categorical) {
      std::vector<std::size_t> counts(train.dictionary(j).size(), 0);
      for (auto c : train.codes(j)) ++counts[static_cast<std::size_t>(c)];
      std::vector<std::int32_t> present;
      for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] > 0) present.push_back(static_cast<std::int32_t>(c));
      }
      if (present.size() <= onehot_cap) {
        ce.mode = EncodingMode::OneHot;
      } else {
        ce.mode = EncodingMode::Ordinal;
        std::stable_sort(present.begin(), present.end(), [&](std::int32_t a, std::int32_t b) {
          return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
        });
      }
      for (auto c : present) ce.labels.push_back(train.dictionary(j).value(c));
    }
    enc.columns.push_back(std::move(ce));
  }
  return enc;
}

inline EncodedMatrix encode(const FeatureEncoder& enc, const Table& table) {
  EncodedMatrix m;
  m.n_rows = table.n_rows();
  m.n_features = enc.width();
  m.values.assign(m.n_rows * m.n_features, 0.0);
  m.labels.resize(m.n_rows);
  for (std::size_t r = 0; r < m.n_rows; ++r) m.labels[r] = table.is_positive(r) ? 1 : 0;
  std::size_t offset = 0;
  for (const auto& ce : enc.columns) {
    const auto j = table.schema().find(ce.column);
    if (!j) fail(ErrorCode::SchemaMismatch, "column '" + ce.column + "' missing");
    if (ce.mode == EncodingMode::Numeric) {
      if (table.kind(*j) != ColumnKind::Numeric) fail(ErrorCode::SchemaMismatch, "'" + ce.column + "' kind differs");
      const auto values = table.numeric(*j);
      for (std::size_t r = 0; r < m.n_rows; ++r) m.values[r * m.n_features + offset] = values[r];
      ++offset;
      continue;
    }
    if (table.kind(*j) != ColumnKind::Categorical) fail(ErrorCode::SchemaMismatch, "'" + ce.column + "' kind differs");
    // Table code -> slot (one-hot) or rank (ordinal); -1 / 0 when unseen.
    const auto& dict = table.dictionary(*j);
    std::vector<int> map(dict.size(), ce.mode == EncodingMode::OneHot ? -1 : 0);
    for (std::size_t i = 0; i < ce.labels.size(); ++i) {
      if (auto code = dict.find(ce.labels[i])) map[static_cast<std::size_t>(*code)] = static_cast<int>(i) + (ce.mode == EncodingMode::Ordinal);
    }
    const auto codes = table.codes(*j);
    for (std::size_t r = 0; r < m.n_rows; ++r) {
      const int v = map[static_cast<std::size_t>(codes[r])];
      if (ce.mode == EncodingMode::OneHot) {
        if (v >= 0) m.values[r * m.n_features + offset + static_cast<std::size_t>(v)] = 1.0;
      } else {
        m.values[r * m.n_features + offset] = v;
      }
    }
    offset += ce.mode == EncodingMode::OneHot ? ce.labels.size() : 1;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Histogram binning shared by both learners.

namespace detail {

// Candidate split thresholds are training values, so splits are invariant
// under strictly increasing transforms of a feature. bin(v) = number of
// thresholds strictly below v; "v <= thresholds[b]" selects bins 0..b.
struct BinnedFeatures {
  std::size_t n_rows = 0;
  std::vector<std::vector<double>> thresholds;
  std::vector<std::vector<std::uint8_t>> bins;  // column-major

  std::size_t n_bins(std::size_t f) const { return thresholds[f].size() + 1; }
};

inline BinnedFeatures bin_features(const EncodedMatrix& m, std::size_t max_bins) {
  BinnedFeatures b;
  b.n_rows = m.n_rows;
  b.thresholds.resize(m.n_features);
  b.bins.resize(m.n_features);
  std::vector<double> col(m.n_rows);
  for (std::size_t f = 0; f < m.n_features; ++f) {
    for (std::size_t r = 0; r < m.n_rows; ++r) col[r] = m.at(r, f);
    std::vector<double> sorted = col;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct = sorted;
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    auto& t = b.thresholds[f];
    if (distinct.size() <= max_bins) {
      if (!distinct.empty()) t.assign(distinct.begin(), distinct.end() - 1);
    } else {
      const std::size_t n = sorted.size();
      for (std::size_t i = 1; i < max_bins; ++i) {
        const double q = sorted[i * n / max_bins];
        if (q < sorted.back() && (t.empty() || q > t.back())) t.push_back(q);
      }
    }
    auto& bins = b.bins[f];
    bins.resize(m.n_rows);
    for (std::size_t r = 0; r < m.n_rows; ++r) {
      bins[r] = static_cast<std::uint8_t>(std::lower_bound(t.begin(), t.end(), col[r]) - t.begin());
    }
  }
  return b;
}

}  // namespace detail

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(const double* row) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }
};

// ---------------------------------------------------------------------------
// Learners

enum class Learner { RandomForest, GradientBoosting };

inline std::string_view to_string(Learner l) { return l == Learner::RandomForest ? "RF" : "GBM"; }

inline Learner parse_learner(std::string_view s) {
  if (s == "RF" || s == "rf") return Learner::RandomForest;
  if (s == "GBM" || s == "gbm") return Learner::GradientBoosting;
  fail(ErrorCode::InvalidArgument, "unknown learner '" + std::string(s) + "'");
}

struct ForestConfig {
  std::size_t n_trees = 200;
  std::size_t max_depth = 12;    // 0 = unlimited
  std::size_t max_features = 0;  // 0 = floor(sqrt(p))
  bool bootstrap = true;
  std::size_t max_bins = 64;
  std::size_t threads = 1;
};

struct GbmConfig {
  std::size_t n_trees = 200;
  double learning_rate = 0.1;
  std::size_t max_depth = 6;
  std::size_t max_bins = 64;
  double l2 = 1.0;
  double min_child_hessian = 1e-3;
  std::size_t min_child_samples = 20;
};

struct ClassifierConfig {
  ForestConfig forest;
  GbmConfig gbm;
  std::size_t onehot_cap = 32;
};

struct ClassifierModel {
  Learner learner = Learner::GradientBoosting;
  Schema schema;
  FeatureEncoder encoder;
  std::vector<Tree> trees;
  double base_score = 0.0;  // GBM only (log-odds)
  double learning_rate = 0.0;  // GBM only
  std::vector<double> loss_history;  // GBM: training log-loss before round 1, then after each round
};

namespace detail {

class ForestBuilder {
 public:
  ForestBuilder(const BinnedFeatures& x, const std::vector<std::uint8_t>& y, const ForestConfig& cfg)
      : x_(x), y_(y), cfg_(cfg) {
    const std::size_t p = x.thresholds.size();
    mtry_ = cfg.max_features ? std::min(cfg.max_features, p)
                             : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(p))));
  }

  Tree build(std::uint64_t seed) const {
    Rng rng(seed);
    const std::size_t n = x_.n_rows;
    std::vector<double> weight(n, cfg_.bootstrap ? 0.0 : 1.0);
    if (cfg_.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) weight[rng.index(n)] += 1.0;
    }
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < n; ++r) {
      if (weight[r] > 0.0) rows.push_back(r);
    }
    Tree tree;
    grow(tree, rows, 0, rows.size(), weight, 0, rng);
    return tree;
  }

 private:
  int grow(Tree& tree, std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
           const std::vector<double>& weight, std::size_t depth, Rng& rng) const {
    double w = 0.0, wp = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      w += weight[rows[i]];
      wp += weight[rows[i]] * y_[rows[i]];
    }
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.back().value = w > 0.0 ? wp / w : 0.0;
    const bool pure = wp == 0.0 || wp == w;
    if (pure || end - begin < 2 || (cfg_.max_depth && depth >= cfg_.max_depth)) return id;

    // Sample mtry features without replacement.
    std::vector<std::size_t> features(x_.thresholds.size());
    std::iota(features.begin(), features.end(), 0);
    for (std::size_t i = 0; i < mtry_; ++i) std::swap(features[i], features[i + rng.index(features.size() - i)]);

    // Maximizing sum over children of (wp^2 + wn^2) / w minimizes weighted Gini.
    const double parent_score = (wp * wp + (w - wp) * (w - wp)) / w;
    double best_score = parent_score + 1e-12 * w;
    int best_feature = -1;
    std::size_t best_bin = 0;
    std::vector<double> hw, hp;
    for (std::size_t fi = 0; fi < mtry_; ++fi) {
      const std::size_t f = features[fi];
      const std::size_t nb = x_.n_bins(f);
      if (nb < 2) continue;
      hw.assign(nb, 0.0);
      hp.assign(nb, 0.0);
      const auto& bins = x_.bins[f];
      for (std::size_t i = begin; i < end; ++i) {
        const auto r = rows[i];
        hw[bins[r]] += weight[r];
        hp[bins[r]] += weight[r] * y_[r];
      }
      double lw = 0.0, lp = 0.0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        lw += hw[b];
        lp += hp[b];
        const double rw = w - lw, rp = wp - lp;
        if (lw <= 0.0 || rw <= 0.0) continue;
        const double score = (lp * lp + (lw - lp) * (lw - lp)) / lw + (rp * rp + (rw - rp) * (rw - rp)) / rw;
        if (score > best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_bin = b;
        }
      }
    }
    if (best_feature < 0) return id;
    const auto& bins = x_.bins[static_cast<std::size_t>(best_feature)];
    auto mid = std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                     rows.begin() + static_cast<std::ptrdiff_t>(end),
                                     [&](std::size_t r) { return bins[r] <= best_bin; });
    const auto split = static_cast<std::size_t>(mid - rows.begin());
    const int left = grow(tree, rows, begin, split, weight, depth + 1, rng);
    const int right = grow(tree, rows, split, end, weight, depth + 1, rng);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = x_.thresholds[static_cast<std::size_t>(best_feature)][best_bin];
    node.left = left;
    node.right = right;
    return id;
  }

  const BinnedFeatures& x_;
  const std::vector<std::uint8_t>& y_;
  ForestConfig cfg_;
  std::size_t mtry_ = 1;
};

class BoostedTreeBuilder {
 public:
  BoostedTreeBuilder(const BinnedFeatures& x, const GbmConfig& cfg) : x_(x), cfg_(cfg) {}

  // Newton-step tree on gradients g and hessians h; leaf values are the raw
  // step -G / (H + l2) (shrinkage applied by the caller).
  Tree build(const std::vector<double>& g, const std::vector<double>& h) const {
    std::vector<std::size_t> rows(x_.n_rows);
    std::iota(rows.begin(), rows.end(), 0);
    Tree tree;
    grow(tree, rows, 0, rows.size(), g, h, 0);
    return tree;
  }

 private:
  int grow(Tree& tree, std::vector<std::size_t>& rows, std::size_t begin, std::size_t end,
           const std::vector<double>& g, const std::vector<double>& h, std::size_t depth) const {
    double G = 0.0, H = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      G += g[rows[i]];
      H += h[rows[i]];
    }
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.back().value = -G / (H + cfg_.l2);
    if (end - begin < 2 * std::max<std::size_t>(cfg_.min_child_samples, 1) || depth >= cfg_.max_depth) return id;

    const double parent = G * G / (H + cfg_.l2);
    double best_gain = 1e-12;
    int best_feature = -1;
    std::size_t best_bin = 0;
    std::vector<double> hg, hh;
    std::vector<std::size_t> hc;
    for (std::size_t f = 0; f < x_.thresholds.size(); ++f) {
      const std::size_t nb = x_.n_bins(f);
      if (nb < 2) continue;
      hg.assign(nb, 0.0);
      hh.assign(nb, 0.0);
      hc.assign(nb, 0);
      const auto& bins = x_.bins[f];
      for (std::size_t i = begin; i < end; ++i) {
        const auto r = rows[i];
        hg[bins[r]] += g[r];
        hh[bins[r]] += h[r];
        ++hc[bins[r]];
      }
      double lg = 0.0, lh = 0.0;
      std::size_t lc = 0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        lg += hg[b];
        lh += hh[b];
        lc += hc[b];
        const double rg = G - lg, rh = H - lh;
        if (lh < cfg_.min_child_hessian || rh < cfg_.min_child_hessian) continue;
        if (lc < cfg_.min_child_samples || (end - begin) - lc < cfg_.min_child_samples) continue;
        const double gain = lg * lg / (lh + cfg_.l2) + rg * rg / (rh + cfg_.l2) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_bin = b;
        }
      }
    }
    if (best_feature < 0) return id;
    const auto& bins = x_.bins[static_cast<std::size_t>(best_feature)];
    auto mid = std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                     rows.begin() + static_cast<std::ptrdiff_t>(end),
                                     [&](std::size_t r) { return bins[r] <= best_bin; });
    const auto split = static_cast<std::size_t>(mid - rows.begin());
    const int left = grow(tree, rows, begin, split, g, h, depth + 1);
    const int right = grow(tree, rows, split, end, g, h, depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = x_.thresholds[static_cast<std::size_t>(best_feature)][best_bin];
    node.left = left;
    node.right = right;
    return id;
  }

  const BinnedFeatures& x_;
  GbmConfig cfg_;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double log_loss(const std::vector<double>& margin, const std::vector<std::uint8_t>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    // log(1 + e^-z) for positives, log(1 + e^z) for negatives, computed stably.
    const double z = y[i] ? margin[i] : -margin[i];
    s += z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
  }
  return y.empty() ? 0.0 : s / static_cast<double>(y.size());
}

}  // namespace detail

// RF trees are seeded with derive_seed(seed, "rf-tree", t) and fitted
// independently, so the forest does not depend on the thread count.
inline ClassifierModel fit(const Table& table, Learner learner, std::uint64_t seed,
                           const ClassifierConfig& config = {}) {
  const auto counts = class_counts(table);
  if (counts.minority == 0 || counts.majority == 0) {
    fail(ErrorCode::SingleClassTable, "classifier training needs both classes");
  }
  ClassifierModel model;
  model.learner = learner;
  model.schema = table.schema();
  model.encoder = fit_encoder(table, config.onehot_cap);
  const auto m = encode(model.encoder, table);

  if (learner == Learner::RandomForest) {
    const auto& cfg = config.forest;
    if (cfg.n_trees == 0) fail(ErrorCode::InvalidArgument, "n_trees must be positive");
    const auto x = detail::bin_features(m, std::min<std::size_t>(cfg.max_bins, 256));
    detail::ForestBuilder builder(x, m.labels, cfg);
    model.trees.resize(cfg.n_trees);
    const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, cfg.n_trees));
    auto work = [&](std::size_t t0) {
      for (std::size_t t = t0; t < cfg.n_trees; t += threads) {
        model.trees[t] = builder.build(derive_seed(seed, {"rf-tree", t}));
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }
    return model;
  }

  const auto& cfg = config.gbm;
  const auto x = detail::bin_features(m, std::min<std::size_t>(cfg.max_bins, 256));
  const double rate = static_cast<double>(counts.minority) / static_cast<double>(counts.total());
  model.base_score = std::log(rate / (1.0 - rate));
  model.learning_rate = cfg.learning_rate;
  std::vector<double> margin(m.n_rows, model.base_score);
  std::vector<double> g(m.n_rows), h(m.n_rows);
  model.loss_history.push_back(detail::log_loss(margin, m.labels));
  detail::BoostedTreeBuilder builder(x, cfg);
  for (std::size_t round = 0; round < cfg.n_trees; ++round) {
    for (std::size_t i = 0; i < m.n_rows; ++i) {
      const double p = detail::sigmoid(margin[i]);
      g[i] = p - m.labels[i];
      h[i] = std::max(p * (1.0 - p), 1e-16);
    }
    auto tree = builder.build(g, h);
    for (std::size_t i = 0; i < m.n_rows; ++i) {
      margin[i] += cfg.learning_rate * tree.predict(&m.values[i * m.n_features]);
    }
    model.trees.push_back(std::move(tree));
    model.loss_history.push_back(detail::log_loss(margin, m.labels));
  }
  return model;
}

// RF: mean leaf positive fraction. GBM: logistic(base + lr * sum of trees).
inline std::vector<double> predict_proba(const ClassifierModel& model, const Table& table) {
  if (!(table.schema() == model.schema)) fail(ErrorCode::SchemaMismatch, "table schema differs from training schema");
  const auto m = encode(model.encoder, table);
  std::vector<double> scores(m.n_rows, 0.0);
  for (std::size_t r = 0; r < m.n_rows; ++r) {
    const double* row = m.n_features ? &m.values[r * m.n_features] : nullptr;
    double s = 0.0;
    for (const auto& t : model.trees) s += t.predict(row);
    if (model.learner == Learner::RandomForest) {
      scores[r] = model.trees.empty() ? 0.0 : s / static_cast<double>(model.trees.size());
    } else {
      scores[r] = detail::sigmoid(model.base_score + model.learning_rate * s);
    }
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Persistence: JSON {format: "rebalance-classifier", version: 1, learner,
// schema, encoder: [{column, mode, labels}], onehot_cap, base_score,
// learning_rate, trees: [{feature[], threshold[], left[], right[], value[]}]}.

inline nlohmann::json to_json(const ClassifierModel& model) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : model.encoder.columns) {
    const char* mode = c.mode == EncodingMode::Numeric ? "numeric" : c.mode == EncodingMode::OneHot ? "onehot" : "ordinal";
    cols.push_back({{"column", c.column}, {"mode", mode}, {"labels", c.labels}});
  }
  nlohmann::json schema_cols = nlohmann::json::array();
  for (const auto& c : model.schema.columns()) schema_cols.push_back({{"name", c.name}, {"kind", std::string(to_string(c.kind))}});
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : model.trees) {
    std::vector<int> feature, left, right;
    std::vector<double> threshold, value;
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      left.push_back(n.left);
      right.push_back(n.right);
      threshold.push_back(n.threshold);
      value.push_back(n.value);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}});
  }
  return {{"format", "rebalance-classifier"},
          {"version", 1},
          {"learner", std::string(to_string(model.learner))},
          {"schema",
           {{"columns", schema_cols}, {"target", model.schema.target()}, {"positive_label", model.schema.positive_label()}}},
          {"encoder", cols},
          {"onehot_cap", model.encoder.onehot_cap},
          {"base_score", model.base_score},
          {"learning_rate", model.learning_rate},
          {"trees", trees}};
}

inline ClassifierModel classifier_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "rebalance-classifier" || j.at("version").get<int>() != 1) {
      fail(ErrorCode::MalformedModel, "not a version-1 classifier document");
    }
    ClassifierModel model;
    model.learner = parse_learner(j.at("learner").get<std::string>());
    std::vector<ColumnSpec> cols;
    for (const auto& c : j.at("schema").at("columns")) {
      cols.push_back({c.at("name").get<std::string>(),
                      c.at("kind").get<std::string>() == "numeric" ? ColumnKind::Numeric : ColumnKind::Categorical});
    }
    model.schema = Schema(std::move(cols), j.at("schema").at("target").get<std::string>(),
                          j.at("schema").at("positive_label").get<std::string>());
    for (const auto& c : j.at("encoder")) {
      ColumnEncoding ce;
      ce.column = c.at("column").get<std::string>();
      const auto mode = c.at("mode").get<std::string>();
      ce.mode = mode == "numeric" ? EncodingMode::Numeric : mode == "onehot" ? EncodingMode::OneHot : EncodingMode::Ordinal;
      ce.labels = c.at("labels").get<std::vector<std::string>>();
      model.encoder.columns.push_back(std::move(ce));
    }
    model.encoder.onehot_cap = j.at("onehot_cap").get<std::size_t>();
    model.base_score = j.at("base_score").get<double>();
    model.learning_rate = j.at("learning_rate").get<double>();
    for (const auto& t : j.at("trees")) {
      const auto feature = t.at("feature").get<std::vector<int>>();
      const auto threshold = t.at("threshold").get<std::vector<double>>();
      const auto left = t.at("left").get<std::vector<int>>();
      const auto right = t.at("right").get<std::vector<int>>();
      const auto value = t.at("value").get<std::vector<double>>();
      Tree tree;
      for (std::size_t i = 0; i < feature.size(); ++i) {
        tree.nodes.push_back({feature.at(i), threshold.at(i), left.at(i), right.at(i), value.at(i)});
      }
      model.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedModel, e.what());
  }
}

inline void save_classifier(const std::string& path, const ClassifierModel& model) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << to_json(model).dump() << '\n';
}

inline ClassifierModel load_classifier(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedModel, e.what());
  }
  return classifier_from_json(j);
}

}  // namespace rebalance
