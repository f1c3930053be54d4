#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "rebalance/error.hpp"
#include "rebalance/random.hpp"
#include "rebalance/resampling.hpp"
#include "rebalance/table.hpp"

namespace rebalance {

// ---------------------------------------------------------------------------
// Discretizer

// Quantile bins of one numeric column. A value v falls in bin
// count(cuts <= v); cuts are strictly increasing data values. lo/hi hold the
// smallest and largest training value seen in each bin.
struct NumericBins {
  std::vector<double> cuts;
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t size() const { return lo.size(); }

  std::int32_t encode(double v) const {
    return static_cast<std::int32_t>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
  }
};

class Discretizer {
 public:
  Discretizer() = default;
  Discretizer(std::vector<ColumnKind> kinds, std::vector<NumericBins> bins, std::vector<std::size_t> cardinality)
      : kinds_(std::move(kinds)), bins_(std::move(bins)), cardinality_(std::move(cardinality)) {}

  std::size_t n_columns() const { return kinds_.size(); }
  ColumnKind kind(std::size_t j) const { return kinds_.at(j); }
  std::size_t cardinality(std::size_t j) const { return cardinality_.at(j); }
  const NumericBins& bins(std::size_t j) const { return bins_.at(j); }
  const std::vector<double>& edges(std::size_t j) const { return bins_.at(j).cuts; }

  std::int32_t encode(const Table& table, std::size_t row, std::size_t j) const {
    if (kinds_[j] == ColumnKind::Categorical) return table.codes(j)[row];
    return bins_[j].encode(table.numeric(j)[row]);
  }

  // Uniform draw inside the training range of the bin; exact for
  // single-valued bins.
  double decode(std::size_t j, std::int32_t bin, Rng& rng) const {
    const auto& b = bins_.at(j);
    const auto i = static_cast<std::size_t>(bin);
    if (b.lo[i] == b.hi[i]) return b.lo[i];
    return b.lo[i] + (b.hi[i] - b.lo[i]) * rng.uniform01();
  }

 private:
  std::vector<ColumnKind> kinds_;
  std::vector<NumericBins> bins_;  // empty entries for categorical columns
  std::vector<std::size_t> cardinality_;
};

inline NumericBins fit_numeric_bins(std::span<const double> values, std::size_t max_bins) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  NumericBins bins;
  if (distinct.size() <= max_bins) {
    bins.cuts.assign(distinct.begin() + 1, distinct.end());
  } else {
    const std::size_t n = sorted.size();
    for (std::size_t i = 1; i < max_bins; ++i) {
      const double q = sorted[i * n / max_bins];
      if (q > sorted.front() && (bins.cuts.empty() || q > bins.cuts.back())) bins.cuts.push_back(q);
    }
  }
  const std::size_t n_bins = bins.cuts.size() + 1;
  bins.lo.assign(n_bins, std::numeric_limits<double>::infinity());
  bins.hi.assign(n_bins, -std::numeric_limits<double>::infinity());
  for (double v : sorted) {
    const auto b = static_cast<std::size_t>(bins.encode(v));
    bins.lo[b] = std::min(bins.lo[b], v);
    bins.hi[b] = std::max(bins.hi[b], v);
  }
  return bins;
}

// Quantile edges at i/max_bins for numeric columns (one bin per distinct
// value when there are at most max_bins of them); identity on categorical
// codes.
inline Discretizer fit_discretizer(const Table& table, std::size_t max_bins = 32) {
  if (table.n_rows() == 0) fail(ErrorCode::EmptyTable, "cannot fit a discretizer on an empty table");
  if (max_bins < 1) fail(ErrorCode::InvalidArgument, "max_bins must be >= 1");
  std::vector<ColumnKind> kinds;
  std::vector<NumericBins> bins(table.n_columns());
  std::vector<std::size_t> card;
  for (std::size_t j = 0; j < table.n_columns(); ++j) {
    kinds.push_back(table.kind(j));
    if (table.kind(j) == ColumnKind::Numeric) {
      bins[j] = fit_numeric_bins(table.numeric(j), max_bins);
      card.push_back(bins[j].size());
    } else {
      card.push_back(table.dictionary(j).size());
    }
  }
  return Discretizer(std::move(kinds), std::move(bins), std::move(card));
}

// ---------------------------------------------------------------------------
// Autoregressive model

struct ArgnConfig {
  std::size_t embedding_dim = 16;
  std::size_t hidden = 64;
  std::size_t epochs = 200;
  std::size_t batch_size = 256;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double lr_decay = 0.5;
  std::size_t max_bins = 32;
  std::uint64_t seed = 0;
};

struct GenerationRequest {
  std::size_t n_samples = 0;
  // Target label to clamp; nullopt samples the target from the model too.
  std::optional<std::string> condition;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

// Product of per-column conditionals over discretized codes, target column
// first. Position 0 is a free softmax; position p > 0 is a one-hidden-layer
// ReLU network over the concatenated embeddings of positions 0..p-1.
// All weights live in one flat vector.
class ArgnModel {
 public:
  ArgnModel() = default;

  ArgnModel(const Table& prototype, Discretizer discretizer, ArgnConfig config)
      : prototype_(prototype.empty_like()), discretizer_(std::move(discretizer)), config_(config) {
    order_.push_back(prototype.target_index());
    for (auto j : prototype.schema().feature_indices()) order_.push_back(j);
    for (auto j : order_) card_.push_back(discretizer_.cardinality(j));
    layout();
  }

  const Table& prototype() const { return prototype_; }
  const Discretizer& discretizer() const { return discretizer_; }
  const ArgnConfig& config() const { return config_; }
  const std::vector<std::size_t>& column_order() const { return order_; }
  std::size_t n_positions() const { return order_.size(); }
  std::size_t cardinality(std::size_t position) const { return card_.at(position); }
  const std::vector<double>& loss_history() const { return loss_history_; }
  void set_loss_history(std::vector<double> h) { loss_history_ = std::move(h); }

  std::size_t n_parameters() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  void initialize(Rng& rng) {
    const std::size_t d = config_.embedding_dim;
    const std::size_t h = config_.hidden;
    std::fill(params_.begin(), params_.end(), 0.0);
    auto fill_uniform = [&](std::size_t offset, std::size_t count, double scale) {
      for (std::size_t i = 0; i < count; ++i) params_[offset + i] = rng.uniform(-scale, scale);
    };
    for (std::size_t p = 0; p + 1 < n_positions(); ++p) fill_uniform(emb_[p], card_[p] * d, 1.0);
    for (std::size_t p = 1; p < n_positions(); ++p) {
      const std::size_t in = p * d;
      fill_uniform(w1_[p], h * in, std::sqrt(6.0 / static_cast<double>(in + h)));
      fill_uniform(w2_[p], card_[p] * h, std::sqrt(6.0 / static_cast<double>(h + card_[p])));
    }
  }

  // Encodes a table into row-major codes in model column order.
  std::vector<std::int32_t> encode(const Table& table) const {
    std::vector<std::int32_t> codes(table.n_rows() * n_positions());
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
      for (std::size_t p = 0; p < n_positions(); ++p) {
        codes[r * n_positions() + p] = discretizer_.encode(table, r, order_[p]);
      }
    }
    return codes;
  }

  // Mean over rows of the summed per-column cross-entropy; writes the
  // matching gradient into `grad` (resized to n_parameters()).
  double loss_and_gradient(std::span<const std::int32_t> codes, std::span<const std::size_t> rows,
                           std::vector<double>& grad) const {
    grad.assign(params_.size(), 0.0);
    Workspace ws(*this);
    double total = 0.0;
    for (auto r : rows) total += accumulate_row(codes.subspan(r * n_positions(), n_positions()), grad, ws);
    const double scale = rows.empty() ? 0.0 : 1.0 / static_cast<double>(rows.size());
    for (auto& g : grad) g *= scale;
    return total * scale;
  }

  double mean_loss(std::span<const std::int32_t> codes) const {
    const std::size_t n = codes.size() / n_positions();
    Workspace ws(*this);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      auto row = codes.subspan(r * n_positions(), n_positions());
      embed(row, ws);
      for (std::size_t p = 0; p < n_positions(); ++p) {
        forward_head(p, ws);
        total += log_sum_exp(ws.logits, card_[p]) - ws.logits[static_cast<std::size_t>(row[p])];
      }
    }
    return n ? total / static_cast<double>(n) : 0.0;
  }

  // Conditional distribution of position p given the codes at 0..p-1.
  std::vector<double> distribution(std::span<const std::int32_t> prefix, std::size_t position,
                                   double temperature = 1.0) const {
    if (position >= n_positions() || prefix.size() < position) {
      fail(ErrorCode::InvalidArgument, "prefix shorter than position or position out of range");
    }
    if (!(temperature > 0.0)) fail(ErrorCode::InvalidArgument, "temperature must be positive");
    Workspace ws(*this);
    embed_prefix(prefix, position, ws);
    forward_head(position, ws);
    std::vector<double> probs(card_[position]);
    softmax(ws.logits, temperature, probs);
    return probs;
  }

  // Samples one row of codes (model order). If `fixed_first` is set, the
  // target position is clamped to it.
  void sample_codes(std::optional<std::int32_t> fixed_first, double temperature, Rng& rng,
                    std::span<std::int32_t> out) const {
    Workspace ws(*this);
    std::vector<double> probs;
    for (std::size_t p = 0; p < n_positions(); ++p) {
      if (p == 0 && fixed_first) {
        out[0] = *fixed_first;
      } else {
        forward_head(p, ws);
        probs.resize(card_[p]);
        softmax(ws.logits, temperature, probs);
        out[p] = sample_index(probs, rng);
      }
      if (p + 1 < n_positions()) {
        const double* e = &params_[emb_[p] + static_cast<std::size_t>(out[p]) * config_.embedding_dim];
        std::copy(e, e + config_.embedding_dim, ws.x.begin() + static_cast<std::ptrdiff_t>(p * config_.embedding_dim));
      }
    }
  }

 private:
  struct Workspace {
    explicit Workspace(const ArgnModel& m)
        : x(m.n_positions() * m.config_.embedding_dim, 0.0),
          dx(x.size(), 0.0),
          pre(m.config_.hidden, 0.0),
          hid(m.config_.hidden, 0.0),
          dhid(m.config_.hidden, 0.0),
          logits(*std::max_element(m.card_.begin(), m.card_.end()), 0.0) {}
    std::vector<double> x, dx, pre, hid, dhid, logits;
  };

  void layout() {
    const std::size_t d = config_.embedding_dim;
    const std::size_t h = config_.hidden;
    const std::size_t n = n_positions();
    emb_.assign(n, 0);
    w1_.assign(n, 0);
    b1_.assign(n, 0);
    w2_.assign(n, 0);
    b2_.assign(n, 0);
    std::size_t offset = 0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      emb_[p] = offset;
      offset += card_[p] * d;
    }
    for (std::size_t p = 0; p < n; ++p) {
      if (p > 0) {
        w1_[p] = offset;
        offset += h * p * d;
        b1_[p] = offset;
        offset += h;
        w2_[p] = offset;
        offset += card_[p] * h;
      }
      b2_[p] = offset;
      offset += card_[p];
    }
    params_.assign(offset, 0.0);
  }

  void embed_prefix(std::span<const std::int32_t> codes, std::size_t count, Workspace& ws) const {
    const std::size_t d = config_.embedding_dim;
    for (std::size_t p = 0; p < count && p + 1 < n_positions(); ++p) {
      const double* e = &params_[emb_[p] + static_cast<std::size_t>(codes[p]) * d];
      std::copy(e, e + d, ws.x.begin() + static_cast<std::ptrdiff_t>(p * d));
    }
  }

  void embed(std::span<const std::int32_t> codes, Workspace& ws) const {
    embed_prefix(codes, n_positions(), ws);
  }

  // Fills ws.pre/hid/logits for position p from ws.x.
  void forward_head(std::size_t p, Workspace& ws) const {
    const std::size_t card = card_[p];
    const double* b2 = &params_[b2_[p]];
    if (p == 0) {
      std::copy(b2, b2 + card, ws.logits.begin());
      return;
    }
    const std::size_t h = config_.hidden;
    const std::size_t in = p * config_.embedding_dim;
    const double* w1 = &params_[w1_[p]];
    const double* b1 = &params_[b1_[p]];
    const double* x = ws.x.data();
    for (std::size_t k = 0; k < h; ++k) {
      const double* row = w1 + k * in;
      double s = b1[k];
      for (std::size_t i = 0; i < in; ++i) s += row[i] * x[i];
      ws.pre[k] = s;
      ws.hid[k] = s > 0.0 ? s : 0.0;
    }
    const double* w2 = &params_[w2_[p]];
    for (std::size_t c = 0; c < card; ++c) {
      const double* row = w2 + c * h;
      double s = b2[c];
      for (std::size_t k = 0; k < h; ++k) s += row[k] * ws.hid[k];
      ws.logits[c] = s;
    }
  }

  double accumulate_row(std::span<const std::int32_t> codes, std::vector<double>& grad, Workspace& ws) const {
    const std::size_t d = config_.embedding_dim;
    const std::size_t h = config_.hidden;
    embed(codes, ws);
    std::fill(ws.dx.begin(), ws.dx.end(), 0.0);
    double loss = 0.0;
    for (std::size_t p = 0; p < n_positions(); ++p) {
      forward_head(p, ws);
      const std::size_t card = card_[p];
      const auto target = static_cast<std::size_t>(codes[p]);
      const double lse = log_sum_exp(ws.logits, card);
      loss += lse - ws.logits[target];
      // dlogits = softmax - onehot, kept in ws.logits.
      for (std::size_t c = 0; c < card; ++c) ws.logits[c] = std::exp(ws.logits[c] - lse);
      ws.logits[target] -= 1.0;
      double* gb2 = &grad[b2_[p]];
      for (std::size_t c = 0; c < card; ++c) gb2[c] += ws.logits[c];
      if (p == 0) continue;

      const std::size_t in = p * d;
      const double* w2 = &params_[w2_[p]];
      double* gw2 = &grad[w2_[p]];
      std::fill(ws.dhid.begin(), ws.dhid.end(), 0.0);
      for (std::size_t c = 0; c < card; ++c) {
        const double g = ws.logits[c];
        double* grow = gw2 + c * h;
        const double* wrow = w2 + c * h;
        for (std::size_t k = 0; k < h; ++k) {
          grow[k] += g * ws.hid[k];
          ws.dhid[k] += g * wrow[k];
        }
      }
      const double* w1 = &params_[w1_[p]];
      double* gw1 = &grad[w1_[p]];
      double* gb1 = &grad[b1_[p]];
      const double* x = ws.x.data();
      double* dx = ws.dx.data();
      for (std::size_t k = 0; k < h; ++k) {
        if (ws.pre[k] <= 0.0) continue;
        const double g = ws.dhid[k];
        gb1[k] += g;
        double* grow = gw1 + k * in;
        const double* wrow = w1 + k * in;
        for (std::size_t i = 0; i < in; ++i) {
          grow[i] += g * x[i];
          dx[i] += g * wrow[i];
        }
      }
    }
    for (std::size_t p = 0; p + 1 < n_positions(); ++p) {
      double* ge = &grad[emb_[p] + static_cast<std::size_t>(codes[p]) * d];
      for (std::size_t i = 0; i < d; ++i) ge[i] += ws.dx[p * d + i];
    }
    return loss;
  }

  static double log_sum_exp(const std::vector<double>& logits, std::size_t n) {
    const double m = *std::max_element(logits.begin(), logits.begin() + static_cast<std::ptrdiff_t>(n));
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += std::exp(logits[c] - m);
    return m + std::log(s);
  }

  static void softmax(const std::vector<double>& logits, double temperature, std::vector<double>& out) {
    const std::size_t n = out.size();
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) m = std::max(m, logits[c] / temperature);
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      out[c] = std::exp(logits[c] / temperature - m);
      s += out[c];
    }
    for (auto& v : out) v /= s;
  }

  static std::int32_t sample_index(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
      acc += probs[c];
      if (u < acc) return static_cast<std::int32_t>(c);
    }
    // Rounding left u above the final partial sum: take the last category
    // with non-zero mass.
    for (std::size_t c = probs.size(); c-- > 0;) {
      if (probs[c] > 0.0) return static_cast<std::int32_t>(c);
    }
    return 0;
  }

  Table prototype_;
  Discretizer discretizer_;
  ArgnConfig config_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> card_;
  std::vector<std::size_t> emb_, w1_, b1_, w2_, b2_;
  std::vector<double> params_;
  std::vector<double> loss_history_;
};

// Mini-batch SGD with momentum on the summed per-column cross-entropy. The
// learning rate is halved whenever an epoch fails to improve the best epoch
// loss by a relative 1e-4.
inline ArgnModel train_argn(const Table& table, const Discretizer& discretizer, const ArgnConfig& config) {
  if (table.n_rows() < 2) fail(ErrorCode::EmptyTable, "training needs at least 2 rows");
  const auto counts = class_counts(table);
  if (counts.minority == 0 || counts.majority == 0) {
    fail(ErrorCode::SingleClassTable, "training table contains a single target class");
  }
  if (config.batch_size == 0 || config.embedding_dim == 0 || config.hidden == 0) {
    fail(ErrorCode::InvalidArgument, "batch_size, embedding_dim and hidden must be positive");
  }
  ArgnModel model(table, discretizer, config);
  Rng rng(derive_seed(config.seed, {"argn-train"}));
  model.initialize(rng);

  const auto codes = model.encode(table);
  std::vector<std::size_t> order(table.n_rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> grad;
  std::vector<double> velocity(model.n_parameters(), 0.0);
  auto params = model.parameters();
  double lr = config.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::span<const std::size_t> batch(order.data() + start, end - start);
      epoch_loss += model.loss_and_gradient(codes, batch, grad) * static_cast<double>(batch.size());
      for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = config.momentum * velocity[i] + grad[i];
        params[i] -= lr * velocity[i];
      }
    }
    epoch_loss /= static_cast<double>(order.size());
    history.push_back(epoch_loss);
    if (epoch_loss > best - 1e-4 * std::abs(best)) lr *= config.lr_decay;
    best = std::min(best, epoch_loss);
  }
  model.set_loss_history(std::move(history));
  return model;
}

inline ArgnModel train_argn(const Table& table, const ArgnConfig& config) {
  return train_argn(table, fit_discretizer(table, config.max_bins), config);
}

// Samples rows left to right. Rows are produced in shards of kShardRows, each
// from its own stream derive_seed(seed, shard), so output does not depend on
// the thread count.
inline Table generate(const ArgnModel& model, const GenerationRequest& request) {
  constexpr std::size_t kShardRows = 1024;
  if (!(request.temperature > 0.0)) fail(ErrorCode::InvalidArgument, "temperature must be positive");
  const Table& proto = model.prototype();
  std::optional<std::int32_t> fixed;
  if (request.condition) {
    auto code = proto.dictionary(proto.target_index()).find(*request.condition);
    if (!code) fail(ErrorCode::UnknownConditionValue, "'" + *request.condition + "' is not a target label");
    fixed = *code;
  }
  const std::size_t width = model.n_positions();
  std::vector<std::int32_t> codes(request.n_samples * width);
  std::vector<double> numerics(request.n_samples * width, 0.0);
  const std::size_t n_shards = (request.n_samples + kShardRows - 1) / kShardRows;
  const auto& order = model.column_order();
  auto run_shard = [&](std::size_t shard) {
    Rng rng(derive_seed(request.seed, {"argn-generate", shard}));
    const std::size_t begin = shard * kShardRows;
    const std::size_t end = std::min(request.n_samples, begin + kShardRows);
    for (std::size_t r = begin; r < end; ++r) {
      std::span<std::int32_t> row(codes.data() + r * width, width);
      model.sample_codes(fixed, request.temperature, rng, row);
      for (std::size_t p = 0; p < width; ++p) {
        if (proto.kind(order[p]) == ColumnKind::Numeric) {
          numerics[r * width + p] = model.discretizer().decode(order[p], row[p], rng);
        }
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(request.threads, n_shards));
  if (threads == 1) {
    for (std::size_t s = 0; s < n_shards; ++s) run_shard(s);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t s = t; s < n_shards; s += threads) run_shard(s);
      });
    }
    for (auto& th : pool) th.join();
  }

  TableBuilder builder(proto);
  builder.reserve(request.n_samples);
  for (std::size_t p = 0; p < width; ++p) {
    const auto j = order[p];
    for (std::size_t r = 0; r < request.n_samples; ++r) {
      if (proto.kind(j) == ColumnKind::Numeric) {
        builder.numeric(j).push_back(numerics[r * width + p]);
      } else {
        builder.codes(j).push_back(codes[r * width + p]);
      }
    }
  }
  return std::move(builder).finish();
}

// Trains on the full table and appends required_upsample_count(table)
// minority rows sampled with the target clamped to the positive label.
inline Table hybrid_upsample(const Table& table, const ArgnConfig& config, std::size_t threads = 1) {
  const std::size_t n_new = required_upsample_count(table);
  if (n_new == 0) return table;
  const auto model = train_argn(table, config);
  GenerationRequest request;
  request.n_samples = n_new;
  request.condition = table.schema().positive_label();
  request.seed = derive_seed(config.seed, {"argn-hybrid-generate"});
  request.threads = threads;
  return concat_tables(table, generate(model, request));
}

// ---------------------------------------------------------------------------
// Persistence
//
// JSON document:
//   format: "rebalance-argn", version: 1
//   schema: {columns: [{name, kind}], target, positive_label}
//   dictionaries: {<column name>: [labels in code order]}
//   bins: {<column name>: {cuts, lo, hi}}
//   config: {embedding_dim, hidden, epochs, batch_size, learning_rate,
//            momentum, lr_decay, max_bins, seed}
//   parameters: flat weight array; layout is a function of schema, bins
//               and config (embeddings, then per-position head weights)
//   loss_history: per-epoch training loss
// Readers accept any document with the same major version.

inline constexpr int kArgnFormatVersion = 1;

inline nlohmann::json schema_to_json(const Schema& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema.columns()) cols.push_back({{"name", c.name}, {"kind", std::string(to_string(c.kind))}});
  return {{"columns", cols}, {"target", schema.target()}, {"positive_label", schema.positive_label()}};
}

inline Schema schema_from_json(const nlohmann::json& j) {
  std::vector<ColumnSpec> cols;
  for (const auto& c : j.at("columns")) {
    const auto kind = c.at("kind").get<std::string>();
    if (kind != "numeric" && kind != "categorical") fail(ErrorCode::MalformedModel, "bad column kind '" + kind + "'");
    cols.push_back({c.at("name").get<std::string>(), kind == "numeric" ? ColumnKind::Numeric : ColumnKind::Categorical});
  }
  return Schema(std::move(cols), j.at("target").get<std::string>(), j.at("positive_label").get<std::string>());
}

// Empty table carrying `schema` and the given per-column dictionaries.
inline Table prototype_from_json(const Schema& schema, const nlohmann::json& dicts) {
  std::vector<Column> cols(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema.column(j).kind != ColumnKind::Categorical) continue;
    cols[j].dictionary =
        std::make_shared<Dictionary>(dicts.at(schema.column(j).name).get<std::vector<std::string>>());
  }
  return Table(schema, std::move(cols));
}

inline nlohmann::json dictionaries_to_json(const Table& table) {
  nlohmann::json dicts = nlohmann::json::object();
  for (std::size_t j = 0; j < table.n_columns(); ++j) {
    if (table.kind(j) == ColumnKind::Categorical) dicts[table.name(j)] = table.dictionary(j).values();
  }
  return dicts;
}

inline nlohmann::json to_json(const ArgnModel& model) {
  const auto& proto = model.prototype();
  nlohmann::json bins = nlohmann::json::object();
  for (std::size_t j = 0; j < proto.n_columns(); ++j) {
    if (proto.kind(j) != ColumnKind::Numeric) continue;
    const auto& b = model.discretizer().bins(j);
    bins[proto.name(j)] = {{"cuts", b.cuts}, {"lo", b.lo}, {"hi", b.hi}};
  }
  const auto& c = model.config();
  return {
      {"format", "rebalance-argn"},
      {"version", kArgnFormatVersion},
      {"schema", schema_to_json(proto.schema())},
      {"dictionaries", dictionaries_to_json(proto)},
      {"bins", bins},
      {"config",
       {{"embedding_dim", c.embedding_dim},
        {"hidden", c.hidden},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"learning_rate", c.learning_rate},
        {"momentum", c.momentum},
        {"lr_decay", c.lr_decay},
        {"max_bins", c.max_bins},
        {"seed", c.seed}}},
      {"parameters", std::vector<double>(model.parameters().begin(), model.parameters().end())},
      {"loss_history", model.loss_history()},
  };
}

inline ArgnModel argn_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "rebalance-argn") fail(ErrorCode::MalformedModel, "not an ARGN model document");
    if (j.at("version").get<int>() != kArgnFormatVersion) {
      fail(ErrorCode::MalformedModel, "unsupported model version " + j.at("version").dump());
    }
    const auto schema = schema_from_json(j.at("schema"));
    const auto proto = prototype_from_json(schema, j.at("dictionaries"));
    std::vector<ColumnKind> kinds;
    std::vector<NumericBins> bins(schema.size());
    std::vector<std::size_t> card;
    for (std::size_t c = 0; c < schema.size(); ++c) {
      kinds.push_back(schema.column(c).kind);
      if (schema.column(c).kind == ColumnKind::Numeric) {
        const auto& b = j.at("bins").at(schema.column(c).name);
        bins[c].cuts = b.at("cuts").get<std::vector<double>>();
        bins[c].lo = b.at("lo").get<std::vector<double>>();
        bins[c].hi = b.at("hi").get<std::vector<double>>();
        if (bins[c].lo.size() != bins[c].cuts.size() + 1 || bins[c].hi.size() != bins[c].lo.size()) {
          fail(ErrorCode::MalformedModel, "inconsistent bins for '" + schema.column(c).name + "'");
        }
        card.push_back(bins[c].size());
      } else {
        card.push_back(proto.dictionary(c).size());
      }
    }
    const auto& jc = j.at("config");
    ArgnConfig config;
    config.embedding_dim = jc.at("embedding_dim").get<std::size_t>();
    config.hidden = jc.at("hidden").get<std::size_t>();
    config.epochs = jc.at("epochs").get<std::size_t>();
    config.batch_size = jc.at("batch_size").get<std::size_t>();
    config.learning_rate = jc.at("learning_rate").get<double>();
    config.momentum = jc.at("momentum").get<double>();
    config.lr_decay = jc.at("lr_decay").get<double>();
    config.max_bins = jc.at("max_bins").get<std::size_t>();
    config.seed = jc.at("seed").get<std::uint64_t>();
    ArgnModel model(proto, Discretizer(std::move(kinds), std::move(bins), std::move(card)), config);
    const auto params = j.at("parameters").get<std::vector<double>>();
    if (params.size() != model.n_parameters()) fail(ErrorCode::MalformedModel, "parameter count mismatch");
    std::copy(params.begin(), params.end(), model.parameters().begin());
    model.set_loss_history(j.at("loss_history").get<std::vector<double>>());
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedModel, e.what());
  }
}

inline void save_argn(const std::string& path, const ArgnModel& model) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << to_json(model).dump() << '\n';
}

inline ArgnModel load_argn(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedModel, e.what());
  }
  return argn_from_json(j);
}

}  // namespace rebalance
