#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "rebalance/argn.hpp"
#include "rebalance/classifiers.hpp"
#include "rebalance/error.hpp"
#include "rebalance/metrics.hpp"
#include "rebalance/random.hpp"
#include "rebalance/resampling.hpp"
#include "rebalance/table.hpp"
#include "rebalance/upsamplers.hpp"

namespace rebalance {

enum class Method { Unbalanced, Naive, SmoteNc, Hybrid };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::Unbalanced: return "unbalanced";
    case Method::Naive: return "naive";
    case Method::SmoteNc: return "smotenc";
    case Method::Hybrid: return "hybrid";
  }
  return "unbalanced";
}

inline Method parse_method(std::string_view s) {
  if (s == "unbalanced") return Method::Unbalanced;
  if (s == "naive") return Method::Naive;
  if (s == "smotenc") return Method::SmoteNc;
  if (s == "hybrid") return Method::Hybrid;
  fail(ErrorCode::InvalidArgument, "unknown method '" + std::string(s) + "'");
}

// The seed-derivation contract of the harness; see derive_seed for the
// exact mixing function.
inline std::uint64_t seed_derivation(std::uint64_t master_seed, std::initializer_list<SeedLabel> labels) {
  return derive_seed(master_seed, labels);
}

struct UpsampleSettings {
  SmoteNcConfig smotenc;
  ArgnConfig argn;
};

// Builds the training table for one method from an imbalanced table. Every
// balanced method returns a table with equal class counts.
inline Table upsample(const Table& train, Method method, std::uint64_t seed, const UpsampleSettings& settings = {}) {
  const std::size_t n_new = required_upsample_count(train);
  switch (method) {
    case Method::Unbalanced:
      return train;
    case Method::Naive:
      return naive_oversample(train, n_new, seed);
    case Method::SmoteNc: {
      auto cfg = settings.smotenc;
      cfg.seed = seed;
      return smotenc_upsample(train, n_new, cfg);
    }
    case Method::Hybrid: {
      auto cfg = settings.argn;
      cfg.seed = seed;
      return hybrid_upsample(train, cfg);
    }
  }
  return train;
}

struct ExperimentConfig {
  std::string name;
  std::string data_path;
  std::string schema_path;
  std::string output_dir = "results";
  std::size_t k_folds = 5;
  std::vector<double> fractions{kDefaultFractionGrid.begin(), kDefaultFractionGrid.end()};
  std::vector<Method> methods{Method::Unbalanced, Method::Naive, Method::SmoteNc, Method::Hybrid};
  std::vector<Learner> learners{Learner::RandomForest, Learner::GradientBoosting};
  std::optional<std::uint64_t> master_seed;
  std::size_t workers = 1;
  // Each subgroup is a predicate string such as "income=>50K;sex=Female".
  std::vector<std::string> subgroups;
  // Features whose per-category frequencies are written for every subgroup.
  std::vector<std::string> frequency_features;
  bool write_curves = true;
  UpsampleSettings upsampling;
  ClassifierConfig classifiers;

  // Canonical listing of every hyperparameter that influences results.
  std::string hyperparameter_string() const {
    std::ostringstream s;
    const auto& a = upsampling.argn;
    const auto& f = classifiers.forest;
    const auto& g = classifiers.gbm;
    s << "smotenc.k_neighbors=" << upsampling.smotenc.k_neighbors << ";argn.embedding_dim=" << a.embedding_dim
      << ";argn.hidden=" << a.hidden << ";argn.epochs=" << a.epochs << ";argn.batch_size=" << a.batch_size
      << ";argn.learning_rate=" << detail::format_double(a.learning_rate)
      << ";argn.momentum=" << detail::format_double(a.momentum) << ";argn.lr_decay=" << detail::format_double(a.lr_decay)
      << ";argn.max_bins=" << a.max_bins << ";rf.n_trees=" << f.n_trees << ";rf.max_depth=" << f.max_depth
      << ";rf.max_features=" << f.max_features << ";rf.bootstrap=" << f.bootstrap << ";rf.max_bins=" << f.max_bins
      << ";gbm.n_trees=" << g.n_trees << ";gbm.learning_rate=" << detail::format_double(g.learning_rate)
      << ";gbm.max_depth=" << g.max_depth << ";gbm.max_bins=" << g.max_bins << ";gbm.l2=" << detail::format_double(g.l2)
      << ";gbm.min_child_hessian=" << detail::format_double(g.min_child_hessian)
      << ";gbm.min_child_samples=" << g.min_child_samples << ";onehot_cap=" << classifiers.onehot_cap;
    return s.str();
  }

  std::string fingerprint() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(hyperparameter_string())));
    return buf;
  }

  void validate() const {
    if (methods.empty()) fail(ErrorCode::InvalidArgument, "no methods configured");
    if (learners.empty()) fail(ErrorCode::InvalidArgument, "no learners configured");
    if (fractions.empty()) fail(ErrorCode::InvalidArgument, "no fractions configured");
    for (double f : fractions) {
      if (!(f > 0.0 && f < 1.0)) fail(ErrorCode::InvalidArgument, "fraction " + detail::format_double(f) + " outside (0,1)");
    }
    if (k_folds < 2) fail(ErrorCode::InvalidArgument, "k_folds must be >= 2");
    if (!master_seed) fail(ErrorCode::InvalidArgument, "a master seed is required");
    if (data_path.empty() || schema_path.empty()) fail(ErrorCode::InvalidArgument, "data and schema paths are required");
  }
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  value = trim(value);
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    fail(ErrorCode::InvalidArgument, "bad value '" + std::string(value) + "' for '" + std::string(key) + "'");
  }
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  fail(ErrorCode::InvalidArgument, "bad boolean '" + std::string(value) + "' for '" + std::string(key) + "'");
}

}  // namespace detail

// Applies one `key = value` setting. Keys mirror the ExperimentConfig fields
// and the per-module hyperparameters (smotenc.*, argn.*, rf.*, gbm.*).
inline void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value) {
  using detail::parse_number;
  const std::string v(detail::trim(value));
  if (key == "name") c.name = v;
  else if (key == "data") c.data_path = v;
  else if (key == "schema") c.schema_path = v;
  else if (key == "output") c.output_dir = v;
  else if (key == "k_folds") c.k_folds = parse_number<std::size_t>(key, v);
  else if (key == "seed") c.master_seed = parse_number<std::uint64_t>(key, v);
  else if (key == "workers") c.workers = parse_number<std::size_t>(key, v);
  else if (key == "curves") c.write_curves = detail::parse_bool(key, v);
  else if (key == "subgroup") c.subgroups.push_back(v);
  else if (key == "frequency_features") c.frequency_features = detail::split_list(v);
  else if (key == "fractions") {
    c.fractions.clear();
    for (const auto& f : detail::split_list(v)) c.fractions.push_back(parse_number<double>(key, f));
  } else if (key == "methods") {
    c.methods.clear();
    for (const auto& m : detail::split_list(v)) c.methods.push_back(parse_method(m));
  } else if (key == "learners") {
    c.learners.clear();
    for (const auto& l : detail::split_list(v)) c.learners.push_back(parse_learner(l));
  }
  else if (key == "smotenc.k_neighbors") c.upsampling.smotenc.k_neighbors = parse_number<std::size_t>(key, v);
  else if (key == "argn.embedding_dim") c.upsampling.argn.embedding_dim = parse_number<std::size_t>(key, v);
  else if (key == "argn.hidden") c.upsampling.argn.hidden = parse_number<std::size_t>(key, v);
  else if (key == "argn.epochs") c.upsampling.argn.epochs = parse_number<std::size_t>(key, v);
  else if (key == "argn.batch_size") c.upsampling.argn.batch_size = parse_number<std::size_t>(key, v);
  else if (key == "argn.learning_rate") c.upsampling.argn.learning_rate = parse_number<double>(key, v);
  else if (key == "argn.momentum") c.upsampling.argn.momentum = parse_number<double>(key, v);
  else if (key == "argn.lr_decay") c.upsampling.argn.lr_decay = parse_number<double>(key, v);
  else if (key == "argn.max_bins") c.upsampling.argn.max_bins = parse_number<std::size_t>(key, v);
  else if (key == "rf.n_trees") c.classifiers.forest.n_trees = parse_number<std::size_t>(key, v);
  else if (key == "rf.max_depth") c.classifiers.forest.max_depth = parse_number<std::size_t>(key, v);
  else if (key == "rf.max_features") c.classifiers.forest.max_features = parse_number<std::size_t>(key, v);
  else if (key == "rf.bootstrap") c.classifiers.forest.bootstrap = detail::parse_bool(key, v);
  else if (key == "rf.max_bins") c.classifiers.forest.max_bins = parse_number<std::size_t>(key, v);
  else if (key == "gbm.n_trees") c.classifiers.gbm.n_trees = parse_number<std::size_t>(key, v);
  else if (key == "gbm.learning_rate") c.classifiers.gbm.learning_rate = parse_number<double>(key, v);
  else if (key == "gbm.max_depth") c.classifiers.gbm.max_depth = parse_number<std::size_t>(key, v);
  else if (key == "gbm.max_bins") c.classifiers.gbm.max_bins = parse_number<std::size_t>(key, v);
  else if (key == "gbm.l2") c.classifiers.gbm.l2 = parse_number<double>(key, v);
  else if (key == "gbm.min_child_hessian") c.classifiers.gbm.min_child_hessian = parse_number<double>(key, v);
  else if (key == "gbm.min_child_samples") c.classifiers.gbm.min_child_samples = parse_number<std::size_t>(key, v);
  else if (key == "onehot_cap") c.classifiers.onehot_cap = parse_number<std::size_t>(key, v);
  else fail(ErrorCode::InvalidArgument, "unknown config key '" + std::string(key) + "'");
}

// Config file: one `key = value` per line, '#' comments. Relative data,
// schema and output paths are resolved against the file's directory.
inline ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  ExperimentConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::InvalidArgument, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(c, detail::trim(view.substr(0, eq)), view.substr(eq + 1));
  }
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative() && !base_dir.empty()) p = (base_dir / p).string();
  };
  resolve(c.data_path);
  resolve(c.schema_path);
  resolve(c.output_dir);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config '" + path + "'");
  return parse_config(in, std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// Results

struct ResultRow {
  std::string dataset;
  std::size_t fold = 0;
  double fraction = 0.0;
  std::string method;
  std::string learner;
  std::string status = "ok";  // "ok" or "failed"
  double auc_roc = 0.0;
  double auc_pr = 0.0;
  std::size_t n_minority_train = 0;  // minority rows after imbalance induction
  std::size_t n_train = 0;  // rows the classifier was fitted on
  std::uint64_t train_seed = 0;
  std::string hyperparameters;  // fingerprint
  std::string error;
  double wall_time_s = 0.0;  // kept out of results.csv; see timings.csv

  bool operator==(const ResultRow&) const = default;
};

inline constexpr std::string_view kResultsHeader =
    "dataset,fold,fraction,method,learner,status,auc_roc,auc_pr,n_minority_train,n_train,train_seed,hyperparameters,"
    "error";

inline void write_results(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    detail::write_csv_field(out, r.dataset);
    out << ',' << r.fold << ',' << detail::format_double(r.fraction) << ',' << r.method << ',' << r.learner << ','
        << r.status << ',';
    if (r.status == "ok") out << detail::format_double(r.auc_roc) << ',' << detail::format_double(r.auc_pr);
    else out << ',';
    out << ',' << r.n_minority_train << ',' << r.n_train << ',' << r.train_seed << ',' << r.hyperparameters << ',';
    detail::write_csv_field(out, r.error);
    out << '\n';
  }
}

inline void write_timings(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "dataset,fold,fraction,method,learner,wall_time_s\n";
  for (const auto& r : rows) {
    detail::write_csv_field(out, r.dataset);
    out << ',' << r.fold << ',' << detail::format_double(r.fraction) << ',' << r.method << ',' << r.learner << ','
        << detail::format_double(r.wall_time_s) << '\n';
  }
}

inline std::vector<ResultRow> read_results(std::istream& in) {
  std::vector<std::string> f;
  std::size_t line_no = 0;
  if (!detail::read_csv_record(in, f, line_no)) fail(ErrorCode::MalformedResults, "empty results file");
  std::string header;
  for (std::size_t i = 0; i < f.size(); ++i) header += (i ? "," : "") + f[i];
  if (header != kResultsHeader) fail(ErrorCode::MalformedResults, "unexpected header '" + header + "'");
  std::vector<ResultRow> rows;
  while (detail::read_csv_record(in, f, line_no)) {
    if (detail::blank_record(f)) continue;
    if (f.size() != 13) fail(ErrorCode::MalformedResults, "line " + std::to_string(line_no) + ": expected 13 fields");
    try {
      ResultRow r;
      r.dataset = f[0];
      r.fold = detail::parse_number<std::size_t>("fold", f[1]);
      r.fraction = detail::parse_number<double>("fraction", f[2]);
      r.method = f[3];
      r.learner = f[4];
      r.status = f[5];
      if (r.status == "ok") {
        r.auc_roc = detail::parse_number<double>("auc_roc", f[6]);
        r.auc_pr = detail::parse_number<double>("auc_pr", f[7]);
      } else if (r.status != "failed") {
        fail(ErrorCode::MalformedResults, "bad status '" + r.status + "'");
      }
      r.n_minority_train = detail::parse_number<std::size_t>("n_minority_train", f[8]);
      r.n_train = detail::parse_number<std::size_t>("n_train", f[9]);
      r.train_seed = detail::parse_number<std::uint64_t>("train_seed", f[10]);
      r.hyperparameters = f[11];
      r.error = f[12];
      rows.push_back(std::move(r));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MalformedResults) throw;
      fail(ErrorCode::MalformedResults, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

struct SummaryRow {
  std::string dataset;
  double fraction = 0.0;
  std::string method;
  std::string learner;
  std::size_t n = 0;
  double auc_roc_mean = 0.0;
  double auc_roc_sd = 0.0;
  double auc_pr_mean = 0.0;
  double auc_pr_sd = 0.0;
};

// Mean and population standard deviation sqrt(sum (x - mean)^2 / n) of the
// successful rows of each (dataset, fraction, method, learner) group, in
// order of first appearance.
inline std::vector<SummaryRow> aggregate(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::vector<std::vector<const ResultRow*>> members;
  std::map<std::tuple<std::string, double, std::string, std::string>, std::size_t> index;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    auto key = std::make_tuple(r.dataset, r.fraction, r.method, r.learner);
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) {
      out.push_back({r.dataset, r.fraction, r.method, r.learner});
      members.emplace_back();
    }
    members[it->second].push_back(&r);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    const auto& m = members[g];
    const double n = static_cast<double>(m.size());
    double roc = 0.0, pr = 0.0;
    for (const auto* r : m) {
      roc += r->auc_roc;
      pr += r->auc_pr;
    }
    roc /= n;
    pr /= n;
    double vroc = 0.0, vpr = 0.0;
    for (const auto* r : m) {
      vroc += (r->auc_roc - roc) * (r->auc_roc - roc);
      vpr += (r->auc_pr - pr) * (r->auc_pr - pr);
    }
    out[g].n = m.size();
    out[g].auc_roc_mean = roc;
    out[g].auc_pr_mean = pr;
    out[g].auc_roc_sd = std::sqrt(vroc / n);
    out[g].auc_pr_sd = std::sqrt(vpr / n);
  }
  return out;
}

inline void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "dataset,fraction,method,learner,n,auc_roc_mean,auc_roc_sd,auc_pr_mean,auc_pr_sd\n";
  for (const auto& r : rows) {
    detail::write_csv_field(out, r.dataset);
    out << ',' << detail::format_double(r.fraction) << ',' << r.method << ',' << r.learner << ',' << r.n << ','
        << detail::format_double(r.auc_roc_mean) << ',' << detail::format_double(r.auc_roc_sd) << ','
        << detail::format_double(r.auc_pr_mean) << ',' << detail::format_double(r.auc_pr_sd) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Full pipeline

struct RunSummary {
  std::vector<ResultRow> rows;
  std::size_t n_failed = 0;
  std::filesystem::path output_dir;

  bool ok() const { return n_failed == 0; }
};

namespace detail {

inline std::string slug(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '-';
    out.push_back(keep ? c : '_');
  }
  return out;
}

struct EntropyRecord {
  std::size_t subgroup = 0;
  std::size_t fold = 0;
  std::size_t fraction_index = 0;  // fractions.size() marks the holdout
  std::size_t method_index = 0;
  std::string text;  // pre-rendered CSV lines (entropy)
  std::string freq_text;  // pre-rendered CSV lines (frequencies)
};

inline void render_entropy(const ExperimentConfig& config, const Table& table, std::size_t subgroup, std::size_t fold,
                           const std::string& fraction, const std::string& source, EntropyRecord& rec) {
  const auto predicates = parse_predicates(config.subgroups[subgroup]);
  std::ostringstream e, f;
  try {
    const auto report = entropy_report(table, predicates);
    for (const auto& fe : report.features) {
      e << fold << ',' << fraction << ',' << source << ',';
      write_csv_field(e, fe.feature);
      e << ',' << format_double(fe.entropy) << ',' << fe.n_categories << ',' << report.n_rows << '\n';
    }
    e << fold << ',' << fraction << ',' << source << ",all (avg.)," << format_double(report.average) << ",,"
      << report.n_rows << '\n';
    for (const auto& name : config.frequency_features) {
      for (const auto& cf : frequency_report(table, predicates, name)) {
        f << fold << ',' << fraction << ',' << source << ',';
        write_csv_field(f, name);
        f << ',';
        write_csv_field(f, cf.category);
        f << ',' << cf.count << ',' << format_double(cf.frequency) << '\n';
      }
    }
  } catch (const Error& err) {
    if (err.code() != ErrorCode::EmptySubgroup) throw;
    e << fold << ',' << fraction << ',' << source << ",all (avg.),,,0\n";
  }
  rec.text = e.str();
  rec.freq_text = f.str();
}

}  // namespace detail

// Runs every (fold x fraction x method x learner) combination and writes
// results.csv, timings.csv, summary.csv, hyperparameters.txt, curves/ and
// entropy/ under config.output_dir. A failing combination is recorded with
// status "failed" and its error message. All file contents except
// timings.csv depend only on the config and master seed.
inline RunSummary run(const ExperimentConfig& config) {
  config.validate();
  const std::uint64_t master = *config.master_seed;
  const auto schema = load_schema(config.schema_path);
  const auto table = load_csv(config.data_path, schema);
  const std::string dataset = config.name.empty() ? std::filesystem::path(config.data_path).stem().string() : config.name;
  const std::string fingerprint = config.fingerprint();

  namespace fs = std::filesystem;
  const fs::path out_dir = config.output_dir;
  fs::create_directories(out_dir);
  if (config.write_curves) fs::create_directories(out_dir / "curves");
  if (!config.subgroups.empty()) fs::create_directories(out_dir / "entropy");

  const auto folds = stratified_kfold(table, config.k_folds, seed_derivation(master, {"split"}));
  const std::size_t n_fractions = config.fractions.size();

  // Imbalanced training tables per (fold, fraction); a failure here fails
  // every combination at that coordinate.
  struct Imbalanced {
    std::optional<Table> table;
    std::string error;
  };
  std::vector<Imbalanced> imbalanced(folds.size() * n_fractions);
  for (std::size_t k = 0; k < folds.size(); ++k) {
    for (std::size_t fi = 0; fi < n_fractions; ++fi) {
      try {
        imbalanced[k * n_fractions + fi].table =
            induce_imbalance(folds[k].base, {config.fractions[fi], seed_derivation(master, {"imbalance", k})});
      } catch (const Error& e) {
        imbalanced[k * n_fractions + fi].error = e.what();
      }
    }
  }

  struct Task {
    std::size_t fold, fraction_index, method_index;
  };
  std::vector<Task> tasks;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    for (std::size_t fi = 0; fi < n_fractions; ++fi) {
      for (std::size_t mi = 0; mi < config.methods.size(); ++mi) tasks.push_back({k, fi, mi});
    }
  }

  std::mutex mutex;
  std::vector<ResultRow> rows;
  std::vector<detail::EntropyRecord> entropy;
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;

  auto process = [&](const Task& task) {
    const auto& fold = folds[task.fold];
    const double fraction = config.fractions[task.fraction_index];
    const Method method = config.methods[task.method_index];
    const std::string fraction_label = detail::format_double(fraction);
    const auto& imb = imbalanced[task.fold * n_fractions + task.fraction_index];
    std::vector<ResultRow> local;
    std::vector<detail::EntropyRecord> local_entropy;
    auto base_row = [&](Learner learner) {
      ResultRow r;
      r.dataset = dataset;
      r.fold = task.fold;
      r.fraction = fraction;
      r.method = std::string(to_string(method));
      r.learner = std::string(to_string(learner));
      r.train_seed = seed_derivation(master, {"train", task.fold, to_string(method), to_string(learner)});
      r.hyperparameters = fingerprint;
      return r;
    };

    std::optional<Table> train;
    std::string error = imb.error;
    double upsample_seconds = 0.0;
    if (imb.table) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        train = upsample(*imb.table, method,
                         seed_derivation(master, {"upsample", to_string(method), task.fold, fraction_label}),
                         config.upsampling);
        const auto c = class_counts(*train);
        if (method != Method::Unbalanced && c.majority != c.minority) {
          fail(ErrorCode::InvalidArgument, "balanced training table has unequal classes");
        }
      } catch (const Error& e) {
        error = e.what();
        train.reset();
      }
      upsample_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    for (auto learner : config.learners) {
      auto r = base_row(learner);
      r.n_minority_train = imb.table ? class_counts(*imb.table).minority : 0;
      if (!train) {
        r.status = "failed";
        r.error = error;
        local.push_back(std::move(r));
        continue;
      }
      r.n_train = train->n_rows();
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const auto model = fit(*train, learner, r.train_seed, config.classifiers);
        const auto scores = predict_proba(model, fold.holdout);
        std::vector<std::uint8_t> labels(fold.holdout.n_rows());
        for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = fold.holdout.is_positive(i) ? 1 : 0;
        r.auc_roc = auc_roc(scores, labels);
        r.auc_pr = auc_pr(scores, labels);
        if (config.write_curves) {
          const std::string stem = detail::slug(dataset) + "_fold" + std::to_string(task.fold) + "_f" + fraction_label +
                                   "_" + r.method + "_" + r.learner;
          std::ofstream roc(out_dir / "curves" / (stem + "_roc.csv"));
          write_curve_csv(roc, roc_curve(scores, labels));
          std::ofstream pr(out_dir / "curves" / (stem + "_pr.csv"));
          write_curve_csv(pr, pr_curve(scores, labels));
        }
      } catch (const Error& e) {
        r.status = "failed";
        r.error = e.what();
      }
      r.wall_time_s = upsample_seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      local.push_back(std::move(r));
    }

    if (train) {
      for (std::size_t s = 0; s < config.subgroups.size(); ++s) {
        detail::EntropyRecord rec{s, task.fold, task.fraction_index, task.method_index, {}, {}};
        detail::render_entropy(config, *train, s, task.fold, fraction_label, std::string(to_string(method)), rec);
        local_entropy.push_back(std::move(rec));
      }
    }
    std::lock_guard lock(mutex);
    for (auto& r : local) rows.push_back(std::move(r));
    for (auto& e : local_entropy) entropy.push_back(std::move(e));
  };

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        process(tasks[i]);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(config.workers, tasks.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  for (std::size_t k = 0; k < folds.size(); ++k) {
    for (std::size_t s = 0; s < config.subgroups.size(); ++s) {
      detail::EntropyRecord rec{s, k, n_fractions, 0, {}, {}};
      detail::render_entropy(config, folds[k].holdout, s, k, "", "holdout", rec);
      entropy.push_back(std::move(rec));
    }
  }

  auto method_rank = [&](const std::string& m) {
    for (std::size_t i = 0; i < config.methods.size(); ++i) {
      if (to_string(config.methods[i]) == m) return i;
    }
    return config.methods.size();
  };
  auto learner_rank = [&](const std::string& l) {
    for (std::size_t i = 0; i < config.learners.size(); ++i) {
      if (to_string(config.learners[i]) == l) return i;
    }
    return config.learners.size();
  };
  auto fraction_rank = [&](double f) {
    return static_cast<std::size_t>(std::find(config.fractions.begin(), config.fractions.end(), f) - config.fractions.begin());
  };
  std::sort(rows.begin(), rows.end(), [&](const ResultRow& a, const ResultRow& b) {
    return std::make_tuple(a.fold, fraction_rank(a.fraction), method_rank(a.method), learner_rank(a.learner)) <
           std::make_tuple(b.fold, fraction_rank(b.fraction), method_rank(b.method), learner_rank(b.learner));
  });
  std::sort(entropy.begin(), entropy.end(), [](const auto& a, const auto& b) {
    return std::tie(a.subgroup, a.fold, a.fraction_index, a.method_index) <
           std::tie(b.subgroup, b.fold, b.fraction_index, b.method_index);
  });

  {
    std::ofstream out(out_dir / "results.csv", std::ios::binary);
    write_results(out, rows);
  }
  {
    std::ofstream out(out_dir / "timings.csv", std::ios::binary);
    write_timings(out, rows);
  }
  {
    std::ofstream out(out_dir / "summary.csv", std::ios::binary);
    write_summary(out, aggregate(rows));
  }
  {
    std::ofstream out(out_dir / "hyperparameters.txt", std::ios::binary);
    out << "fingerprint=" << fingerprint << '\n' << config.hyperparameter_string() << '\n';
  }
  for (std::size_t s = 0; s < config.subgroups.size(); ++s) {
    const std::string stem = detail::slug(config.subgroups[s]);
    std::ofstream e(out_dir / "entropy" / (stem + ".csv"), std::ios::binary);
    e << "fold,fraction,method,feature,entropy,n_categories,n_rows\n";
    for (const auto& rec : entropy) {
      if (rec.subgroup == s) e << rec.text;
    }
    if (config.frequency_features.empty()) continue;
    std::ofstream f(out_dir / "entropy" / (stem + "_frequencies.csv"), std::ios::binary);
    f << "fold,fraction,method,feature,category,count,frequency\n";
    for (const auto& rec : entropy) {
      if (rec.subgroup == s) f << rec.freq_text;
    }
  }

  RunSummary summary;
  summary.output_dir = out_dir;
  for (const auto& r : rows) summary.n_failed += r.status != "ok";
  summary.rows = std::move(rows);
  return summary;
}

}  // namespace rebalance
