#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rebalance/rebalance.hpp"

namespace {

using namespace rebalance;
namespace fs = std::filesystem;

struct DataArgs {
  std::string data;
  std::string schema;

  void add(CLI::App* app) {
    app->add_option("--data", data, "CSV file")->required()->check(CLI::ExistingFile);
    app->add_option("--schema", schema, "schema file")->required()->check(CLI::ExistingFile);
  }
  Table load() const { return load_csv(data, load_schema(schema)); }
};

// `--set key=value` overrides share the config-file keys.
ExperimentConfig with_overrides(ExperimentConfig config, const std::vector<std::string>& settings) {
  for (const auto& s : settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(ErrorCode::InvalidArgument, "expected key=value, got '" + s + "'");
    apply_setting(config, detail::trim(std::string_view(s).substr(0, eq)), std::string_view(s).substr(eq + 1));
  }
  return config;
}

void add_settings(CLI::App* app, std::vector<std::string>& settings) {
  app->add_option("--set", settings, "hyperparameter override, e.g. argn.epochs=50 (repeatable)");
}

std::vector<std::uint8_t> labels_of(const Table& t) {
  std::vector<std::uint8_t> y(t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) y[r] = t.is_positive(r) ? 1 : 0;
  return y;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minority-class upsampling benchmark"};
  app.require_subcommand(1);

  // split
  DataArgs split_data;
  std::size_t split_k = 5;
  std::uint64_t split_seed = 0;
  std::string split_out;
  auto* split = app.add_subcommand("split", "stratified k-fold split into base and holdout CSVs");
  split_data.add(split);
  split->add_option("--k", split_k, "number of folds")->capture_default_str();
  split->add_option("--seed", split_seed, "seed")->required();
  split->add_option("--out", split_out, "output directory")->required();

  // imbalance
  DataArgs imb_data;
  double imb_fraction = 0.0;
  std::uint64_t imb_seed = 0;
  std::string imb_out;
  auto* imbalance = app.add_subcommand("imbalance", "downsample the minority class to a target fraction");
  imb_data.add(imbalance);
  imbalance->add_option("--fraction", imb_fraction, "target minority fraction")->required();
  imbalance->add_option("--seed", imb_seed, "seed")->required();
  imbalance->add_option("--out", imb_out, "output CSV")->required();

  // upsample
  DataArgs up_data;
  std::string up_method;
  std::uint64_t up_seed = 0;
  std::string up_out;
  std::vector<std::string> up_settings;
  auto* up = app.add_subcommand("upsample", "balance the classes by adding minority rows");
  up_data.add(up);
  up->add_option("--method", up_method, "naive, smotenc or hybrid")
      ->required()
      ->check(CLI::IsMember({"naive", "smotenc", "hybrid"}));
  up->add_option("--seed", up_seed, "seed")->required();
  up->add_option("--out", up_out, "output CSV")->required();
  add_settings(up, up_settings);

  // train
  DataArgs train_data;
  std::string train_learner;
  std::uint64_t train_seed = 0;
  std::string train_out;
  std::vector<std::string> train_settings;
  auto* train = app.add_subcommand("train", "fit a classifier and save it as JSON");
  train_data.add(train);
  train->add_option("--learner", train_learner, "RF or GBM")->required()->check(CLI::IsMember({"RF", "GBM"}));
  train->add_option("--seed", train_seed, "seed")->required();
  train->add_option("--out", train_out, "model file")->required();
  add_settings(train, train_settings);

  // evaluate
  DataArgs eval_data;
  std::string eval_model;
  std::string eval_curves;
  auto* evaluate = app.add_subcommand("evaluate", "score a table with a saved classifier");
  eval_data.add(evaluate);
  evaluate->add_option("--model", eval_model, "model file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--curves", eval_curves, "write <prefix>_roc.csv and <prefix>_pr.csv");

  // bench
  std::string bench_config;
  std::optional<std::uint64_t> bench_seed;
  std::optional<std::size_t> bench_workers;
  std::string bench_output;
  std::vector<std::string> bench_settings;
  auto* bench = app.add_subcommand("bench", "run the full fold x fraction x method x learner grid");
  bench->add_option("--config", bench_config, "config file")->required()->check(CLI::ExistingFile);
  bench->add_option("--seed", bench_seed, "master seed")->required();
  bench->add_option("--workers", bench_workers, "concurrent grid combinations");
  bench->add_option("--output", bench_output, "output directory (overrides the config)");
  add_settings(bench, bench_settings);

  // report
  DataArgs report_data;
  std::string report_subgroup;
  std::vector<std::string> report_features;
  std::string report_frequencies;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Shannon entropy or category frequencies within a subgroup");
  report_data.add(report);
  report->add_option("--subgroup", report_subgroup, "predicates, e.g. \"income=>50K;sex=Female\"");
  report->add_option("--features", report_features, "features to report (default: all)")->delimiter(',');
  report->add_option("--frequencies", report_frequencies, "report category frequencies of this feature instead");
  report->add_option("--out", report_out, "output CSV (default: stdout)");

  // aggregate
  std::string agg_results;
  std::string agg_out;
  auto* agg = app.add_subcommand("aggregate", "mean and standard deviation over folds");
  agg->add_option("--results", agg_results, "results.csv")->required()->check(CLI::ExistingFile);
  agg->add_option("--out", agg_out, "summary CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*split) {
      const auto table = split_data.load();
      fs::create_directories(split_out);
      for (const auto& f : stratified_kfold(table, split_k, split_seed)) {
        const auto stem = fs::path(split_out) / ("fold" + std::to_string(f.fold_index));
        save_csv(stem.string() + "_base.csv", f.base);
        save_csv(stem.string() + "_holdout.csv", f.holdout);
      }
    } else if (*imbalance) {
      const auto out = induce_imbalance(imb_data.load(), {imb_fraction, imb_seed});
      save_csv(imb_out, out);
      const auto c = class_counts(out);
      std::cerr << "minority " << c.minority << ", majority " << c.majority << '\n';
    } else if (*up) {
      const auto config = with_overrides({}, up_settings);
      const auto out = upsample(up_data.load(), parse_method(up_method), up_seed, config.upsampling);
      save_csv(up_out, out);
    } else if (*train) {
      const auto config = with_overrides({}, train_settings);
      save_classifier(train_out, fit(train_data.load(), parse_learner(train_learner), train_seed, config.classifiers));
    } else if (*evaluate) {
      const auto model = load_classifier(eval_model);
      const auto table = eval_data.load();
      const auto scores = predict_proba(model, table);
      const auto y = labels_of(table);
      std::cout << "auc_roc," << detail::format_double(auc_roc(scores, y)) << '\n'
                << "auc_pr," << detail::format_double(auc_pr(scores, y)) << '\n';
      if (!eval_curves.empty()) {
        std::ofstream roc(eval_curves + "_roc.csv");
        write_curve_csv(roc, roc_curve(scores, y));
        std::ofstream pr(eval_curves + "_pr.csv");
        write_curve_csv(pr, pr_curve(scores, y));
      }
    } else if (*bench) {
      auto config = with_overrides(load_config(bench_config), bench_settings);
      config.master_seed = bench_seed;
      if (bench_workers) config.workers = *bench_workers;
      if (!bench_output.empty()) config.output_dir = bench_output;
      const auto summary = run(config);
      std::cerr << summary.rows.size() << " combinations, " << summary.n_failed << " failed; results in "
                << summary.output_dir.string() << '\n';
      for (const auto& r : summary.rows) {
        if (r.status != "ok") {
          std::cerr << "failed: fold " << r.fold << ", fraction " << detail::format_double(r.fraction) << ", "
                    << r.method << ", " << r.learner << ": " << r.error << '\n';
        }
      }
      return summary.ok() ? 0 : 1;
    } else if (*report) {
      const auto table = report_data.load();
      const auto predicates = parse_predicates(report_subgroup);
      std::ostringstream out;
      if (!report_frequencies.empty()) {
        out << "category,count,frequency\n";
        for (const auto& cf : frequency_report(table, predicates, report_frequencies)) {
          detail::write_csv_field(out, cf.category);
          out << ',' << cf.count << ',' << detail::format_double(cf.frequency) << '\n';
        }
      } else {
        std::optional<std::vector<std::string>> features;
        if (!report_features.empty()) features = report_features;
        const auto r = entropy_report(table, predicates, features);
        out << "feature,entropy,n_categories,n_rows\n";
        for (const auto& f : r.features) {
          detail::write_csv_field(out, f.feature);
          out << ',' << detail::format_double(f.entropy) << ',' << f.n_categories << ',' << r.n_rows << '\n';
        }
        out << "all (avg.)," << detail::format_double(r.average) << ",," << r.n_rows << '\n';
      }
      write_text(report_out, out.str());
    } else if (*agg) {
      std::ifstream in(agg_results);
      std::ostringstream out;
      write_summary(out, aggregate(read_results(in)));
      write_text(agg_out, out.str());
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
