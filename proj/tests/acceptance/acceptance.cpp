// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rebalance/rebalance.hpp"
#include "support/argn_fixtures.hpp"
#include "support/bench_fixture.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace {

using namespace rebalance;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

fs::path scratch(const std::string& name) {
  auto p = fs::path(REBALANCE_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Base sets with the majority sizes of 4/5 of each reference data set and a
// minority share well above every grid fraction.
Outcome minority_counts() {
  const std::vector<std::size_t> majority{19797, 18720, 268300};
  const std::vector<std::size_t> expected{19, 18, 268};
  Outcome o{true, ""};
  for (std::size_t i = 0; i < majority.size(); ++i) {
    const auto base = testing::make_counts_table(majority[i], majority[i] / 3, 100 + i);
    const auto imb = induce_imbalance(base, {0.001, 7});
    const auto c = class_counts(imb);
    const auto diff = static_cast<long long>(c.minority) - static_cast<long long>(expected[i]);
    o.pass = o.pass && std::llabs(diff) <= 1 && c.majority == majority[i];
    o.detail += (i ? " / " : "") + std::to_string(c.minority);
  }
  o.detail = "f=0.001 minority rows " + o.detail + " (expected 19 / 18 / 268, +-1)";
  return o;
}

Outcome entropy_identities() {
  // (a) uniform duplication of the minority partition.
  const auto t = testing::make_mixed_boundary_table(3000, 21);
  const auto n_min = class_counts(t).minority;
  const auto up = naive_oversample_even(t, 4 * n_min, 3);
  const auto minority = parse_predicates("label=yes");
  const auto before = entropy_report(t, minority);
  const auto after = entropy_report(up, minority);
  double worst = 0.0;
  for (std::size_t i = 0; i < before.features.size(); ++i) {
    worst = std::max(worst, std::abs(before.features[i].entropy - after.features[i].entropy));
  }
  const bool a = worst == 0.0 && after.n_rows == 5 * before.n_rows;

  // (b) three equally frequent categories.
  Schema schema({{"c", ColumnKind::Categorical}, {"y", ColumnKind::Categorical}}, "y", "pos");
  std::vector<Column> cols(2);
  cols[0].dictionary = testing::labels("c", 3);
  cols[1].dictionary = std::make_shared<Dictionary>(std::vector<std::string>{"neg", "pos"});
  for (std::int32_t i = 0; i < 30; ++i) {
    cols[0].codes.push_back(i % 3);
    cols[1].codes.push_back(i < 15 ? 1 : 0);
  }
  const Table three(schema, std::move(cols));
  const double se3 = entropy_report(three, parse_predicates("y=pos")).features[0].entropy;
  const bool b = std::abs(se3 - std::log2(3.0)) < 1e-12 && fmt(se3, 2) == "1.58";

  // (c) bounds on random columns.
  Rng rng(99);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t categories = 1 + rng.index(40);
    std::vector<std::int32_t> codes(1 + rng.index(500));
    for (auto& c : codes) c = static_cast<std::int32_t>(rng.index(categories));
    const std::size_t present = std::set<std::int32_t>(codes.begin(), codes.end()).size();
    const double h = shannon_entropy(codes);
    if (h < 0.0 || h > std::log2(static_cast<double>(present)) + 1e-12) ++violations;
  }
  const bool c = violations == 0;
  return {a && b && c, "(a) max |dSE| after 5x duplication " + fmt(worst, 17) + "; (b) SE " + fmt(se3, 2) +
                           "; (c) bound violations " + std::to_string(violations) + "/1000"};
}

Outcome auc_oracles() {
  Rng rng(314);
  double worst_roc = 0.0, worst_pr = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.index(199);
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    const double levels = static_cast<double>(1 + rng.index(20));
    const double prevalence = 0.05 + 0.9 * rng.uniform01();
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::floor(rng.uniform01() * levels) / levels;
      y[i] = rng.uniform01() < prevalence;
    }
    const std::size_t pos = rng.index(n);
    y[pos] = 1;
    y[(pos + 1 + rng.index(n - 1)) % n] = 0;
    worst_roc = std::max(worst_roc, std::abs(auc_roc(s, y) - testing::pair_count_auc(s, y)));
    worst_pr = std::max(worst_pr, std::abs(auc_pr(s, y) - testing::direct_average_precision(s, y)));
  }
  return {worst_roc <= 1e-12 && worst_pr <= 1e-12,
          "max |dROC| " + fmt(worst_roc, 17) + ", max |dPR| " + fmt(worst_pr, 17) + " over 1000 vectors"};
}

Outcome smote_geometry() {
  const auto t = testing::make_mixed_boundary_table(800, 41);
  const auto trace = smotenc_upsample_traced(t, 1000, {5, 17});
  const auto& out = trace.table;
  std::map<std::size_t, std::size_t> local;
  for (std::size_t i = 0; i < trace.minority_rows.size(); ++i) local[trace.minority_rows[i]] = i;
  std::size_t numeric_violations = 0, categorical_violations = 0;
  for (std::size_t i = 0; i < trace.draws.size(); ++i) {
    const auto r = t.n_rows() + i;
    const auto& d = trace.draws[i];
    const auto& nbrs = trace.neighbors[local.at(d.donor)];
    for (auto j : t.schema().feature_indices()) {
      if (t.kind(j) == ColumnKind::Numeric) {
        const double lo = std::min(t.numeric(j)[d.donor], t.numeric(j)[d.neighbor]);
        const double hi = std::max(t.numeric(j)[d.donor], t.numeric(j)[d.neighbor]);
        numeric_violations += out.numeric(j)[r] < lo || out.numeric(j)[r] > hi;
      } else {
        bool found = false;
        for (auto n : nbrs) found |= t.codes(j)[n] == out.codes(j)[r];
        categorical_violations += !found;
      }
    }
  }
  return {trace.draws.size() == 1000 && numeric_violations == 0 && categorical_violations == 0,
          std::to_string(trace.draws.size()) + " samples, k=" + std::to_string(trace.effective_k) + ", " +
              std::to_string(numeric_violations) + " numeric and " + std::to_string(categorical_violations) +
              " categorical violations"};
}

ArgnConfig small_argn(std::size_t epochs, std::uint64_t seed) {
  ArgnConfig c;
  c.embedding_dim = 8;
  c.hidden = 32;
  c.epochs = epochs;
  c.batch_size = 64;
  c.seed = seed;
  return c;
}

Outcome generator_checks() {
  // (a) gradients on a toy 3-column model.
  const auto toy = testing::make_toy_mixed_table(40, 7);
  ArgnConfig gc;
  gc.embedding_dim = 3;
  gc.hidden = 5;
  gc.max_bins = 4;
  ArgnModel gm(toy, fit_discretizer(toy, gc.max_bins), gc);
  Rng rng(11);
  gm.initialize(rng);
  for (auto& p : gm.parameters()) p += 0.05 * rng.uniform(-1.0, 1.0);
  const auto codes = gm.encode(toy);
  std::vector<std::size_t> rows(toy.n_rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const double grad_err = testing::gradient_check(gm, codes, rows);

  // (b) conditional generation.
  const auto mixed = testing::make_toy_mixed_table(500, 8);
  const auto cm = train_argn(mixed, small_argn(10, 3));
  GenerationRequest req;
  req.n_samples = 5000;
  req.condition = mixed.schema().positive_label();
  req.seed = 4;
  const auto cond = generate(cm, req);
  const double cond_share = static_cast<double>(class_counts(cond).minority) / static_cast<double>(cond.n_rows());

  // (c) deterministic dependency b = (3a + 1) mod 8 between two columns.
  const auto dep = testing::make_dependency_table(1000, 4);
  const auto dm = train_argn(dep, small_argn(60, 1));
  GenerationRequest dreq;
  dreq.n_samples = 2000;
  dreq.seed = 9;
  const auto dg = generate(dm, dreq);
  std::size_t ok = 0;
  for (std::size_t r = 0; r < dg.n_rows(); ++r) ok += dg.codes(1)[r] == (3 * dg.codes(0)[r] + 1) % 8;
  const double dep_share = static_cast<double>(ok) / static_cast<double>(dg.n_rows());

  // (d) marginals of independent columns.
  const auto ind = testing::make_independent_table(5000, 6);
  const auto im = train_argn(ind, small_argn(20, 1));
  GenerationRequest ireq;
  ireq.n_samples = 10000;
  ireq.seed = 10;
  const auto ig = generate(im, ireq);
  double tv = 0.0;
  for (std::size_t j = 0; j < ind.n_columns(); ++j) tv = std::max(tv, testing::marginal_tv(ind, ig, j));

  return {grad_err < 1e-4 && cond_share == 1.0 && dep_share >= 0.95 && tv <= 0.05,
          "(a) gradient rel. error " + fmt(grad_err, 8) + "; (b) minority share " + fmt(cond_share, 4) +
              "; (c) dependency " + fmt(100.0 * dep_share, 2) + "%; (d) max marginal TV " + fmt(tv, 4)};
}

std::map<std::string, double> mean_auc_pr(const std::vector<ResultRow>& rows, double fraction) {
  std::map<std::string, double> sum;
  std::map<std::string, double> n;
  for (const auto& r : rows) {
    if (r.fraction != fraction || r.status != "ok") continue;
    sum[r.method] += r.auc_pr;
    n[r.method] += 1.0;
  }
  for (auto& [m, s] : sum) s /= n[m];
  return sum;
}

std::string describe(const std::map<std::string, double>& means) {
  std::string out;
  for (const char* m : {"unbalanced", "naive", "smotenc", "hybrid"}) {
    if (!out.empty()) out += ", ";
    out += std::string(m) + " " + (means.count(m) ? fmt(means.at(m)) : std::string("n/a"));
  }
  return out;
}

Outcome end_to_end() {
  const auto dir = scratch("end_to_end");
  auto c = testing::write_bench_fixture(dir, 20000, 7);
  c.k_folds = 5;
  c.fractions = {0.002, 0.05};
  c.learners = {Learner::GradientBoosting};
  c.master_seed = 20240601;
  c.write_curves = false;
  c.upsampling.argn = ArgnConfig{};
  c.classifiers = ClassifierConfig{};
  const auto summary = run(c);
  if (!summary.ok()) return {false, std::to_string(summary.n_failed) + " combinations failed"};
  const auto low = mean_auc_pr(summary.rows, 0.002);
  const auto mild = mean_auc_pr(summary.rows, 0.05);
  const bool directional = low.at("hybrid") > low.at("naive") && low.at("hybrid") > low.at("unbalanced");
  double lo = 1.0, hi = 0.0;
  for (const auto& [m, v] : mild) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const bool converged = mild.size() == 4 && hi - lo <= 0.05;
  return {directional && converged, "f=0.002 mean GBM AUC-PR: " + describe(low) + " | f=0.05: " + describe(mild) +
                                        " (spread " + fmt(hi - lo) + ")"};
}

Outcome determinism() {
  const auto dir = scratch("determinism");
  auto c = testing::write_bench_fixture(dir / "data", 1500, 12);
  c.subgroups = {"label=yes"};
  c.output_dir = (dir / "serial").string();
  c.workers = 1;
  run(c);
  c.output_dir = (dir / "parallel").string();
  c.workers = 4;
  run(c);
  c.output_dir = (dir / "rerun").string();
  run(c);
  const auto serial = testing::read_file(dir / "serial" / "results.csv");
  const bool same = !serial.empty() && serial == testing::read_file(dir / "parallel" / "results.csv") &&
                    serial == testing::read_file(dir / "rerun" / "results.csv");
  return {same, "results.csv (" + std::to_string(serial.size()) + " bytes) " +
                    (same ? "identical" : "differs") + " across workers=1, workers=4 and a rerun"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 minority-count reproduction", minority_counts},
      {"2 entropy identities", entropy_identities},
      {"3 AUC oracle equivalence", auc_oracles},
      {"4 SMOTE-NC geometry", smote_geometry},
      {"5 generator checks", generator_checks},
      {"6 end-to-end directional reproduction", end_to_end},
      {"7 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << " [" << fmt(seconds, 1)
              << " s]" << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
