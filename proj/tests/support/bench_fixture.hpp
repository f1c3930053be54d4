#pragma once

// Writes a synthetic data set plus schema to disk and builds a small
// experiment config around it.

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "rebalance/bench.hpp"
#include "support/synthetic.hpp"

namespace rebalance::testing {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline ExperimentConfig write_bench_fixture(const std::filesystem::path& dir, std::size_t n_rows, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const auto table = make_mixed_boundary_table(n_rows, seed);
  save_csv((dir / "data.csv").string(), table);
  {
    std::ofstream s(dir / "data.schema");
    table.schema().write(s);
  }
  ExperimentConfig c;
  c.name = "synthetic";
  c.data_path = (dir / "data.csv").string();
  c.schema_path = (dir / "data.schema").string();
  c.output_dir = (dir / "out").string();
  c.k_folds = 3;
  c.fractions = {0.02, 0.05};
  c.master_seed = 2024;
  c.upsampling.argn.epochs = 2;
  c.upsampling.argn.embedding_dim = 4;
  c.upsampling.argn.hidden = 8;
  c.classifiers.forest.n_trees = 10;
  c.classifiers.gbm.n_trees = 10;
  return c;
}

}  // namespace rebalance::testing
