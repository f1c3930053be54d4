#pragma once

// Synthetic mixed-type data sets for tests and the acceptance suite.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rebalance/random.hpp"
#include "rebalance/table.hpp"

namespace rebalance::testing {

inline double normal(Rng& rng) {
  // Box-Muller; only used to synthesize data.
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// 20,000-row style table: three numeric and three categorical features, a
// binary target "label" with positive class "yes". The positive class is the
// region where x1 * x2 plus a category effect exceeds a threshold, i.e. a
// curved boundary; the feature distribution itself is class-independent.
inline Table make_mixed_boundary_table(std::size_t n_rows, std::uint64_t seed) {
  Schema schema({{"x1", ColumnKind::Numeric},
                 {"x2", ColumnKind::Numeric},
                 {"x3", ColumnKind::Numeric},
                 {"color", ColumnKind::Categorical},
                 {"shape", ColumnKind::Categorical},
                 {"size", ColumnKind::Categorical},
                 {"label", ColumnKind::Categorical}},
                "label", "yes");
  const std::vector<std::string> colors{"red", "green", "blue", "black", "white"};
  const std::vector<double> color_p{0.3, 0.25, 0.2, 0.15, 0.1};
  const std::vector<std::string> shapes{"circle", "square", "triangle", "hexagon"};
  const std::vector<std::string> sizes{"S", "M", "L"};
  std::vector<Column> cols(7);
  auto dict = [](const std::vector<std::string>& v) { return std::make_shared<Dictionary>(v); };
  cols[3].dictionary = dict(colors);
  cols[4].dictionary = dict(shapes);
  cols[5].dictionary = dict(sizes);
  cols[6].dictionary = dict({"no", "yes"});
  Rng rng(seed);
  for (std::size_t i = 0; i < n_rows; ++i) {
    const double x1 = normal(rng);
    const double x2 = 0.5 * x1 + std::sqrt(0.75) * normal(rng);
    const double x3 = rng.uniform(0.0, 10.0);
    const double u = rng.uniform01();
    std::int32_t color = 4;
    double acc = 0.0;
    for (std::int32_t c = 0; c < 5; ++c) {
      acc += color_p[static_cast<std::size_t>(c)];
      if (u < acc) {
        color = c;
        break;
      }
    }
    // Shape follows x1 (shared structure the generator can learn from
    // either class).
    const double s = x1 + 0.5 * normal(rng);
    const std::int32_t shape = s < -0.7 ? 0 : s < 0.0 ? 1 : s < 0.7 ? 2 : 3;
    const auto size = static_cast<std::int32_t>(rng.index(3));
    const double score = x1 * x2 + (color == 0 || color == 2 ? 0.9 : 0.0) + 0.08 * x3 +
                         (size == 2 ? 0.4 : 0.0) + 0.3 * normal(rng);
    const bool positive = score > 2.1;
    cols[0].numeric.push_back(std::round(x1 * 1000.0) / 1000.0);
    cols[1].numeric.push_back(std::round(x2 * 1000.0) / 1000.0);
    cols[2].numeric.push_back(std::round(x3 * 1000.0) / 1000.0);
    cols[3].codes.push_back(color);
    cols[4].codes.push_back(shape);
    cols[5].codes.push_back(size);
    cols[6].codes.push_back(positive ? 1 : 0);
  }
  return Table(schema, std::move(cols));
}

// Table whose minority/majority counts are exactly the given values, with one
// numeric feature "v" holding the row index.
inline Table make_counts_table(std::size_t n_majority, std::size_t n_minority, std::uint64_t seed = 1) {
  Schema schema({{"v", ColumnKind::Numeric}, {"y", ColumnKind::Categorical}}, "y", "pos");
  std::vector<Column> cols(2);
  cols[1].dictionary = std::make_shared<Dictionary>(std::vector<std::string>{"neg", "pos"});
  std::vector<std::int32_t> labels(n_majority, 0);
  labels.insert(labels.end(), n_minority, 1);
  Rng rng(seed);
  rng.shuffle(std::span<std::int32_t>(labels));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    cols[0].numeric.push_back(static_cast<double>(i));
    cols[1].codes.push_back(labels[i]);
  }
  return Table(schema, std::move(cols));
}

}  // namespace rebalance::testing
