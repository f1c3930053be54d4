#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <type_traits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace rebalance {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// One component of a seed-derivation path: either an integer or a string.
class SeedLabel {
 public:
  SeedLabel(std::string_view s) : value_(s) {}  // NOLINT(google-explicit-constructor)
  SeedLabel(const char* s) : value_(std::string_view(s)) {}  // NOLINT
  SeedLabel(const std::string& s) : value_(std::string_view(s)) {}  // NOLINT
  template <typename Int>
    requires std::is_integral_v<Int>
  SeedLabel(Int v) : value_(static_cast<std::uint64_t>(v)) {}  // NOLINT

  // Integers and strings are mixed under different tags so that the label 7
  // and the label "7" never collide by construction.
  std::uint64_t digest() const {
    if (const auto* i = std::get_if<std::uint64_t>(&value_)) {
      return splitmix64(*i ^ 0x1ULL);
    }
    return splitmix64(fnv1a64(std::get<std::string_view>(value_)) ^ 0x2ULL);
  }

 private:
  std::variant<std::uint64_t, std::string_view> value_;
};

// Stable derivation used everywhere a sub-seed is needed:
//   h0 = splitmix64(master)
//   h_{i+1} = splitmix64(h_i ^ digest(label_i) + 0x632BE59BD9B4E019 * (i + 1))
// where digest(int v) = splitmix64(v ^ 1) and digest(string s) =
// splitmix64(fnv1a64(s) ^ 2). The result depends only on the inputs, never on
// evaluation order of the caller.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<SeedLabel> labels) {
  std::uint64_t h = splitmix64(master);
  std::uint64_t position = 0;
  for (const auto& label : labels) {
    ++position;
    h = splitmix64(h ^ (label.digest() + 0x632BE59BD9B4E019ULL * position));
  }
  return h;
}

// Thin wrapper over mt19937_64 with distribution code of our own, so that
// streams are reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform on [0, n), n > 0. Lemire's multiply-shift with rejection.
  std::uint64_t index(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rebalance
