#pragma once

#include <optional>

#include "rebalance/error.hpp"

namespace rebalance::testing {

// Code of the rebalance::Error thrown by f, or nullopt if nothing is thrown.
template <class F>
std::optional<ErrorCode> thrown_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace rebalance::testing
