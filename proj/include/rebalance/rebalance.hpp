#pragma once

#include "rebalance/error.hpp"
#include "rebalance/random.hpp"
#include "rebalance/table.hpp"
#include "rebalance/resampling.hpp"
#include "rebalance/upsamplers.hpp"
#include "rebalance/argn.hpp"
#include "rebalance/classifiers.hpp"
#include "rebalance/metrics.hpp"
#include "rebalance/bench.hpp"
