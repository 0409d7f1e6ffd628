#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "mordq/agent.hpp"
#include "mordq/evaluation.hpp"
#include "mordq/market_data.hpp"

namespace mordq {

struct FoldReport {
  std::size_t fold = 0;  // 0-based
  DataSplit split;
  std::optional<std::size_t> selected_episode;  // empty when no checkpoint was taken
  std::array<EvaluationReport, 3> reports;
};

// Independent training per fold (seed = master seed + fold index), model
// picked by `metric` on the fold's eval range. Results come back in fold
// order whether or not folds run concurrently.
std::vector<FoldReport> run_walk_forward(const TrainConfig& config, const PriceSeries& series, const FoldPlan& plan,
                                         SelectionMetric metric, bool parallel = false);

}  // namespace mordq
