#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mordq/market_data.hpp"
#include "mordq/policy.hpp"
#include "mordq/qnet.hpp"
#include "mordq/rewards.hpp"
#include "mordq/trading_env.hpp"

namespace mordq {

struct EvaluationReport {
  std::string range_id;  // "train", "eval", "test", or a fold label
  IndexRange range;
  double total_reward = 0.0;  // undiscounted sum of w . r along the rollout
  double total_profit = 0.0;  // exp(sum of portfolio log-returns) - 1
  double sharpe = 0.0;        // per-step, non-annualized
  double long_exposure = 0.0; // fraction of steps holding Long
  std::size_t trades = 0;     // position changes
  double buy_and_hold_profit = 0.0;
  double buy_and_hold_sharpe = 0.0;
};

struct TraceStep {
  std::size_t cursor = 0;  // index at which the action executed
  std::size_t action = 0;
  Position position = Position::Neutral;  // held over (cursor, cursor + 1]
  bool trade = false;
  double log_return = 0.0;
  RewardVector reward;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

using PositionTrace = std::vector<TraceStep>;

struct Rollout {
  PositionTrace trace;
  EvaluationReport report;
};

// Everything a greedy rollout needs besides the network.
struct EvalSettings {
  EnvConfig env;
  double feature_scale = 1.0;
  bool generalize_gamma = false;
  WeightVector weights = WeightVector::uniform();  // reported combination
  double gamma = 0.95;

  PolicySpec policy() const noexcept { return {env.mode, env.lookback, feature_scale, generalize_gamma}; }
};

// Maps a state to an action id.
using ActionPolicy = std::function<std::size_t(const EnvState&)>;

Rollout run_policy(const ActionPolicy& policy, const PriceSeries& series, IndexRange range,
                   const EvalSettings& settings, std::string range_id = {});
// Greedy (no exploration) rollout of a network.
Rollout run_policy(const QNetwork& net, const PriceSeries& series, IndexRange range, const EvalSettings& settings,
                   std::string range_id = {});

// Always-Long policy entering at the first step of the range.
EvaluationReport buy_and_hold(const PriceSeries& series, IndexRange range, const EvalSettings& settings,
                              std::string range_id = {});

// Q values for every (step, position slice, action). Slices follow
// ActionSpace::positions(): LP = [Neutral, Long], LSP = [Neutral, Long, Short].
struct QTable {
  std::size_t steps = 0;
  std::size_t positions = 0;
  std::size_t actions = 0;
  std::vector<double> values;

  std::span<const double> at(std::size_t step, std::size_t slice) const noexcept {
    return {values.data() + (step * positions + slice) * actions, actions};
  }
};

struct VectorizedRollout {
  QTable table;
  Rollout rollout;
};

// Precomputes Q for every position slice in large batches (the lookback path
// does not depend on actions), then walks the table greedily. Produces the
// same trace as run_policy.
VectorizedRollout vectorized_rollout(const QNetwork& net, const PriceSeries& series, IndexRange range,
                                     const EvalSettings& settings, std::string range_id = {});

// Report over a finished trace; buy-and-hold fields are left untouched.
EvaluationReport summarize_trace(const PositionTrace& trace, const WeightVector& weights);

enum class SelectionMetric { Sharpe, TotalProfit };
std::optional<SelectionMetric> selection_metric_from_string(std::string_view text) noexcept;
std::string_view to_string(SelectionMetric m) noexcept;

enum class RangeId : std::size_t { Train = 0, Eval = 1, Test = 2 };
std::string_view to_string(RangeId r) noexcept;
std::optional<RangeId> range_id_from_string(std::string_view text) noexcept;

struct Checkpoint {
  std::size_t episode = 0;
  PolicySpec spec;
  QNetwork net;
  std::array<EvaluationReport, 3> reports;  // indexed by RangeId
  double wall_seconds = 0.0;

  const EvaluationReport& report(RangeId r) const noexcept { return reports[static_cast<std::size_t>(r)]; }
};

double metric_value(const EvaluationReport& report, SelectionMetric metric) noexcept;

// Best checkpoint by the metric on the eval range; ties go to the earliest.
const Checkpoint& select_best_checkpoint(std::span<const Checkpoint> checkpoints, SelectionMetric metric);

}  // namespace mordq
