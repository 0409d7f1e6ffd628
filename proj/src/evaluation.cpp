#include "mordq/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "mordq/error.hpp"

namespace mordq {

namespace {

constexpr std::size_t kChunkSteps = 32;

void check_settings(const EvalSettings& s, const QNetwork& net) {
  const PolicySpec spec = s.policy();
  if (net.input_width() != spec.input_width() || net.output_width() != spec.action_count())
    throw Error(ErrorCode::ShapeMismatch, "network shape does not match evaluation settings");
}

std::size_t slice_of(Position p, std::span<const Position> slices) {
  for (std::size_t i = 0; i < slices.size(); ++i)
    if (slices[i] == p) return i;
  throw Error(ErrorCode::InvalidActionForMode, "position outside the mode's slices");
}

// Replays fixed action choices through the environment.
PositionTrace trace_actions(const TradingEnv& env, IndexRange range, const ActionPolicy& policy) {
  EnvState state = env.reset(range);
  PositionTrace trace;
  trace.reserve(env.steps_in(range));
  while (true) {
    const std::size_t a = policy(state);
    StepOutcome out = env.step(state, a);
    trace.push_back(TraceStep{state.cursor, a, out.next_state.position, out.trade_occurred,
                              out.portfolio_log_return, out.reward});
    if (out.done) break;
    state = std::move(out.next_state);
  }
  return trace;
}

}  // namespace

EvaluationReport summarize_trace(const PositionTrace& trace, const WeightVector& weights) {
  EvaluationReport r;
  if (trace.empty()) return r;
  std::vector<double> lr;
  lr.reserve(trace.size());
  double log_sum = 0.0;
  std::size_t longs = 0;
  for (const auto& s : trace) {
    r.total_reward += weights.dot(s.reward);
    log_sum += s.log_return;
    lr.push_back(s.log_return);
    if (s.position == Position::Long) ++longs;
    if (s.trade) ++r.trades;
  }
  r.total_profit = std::expm1(log_sum);
  r.sharpe = window_sharpe(lr);
  r.long_exposure = static_cast<double>(longs) / static_cast<double>(trace.size());
  return r;
}

EvaluationReport buy_and_hold(const PriceSeries& series, IndexRange range, const EvalSettings& settings,
                              std::string range_id) {
  const TradingEnv env(series, settings.env);
  const std::size_t buy = env.action_space().id_of(Action::Buy);
  const auto trace = trace_actions(env, range, [buy](const EnvState&) { return buy; });
  EvaluationReport r = summarize_trace(trace, settings.weights);
  r.range_id = std::move(range_id);
  r.range = range;
  r.buy_and_hold_profit = r.total_profit;
  r.buy_and_hold_sharpe = r.sharpe;
  return r;
}

Rollout run_policy(const ActionPolicy& policy, const PriceSeries& series, IndexRange range,
                   const EvalSettings& settings, std::string range_id) {
  const TradingEnv env(series, settings.env);
  Rollout out;
  out.trace = trace_actions(env, range, policy);
  out.report = summarize_trace(out.trace, settings.weights);
  out.report.range_id = range_id;
  out.report.range = range;
  const EvaluationReport bh = buy_and_hold(series, range, settings, range_id);
  out.report.buy_and_hold_profit = bh.total_profit;
  out.report.buy_and_hold_sharpe = bh.sharpe;
  return out;
}

Rollout run_policy(const QNetwork& net, const PriceSeries& series, IndexRange range, const EvalSettings& settings,
                   std::string range_id) {
  check_settings(settings, net);
  const PolicySpec spec = settings.policy();
  std::vector<double> input(spec.input_width());
  auto greedy = [&](const EnvState& state) {
    assemble_input(state_features(state, spec), settings.weights, settings.gamma, spec, input);
    return greedy_action(net.forward(input));
  };
  return run_policy(greedy, series, range, settings, std::move(range_id));
}

VectorizedRollout vectorized_rollout(const QNetwork& net, const PriceSeries& series, IndexRange range,
                                     const EvalSettings& settings, std::string range_id) {
  check_settings(settings, net);
  const TradingEnv env(series, settings.env);
  const PolicySpec spec = settings.policy();
  const std::size_t lookback = spec.lookback;
  if (range.end > series.size() || range.size() < lookback + 2)
    throw Error(ErrorCode::RangeTooShort, "range cannot hold the lookback");

  const auto slices = env.action_space().positions();
  const auto lr = env.log_returns();

  VectorizedRollout out;
  QTable& table = out.table;
  table.steps = env.steps_in(range);
  table.positions = slices.size();
  table.actions = spec.action_count();
  table.values.resize(table.steps * table.positions * table.actions);

  // Every row is [w, (gamma), lookback, position]; only the position differs
  // between the slices of a step.
  std::vector<double> head(settings.weights.values.begin(), settings.weights.values.end());
  if (spec.generalize_gamma) head.push_back(settings.gamma);
  std::vector<double> tails(slices.size());
  for (std::size_t p = 0; p < slices.size(); ++p) tails[p] = sign_of(slices[p]);
  std::vector<double> body;
  for (std::size_t t0 = 0; t0 < table.steps; t0 += kChunkSteps) {
    const std::size_t n = std::min(kChunkSteps, table.steps - t0);
    body.resize(n * lookback);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t cursor = range.begin + lookback + t0 + t;
      for (std::size_t j = 0; j < lookback; ++j)
        body[t * lookback + j] = lr[cursor - lookback + 1 + j] * spec.feature_scale;
    }
    net.forward_factored(head, body, n, tails,
                         std::span<double>(table.values.data() + t0 * slices.size() * table.actions,
                                           n * slices.size() * table.actions));
  }

  const std::size_t first_cursor = range.begin + lookback;
  auto from_table = [&](const EnvState& state) {
    return greedy_action(table.at(state.cursor - first_cursor, slice_of(state.position, slices)));
  };
  out.rollout = run_policy(from_table, series, range, settings, std::move(range_id));
  return out;
}

std::optional<SelectionMetric> selection_metric_from_string(std::string_view text) noexcept {
  if (text == "sharpe") return SelectionMetric::Sharpe;
  if (text == "profit" || text == "total_profit") return SelectionMetric::TotalProfit;
  return std::nullopt;
}

std::string_view to_string(SelectionMetric m) noexcept {
  return m == SelectionMetric::Sharpe ? "sharpe" : "profit";
}

std::string_view to_string(RangeId r) noexcept {
  switch (r) {
    case RangeId::Train: return "train";
    case RangeId::Eval: return "eval";
    case RangeId::Test: return "test";
  }
  return "?";
}

std::optional<RangeId> range_id_from_string(std::string_view text) noexcept {
  if (text == "train") return RangeId::Train;
  if (text == "eval") return RangeId::Eval;
  if (text == "test") return RangeId::Test;
  return std::nullopt;
}

double metric_value(const EvaluationReport& report, SelectionMetric metric) noexcept {
  return metric == SelectionMetric::Sharpe ? report.sharpe : report.total_profit;
}

const Checkpoint& select_best_checkpoint(std::span<const Checkpoint> checkpoints, SelectionMetric metric) {
  if (checkpoints.empty()) throw Error(ErrorCode::EmptyCheckpointList, "no checkpoints to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < checkpoints.size(); ++i)
    if (metric_value(checkpoints[i].report(RangeId::Eval), metric) >
        metric_value(checkpoints[best].report(RangeId::Eval), metric))
      best = i;
  return checkpoints[best];
}

}  // namespace mordq
