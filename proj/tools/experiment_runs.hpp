#pragma once

// Scaled-down learning experiments on the synthetic sine series, shared by
// mordq_experiments and the acceptance runner.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "mordq/agent.hpp"
#include "mordq/synthetic.hpp"

namespace mordq::experiments {

// 5000 points, period 50, amplitude 10%.
inline PriceSeries sine_series() { return generate_synthetic(SyntheticSpec{}); }

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Long/short, no fee, LR-only single reward.
inline TrainConfig learning_config(std::uint64_t seed) {
  TrainConfig c;
  c.mode = TradingMode::LongShort;
  c.multi_reward = false;
  c.single_reward = RewardKind::Lr;
  c.fee = 0.0;
  c.episodes = 300;
  c.update_episodes = *EpisodeSet::parse("every 10");
  c.random_access = true;
  c.episode_len = 100;
  c.seed = seed;
  return c;
}

struct LearningRun {
  std::uint64_t seed = 0;
  std::optional<std::size_t> beats_at;  // first checkpoint whose train profit beats buy-and-hold
  std::size_t best_episode = 0;         // best by eval Sharpe
  double best_train_profit = 0.0;
  double buy_and_hold_profit = 0.0;
  double best_train_profit_fee = 0.0;   // same policy rerun with fee
  std::size_t best_trades = 0;
  double seconds = 0.0;
};

inline constexpr double kReferenceFee = 0.0003;

inline LearningRun run_learning(std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const PriceSeries series = sine_series();
  const DataSplit split = make_split(series);
  const TrainConfig config = learning_config(seed);
  const TrainResult result = train(config, series, split);

  LearningRun run;
  run.seed = seed;
  for (const Checkpoint& ck : result.checkpoints) {
    const EvaluationReport& r = ck.report(RangeId::Train);
    if (r.total_profit > r.buy_and_hold_profit) {
      run.beats_at = ck.episode;
      break;
    }
  }
  const Checkpoint& best = select_best_checkpoint(result.checkpoints, SelectionMetric::Sharpe);
  run.best_episode = best.episode;
  run.best_train_profit = best.report(RangeId::Train).total_profit;
  run.buy_and_hold_profit = best.report(RangeId::Train).buy_and_hold_profit;
  run.best_trades = best.report(RangeId::Train).trades;

  TrainConfig with_fee = config;
  with_fee.fee = kReferenceFee;
  const EvalSettings settings = evaluation_settings(with_fee, best.spec.feature_scale);
  run.best_train_profit_fee = run_policy(best.net, series, split.train, settings).report.total_profit;
  run.seconds = seconds_since(t0);
  return run;
}

// Long-only; the POWC component is what gets reported.
inline TrainConfig sparse_config(std::uint64_t seed, bool multi) {
  TrainConfig c;
  c.mode = TradingMode::LongOnly;
  c.multi_reward = multi;
  c.single_reward = RewardKind::Powc;
  c.eval_weights = WeightVector::one_hot(RewardKind::Powc);
  c.episodes = 50;
  c.update_episodes = *EpisodeSet::parse("every 5");
  c.random_access = true;
  c.episode_len = 200;
  c.seed = seed;
  return c;
}

// Best eval-range total POWC reward over the run's checkpoints.
inline double run_sparse(std::uint64_t seed, bool multi) {
  const PriceSeries series = sine_series();
  const TrainResult result = train(sparse_config(seed, multi), series, make_split(series));
  double best = result.checkpoints.front().report(RangeId::Eval).total_reward;
  for (const Checkpoint& ck : result.checkpoints) best = std::max(best, ck.report(RangeId::Eval).total_reward);
  return best;
}

struct SpeedSample {
  double naive_seconds = 0.0;
  double vectorized_seconds = 0.0;
  bool same_trace = false;
};

// Best of `reps` timings of both rollouts with the default architecture.
inline SpeedSample time_rollouts(std::size_t steps, int reps) {
  TrainConfig config;
  SyntheticSpec spec;
  spec.kind = SyntheticKind::RandomWalk;
  spec.length = steps + config.lookback + 1;
  const PriceSeries series = generate_synthetic(spec);
  const IndexRange range{0, series.size()};
  const EvalSettings settings = evaluation_settings(config, resolve_feature_scale(config, series, range));
  const QNetwork net = init_network(config.network_widths(), config.seed);

  SpeedSample s;
  s.naive_seconds = s.vectorized_seconds = 1e300;
  Rollout naive;
  VectorizedRollout fast;
  for (int i = 0; i < reps; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    naive = run_policy(net, series, range, settings);
    s.naive_seconds = std::min(s.naive_seconds, seconds_since(t0));
    t0 = std::chrono::steady_clock::now();
    fast = vectorized_rollout(net, series, range, settings);
    s.vectorized_seconds = std::min(s.vectorized_seconds, seconds_since(t0));
  }
  s.same_trace = naive.trace == fast.rollout.trace && naive.trace.size() == steps;
  return s;
}

}  // namespace mordq::experiments
