// Qualitative experiments on the synthetic sine series. Results are noisy RL
// outcomes, so nothing here gates a build.

#include <cstdio>
#include <vector>

#include "CLI11.hpp"
#include "experiment_runs.hpp"

using namespace mordq;
using namespace mordq::experiments;

namespace {

void learning(std::uint64_t seeds) {
  std::printf("seed  beats_b&h_at  best_ep  train_profit  b&h_profit  profit_fee%.2f%%  trades  seconds\n",
              kReferenceFee * 100);
  std::size_t beaten = 0, degraded = 0;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    const LearningRun r = run_learning(seed);
    beaten += r.beats_at.has_value();
    degraded += r.best_train_profit_fee < r.best_train_profit;
    std::printf("%4llu  %12s  %7zu  %12.4g  %10.4g  %15.4g  %6zu  %7.1f\n", static_cast<unsigned long long>(seed),
                r.beats_at ? std::to_string(*r.beats_at).c_str() : "never", r.best_episode, r.best_train_profit,
                r.buy_and_hold_profit, r.best_train_profit_fee, r.best_trades, r.seconds);
  }
  std::printf("beat buy-and-hold: %zu/%llu seeds\n", beaten, static_cast<unsigned long long>(seeds));
  std::printf("fee lowered profit: %zu/%llu seeds\n", degraded, static_cast<unsigned long long>(seeds));
}

void sparse(std::uint64_t seeds) {
  std::vector<double> single, multi;
  std::printf("seed  single_powc  multi_powc\n");
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    single.push_back(run_sparse(seed, false));
    multi.push_back(run_sparse(seed, true));
    std::printf("%4llu  %11.4f  %10.4f\n", static_cast<unsigned long long>(seed), single.back(), multi.back());
  }
  const double ms = median(single), mm = median(multi);
  std::printf("median best-eval POWC: single %.4f  multi %.4f  -> multi %s single\n", ms, mm,
              mm >= ms ? ">=" : "<");
}

void speed(std::size_t steps, int reps) {
  const SpeedSample s = time_rollouts(steps, reps);
  std::printf("steps %zu  naive %.4fs  vectorized %.4fs  speedup %.2fx  identical traces %s\n", steps,
              s.naive_seconds, s.vectorized_seconds, s.naive_seconds / s.vectorized_seconds,
              s.same_trace ? "yes" : "no");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mordq experiments"};
  app.require_subcommand(1);
  std::uint64_t seeds = 10;
  std::size_t steps = 10000;
  int reps = 5;

  auto* learn = app.add_subcommand("learning", "LR-only long/short agent vs buy-and-hold, plus the fee rerun");
  learn->add_option("--seeds", seeds);
  auto* sp = app.add_subcommand("sparse-reward", "multi-reward vs POWC-only, long-only");
  sp->add_option("--seeds", seeds);
  auto* sd = app.add_subcommand("speed", "naive vs vectorized greedy rollout");
  sd->add_option("--steps", steps);
  sd->add_option("--reps", reps);

  CLI11_PARSE(app, argc, argv);
  if (*learn) learning(seeds);
  if (*sp) sparse(seeds);
  if (*sd) speed(steps, reps);
  return 0;
}
