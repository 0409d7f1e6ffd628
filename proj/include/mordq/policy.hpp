#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mordq/rewards.hpp"
#include "mordq/trading_env.hpp"

namespace mordq {

// How an environment state plus conditioning (w, gamma) becomes a network
// input row: [w_lr, w_alr, w_sr, w_powc, (gamma), lookback * feature_scale, position].
struct PolicySpec {
  TradingMode mode = TradingMode::LongShort;
  std::size_t lookback = 30;
  double feature_scale = 1.0;
  bool generalize_gamma = false;

  std::size_t feature_width() const noexcept { return lookback + 1; }
  std::size_t input_width() const noexcept { return lookback + 1 + kRewardCount + (generalize_gamma ? 1 : 0); }
  std::size_t action_count() const noexcept { return ActionSpace(mode).size(); }
  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

// State part of the input row (lookback and position), as stored in replay.
std::vector<double> state_features(const EnvState& state, const PolicySpec& spec);

// Writes one full input row into `out` (size spec.input_width()).
void assemble_input(std::span<const double> features, const WeightVector& w, double gamma,
                    const PolicySpec& spec, std::span<double> out);
std::vector<double> assemble_input(std::span<const double> features, const WeightVector& w, double gamma,
                                   const PolicySpec& spec);

}  // namespace mordq

namespace mordq {

// Index of the largest value; ties go to the lowest index.
std::size_t greedy_action(std::span<const double> q) noexcept;

}  // namespace mordq
