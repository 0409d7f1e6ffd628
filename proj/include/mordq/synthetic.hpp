#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "mordq/market_data.hpp"

namespace mordq {

enum class SyntheticKind { Sine, Trend, RandomWalk };
std::string_view to_string(SyntheticKind kind) noexcept;
std::optional<SyntheticKind> synthetic_kind_from_string(std::string_view text) noexcept;

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::Sine;
  std::size_t length = 5000;
  double amplitude = 0.1;  // sine only, must stay below 1
  double period = 50.0;    // sine only, in steps
  double base = 100.0;
  double drift = 0.0;       // per-step log drift (trend, random-walk)
  double volatility = 0.01; // per-step log-return std (random-walk)
  std::uint64_t seed = 1;
  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

// Hourly timestamps starting 2020-01-01T00:00Z.
//   sine:        z_t = base * (1 + amplitude * sin(2 pi t / period))
//   trend:       z_t = base * exp(drift * t)
//   random-walk: ln z_t = ln z_{t-1} + drift + volatility * N(0, 1)
PriceSeries generate_synthetic(const SyntheticSpec& spec);

}  // namespace mordq
