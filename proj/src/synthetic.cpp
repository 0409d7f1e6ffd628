#include "mordq/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "mordq/error.hpp"
#include "mordq/rng.hpp"

namespace mordq {

std::string_view to_string(SyntheticKind kind) noexcept {
  switch (kind) {
    case SyntheticKind::Sine: return "sine";
    case SyntheticKind::Trend: return "trend";
    case SyntheticKind::RandomWalk: return "random-walk";
  }
  return "sine";
}

std::optional<SyntheticKind> synthetic_kind_from_string(std::string_view text) noexcept {
  if (text == "sine") return SyntheticKind::Sine;
  if (text == "trend") return SyntheticKind::Trend;
  if (text == "random-walk" || text == "random_walk") return SyntheticKind::RandomWalk;
  return std::nullopt;
}

PriceSeries generate_synthetic(const SyntheticSpec& spec) {
  if (spec.length < 2) throw Error(ErrorCode::InvalidValue, "synthetic.length: need at least 2 points");
  if (!(spec.base > 0.0) || !std::isfinite(spec.base)) throw Error(ErrorCode::InvalidValue, "synthetic.base: must be positive");
  if (!(spec.amplitude >= 0.0 && spec.amplitude < 1.0))
    throw Error(ErrorCode::InvalidValue, "synthetic.amplitude: must lie in [0, 1)");
  if (!(spec.period > 0.0)) throw Error(ErrorCode::InvalidValue, "synthetic.period: must be positive");
  if (!(spec.volatility >= 0.0)) throw Error(ErrorCode::InvalidValue, "synthetic.volatility: must be non-negative");
  if (!std::isfinite(spec.drift)) throw Error(ErrorCode::InvalidValue, "synthetic.drift: must be finite");

  PriceSeries s;
  s.asset_id = std::string("synthetic-") + std::string(to_string(spec.kind));
  s.timestamps.reserve(spec.length);
  s.close.reserve(spec.length);
  const Instant origin{std::chrono::sys_days{std::chrono::year{2020} / 1 / 1}};
  Rng rng(spec.seed, "synthetic");
  double log_price = std::log(spec.base);
  for (std::size_t t = 0; t < spec.length; ++t) {
    s.timestamps.push_back(origin + std::chrono::hours(t));
    const double td = static_cast<double>(t);
    switch (spec.kind) {
      case SyntheticKind::Sine:
        s.close.push_back(spec.base * (1.0 + spec.amplitude * std::sin(2.0 * std::numbers::pi * td / spec.period)));
        break;
      case SyntheticKind::Trend:
        s.close.push_back(spec.base * std::exp(spec.drift * td));
        break;
      case SyntheticKind::RandomWalk:
        if (t > 0) log_price += spec.drift + spec.volatility * rng.normal();
        s.close.push_back(std::exp(log_price));
        break;
    }
  }
  s.validate();
  return s;
}

}  // namespace mordq
