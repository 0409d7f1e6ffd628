#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mordq/market_data.hpp"
#include "mordq/rewards.hpp"
#include "mordq/rng.hpp"

namespace mordq {

// LP: long positions only. LSP: long and short positions.
enum class TradingMode { LongOnly, LongShort };

std::string_view to_string(TradingMode mode) noexcept;
// Accepts "LP" and "LSP" (also "L&SP").
std::optional<TradingMode> trading_mode_from_string(std::string_view text) noexcept;

// Actions name the position to hold next: Buy -> Long, Sell -> Short,
// Hold -> Neutral.
enum class Action { Buy, Sell, Hold };

std::string_view to_string(Action a) noexcept;

// Ordered action list of a mode. The action id used by the Q-network is the
// index into this list: LP = [Buy, Hold], LSP = [Buy, Sell, Hold].
class ActionSpace {
 public:
  explicit ActionSpace(TradingMode mode) noexcept : mode_(mode) {}

  TradingMode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return mode_ == TradingMode::LongOnly ? 2 : 3; }
  std::span<const Action> actions() const noexcept;
  // Throws InvalidActionForMode for ids outside the list.
  Action action(std::size_t id) const;
  std::size_t id_of(Action a) const;
  // Positions reachable in this mode, in slice order used by Q tables.
  std::span<const Position> positions() const noexcept;

 private:
  TradingMode mode_;
};

Position position_transition(Position current, Action action, TradingMode mode);

struct EnvConfig {
  std::size_t lookback = 30;  // number of log returns in the state
  std::size_t window = 20;    // ALR/SR window
  TradingMode mode = TradingMode::LongShort;
  double fee = 0.0;           // per-leg fraction in [0, 1)
};

struct EnvState {
  std::vector<double> lookback;  // oldest first, last = ln z[cursor] - ln z[cursor-1]
  Position position = Position::Neutral;
  std::size_t cursor = 0;
  std::optional<std::size_t> trade_anchor;
  std::size_t episode_end = 0;  // exclusive end of the episode's index range
  ReturnTrace returns;
};

struct StepOutcome {
  EnvState next_state;
  RewardVector reward;
  double portfolio_log_return = 0.0;
  bool done = false;
  bool trade_occurred = false;
};

// Deterministic environment over an immutable price series. It holds no
// per-episode mutable state, so a state can be stepped counterfactually.
// The series must outlive the environment.
class TradingEnv {
 public:
  TradingEnv(const PriceSeries& series, EnvConfig config);

  const EnvConfig& config() const noexcept { return config_; }
  const ActionSpace& action_space() const noexcept { return actions_; }
  const PriceSeries& series() const noexcept { return *series_; }
  // lr[t] = ln z[t] - ln z[t-1]; lr[0] = 0.
  std::span<const double> log_returns() const noexcept { return log_returns_; }

  // Without random access the episode covers the whole range; with it, a
  // sub-range of episode_len + lookback + 1 indices starting uniformly at
  // random. The rng is only touched when random_access is set.
  EnvState reset(IndexRange range, bool random_access = false, std::size_t episode_len = 0,
                 Rng* rng = nullptr) const;

  StepOutcome step(const EnvState& state, std::size_t action_id) const;

  // Number of steps an episode over `range` takes without random access.
  std::size_t steps_in(IndexRange range) const;

 private:
  const PriceSeries* series_;
  EnvConfig config_;
  ActionSpace actions_;
  std::vector<double> log_returns_;
};

}  // namespace mordq
