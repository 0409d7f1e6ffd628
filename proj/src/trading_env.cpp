#include "mordq/trading_env.hpp"

#include <array>
#include <cmath>

#include "mordq/error.hpp"

namespace mordq {

namespace {

constexpr std::array<Action, 2> kLongOnlyActions{Action::Buy, Action::Hold};
constexpr std::array<Action, 3> kLongShortActions{Action::Buy, Action::Sell, Action::Hold};
constexpr std::array<Position, 2> kLongOnlyPositions{Position::Neutral, Position::Long};
constexpr std::array<Position, 3> kLongShortPositions{Position::Neutral, Position::Long, Position::Short};

}  // namespace

std::string_view to_string(TradingMode mode) noexcept {
  return mode == TradingMode::LongOnly ? "LP" : "LSP";
}

std::optional<TradingMode> trading_mode_from_string(std::string_view text) noexcept {
  if (text == "LP" || text == "lp") return TradingMode::LongOnly;
  if (text == "LSP" || text == "lsp" || text == "L&SP") return TradingMode::LongShort;
  return std::nullopt;
}

std::string_view to_string(Action a) noexcept {
  switch (a) {
    case Action::Buy: return "Buy";
    case Action::Sell: return "Sell";
    case Action::Hold: return "Hold";
  }
  return "?";
}

std::span<const Action> ActionSpace::actions() const noexcept {
  if (mode_ == TradingMode::LongOnly) return kLongOnlyActions;
  return kLongShortActions;
}

Action ActionSpace::action(std::size_t id) const {
  const auto list = actions();
  if (id >= list.size())
    throw Error(ErrorCode::InvalidActionForMode,
                "action id " + std::to_string(id) + " in mode " + std::string(to_string(mode_)));
  return list[id];
}

std::size_t ActionSpace::id_of(Action a) const {
  const auto list = actions();
  for (std::size_t i = 0; i < list.size(); ++i)
    if (list[i] == a) return i;
  throw Error(ErrorCode::InvalidActionForMode,
              std::string(to_string(a)) + " in mode " + std::string(to_string(mode_)));
}

std::span<const Position> ActionSpace::positions() const noexcept {
  if (mode_ == TradingMode::LongOnly) return kLongOnlyPositions;
  return kLongShortPositions;
}

Position position_transition(Position /*current*/, Action action, TradingMode mode) {
  switch (action) {
    case Action::Buy: return Position::Long;
    case Action::Hold: return Position::Neutral;
    case Action::Sell:
      if (mode == TradingMode::LongOnly)
        throw Error(ErrorCode::InvalidActionForMode, "Sell is not available in LP mode");
      return Position::Short;
  }
  throw Error(ErrorCode::InvalidActionForMode, "unknown action");
}

TradingEnv::TradingEnv(const PriceSeries& series, EnvConfig config)
    : series_(&series), config_(config), actions_(config.mode) {
  if (config_.lookback < 1) throw Error(ErrorCode::InvalidValue, "lookback must be >= 1");
  if (config_.window < 1) throw Error(ErrorCode::InvalidValue, "window must be >= 1");
  if (!(config_.fee >= 0.0 && config_.fee < 1.0)) throw Error(ErrorCode::InvalidValue, "fee must lie in [0, 1)");
  log_returns_.assign(series.size(), 0.0);
  for (std::size_t t = 1; t < series.size(); ++t)
    log_returns_[t] = std::log(series.close[t]) - std::log(series.close[t - 1]);
}

std::size_t TradingEnv::steps_in(IndexRange range) const {
  const std::size_t need = config_.lookback + 2;
  if (range.size() < need) return 0;
  return range.size() - config_.lookback - 1;
}

EnvState TradingEnv::reset(IndexRange range, bool random_access, std::size_t episode_len, Rng* rng) const {
  const std::size_t l = config_.lookback;
  if (range.end > series_->size() || range.size() < l + 2)
    throw Error(ErrorCode::RangeTooShort, "range of " + std::to_string(range.size()) +
                                               " indices cannot hold lookback " + std::to_string(l));
  IndexRange episode = range;
  if (random_access) {
    if (episode_len < 1 || episode_len + l + 1 > range.size())
      throw Error(ErrorCode::RangeTooShort, "episode_len " + std::to_string(episode_len) +
                                                 " does not fit in range of " + std::to_string(range.size()));
    if (rng == nullptr) throw Error(ErrorCode::InvalidValue, "random access requires an rng stream");
    const std::size_t span_len = episode_len + l + 1;
    const std::size_t starts = range.size() - span_len + 1;
    episode.begin = range.begin + rng->below(starts);
    episode.end = episode.begin + span_len;
  }

  EnvState s;
  s.cursor = episode.begin + l;
  s.episode_end = episode.end;
  s.position = Position::Neutral;
  s.lookback.assign(log_returns_.begin() + static_cast<std::ptrdiff_t>(episode.begin + 1),
                    log_returns_.begin() + static_cast<std::ptrdiff_t>(s.cursor + 1));
  s.returns = ReturnTrace(config_.window);
  return s;
}

StepOutcome TradingEnv::step(const EnvState& state, std::size_t action_id) const {
  const std::size_t t = state.cursor;
  if (t + 1 >= state.episode_end || t + 1 >= series_->size())
    throw Error(ErrorCode::EpisodeExhausted, "cursor " + std::to_string(t));

  const Position next = position_transition(state.position, actions_.action(action_id), config_.mode);
  const bool trade = next != state.position;

  std::optional<CloseEvent> close;
  if (trade && state.position != Position::Neutral) {
    const std::size_t anchor = state.trade_anchor.value_or(t);
    close = CloseEvent{state.position, series_->close[anchor], series_->close[t]};
  }

  double plr = next == Position::Neutral ? 0.0 : sign_of(next) * log_returns_[t + 1];
  if (trade && config_.fee > 0.0) {
    const int legs = (state.position != Position::Neutral && next != Position::Neutral) ? 2 : 1;
    plr += legs * std::log1p(-config_.fee);
  }

  StepOutcome out;
  EnvState& ns = out.next_state;
  ns.lookback.resize(state.lookback.size());
  std::copy(state.lookback.begin() + 1, state.lookback.end(), ns.lookback.begin());
  ns.lookback.back() = log_returns_[t + 1];
  ns.position = next;
  ns.cursor = t + 1;
  ns.trade_anchor = trade ? std::optional<std::size_t>(t) : state.trade_anchor;
  ns.episode_end = state.episode_end;
  ns.returns = state.returns;
  ns.returns.push(plr);

  out.reward = reward_vector(ns.returns, close);
  out.portfolio_log_return = plr;
  out.trade_occurred = trade;
  out.done = ns.cursor + 1 == state.episode_end;
  return out;
}

}  // namespace mordq
