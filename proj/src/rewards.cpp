#include "mordq/rewards.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace mordq {

std::string_view to_string(Position p) noexcept {
  switch (p) {
    case Position::Long: return "Long";
    case Position::Short: return "Short";
    case Position::Neutral: return "Neutral";
  }
  return "?";
}

std::string_view to_string(RewardKind kind) noexcept {
  switch (kind) {
    case RewardKind::Lr: return "lr";
    case RewardKind::Alr: return "alr";
    case RewardKind::Sr: return "sr";
    case RewardKind::Powc: return "powc";
  }
  return "?";
}

std::optional<RewardKind> reward_kind_from_string(std::string_view name) noexcept {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "lr") return RewardKind::Lr;
  if (lower == "alr") return RewardKind::Alr;
  if (lower == "sr") return RewardKind::Sr;
  if (lower == "powc") return RewardKind::Powc;
  return std::nullopt;
}

WeightVector WeightVector::one_hot(RewardKind k) noexcept {
  WeightVector w;
  w.values[static_cast<std::size_t>(k)] = 1.0;
  return w;
}

WeightVector WeightVector::uniform() noexcept {
  return WeightVector{{0.25, 0.25, 0.25, 0.25}};
}

double WeightVector::dot(const RewardVector& r) const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < kRewardCount; ++i) s += values[i] * r.values[i];
  return s;
}

double WeightVector::norm2() const noexcept {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

bool WeightVector::on_simplex(double tol) const noexcept {
  double s = 0.0;
  for (double v : values) {
    if (!(v >= 0.0)) return false;
    s += v;
  }
  return std::abs(s - 1.0) <= tol;
}

ReturnTrace::ReturnTrace(std::size_t window) : values_(std::max<std::size_t>(window, 1), 0.0) {}

void ReturnTrace::push(double log_return) {
  std::shift_left(values_.begin(), values_.end(), 1);
  values_.back() = log_return;
}

double window_mean(std::span<const double> values) noexcept {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double window_std(std::span<const double> values) noexcept {
  if (values.empty()) return 0.0;
  const double m = window_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

double window_sharpe(std::span<const double> values) noexcept {
  const double sd = window_std(values);
  if (sd < kStdFloor) return 0.0;
  return window_mean(values) / sd;
}

double reward_lr(const ReturnTrace& trace) noexcept { return trace.last(); }
double reward_alr(const ReturnTrace& trace) noexcept { return window_mean(trace.values()); }
double reward_sr(const ReturnTrace& trace) noexcept { return window_sharpe(trace.values()); }

double reward_powc(const std::optional<CloseEvent>& close) noexcept {
  if (!close || close->closed == Position::Neutral) return 0.0;
  return sign_of(close->closed) * (std::log(close->close_price) - std::log(close->open_price));
}

RewardVector reward_vector(const ReturnTrace& trace, const std::optional<CloseEvent>& close) noexcept {
  return RewardVector{{reward_lr(trace), reward_alr(trace), reward_sr(trace), reward_powc(close)}};
}

}  // namespace mordq
