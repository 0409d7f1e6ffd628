#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mordq {

enum class Position : int { Short = -1, Neutral = 0, Long = 1 };

constexpr double sign_of(Position p) noexcept { return static_cast<double>(static_cast<int>(p)); }
std::string_view to_string(Position p) noexcept;

// Component order is a public contract: weight vectors, reports and the CLI
// all index rewards as (lr, alr, sr, powc).
enum class RewardKind : std::size_t { Lr = 0, Alr = 1, Sr = 2, Powc = 3 };
inline constexpr std::size_t kRewardCount = 4;

std::string_view to_string(RewardKind kind) noexcept;
// Accepts "lr", "alr", "sr", "powc" (case-insensitive).
std::optional<RewardKind> reward_kind_from_string(std::string_view name) noexcept;

struct RewardVector {
  std::array<double, kRewardCount> values{};

  double& operator[](RewardKind k) noexcept { return values[static_cast<std::size_t>(k)]; }
  double operator[](RewardKind k) const noexcept { return values[static_cast<std::size_t>(k)]; }
  double lr() const noexcept { return values[0]; }
  double alr() const noexcept { return values[1]; }
  double sr() const noexcept { return values[2]; }
  double powc() const noexcept { return values[3]; }
  friend bool operator==(const RewardVector&, const RewardVector&) = default;
};

// Non-negative weights on the unit simplex, same order as RewardVector.
struct WeightVector {
  std::array<double, kRewardCount> values{};

  static WeightVector one_hot(RewardKind k) noexcept;
  static WeightVector uniform() noexcept;

  double operator[](std::size_t i) const noexcept { return values[i]; }
  double dot(const RewardVector& r) const noexcept;
  double norm2() const noexcept;
  // Components >= 0 and summing to 1 within tol.
  bool on_simplex(double tol = 1e-9) const noexcept;
  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

// Rolling window of the last L per-step portfolio log-returns, oldest first.
// Left-padded with zeros until L steps have elapsed.
class ReturnTrace {
 public:
  explicit ReturnTrace(std::size_t window = 1);

  void push(double log_return);
  std::size_t window() const noexcept { return values_.size(); }
  double last() const noexcept { return values_.back(); }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

// Position closed on this step, priced at its open and at the execution close.
struct CloseEvent {
  Position closed = Position::Neutral;
  double open_price = 1.0;
  double close_price = 1.0;
};

// Degenerate-std threshold shared by the SR reward and the Sharpe metric.
inline constexpr double kStdFloor = 1e-12;

double window_mean(std::span<const double> values) noexcept;
// Population standard deviation.
double window_std(std::span<const double> values) noexcept;
// mean/std, or 0 when std < kStdFloor.
double window_sharpe(std::span<const double> values) noexcept;

double reward_lr(const ReturnTrace& trace) noexcept;
double reward_alr(const ReturnTrace& trace) noexcept;
double reward_sr(const ReturnTrace& trace) noexcept;
double reward_powc(const std::optional<CloseEvent>& close) noexcept;
RewardVector reward_vector(const ReturnTrace& trace, const std::optional<CloseEvent>& close) noexcept;

}  // namespace mordq
