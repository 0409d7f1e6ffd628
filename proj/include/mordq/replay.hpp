#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "mordq/rewards.hpp"
#include "mordq/rng.hpp"

namespace mordq {

struct Experience {
  std::vector<double> state;       // feature row of s (see state_features)
  double gamma = 0.95;
  WeightVector weights;
  RewardVector raw_reward;         // kept so rewards can be whitened at sampling time
  double scalar_reward = 0.0;      // weights . raw_reward
  std::size_t action = 0;
  std::vector<double> next_state;  // feature row of s_new
  bool terminal = false;
  std::uint64_t birth_update = 0;
};

// Age-bounded replay. Age is counted in network updates since insertion, so
// runs that push more experiences per step (hindsight) simply hold more.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::uint64_t max_age) : max_age_(max_age) {}

  void push(Experience e);
  void advance_updates(std::uint64_t n);

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  const std::deque<Experience>& items() const noexcept { return items_; }
  std::uint64_t max_age() const noexcept { return max_age_; }
  std::uint64_t update_counter() const noexcept { return update_counter_; }
  // Largest update_counter - birth_update over stored items (0 when empty).
  std::uint64_t oldest_age() const noexcept;

  // Uniform sample without replacement.
  std::vector<Experience> sample_batch(std::size_t batchsize, Rng& rng) const;

 private:
  void evict();

  std::deque<Experience> items_;
  std::uint64_t max_age_;
  std::uint64_t update_counter_ = 0;
};

// Which reward components take part in whitening. Components outside the mask
// pass through unscaled and uncoupled.
using RewardMask = std::array<bool, kRewardCount>;
inline constexpr RewardMask kAllRewards{true, true, true, true};
// Components with non-zero weight.
RewardMask support_of(const WeightVector& w) noexcept;

struct WhiteningStats {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();  // unbiased (n-1) sample covariance
  Eigen::Matrix4d inv_sqrt = Eigen::Matrix4d::Identity();
};

inline constexpr double kDefaultEigenFloor = 1e-8;

// Covariance of the raw reward vectors and its inverse square root from a
// symmetric eigendecomposition, eigenvalues clamped to eigen_floor first.
WhiteningStats compute_whitening(std::span<const RewardVector> rewards, double eigen_floor = kDefaultEigenFloor,
                                 const RewardMask& mask = kAllRewards);
WhiteningStats compute_whitening(const ReplayBuffer& buffer, double eigen_floor = kDefaultEigenFloor,
                                 const RewardMask& mask = kAllRewards);

// r~ = inv_sqrt * r / ||w||_2 and scalar_reward = w . r~, per experience.
std::vector<Experience> whiten_batch(std::vector<Experience> batch, const WhiteningStats& stats);

}  // namespace mordq
