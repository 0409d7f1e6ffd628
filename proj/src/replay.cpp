#include "mordq/replay.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <unordered_map>

#include "mordq/error.hpp"

namespace mordq {

void ReplayBuffer::push(Experience e) {
  e.birth_update = update_counter_;
  items_.push_back(std::move(e));
  evict();
}

void ReplayBuffer::advance_updates(std::uint64_t n) {
  update_counter_ += n;
  evict();
}

void ReplayBuffer::evict() {
  // Births are non-decreasing in insertion order, so over-age items form a prefix.
  while (!items_.empty() && update_counter_ - items_.front().birth_update > max_age_) items_.pop_front();
}

std::uint64_t ReplayBuffer::oldest_age() const noexcept {
  return items_.empty() ? 0 : update_counter_ - items_.front().birth_update;
}

std::vector<Experience> ReplayBuffer::sample_batch(std::size_t batchsize, Rng& rng) const {
  if (batchsize < 1 || batchsize > items_.size())
    throw Error(ErrorCode::BufferTooSmall,
                "batch of " + std::to_string(batchsize) + " from " + std::to_string(items_.size()) + " items");
  // Partial Fisher-Yates over a virtual index array; only swapped slots are stored.
  const std::size_t n = items_.size();
  std::unordered_map<std::size_t, std::size_t> swapped;
  auto slot = [&](std::size_t i) {
    const auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  std::vector<Experience> out;
  out.reserve(batchsize);
  for (std::size_t i = 0; i < batchsize; ++i) {
    const std::size_t j = i + rng.below(n - i);
    const std::size_t picked = slot(j);
    swapped[j] = slot(i);
    out.push_back(items_[picked]);
  }
  return out;
}

RewardMask support_of(const WeightVector& w) noexcept {
  RewardMask m{};
  for (std::size_t i = 0; i < kRewardCount; ++i) m[i] = w.values[i] != 0.0;
  return m;
}

namespace {

template <class Range, class Get>
WhiteningStats whitening_over(const Range& items, Get get, double eigen_floor, const RewardMask& mask) {
  if (items.size() < 2) throw Error(ErrorCode::BufferTooSmall, "whitening needs at least two reward vectors");
  if (!(eigen_floor > 0.0)) throw Error(ErrorCode::InvalidValue, "eigen_floor must be positive");

  const double n = static_cast<double>(items.size());
  WhiteningStats stats;
  for (const auto& item : items) stats.mean += Eigen::Map<const Eigen::Vector4d>(get(item).values.data());
  stats.mean /= n;
  for (const auto& item : items) {
    const Eigen::Vector4d d = Eigen::Map<const Eigen::Vector4d>(get(item).values.data()) - stats.mean;
    stats.covariance.noalias() += d * d.transpose();
  }
  stats.covariance /= (n - 1.0);

  Eigen::Matrix4d active = stats.covariance;
  for (Eigen::Index i = 0; i < 4; ++i) {
    if (mask[static_cast<std::size_t>(i)]) continue;
    active.row(i).setZero();
    active.col(i).setZero();
    active(i, i) = 1.0;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(active);
  Eigen::Vector4d scale = solver.eigenvalues();
  for (Eigen::Index i = 0; i < 4; ++i) scale(i) = 1.0 / std::sqrt(std::max(scale(i), eigen_floor));
  const Eigen::Matrix4d& v = solver.eigenvectors();
  const Eigen::Matrix4d m = v * scale.asDiagonal() * v.transpose();
  // Exact symmetry; the product is symmetric only up to rounding.
  stats.inv_sqrt = 0.5 * (m + m.transpose());
  return stats;
}

}  // namespace

WhiteningStats compute_whitening(std::span<const RewardVector> rewards, double eigen_floor, const RewardMask& mask) {
  return whitening_over(rewards, [](const RewardVector& r) -> const RewardVector& { return r; }, eigen_floor, mask);
}

WhiteningStats compute_whitening(const ReplayBuffer& buffer, double eigen_floor, const RewardMask& mask) {
  return whitening_over(buffer.items(), [](const Experience& e) -> const RewardVector& { return e.raw_reward; },
                        eigen_floor, mask);
}

std::vector<Experience> whiten_batch(std::vector<Experience> batch, const WhiteningStats& stats) {
  for (auto& e : batch) {
    const double norm = e.weights.norm2();
    const Eigen::Vector4d r = Eigen::Map<const Eigen::Vector4d>(e.raw_reward.values.data());
    const Eigen::Vector4d rt = stats.inv_sqrt * r / norm;
    for (std::size_t i = 0; i < kRewardCount; ++i) e.raw_reward.values[i] = rt(static_cast<Eigen::Index>(i));
    e.scalar_reward = e.weights.dot(e.raw_reward);
  }
  return batch;
}

}  // namespace mordq
