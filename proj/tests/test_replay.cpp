#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mordq/error.hpp"
#include "mordq/replay.hpp"

using namespace mordq;

namespace {

Experience exp_with(double lr, std::size_t tag = 0) {
  Experience e;
  e.raw_reward.values = {lr, 0, 0, 0};
  e.weights = WeightVector::one_hot(RewardKind::Lr);
  e.scalar_reward = lr;
  e.action = tag;
  return e;
}

std::vector<RewardVector> gaussian_rewards(std::size_t n, const Eigen::Matrix4d& mix, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d;
  std::vector<RewardVector> out(n);
  for (auto& r : out) {
    Eigen::Vector4d z;
    for (int i = 0; i < 4; ++i) z(i) = d(gen);
    const Eigen::Vector4d x = mix * z;
    for (int i = 0; i < 4; ++i) r.values[static_cast<std::size_t>(i)] = x(i);
  }
  return out;
}

double sample_variance(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(ReplayBuffer, PushAndAgeBoundary) {
  ReplayBuffer b(5);
  b.push(exp_with(1));
  EXPECT_EQ(b.size(), 1u);
  b.advance_updates(0);
  EXPECT_EQ(b.size(), 1u);
  b.advance_updates(5);
  EXPECT_EQ(b.size(), 1u);
  b.advance_updates(1);
  EXPECT_EQ(b.size(), 0u);
}

TEST(ReplayBuffer, MixedAgesEvictExactlyThePrefix) {
  ReplayBuffer b(3);
  // births 0, 1, 2, 4, 6
  b.push(exp_with(0, 0));
  b.advance_updates(1);
  b.push(exp_with(0, 1));
  b.advance_updates(1);
  b.push(exp_with(0, 2));
  b.advance_updates(2);
  b.push(exp_with(0, 3));
  b.advance_updates(2);
  b.push(exp_with(0, 4));
  // counter 6: ages 6, 5, 4, 2, 0 -> the first three are over age
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b.items()[0].action, 3u);
  EXPECT_EQ(b.items()[1].action, 4u);
  EXPECT_EQ(b.oldest_age(), 2u);
}

TEST(ReplayBuffer, AgeBoundAfterEveryPass) {
  ReplayBuffer b(17);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 2000; ++i) {
    for (std::uint64_t k = gen() % 4; k > 0; --k) b.push(exp_with(0));
    b.advance_updates(gen() % 3);
    for (const auto& e : b.items()) EXPECT_LE(b.update_counter() - e.birth_update, 17u);
  }
}

TEST(ReplayBuffer, InsertionOrderPreserved) {
  ReplayBuffer b(100);
  for (std::size_t i = 0; i < 10; ++i) b.push(exp_with(0, i));
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(b.items()[i].action, i);
}

TEST(SampleBatch, WholeBufferAndDeterminismAndTooSmall) {
  ReplayBuffer b(100);
  for (std::size_t i = 0; i < 8; ++i) b.push(exp_with(0, i));
  Rng r1(9), r2(9);
  const auto all = b.sample_batch(8, r1);
  std::vector<std::size_t> ids;
  for (const auto& e : all) ids.push_back(e.action);
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}));
  Rng r3(9);
  const auto again = b.sample_batch(8, r3);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(all[i].action, again[i].action);
  try {
    b.sample_batch(9, r2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BufferTooSmall);
  }
}

TEST(SampleBatch, NoReplacementAndUniformMarginals) {
  ReplayBuffer b(100);
  for (std::size_t i = 0; i < 10; ++i) b.push(exp_with(0, i));
  Rng rng(1);
  std::vector<double> hits(10, 0);
  const int draws = 100000;
  for (int d = 0; d < draws; ++d) {
    const auto batch = b.sample_batch(3, rng);
    EXPECT_NE(batch[0].action, batch[1].action);
    EXPECT_NE(batch[0].action, batch[2].action);
    EXPECT_NE(batch[1].action, batch[2].action);
    for (const auto& e : batch) hits[e.action] += 1;
  }
  const double p = 0.3;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (double h : hits) EXPECT_NEAR(h, draws * p, 3 * sigma);
}

TEST(Whitening, IdentityCovarianceGivesIdentity) {
  // +-e_i pairs: zero mean and unbiased covariance exactly I for this layout.
  std::vector<RewardVector> rs;
  for (int rep = 0; rep < 1; ++rep)
    for (std::size_t i = 0; i < 4; ++i)
      for (double s : {1.0, -1.0}) {
        RewardVector r;
        r.values[i] = s * std::sqrt(7.0 / 2.0);
        rs.push_back(r);
      }
  const WhiteningStats st = compute_whitening(rs);
  EXPECT_TRUE(st.covariance.isApprox(Eigen::Matrix4d::Identity(), 1e-12));
  EXPECT_TRUE((st.inv_sqrt - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST(Whitening, VarianceFourHalves) {
  std::vector<RewardVector> rs;
  for (int i = 0; i < 1000; ++i) {
    RewardVector r;
    r.values = {i % 2 ? 2.0 : -2.0, 0, 0, 0};
    rs.push_back(r);
  }
  // Population variance 4 on lr; unbiased factor n/(n-1).
  const WhiteningStats st = compute_whitening(rs, kDefaultEigenFloor, support_of(WeightVector::one_hot(RewardKind::Lr)));
  const double var = 4.0 * 1000.0 / 999.0;
  EXPECT_NEAR(st.inv_sqrt(0, 0), 1.0 / std::sqrt(var), 1e-12);
  Experience e = exp_with(1.0);
  const auto out = whiten_batch({e}, st);
  EXPECT_NEAR(out[0].scalar_reward, 1.0 / std::sqrt(var), 1e-12);
}

TEST(Whitening, IndependentComponentsAndOneHotHalving) {
  Eigen::Matrix4d mix = Eigen::Matrix4d::Zero();
  mix.diagonal() << 2.0, 1.0, 0.5, 3.0;
  const auto rs = gaussian_rewards(200000, mix, 4);
  const WhiteningStats st = compute_whitening(rs);
  EXPECT_NEAR(st.inv_sqrt(0, 0), 0.5, 5e-3);
  EXPECT_NEAR(st.inv_sqrt(0, 1), 0.0, 5e-3);
  const auto out = whiten_batch({exp_with(1.0)}, st);
  EXPECT_NEAR(out[0].scalar_reward, 0.5, 5e-3);
}

TEST(Whitening, DegenerateClampsToFloor) {
  std::vector<RewardVector> rs(10);
  for (auto& r : rs) r.values = {0.3, 0.1, -0.2, 0.0};
  const WhiteningStats st = compute_whitening(rs, 1e-8);
  EXPECT_TRUE((st.inv_sqrt - 1e4 * Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-6);
  EXPECT_THROW(compute_whitening(std::span<const RewardVector>(rs.data(), 1)), Error);
}

TEST(Whitening, UnitVarianceProjections) {
  Eigen::Matrix4d mix;
  mix << 1.0, 0.2, 0.0, 0.1, 0.3, 0.8, 0.1, 0.0, 0.0, 0.4, 0.5, 0.2, 0.1, 0.0, 0.3, 0.9;
  const auto rs = gaussian_rewards(5000, mix, 8);
  const WhiteningStats st = compute_whitening(rs);
  std::mt19937_64 gen(2);
  std::normal_distribution<double> d;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::Vector4d w;
    for (int i = 0; i < 4; ++i) w(i) = d(gen);
    w.normalize();
    std::vector<double> proj;
    for (const auto& r : rs) proj.push_back(w.dot(st.inv_sqrt * Eigen::Map<const Eigen::Vector4d>(r.values.data())));
    EXPECT_NEAR(sample_variance(proj), 1.0, 1e-6);
  }
}

TEST(Whitening, IdempotentOnWhitenedReplay) {
  Eigen::Matrix4d mix;
  mix << 1.0, 0.5, 0.0, 0.0, 0.0, 0.7, 0.2, 0.0, 0.0, 0.0, 1.5, 0.3, 0.2, 0.0, 0.0, 0.4;
  auto rs = gaussian_rewards(4000, mix, 12);
  const WhiteningStats st = compute_whitening(rs);
  for (auto& r : rs) {
    const Eigen::Vector4d x = st.inv_sqrt * Eigen::Map<const Eigen::Vector4d>(r.values.data());
    for (int i = 0; i < 4; ++i) r.values[static_cast<std::size_t>(i)] = x(i);
  }
  const WhiteningStats again = compute_whitening(rs);
  EXPECT_LT((again.inv_sqrt - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Whitening, DirectionOfWeightsDeterminesOutput) {
  Eigen::Matrix4d mix = Eigen::Matrix4d::Identity();
  mix(1, 0) = 0.4;
  const auto rs = gaussian_rewards(1000, mix, 3);
  const WhiteningStats st = compute_whitening(rs);
  Experience a = exp_with(0.0);
  a.raw_reward.values = {0.3, -0.1, 0.2, 0.05};
  a.weights.values = {0.1, 0.2, 0.3, 0.4};
  Experience b = a;
  for (double& w : b.weights.values) w *= 3.0;
  const auto oa = whiten_batch({a}, st);
  const auto ob = whiten_batch({b}, st);
  EXPECT_NEAR(oa[0].scalar_reward, ob[0].scalar_reward, 1e-12);
}

TEST(Whitening, IdentityStatsLeaveUnitNormBatchUnchanged) {
  Experience e = exp_with(0.7);
  const auto out = whiten_batch({e}, WhiteningStats{});
  EXPECT_EQ(out[0].scalar_reward, 0.7);
  EXPECT_EQ(out[0].raw_reward, e.raw_reward);
}

TEST(Whitening, MaskedComponentsPassThrough) {
  std::vector<RewardVector> rs;
  for (int i = 0; i < 100; ++i) {
    RewardVector r;
    r.values = {i % 2 ? 1.0 : -1.0, 5.0 * (i % 3), 0.0, i % 7 ? 0.0 : 2.0};
    rs.push_back(r);
  }
  RewardMask only_lr{true, false, false, false};
  const WhiteningStats st = compute_whitening(rs, kDefaultEigenFloor, only_lr);
  for (int i = 1; i < 4; ++i) {
    EXPECT_NEAR(st.inv_sqrt(i, 0), 0.0, 1e-14);
    EXPECT_NEAR(st.inv_sqrt(0, i), 0.0, 1e-14);
    EXPECT_NEAR(st.inv_sqrt(i, i), 1.0, 1e-15);
  }
}
