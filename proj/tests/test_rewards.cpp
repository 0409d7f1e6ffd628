#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mordq/rewards.hpp"

using namespace mordq;

namespace {

ReturnTrace trace_of(std::vector<double> values) {
  ReturnTrace t(values.size());
  for (double v : values) t.push(v);
  return t;
}

}  // namespace

TEST(ReturnTrace, LeftPadsWithZeros) {
  ReturnTrace t(4);
  t.push(0.5);
  EXPECT_EQ(std::vector<double>(t.values().begin(), t.values().end()), (std::vector<double>{0, 0, 0, 0.5}));
  for (double v : {1.0, 2.0, 3.0, 4.0}) t.push(v);
  EXPECT_EQ(std::vector<double>(t.values().begin(), t.values().end()), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(t.last(), 4.0);
}

TEST(RewardLr, Examples) {
  EXPECT_NEAR(reward_lr(trace_of({std::log(110.0 / 100.0)})), 0.0953102, 1e-7);
  EXPECT_EQ(reward_lr(trace_of({0.0})), 0.0);
  EXPECT_NEAR(reward_lr(trace_of({-std::log(110.0 / 100.0)})), -0.0953102, 1e-7);
}

TEST(RewardAlr, Examples) {
  EXPECT_NEAR(reward_alr(trace_of({0.01, 0.03})), 0.02, 1e-15);
  EXPECT_EQ(reward_alr(trace_of({0, 0, 0})), 0.0);
  EXPECT_NEAR(reward_alr(trace_of({std::log(1.1), -std::log(1.1)})), 0.0, 1e-17);
}

TEST(RewardSr, Examples) {
  EXPECT_NEAR(reward_sr(trace_of({0.02, -0.02})), 0.0, 1e-15);
  EXPECT_NEAR(reward_sr(trace_of({0.01, 0.03})), 2.0, 1e-12);
  EXPECT_EQ(reward_sr(trace_of({0.05, 0.05})), 0.0);
}

TEST(RewardSr, InvariantUnderPositiveRescaling) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> d(0.001, 0.01);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v(20), scaled(20);
    const double c = std::exp(d(gen) * 100);
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = d(gen);
      scaled[i] = c * v[i];
    }
    EXPECT_NEAR(reward_sr(trace_of(v)), reward_sr(trace_of(scaled)), 1e-10);
  }
}

TEST(RewardPowc, Examples) {
  EXPECT_NEAR(reward_powc(CloseEvent{Position::Long, 100, 120}), 0.1823216, 1e-7);
  EXPECT_EQ(reward_powc(std::nullopt), 0.0);
  EXPECT_NEAR(reward_powc(CloseEvent{Position::Short, 100, 80}), 0.2231436, 1e-7);
}

TEST(RewardVector, Examples) {
  EXPECT_EQ(reward_vector(trace_of({0, 0, 0}), std::nullopt), RewardVector{});
  const RewardVector one = reward_vector(trace_of({std::log(1.1)}), std::nullopt);
  EXPECT_DOUBLE_EQ(one.lr(), std::log(1.1));
  EXPECT_DOUBLE_EQ(one.alr(), std::log(1.1));
  EXPECT_EQ(one.sr(), 0.0);
  EXPECT_EQ(one.powc(), 0.0);
  const RewardVector closed = reward_vector(trace_of({std::log(1.2)}), CloseEvent{Position::Long, 100, 120});
  EXPECT_NEAR(closed.powc(), closed.lr(), 1e-15);
}

TEST(WeightVector, SimplexHelpers) {
  EXPECT_TRUE(WeightVector::uniform().on_simplex());
  EXPECT_TRUE(WeightVector::one_hot(RewardKind::Sr).on_simplex());
  EXPECT_EQ(WeightVector::one_hot(RewardKind::Sr)[2], 1.0);
  EXPECT_DOUBLE_EQ(WeightVector::uniform().norm2(), 0.5);
  EXPECT_FALSE((WeightVector{{0.5, 0.6, 0, 0}}).on_simplex());
  EXPECT_FALSE((WeightVector{{1.5, -0.5, 0, 0}}).on_simplex());
  RewardVector r;
  r.values = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(WeightVector::uniform().dot(r), 2.5);
}

TEST(RewardKind, Names) {
  EXPECT_EQ(reward_kind_from_string("powc"), RewardKind::Powc);
  EXPECT_EQ(reward_kind_from_string("LR"), RewardKind::Lr);
  EXPECT_FALSE(reward_kind_from_string("pnl"));
}
