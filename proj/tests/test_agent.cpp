#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "mordq/agent.hpp"
#include "mordq/error.hpp"
#include "test_util.hpp"

using namespace mordq;
using mordq::testing::random_walk;
using mordq::testing::sine;
using mordq::testing::TempDir;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.lookback = 8;
  c.window = 5;
  c.hidden = {16};
  c.batchsize = 16;
  c.episodes = 3;
  c.random_access = true;
  c.episode_len = 60;
  c.max_age = 50;
  c.sync_period = 7;
  c.seed = 11;
  return c;
}

ErrorCode validate_code(const TrainConfig& c) {
  try {
    c.validate();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::CorruptFile;
}

// Network whose output equals its bias, independent of input.
QNetwork constant_net(std::size_t inputs, std::vector<double> q) {
  QNetwork net({inputs, q.size()});
  net.layers()[0].bias = std::move(q);
  return net;
}

}  // namespace

TEST(SampleWeights, OnSimplexWithUniformMeans) {
  Rng rng(1, "weights");
  std::array<double, 4> sum{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const WeightVector w = sample_weights(rng);
    double total = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_GE(w[j], 0.0);
      total += w[j];
      sum[j] += w[j];
    }
    ASSERT_NEAR(total, 1.0, 1e-12);
  }
  for (double s : sum) EXPECT_NEAR(s / n, 0.25, 0.01);
}

TEST(SampleWeights, SingleRewardModeIsConstantOneHot) {
  TrainConfig c;
  c.multi_reward = false;
  c.single_reward = RewardKind::Powc;
  EXPECT_EQ(c.training_weights_default(), WeightVector::one_hot(RewardKind::Powc));
  EXPECT_EQ(c.evaluation_weights(), WeightVector::one_hot(RewardKind::Powc));
  EXPECT_EQ(TrainConfig{}.evaluation_weights(), WeightVector::uniform());
}

TEST(SampleGamma, DegenerateAndFixedAndMean) {
  Rng rng(2, "gamma");
  EXPECT_EQ(sample_gamma(rng, {0.9, 0.9}), 0.9);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double g = sample_gamma(rng, {0.5, 1.0});
    ASSERT_GE(g, 0.5);
    ASSERT_LT(g, 1.0);
    sum += g;
  }
  EXPECT_NEAR(sum / n, 0.75, 0.005);
}

TEST(ActEpsilonGreedy, PureExplorationIsUniform) {
  const QNetwork net = constant_net(3, {0, 10, 0});
  Rng rng(3);
  std::array<double, 3> hits{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits[act_epsilon_greedy(net, std::vector<double>(3, 0.0), 1.0, rng)] += 1;
  const double sigma = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
  for (double h : hits) EXPECT_NEAR(h, n / 3.0, 3 * sigma);
}

TEST(ActEpsilonGreedy, GreedyArgmaxAndTieBreak) {
  Rng rng(4);
  EXPECT_EQ(act_epsilon_greedy(constant_net(2, {1, 3, 2}), std::vector<double>(2, 0.0), 0.0, rng), 1u);
  EXPECT_EQ(act_epsilon_greedy(constant_net(2, {2, 2, 0}), std::vector<double>(2, 0.0), 0.0, rng), 0u);
}

TEST(EpisodeSet, ParseAndContains) {
  EXPECT_EQ(EpisodeSet::parse("all"), EpisodeSet::all());
  EXPECT_TRUE(EpisodeSet::parse("none")->list.empty());
  const auto every = EpisodeSet::parse("every 5");
  ASSERT_TRUE(every);
  EXPECT_TRUE(every->contains(10));
  EXPECT_FALSE(every->contains(11));
  const auto list = EpisodeSet::parse("10, 5,5");
  ASSERT_TRUE(list);
  EXPECT_EQ(list->list, (std::vector<std::size_t>{5, 10}));
  EXPECT_EQ(list->to_string(), "5,10");
  EXPECT_FALSE(EpisodeSet::parse("every x"));
  EXPECT_FALSE(EpisodeSet::parse("0,3"));
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.fee = -0.1;
  EXPECT_EQ(validate_code(c), ErrorCode::InvalidValue);
  c = {};
  c.gamma_range = {0.6, 0.7};
  EXPECT_EQ(validate_code(c), ErrorCode::InvalidValue);
  c.generalize_gamma = true;
  EXPECT_NO_THROW(c.validate());
  c.update_episodes = *EpisodeSet::parse("5,60");
  EXPECT_EQ(validate_code(c), ErrorCode::InvalidValue);
  c = {};
  c.alpha = 0.0;
  EXPECT_EQ(validate_code(c), ErrorCode::InvalidValue);
}

TEST(TrainConfig, NetworkWidths) {
  TrainConfig c;
  EXPECT_EQ(c.network_widths(), (std::vector<std::size_t>{35, 64, 64, 3}));
  c.generalize_gamma = true;
  c.mode = TradingMode::LongOnly;
  c.hidden = {};
  EXPECT_EQ(c.network_widths(), (std::vector<std::size_t>{36, 2}));
}

TEST(Augment, KZeroYieldsNothing) {
  const PriceSeries s = random_walk(100, 1);
  TrainConfig c = small_config();
  c.k = 0;
  const PolicySpec spec{c.mode, c.lookback, 1.0, false};
  const TradingEnv env(s, c.env_config());
  HindsightStreams streams(1);
  const QNetwork net = init_network(c.network_widths(), 1);
  EXPECT_TRUE(augment_experiences(env, env.reset({0, 100}), 0, net, c, spec, streams).empty());
}

TEST(Augment, SameActionAndConditioningReproducesTheRealExperience) {
  const PriceSeries s = random_walk(100, 2);
  TrainConfig c = small_config();
  c.k = 2;
  c.pinned_weights = WeightVector{{0.1, 0.2, 0.3, 0.4}};
  c.hindsight_resample_action = false;
  const PolicySpec spec{c.mode, c.lookback, 1.0, false};
  const TradingEnv env(s, c.env_config());
  HindsightStreams streams(3);
  const QNetwork net = init_network(c.network_widths(), 1);
  EnvState st = env.reset({0, 100});
  st = env.step(st, 0).next_state;
  const StepOutcome real = env.step(st, 1);
  const auto extra = augment_experiences(env, st, 1, net, c, spec, streams);
  ASSERT_EQ(extra.size(), 2u);
  for (const Experience& e : extra) {
    EXPECT_EQ(e.state, state_features(st, spec));
    EXPECT_EQ(e.next_state, state_features(real.next_state, spec));
    EXPECT_EQ(e.raw_reward, real.reward);
    EXPECT_EQ(e.action, 1u);
    EXPECT_EQ(e.terminal, real.done);
    EXPECT_DOUBLE_EQ(e.scalar_reward, c.pinned_weights->dot(real.reward));
  }
}

TEST(Train, NoUpdateEpisodesLeaveInitialization) {
  const PriceSeries s = random_walk(400, 3);
  TrainConfig c = small_config();
  c.episodes = 1;
  c.update_episodes = EpisodeSet::none();
  const TrainResult r = train(c, s, make_split(s.size()));
  EXPECT_EQ(r.updates, 0u);
  EXPECT_TRUE(r.checkpoints.empty());
  EXPECT_EQ(r.net, init_network(c.network_widths(), derive_seed(c.seed, "init")));
}

TEST(Train, CheckpointsExactlyForTheEpisodeSet) {
  const PriceSeries s = random_walk(400, 4);
  TrainConfig c = small_config();
  c.episodes = 6;
  c.update_episodes = *EpisodeSet::parse("2,5");
  const TrainResult r = train(c, s, make_split(s.size()));
  ASSERT_EQ(r.checkpoints.size(), 2u);
  EXPECT_EQ(r.checkpoints[0].episode, 2u);
  EXPECT_EQ(r.checkpoints[1].episode, 5u);
  for (const auto& cp : r.checkpoints)
    for (const auto& rep : cp.reports) {
      EXPECT_GE(rep.long_exposure, 0.0);
      EXPECT_LE(rep.long_exposure, 1.0);
    }
}

TEST(Train, SeedDeterminism) {
  const PriceSeries s = random_walk(400, 5);
  const TrainConfig c = small_config();
  const TrainResult a = train(c, s, make_split(s.size()));
  const TrainResult b = train(c, s, make_split(s.size()));
  ASSERT_EQ(a.checkpoints.size(), b.checkpoints.size());
  EXPECT_EQ(a.net, b.net);
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i)
    for (std::size_t r = 0; r < 3; ++r) {
      EXPECT_EQ(a.checkpoints[i].reports[r].total_reward, b.checkpoints[i].reports[r].total_reward);
      EXPECT_EQ(a.checkpoints[i].reports[r].sharpe, b.checkpoints[i].reports[r].sharpe);
    }
}

TEST(Train, ReplayCompositionPerStep) {
  const PriceSeries s = random_walk(400, 6);
  for (bool multi : {false, true}) {
    TrainConfig c = small_config();
    c.multi_reward = multi;
    c.k = 3;
    c.max_age = 1000000;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> per_step;
    TrainHooks hooks;
    hooks.on_step = [&](const StepRecord& r) { ++per_step[{r.episode, r.cursor}]; };
    const TrainResult res = train(c, s, make_split(s.size()), hooks);
    for (const auto& [key, n] : per_step) EXPECT_EQ(n, multi ? 4u : 1u);
    EXPECT_EQ(res.replay.size(), res.env_steps * (multi ? 4u : 1u));
  }
}

TEST(Train, RealTrajectoryDoesNotDependOnK) {
  const PriceSeries s = random_walk(400, 7);
  auto visited = [&](std::size_t k) {
    TrainConfig c = small_config();
    c.k = k;
    c.update_episodes = EpisodeSet::none();
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> seq;
    TrainHooks hooks;
    hooks.on_step = [&](const StepRecord& r) {
      if (!r.counterfactual) seq.emplace_back(r.episode, r.cursor, r.experience->action);
    };
    train(c, s, make_split(s.size()), hooks);
    return seq;
  };
  const auto base = visited(0);
  EXPECT_FALSE(base.empty());
  EXPECT_EQ(base, visited(3));
  EXPECT_EQ(base, visited(7));
}

TEST(Train, OneHotReductionMatchesSingleReward) {
  const PriceSeries s = random_walk(400, 8);
  auto run = [&](bool multi, bool whiten) {
    TrainConfig c = small_config();
    c.whiten = whiten;
    c.k = 0;
    if (multi) c.pinned_weights = WeightVector::one_hot(RewardKind::Lr);
    else c.multi_reward = false;
    std::vector<double> rewards;
    std::vector<Matrix> targets;
    TrainHooks hooks;
    hooks.on_step = [&](const StepRecord& r) { rewards.push_back(r.experience->scalar_reward); };
    hooks.on_update = [&](const UpdateRecord& u) { targets.push_back(*u.targets); };
    train(c, s, make_split(s.size()), hooks);
    return std::make_pair(rewards, targets);
  };
  for (bool whiten : {false, true}) {
    const auto single = run(false, whiten);
    const auto multi = run(true, whiten);
    EXPECT_EQ(single.first, multi.first);
    ASSERT_EQ(single.second.size(), multi.second.size());
    ASSERT_FALSE(single.second.empty());
    for (std::size_t i = 0; i < single.second.size(); ++i)
      for (std::size_t j = 0; j < single.second[i].data.size(); ++j)
        EXPECT_NEAR(single.second[i].data[j], multi.second[i].data[j], 1e-12);
  }
}

TEST(Train, AgeAndStalenessBounds) {
  const PriceSeries s = random_walk(400, 9);
  TrainConfig c = small_config();
  c.episodes = 4;
  std::uint64_t worst_age = 0, worst_stale = 0;
  TrainHooks hooks;
  hooks.on_update = [&](const UpdateRecord& u) {
    worst_age = std::max(worst_age, u.replay_oldest_age);
    worst_stale = std::max(worst_stale, u.target_staleness);
  };
  const TrainResult r = train(c, s, make_split(s.size()), hooks);
  EXPECT_GT(r.updates, c.max_age);
  EXPECT_LE(worst_age, c.max_age);
  EXPECT_LE(r.max_replay_age, c.max_age);
  EXPECT_LT(worst_stale, c.sync_period);
}

TEST(Train, GeneralizedGammaAddsAnInput) {
  const PriceSeries s = random_walk(400, 10);
  TrainConfig c = small_config();
  c.generalize_gamma = true;
  c.gamma_range = {0.6, 0.9};
  std::vector<double> gammas;
  TrainHooks hooks;
  hooks.on_step = [&](const StepRecord& r) { gammas.push_back(r.experience->gamma); };
  const TrainResult r = train(c, s, make_split(s.size()), hooks);
  EXPECT_EQ(r.net.input_width(), c.lookback + 1 + 4 + 1);
  for (double g : gammas) {
    EXPECT_GE(g, 0.6);
    EXPECT_LT(g, 0.9);
  }
}

TEST(Checkpoint, FileRoundTrip) {
  TempDir dir("ckpt");
  Checkpoint cp;
  cp.episode = 12;
  cp.spec = PolicySpec{TradingMode::LongOnly, 8, 37.25, true};
  cp.net = init_network({cp.spec.input_width(), 5, 2}, 3);
  write_checkpoint(dir.path() / "c.bin", cp);
  const Checkpoint back = read_checkpoint(dir.path() / "c.bin");
  EXPECT_EQ(back.episode, 12u);
  EXPECT_EQ(back.spec, cp.spec);
  EXPECT_EQ(back.net, cp.net);
  try {
    read_checkpoint(dir.path() / "missing.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingFile);
  }
}

TEST(FeatureScale, AutoIsInverseTrainingStd) {
  const PriceSeries s = random_walk(1000, 12, 0.02);
  TrainConfig c;
  const IndexRange train_range{0, 640};
  std::vector<double> lr;
  for (std::size_t t = 1; t < 640; ++t) lr.push_back(std::log(s.close[t] / s.close[t - 1]));
  double m = 0, v = 0;
  for (double x : lr) m += x;
  m /= lr.size();
  for (double x : lr) v += (x - m) * (x - m);
  EXPECT_NEAR(resolve_feature_scale(c, s, train_range), 1.0 / std::sqrt(v / lr.size()), 1e-9);
  c.feature_scale = 3.0;
  EXPECT_EQ(resolve_feature_scale(c, s, train_range), 3.0);
}
