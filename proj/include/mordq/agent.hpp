#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mordq/evaluation.hpp"
#include "mordq/market_data.hpp"
#include "mordq/policy.hpp"
#include "mordq/qnet.hpp"
#include "mordq/replay.hpp"
#include "mordq/rewards.hpp"
#include "mordq/rng.hpp"
#include "mordq/trading_env.hpp"

namespace mordq {

// Episodes (1-based) on which the network is trained and checkpointed.
struct EpisodeSet {
  enum class Kind { All, Every, List };
  Kind kind = Kind::All;
  std::size_t every = 1;
  std::vector<std::size_t> list;  // sorted, unique

  static EpisodeSet all() { return {}; }
  static EpisodeSet none() { return {Kind::List, 1, {}}; }
  // "all", "none", "every N", or a comma separated list "5,10".
  static std::optional<EpisodeSet> parse(std::string_view text);
  std::string to_string() const;
  bool contains(std::size_t episode) const noexcept;
  friend bool operator==(const EpisodeSet&, const EpisodeSet&) = default;
};

struct GammaRange {
  double lo = 0.5;
  double hi = 0.999;
  friend bool operator==(const GammaRange&, const GammaRange&) = default;
};

struct TrainConfig {
  TradingMode mode = TradingMode::LongShort;
  bool multi_reward = true;
  RewardKind single_reward = RewardKind::Lr;   // one-hot used when !multi_reward
  std::optional<WeightVector> pinned_weights;  // multi-reward with a fixed w
  bool generalize_gamma = false;
  double gamma = 0.95;
  GammaRange gamma_range;
  double alpha = 1.0;  // Bellman target blending
  double tol = 0.1;    // exploration probability
  std::size_t batchsize = 64;
  std::size_t k = 3;   // hindsight experiences per step
  std::size_t episodes = 50;
  EpisodeSet update_episodes;
  std::size_t window = 20;    // L
  std::size_t lookback = 30;  // l
  bool random_access = false;
  std::size_t episode_len = 512;
  double fee = 0.0;
  std::uint64_t max_age = 2000;  // network updates
  std::vector<std::size_t> hidden{64, 64};
  double learn_rate = 1e-3;
  double momentum = 0.9;
  double max_grad_norm = 10.0;  // 0 disables clipping
  std::uint64_t sync_period = 250;
  std::uint64_t seed = 42;
  double eigen_floor = kDefaultEigenFloor;
  bool whiten = true;
  bool hindsight_resample_action = true;
  double feature_scale = 0.0;  // 0 = 1 / std of training-range log returns
  std::optional<WeightVector> eval_weights;
  std::optional<double> eval_gamma;

  // Throws InvalidValue naming the offending key.
  void validate() const;
  WeightVector training_weights_default() const noexcept;
  WeightVector evaluation_weights() const noexcept;
  double evaluation_gamma() const noexcept;
  RewardMask whitening_mask() const noexcept;
  EnvConfig env_config() const noexcept { return {lookback, window, mode, fee}; }
  std::vector<std::size_t> network_widths() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Uniform on the simplex via normalized exponential draws.
WeightVector sample_weights(Rng& rng);
double sample_gamma(Rng& rng, const GammaRange& range);

// With probability tol a uniformly random action id, otherwise the greedy one.
std::size_t act_epsilon_greedy(const QNetwork& net, std::span<const double> input, double tol, Rng& rng);

// Streams consumed by hindsight augmentation only; the real trajectory does
// not depend on k.
struct HindsightStreams {
  Rng weights;
  Rng gamma;
  Rng explore;
  explicit HindsightStreams(std::uint64_t seed)
      : weights(seed, "hindsight.weights"), gamma(seed, "hindsight.gamma"), explore(seed, "hindsight.explore") {}
};

// k counterfactual experiences from `state`: fresh (w', gamma'), an action
// chosen under them (or the real action when resampling is off), and the
// next state and rewards the deterministic environment would produce. The
// environment itself is not advanced.
std::vector<Experience> augment_experiences(const TradingEnv& env, const EnvState& state, std::size_t real_action,
                                            const QNetwork& net, const TrainConfig& config, const PolicySpec& spec,
                                            HindsightStreams& streams);

struct StepRecord {
  std::size_t episode = 0;
  std::size_t cursor = 0;
  bool counterfactual = false;
  const Experience* experience = nullptr;
};

struct UpdateRecord {
  std::size_t episode = 0;
  std::uint64_t update = 0;
  double loss = 0.0;
  const Matrix* targets = nullptr;
  std::size_t replay_size = 0;
  std::uint64_t replay_oldest_age = 0;
  std::uint64_t target_staleness = 0;
};

struct TrainHooks {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const UpdateRecord&)> on_update;
  std::function<void(const Checkpoint&)> on_checkpoint;
};

struct TrainResult {
  QNetwork net;
  PolicySpec spec;
  std::vector<Checkpoint> checkpoints;
  ReplayBuffer replay{0};
  std::uint64_t updates = 0;
  std::uint64_t env_steps = 0;
  std::uint64_t max_replay_age = 0;       // over every eviction pass
  std::uint64_t max_target_staleness = 0; // over every update
};

double resolve_feature_scale(const TrainConfig& config, const PriceSeries& series, IndexRange train);
EvalSettings evaluation_settings(const TrainConfig& config, double feature_scale);

// Runs config.episodes episodes on split.train; deterministic given config.seed.
TrainResult train(const TrainConfig& config, const PriceSeries& series, const DataSplit& split,
                  const TrainHooks& hooks = {});

// Evaluates a network on all three ranges with the fast path.
std::array<EvaluationReport, 3> evaluate_split(const QNetwork& net, const PriceSeries& series,
                                               const DataSplit& split, const EvalSettings& settings);

// checkpoint_<episode>.bin: policy spec, episode and network parameters.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace mordq
