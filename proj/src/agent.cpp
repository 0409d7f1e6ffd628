#include "mordq/agent.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mordq/error.hpp"

namespace mordq {

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& reason) {
  throw Error(ErrorCode::InvalidValue, key + ": " + reason);
}

bool open_unit(double x) { return x > 0.0 && x < 1.0; }

std::vector<double> training_log_returns(const PriceSeries& series, IndexRange train) {
  std::vector<double> out;
  for (std::size_t t = train.begin + 1; t < train.end; ++t)
    out.push_back(std::log(series.close[t]) - std::log(series.close[t - 1]));
  return out;
}

}  // namespace

std::optional<EpisodeSet> EpisodeSet::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '"')) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text == "all") return all();
  if (text == "none" || text.empty()) return none();
  if (text.starts_with("every")) {
    const std::string n(trim(text.substr(5)));
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(n, &pos);
      if (pos != n.size() || v < 1) return std::nullopt;
      return EpisodeSet{Kind::Every, static_cast<std::size_t>(v), {}};
    } catch (...) {
      return std::nullopt;
    }
  }
  EpisodeSet set{Kind::List, 1, {}};
  std::string body(text);
  if (!body.empty() && body.front() == '[') body.erase(0, 1);
  if (!body.empty() && body.back() == ']') body.pop_back();
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t(trim(item));
    if (t.empty()) continue;
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(t, &pos);
      if (pos != t.size() || v < 1) return std::nullopt;
      set.list.push_back(static_cast<std::size_t>(v));
    } catch (...) {
      return std::nullopt;
    }
  }
  std::sort(set.list.begin(), set.list.end());
  set.list.erase(std::unique(set.list.begin(), set.list.end()), set.list.end());
  return set;
}

std::string EpisodeSet::to_string() const {
  switch (kind) {
    case Kind::All: return "all";
    case Kind::Every: return "every " + std::to_string(every);
    case Kind::List: break;
  }
  if (list.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < list.size(); ++i) s += (i ? "," : "") + std::to_string(list[i]);
  return s;
}

bool EpisodeSet::contains(std::size_t episode) const noexcept {
  switch (kind) {
    case Kind::All: return true;
    case Kind::Every: return episode % every == 0;
    case Kind::List: return std::binary_search(list.begin(), list.end(), episode);
  }
  return false;
}

void TrainConfig::validate() const {
  if (!open_unit(gamma)) invalid("gamma", "must lie in (0, 1)");
  if (generalize_gamma) {
    if (!open_unit(gamma_range.lo) || !open_unit(gamma_range.hi) || gamma_range.lo > gamma_range.hi)
      invalid("gamma_range", "must satisfy 0 < lo <= hi < 1");
  } else if (gamma_range != GammaRange{}) {
    invalid("gamma_range", "only meaningful with generalize_gamma = true");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) invalid("alpha", "must lie in (0, 1]");
  if (!(tol >= 0.0 && tol <= 1.0)) invalid("tol", "must lie in [0, 1]");
  if (batchsize < 1) invalid("batchsize", "must be positive");
  if (episodes < 1) invalid("episodes", "must be positive");
  if (update_episodes.kind == EpisodeSet::Kind::List && !update_episodes.list.empty() &&
      update_episodes.list.back() > episodes)
    invalid("update_episodes", "must be a subset of 1..episodes");
  if (window < 1) invalid("window", "must be positive");
  if (lookback < 1) invalid("lookback", "must be positive");
  if (random_access && episode_len < 1) invalid("episode_len", "must be positive");
  if (!(fee >= 0.0 && fee < 1.0)) invalid("fee", "must lie in [0, 1)");
  if (max_age < 1) invalid("max_age", "must be positive");
  for (std::size_t h : hidden)
    if (h < 1) invalid("hidden", "layer widths must be positive");
  if (!(learn_rate > 0.0) || !std::isfinite(learn_rate)) invalid("learn_rate", "must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) invalid("momentum", "must lie in [0, 1)");
  if (!(max_grad_norm >= 0.0)) invalid("max_grad_norm", "must be non-negative");
  if (sync_period < 1) invalid("sync_period", "must be positive");
  if (!(eigen_floor > 0.0)) invalid("eigen_floor", "must be positive");
  if (!(feature_scale >= 0.0) || !std::isfinite(feature_scale)) invalid("feature_scale", "must be >= 0 (0 = auto)");
  if (pinned_weights && !pinned_weights->on_simplex()) invalid("pinned_weights", "must lie on the unit simplex");
  if (pinned_weights && !multi_reward) invalid("pinned_weights", "requires multi_reward = true");
  if (eval_weights && !eval_weights->on_simplex()) invalid("eval_weights", "must lie on the unit simplex");
  if (eval_gamma && !open_unit(*eval_gamma)) invalid("eval_gamma", "must lie in (0, 1)");
}

WeightVector TrainConfig::training_weights_default() const noexcept {
  if (!multi_reward) return WeightVector::one_hot(single_reward);
  if (pinned_weights) return *pinned_weights;
  return WeightVector::uniform();
}

WeightVector TrainConfig::evaluation_weights() const noexcept {
  if (eval_weights) return *eval_weights;
  return training_weights_default();
}

double TrainConfig::evaluation_gamma() const noexcept {
  return eval_gamma.value_or(gamma);
}

RewardMask TrainConfig::whitening_mask() const noexcept {
  if (multi_reward && !pinned_weights) return kAllRewards;
  return support_of(training_weights_default());
}

std::vector<std::size_t> TrainConfig::network_widths() const {
  const PolicySpec spec{mode, lookback, 1.0, generalize_gamma};
  std::vector<std::size_t> widths{spec.input_width()};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(spec.action_count());
  return widths;
}

WeightVector sample_weights(Rng& rng) {
  WeightVector w;
  double sum = 0.0;
  for (double& v : w.values) {
    v = rng.exponential();
    sum += v;
  }
  for (double& v : w.values) v /= sum;
  return w;
}

double sample_gamma(Rng& rng, const GammaRange& range) {
  if (range.lo == range.hi) return range.lo;
  return rng.uniform(range.lo, range.hi);
}

std::size_t act_epsilon_greedy(const QNetwork& net, std::span<const double> input, double tol, Rng& rng) {
  if (rng.uniform() < tol) return rng.below(net.output_width());
  return greedy_action(net.forward(input));
}

std::vector<Experience> augment_experiences(const TradingEnv& env, const EnvState& state, std::size_t real_action,
                                            const QNetwork& net, const TrainConfig& config, const PolicySpec& spec,
                                            HindsightStreams& streams) {
  std::vector<Experience> out;
  if (!config.multi_reward || config.k == 0) return out;
  out.reserve(config.k);
  const std::vector<double> features = state_features(state, spec);
  std::vector<double> input(spec.input_width());
  for (std::size_t i = 0; i < config.k; ++i) {
    const WeightVector w = config.pinned_weights ? *config.pinned_weights : sample_weights(streams.weights);
    const double gamma = config.generalize_gamma ? sample_gamma(streams.gamma, config.gamma_range) : config.gamma;
    std::size_t action = real_action;
    if (config.hindsight_resample_action) {
      assemble_input(features, w, gamma, spec, input);
      action = act_epsilon_greedy(net, input, config.tol, streams.explore);
    }
    StepOutcome step = env.step(state, action);
    Experience e;
    e.state = features;
    e.gamma = gamma;
    e.weights = w;
    e.raw_reward = step.reward;
    e.scalar_reward = w.dot(step.reward);
    e.action = action;
    e.next_state = state_features(step.next_state, spec);
    e.terminal = step.done;
    out.push_back(std::move(e));
  }
  return out;
}

double resolve_feature_scale(const TrainConfig& config, const PriceSeries& series, IndexRange train) {
  if (config.feature_scale > 0.0) return config.feature_scale;
  const auto lr = training_log_returns(series, train);
  const double sd = window_std(lr);
  return sd < kStdFloor ? 1.0 : 1.0 / sd;
}

EvalSettings evaluation_settings(const TrainConfig& config, double feature_scale) {
  EvalSettings s;
  s.env = config.env_config();
  s.feature_scale = feature_scale;
  s.generalize_gamma = config.generalize_gamma;
  s.weights = config.evaluation_weights();
  s.gamma = config.evaluation_gamma();
  return s;
}

std::array<EvaluationReport, 3> evaluate_split(const QNetwork& net, const PriceSeries& series,
                                               const DataSplit& split, const EvalSettings& settings) {
  return {vectorized_rollout(net, series, split.train, settings, "train").rollout.report,
          vectorized_rollout(net, series, split.eval, settings, "eval").rollout.report,
          vectorized_rollout(net, series, split.test, settings, "test").rollout.report};
}

namespace {

TransitionBatch to_transitions(const std::vector<Experience>& batch, const PolicySpec& spec) {
  TransitionBatch tb;
  const std::size_t n = batch.size();
  const std::size_t width = spec.input_width();
  tb.inputs = Matrix(n, width);
  tb.next_inputs = Matrix(n, width);
  tb.actions.reserve(n);
  tb.rewards.reserve(n);
  tb.gammas.reserve(n);
  tb.terminal.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Experience& e = batch[i];
    assemble_input(e.state, e.weights, e.gamma, spec, tb.inputs.row(i));
    assemble_input(e.next_state, e.weights, e.gamma, spec, tb.next_inputs.row(i));
    tb.actions.push_back(e.action);
    tb.rewards.push_back(e.scalar_reward);
    tb.gammas.push_back(e.gamma);
    tb.terminal.push_back(e.terminal ? 1 : 0);
  }
  return tb;
}

}  // namespace

TrainResult train(const TrainConfig& config, const PriceSeries& series, const DataSplit& split,
                  const TrainHooks& hooks) {
  config.validate();
  const auto clock_start = std::chrono::steady_clock::now();
  const std::uint64_t seed = config.seed;

  const TradingEnv env(series, config.env_config());
  if (split.train.end > series.size() || split.train.size() < config.lookback + 2)
    throw Error(ErrorCode::RangeTooShort, "training range cannot hold the lookback");
  if (config.random_access && config.episode_len + config.lookback + 1 > split.train.size())
    throw Error(ErrorCode::RangeTooShort, "episode_len does not fit in the training range");

  TrainResult result;
  result.spec = PolicySpec{config.mode, config.lookback, resolve_feature_scale(config, series, split.train),
                           config.generalize_gamma};
  const PolicySpec& spec = result.spec;
  const EvalSettings eval_settings = evaluation_settings(config, spec.feature_scale);

  Rng env_rng(seed, "env");
  Rng explore_rng(seed, "explore");
  Rng weights_rng(seed, "weights");
  Rng gamma_rng(seed, "gamma");
  Rng batch_rng(seed, "batch");
  HindsightStreams hindsight(seed);

  QNetwork& net = result.net;
  net = init_network(config.network_widths(), derive_seed(seed, "init"));
  TargetNetwork target{net, 0};
  SgdOptimizer sgd(config.learn_rate, config.momentum, config.max_grad_norm);
  result.replay = ReplayBuffer(config.max_age);
  ReplayBuffer& replay = result.replay;
  const RewardMask mask = config.whitening_mask();
  const WeightVector fixed_weights = config.training_weights_default();
  const bool sample_w = config.multi_reward && !config.pinned_weights;

  std::vector<double> input(spec.input_width());

  for (std::size_t episode = 1; episode <= config.episodes; ++episode) {
    const bool training = config.update_episodes.contains(episode);
    EnvState state = env.reset(split.train, config.random_access, config.episode_len, &env_rng);

    while (true) {
      const WeightVector w = sample_w ? sample_weights(weights_rng) : fixed_weights;
      const double gamma = config.generalize_gamma ? sample_gamma(gamma_rng, config.gamma_range) : config.gamma;

      std::vector<double> features = state_features(state, spec);
      assemble_input(features, w, gamma, spec, input);
      const std::size_t action = act_epsilon_greedy(net, input, config.tol, explore_rng);
      StepOutcome outcome = env.step(state, action);
      ++result.env_steps;

      Experience real;
      real.state = std::move(features);
      real.gamma = gamma;
      real.weights = w;
      real.raw_reward = outcome.reward;
      real.scalar_reward = w.dot(outcome.reward);
      real.action = action;
      real.next_state = state_features(outcome.next_state, spec);
      real.terminal = outcome.done;
      if (hooks.on_step) hooks.on_step({episode, state.cursor, false, &real});
      replay.push(std::move(real));

      if (config.multi_reward) {
        for (auto& extra : augment_experiences(env, state, action, net, config, spec, hindsight)) {
          if (hooks.on_step) hooks.on_step({episode, state.cursor, true, &extra});
          replay.push(std::move(extra));
        }
      }

      if (training && replay.size() >= config.batchsize) {
        std::vector<Experience> batch = replay.sample_batch(config.batchsize, batch_rng);
        if (config.whiten) batch = whiten_batch(std::move(batch), compute_whitening(replay, config.eigen_floor, mask));
        const TransitionBatch transitions = to_transitions(batch, spec);
        const Matrix targets = bellman_targets(transitions, net, target.net, config.alpha);
        const double loss = fit_batch(net, sgd, transitions.inputs, targets);
        replay.advance_updates(1);
        ++result.updates;
        target.sync(net, config.sync_period);
        result.max_replay_age = std::max(result.max_replay_age, replay.oldest_age());
        result.max_target_staleness = std::max(result.max_target_staleness, target.staleness);
        if (hooks.on_update)
          hooks.on_update({episode, result.updates, loss, &targets, replay.size(), replay.oldest_age(),
                           target.staleness});
      }

      if (outcome.done) break;
      state = std::move(outcome.next_state);
    }

    if (training) {
      Checkpoint cp;
      cp.episode = episode;
      cp.spec = spec;
      cp.net = net;
      cp.reports = evaluate_split(net, series, split, eval_settings);
      cp.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
      if (hooks.on_checkpoint) hooks.on_checkpoint(cp);
      result.checkpoints.push_back(std::move(cp));
    }
  }
  return result;
}

namespace {

constexpr char kCheckpointMagic[8] = {'M', 'O', 'R', 'D', 'Q', 'C', 'K', 'P'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorCode::CorruptFile, "truncated checkpoint");
  return v;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, cp.episode);
  put<std::uint8_t>(out, cp.spec.mode == TradingMode::LongOnly ? 0 : 1);
  put<std::uint8_t>(out, cp.spec.generalize_gamma ? 1 : 0);
  put<std::uint64_t>(out, cp.spec.lookback);
  put<double>(out, cp.spec.feature_scale);
  write_network(out, cp.net);
  if (!out) throw Error(ErrorCode::MissingFile, "failed writing " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + sizeof(magic), kCheckpointMagic))
    throw Error(ErrorCode::CorruptFile, path.string() + " is not a checkpoint");
  if (get<std::uint32_t>(in) != kCheckpointVersion) throw Error(ErrorCode::CorruptFile, "checkpoint version");
  Checkpoint cp;
  cp.episode = get<std::uint64_t>(in);
  cp.spec.mode = get<std::uint8_t>(in) == 0 ? TradingMode::LongOnly : TradingMode::LongShort;
  cp.spec.generalize_gamma = get<std::uint8_t>(in) != 0;
  cp.spec.lookback = get<std::uint64_t>(in);
  cp.spec.feature_scale = get<double>(in);
  cp.net = read_network(in);
  if (cp.net.input_width() != cp.spec.input_width() || cp.net.output_width() != cp.spec.action_count())
    throw Error(ErrorCode::CorruptFile, "network shape disagrees with the stored policy spec");
  return cp;
}

}  // namespace mordq
