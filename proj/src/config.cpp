#include "mordq/config.hpp"

#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "mordq/error.hpp"

namespace mordq {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& key, const std::string& reason) {
  throw Error(ErrorCode::InvalidValue, key + ": " + reason);
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) bad(key, "expected true or false");
  return v.get<bool>();
}

double as_double(const std::string& key, const json& v) {
  if (!v.is_number()) bad(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad(key, "expected a finite number");
  return d;
}

std::uint64_t as_u64(const std::string& key, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) bad(key, "expected a non-negative integer");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  bad(key, "expected a non-negative integer");
}

std::size_t as_size(const std::string& key, const json& v) { return static_cast<std::size_t>(as_u64(key, v)); }

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_doubles(const std::string& key, const json& v) {
  if (!v.is_array()) bad(key, "expected a list of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_double(key, x));
  return out;
}

std::optional<WeightVector> as_weights(const std::string& key, const json& v) {
  if (v.is_null()) return std::nullopt;
  const auto xs = as_doubles(key, v);
  if (xs.size() != kRewardCount) bad(key, "expected 4 weights (lr, alr, sr, powc)");
  WeightVector w;
  std::copy(xs.begin(), xs.end(), w.values.begin());
  if (!w.on_simplex()) bad(key, "weights must be non-negative and sum to 1");
  return w;
}

json weights_json(const std::optional<WeightVector>& w) {
  if (!w) return nullptr;
  return json(std::vector<double>(w->values.begin(), w->values.end()));
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
};

SyntheticSpec& synth(RunConfig& c) {
  if (!c.synthetic) c.synthetic.emplace();
  return *c.synthetic;
}

template <class F>
std::function<json(const RunConfig&)> synth_get(F f) {
  return [f](const RunConfig& c) -> json { return c.synthetic ? json(f(*c.synthetic)) : json(nullptr); };
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    auto add = [&k](std::string name, std::function<void(RunConfig&, const json&)> set,
                    std::function<json(const RunConfig&)> get) { k.push_back({std::move(name), std::move(set), std::move(get)}); };
    auto num = [&add](std::string name, double TrainConfig::*field) {
      add(name, [name, field](RunConfig& c, const json& v) { c.train.*field = as_double(name, v); },
          [field](const RunConfig& c) { return json(c.train.*field); });
    };
    auto count = [&add](std::string name, std::size_t TrainConfig::*field) {
      add(name, [name, field](RunConfig& c, const json& v) { c.train.*field = as_size(name, v); },
          [field](const RunConfig& c) { return json(c.train.*field); });
    };
    auto u64 = [&add](std::string name, std::uint64_t TrainConfig::*field) {
      add(name, [name, field](RunConfig& c, const json& v) { c.train.*field = as_u64(name, v); },
          [field](const RunConfig& c) { return json(c.train.*field); });
    };
    auto flag = [&add](std::string name, bool TrainConfig::*field) {
      add(name, [name, field](RunConfig& c, const json& v) { c.train.*field = as_bool(name, v); },
          [field](const RunConfig& c) { return json(c.train.*field); });
    };

    add("data",
        [](RunConfig& c, const json& v) {
          if (v.is_null()) c.data.reset();
          else c.data = as_string("data", v);
        },
        [](const RunConfig& c) { return c.data ? json(c.data->string()) : json(nullptr); });
    add("timestamp_column", [](RunConfig& c, const json& v) { c.columns.timestamp = as_string("timestamp_column", v); },
        [](const RunConfig& c) { return json(c.columns.timestamp); });
    add("close_column", [](RunConfig& c, const json& v) { c.columns.close = as_string("close_column", v); },
        [](const RunConfig& c) { return json(c.columns.close); });
    add("synthetic.kind",
        [](RunConfig& c, const json& v) {
          if (v.is_null()) return;
          const auto kind = synthetic_kind_from_string(as_string("synthetic.kind", v));
          if (!kind) bad("synthetic.kind", "expected sine, trend or random-walk");
          synth(c).kind = *kind;
        },
        synth_get([](const SyntheticSpec& s) { return std::string(to_string(s.kind)); }));
    auto synth_num = [&add](std::string name, double SyntheticSpec::*field) {
      add("synthetic." + name,
          [name, field](RunConfig& c, const json& v) {
            if (!v.is_null()) synth(c).*field = as_double("synthetic." + name, v);
          },
          synth_get([field](const SyntheticSpec& s) { return s.*field; }));
    };
    add("synthetic.length",
        [](RunConfig& c, const json& v) {
          if (!v.is_null()) synth(c).length = as_size("synthetic.length", v);
        },
        synth_get([](const SyntheticSpec& s) { return s.length; }));
    synth_num("amplitude", &SyntheticSpec::amplitude);
    synth_num("period", &SyntheticSpec::period);
    synth_num("base", &SyntheticSpec::base);
    synth_num("drift", &SyntheticSpec::drift);
    synth_num("volatility", &SyntheticSpec::volatility);
    add("synthetic.seed",
        [](RunConfig& c, const json& v) {
          if (!v.is_null()) synth(c).seed = as_u64("synthetic.seed", v);
        },
        synth_get([](const SyntheticSpec& s) { return s.seed; }));
    add("out", [](RunConfig& c, const json& v) { c.out = as_string("out", v); },
        [](const RunConfig& c) { return json(c.out.string()); });
    add("train_frac", [](RunConfig& c, const json& v) { c.split.train = as_double("train_frac", v); },
        [](const RunConfig& c) { return json(c.split.train); });
    add("eval_frac", [](RunConfig& c, const json& v) { c.split.eval = as_double("eval_frac", v); },
        [](const RunConfig& c) { return json(c.split.eval); });
    add("test_frac", [](RunConfig& c, const json& v) { c.split.test = as_double("test_frac", v); },
        [](const RunConfig& c) { return json(c.split.test); });
    add("n_folds", [](RunConfig& c, const json& v) { c.n_folds = as_size("n_folds", v); },
        [](const RunConfig& c) { return json(c.n_folds); });
    add("wf_eval_frac", [](RunConfig& c, const json& v) { c.wf_eval_frac = as_double("wf_eval_frac", v); },
        [](const RunConfig& c) { return json(c.wf_eval_frac); });
    add("wf_test_frac", [](RunConfig& c, const json& v) { c.wf_test_frac = as_double("wf_test_frac", v); },
        [](const RunConfig& c) { return json(c.wf_test_frac); });
    add("parallel_folds", [](RunConfig& c, const json& v) { c.parallel_folds = as_bool("parallel_folds", v); },
        [](const RunConfig& c) { return json(c.parallel_folds); });
    add("report_metric",
        [](RunConfig& c, const json& v) {
          const auto m = selection_metric_from_string(as_string("report_metric", v));
          if (!m) bad("report_metric", "expected sharpe or profit");
          c.report_metric = *m;
        },
        [](const RunConfig& c) { return json(std::string(to_string(c.report_metric))); });

    add("mode",
        [](RunConfig& c, const json& v) {
          const auto m = trading_mode_from_string(as_string("mode", v));
          if (!m) bad("mode", "expected LP or LSP");
          c.train.mode = *m;
        },
        [](const RunConfig& c) { return json(std::string(to_string(c.train.mode))); });
    flag("multi_reward", &TrainConfig::multi_reward);
    add("single_reward",
        [](RunConfig& c, const json& v) {
          const auto r = reward_kind_from_string(as_string("single_reward", v));
          if (!r) bad("single_reward", "expected lr, alr, sr or powc");
          c.train.single_reward = *r;
        },
        [](const RunConfig& c) { return json(std::string(to_string(c.train.single_reward))); });
    add("pinned_weights", [](RunConfig& c, const json& v) { c.train.pinned_weights = as_weights("pinned_weights", v); },
        [](const RunConfig& c) { return weights_json(c.train.pinned_weights); });
    flag("generalize_gamma", &TrainConfig::generalize_gamma);
    num("gamma", &TrainConfig::gamma);
    add("gamma_range",
        [](RunConfig& c, const json& v) {
          if (v.is_null()) {
            c.train.gamma_range = {};
            return;
          }
          const auto xs = as_doubles("gamma_range", v);
          if (xs.size() != 2) bad("gamma_range", "expected [lo, hi]");
          c.train.gamma_range = {xs[0], xs[1]};
        },
        [](const RunConfig& c) {
          if (!c.train.generalize_gamma) return json(nullptr);
          return json(std::vector<double>{c.train.gamma_range.lo, c.train.gamma_range.hi});
        });
    num("alpha", &TrainConfig::alpha);
    num("tol", &TrainConfig::tol);
    count("batchsize", &TrainConfig::batchsize);
    count("k", &TrainConfig::k);
    count("episodes", &TrainConfig::episodes);
    add("update_episodes",
        [](RunConfig& c, const json& v) {
          if (v.is_string()) {
            const auto s = EpisodeSet::parse(v.get<std::string>());
            if (!s) bad("update_episodes", "expected all, none, every N, or a list of episodes");
            c.train.update_episodes = *s;
            return;
          }
          std::string text;
          if (v.is_array()) {
            for (const auto& x : v) text += std::to_string(as_size("update_episodes", x)) + ",";
          } else {
            text = std::to_string(as_size("update_episodes", v));
          }
          c.train.update_episodes = text.empty() ? EpisodeSet::none() : *EpisodeSet::parse(text);
        },
        [](const RunConfig& c) {
          const EpisodeSet& s = c.train.update_episodes;
          if (s.kind == EpisodeSet::Kind::List && !s.list.empty()) return json(s.list);
          return json(s.to_string());
        });
    count("window", &TrainConfig::window);
    count("lookback", &TrainConfig::lookback);
    flag("random_access", &TrainConfig::random_access);
    count("episode_len", &TrainConfig::episode_len);
    num("fee", &TrainConfig::fee);
    u64("max_age", &TrainConfig::max_age);
    add("hidden",
        [](RunConfig& c, const json& v) {
          if (!v.is_array()) bad("hidden", "expected a list of layer widths");
          c.train.hidden.clear();
          for (const auto& x : v) c.train.hidden.push_back(as_size("hidden", x));
        },
        [](const RunConfig& c) { return json(c.train.hidden); });
    num("learn_rate", &TrainConfig::learn_rate);
    num("momentum", &TrainConfig::momentum);
    num("max_grad_norm", &TrainConfig::max_grad_norm);
    u64("sync_period", &TrainConfig::sync_period);
    u64("seed", &TrainConfig::seed);
    num("eigen_floor", &TrainConfig::eigen_floor);
    flag("whiten", &TrainConfig::whiten);
    flag("hindsight_resample_action", &TrainConfig::hindsight_resample_action);
    num("feature_scale", &TrainConfig::feature_scale);
    add("eval_weights", [](RunConfig& c, const json& v) { c.train.eval_weights = as_weights("eval_weights", v); },
        [](const RunConfig& c) { return weights_json(c.train.eval_weights); });
    add("eval_gamma",
        [](RunConfig& c, const json& v) {
          if (v.is_null()) c.train.eval_gamma.reset();
          else c.train.eval_gamma = as_double("eval_gamma", v);
        },
        [](const RunConfig& c) { return optional_json(c.train.eval_gamma); });
    return k;
  }();
  return table;
}

const Key* find_key(std::string_view name) {
  for (const Key& k : keys())
    if (k.name == name) return &k;
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

json scalar_value(const std::string& text) {
  if (text.empty()) return std::string();
  json v = json::parse(text, nullptr, false);
  if (!v.is_discarded()) return v;
  return text;
}

json flat_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (!v.is_discarded()) return v;
  if (text.find(',') != std::string::npos) {
    std::string body = text;
    if (body.front() == '[' && body.back() == ']') body = body.substr(1, body.size() - 2);
    json list = json::array();
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) list.push_back(scalar_value(trim(item)));
    return list;
  }
  return text;
}

// Strips a trailing `# comment` that is not inside double quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

void flatten(const json& obj, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (const auto& [name, value] : obj.items()) {
    const std::string key = prefix.empty() ? name : prefix + "." + name;
    if (value.is_object()) flatten(value, key, out);
    else out.emplace_back(key, value);
  }
}

RunConfig apply_entries(const std::vector<std::pair<std::string, json>>& entries, const std::filesystem::path& base_dir) {
  RunConfig config;
  bool gamma_range_given = false;
  for (const auto& [name, value] : entries) {
    const Key* key = find_key(name);
    if (!key) throw Error(ErrorCode::UnknownKey, name);
    key->set(config, value);
    if (name == "gamma_range" && !value.is_null()) gamma_range_given = true;
  }
  if (gamma_range_given && !config.train.generalize_gamma)
    bad("gamma_range", "only meaningful with generalize_gamma = true");
  if (config.data && config.data->is_relative()) {
    const std::filesystem::path base = base_dir.empty() ? std::filesystem::current_path() : base_dir;
    config.data = std::filesystem::absolute(base / *config.data).lexically_normal();
  }
  config.validate();
  return config;
}

}  // namespace

void RunConfig::validate() const {
  train.validate();
  if (data && synthetic) bad("data", "give either a data path or synthetic.* keys, not both");
  if (!data && !synthetic) bad("data", "a data path or synthetic.kind is required");
  if (synthetic && synthetic->length < train.lookback + 2) bad("synthetic.length", "must be at least lookback + 2");
  if (!(split.train > 0 && split.eval > 0 && split.test > 0) || split.train + split.eval + split.test > 1.0 + 1e-9)
    bad("train_frac", "split fractions must be positive and sum to at most 1");
  if (n_folds < 1) bad("n_folds", "must be positive");
  if (!(wf_eval_frac > 0 && wf_eval_frac < 1)) bad("wf_eval_frac", "must lie in (0, 1)");
  if (!(wf_test_frac > 0 && wf_test_frac < 1)) bad("wf_test_frac", "must lie in (0, 1)");
  if (columns.timestamp.empty() || columns.close.empty()) bad("close_column", "column names must be non-empty");
}

RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  std::vector<std::pair<std::string, json>> entries;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    const json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::InvalidValue, "config: malformed JSON");
    flatten(doc, "", entries);
    return apply_entries(entries, base_dir);
  }
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidValue, "config line " + std::to_string(line_no) + ": expected key = value", line_no);
    entries.emplace_back(trim(body.substr(0, eq)), flat_value(trim(body.substr(eq + 1))));
  }
  return apply_entries(entries, base_dir);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::filesystem::absolute(path).parent_path());
}

std::string write_config_text(const RunConfig& config) {
  std::string out;
  for (const Key& k : keys()) {
    const json v = k.get(config);
    if (v.is_null() && k.name.starts_with("synthetic.")) continue;
    out += k.name + " = " + v.dump() + "\n";
  }
  return out;
}

std::string write_config_json(const RunConfig& config) {
  json doc = json::object();
  for (const Key& k : keys()) {
    json v = k.get(config);
    if (v.is_null() && k.name.starts_with("synthetic.")) continue;
    doc[k.name] = std::move(v);
  }
  return doc.dump(2) + "\n";
}

PriceSeries load_series(const RunConfig& config) {
  if (config.data) return load_csv(*config.data, config.columns);
  if (config.synthetic) return generate_synthetic(*config.synthetic);
  bad("data", "a data path or synthetic.kind is required");
}

}  // namespace mordq
