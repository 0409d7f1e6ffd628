#include "mordq/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "mordq/walk_forward.hpp"

namespace mordq {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json to_json(const EvaluationReport& r) {
  return json{{"range_id", r.range_id},
              {"range", {r.range.begin, r.range.end}},
              {"total_reward", r.total_reward},
              {"total_profit", r.total_profit},
              {"sharpe", r.sharpe},
              {"long_exposure", r.long_exposure},
              {"trades", r.trades},
              {"buy_and_hold_profit", r.buy_and_hold_profit},
              {"buy_and_hold_sharpe", r.buy_and_hold_sharpe}};
}

EvaluationReport report_from_json(const json& j) {
  EvaluationReport r;
  try {
    r.range_id = j.at("range_id").get<std::string>();
    r.range = {j.at("range").at(0).get<std::size_t>(), j.at("range").at(1).get<std::size_t>()};
    r.total_reward = j.at("total_reward").get<double>();
    r.total_profit = j.at("total_profit").get<double>();
    r.sharpe = j.at("sharpe").get<double>();
    r.long_exposure = j.at("long_exposure").get<double>();
    r.trades = j.at("trades").get<std::size_t>();
    r.buy_and_hold_profit = j.at("buy_and_hold_profit").get<double>();
    r.buy_and_hold_sharpe = j.at("buy_and_hold_sharpe").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("report record: ") + e.what());
  }
  return r;
}

json split_json(const DataSplit& s) {
  return json{{"train", {s.train.begin, s.train.end}},
              {"eval", {s.eval.begin, s.eval.end}},
              {"test", {s.test.begin, s.test.end}}};
}

fs::path out_dir(const CommandOptions& options, const RunConfig* config) {
  if (options.out) return *options.out;
  if (config) return config->out;
  return "run";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out << content;
}

double curve_value(const EvaluationReport& r, std::string_view metric) {
  if (metric == "total_reward") return r.total_reward;
  if (metric == "total_profit") return r.total_profit;
  if (metric == "sharpe") return r.sharpe;
  if (metric == "long_exposure") return r.long_exposure;
  return static_cast<double>(r.trades);
}

std::string number(double v) {
  return json(v).dump();
}

const Checkpoint& best_of(const std::vector<MetricsRecord>& records, SelectionMetric metric, std::vector<Checkpoint>& scratch) {
  scratch.clear();
  for (const auto& rec : records) {
    Checkpoint cp;
    cp.episode = rec.episode;
    cp.reports = rec.reports;
    scratch.push_back(std::move(cp));
  }
  return select_best_checkpoint(scratch, metric);
}

}  // namespace

WeightVector parse_weights(std::string_view text) {
  std::vector<double> xs;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    while (end && (*end == ' ' || *end == '\t')) ++end;
    if (end == item.c_str() || (end && *end != '\0')) throw Error(ErrorCode::InvalidValue, "weights: not a number: " + item);
    xs.push_back(v);
  }
  if (xs.size() != kRewardCount) throw Error(ErrorCode::InvalidValue, "weights: expected 4 comma-separated reals");
  WeightVector w;
  std::copy(xs.begin(), xs.end(), w.values.begin());
  if (!w.on_simplex()) throw Error(ErrorCode::InvalidValue, "weights: must be non-negative and sum to 1");
  return w;
}

RunConfig resolve_run_config(const CommandOptions& options, bool allow_out_fallback) {
  RunConfig config;
  if (options.config) {
    config = parse_config(*options.config);
  } else if (allow_out_fallback && options.out) {
    config = parse_config(*options.out / "config.resolved.json");
  } else {
    throw Error(ErrorCode::MissingFile, "no --config given");
  }
  if (options.out) config.out = *options.out;
  if (options.seed) config.train.seed = *options.seed;
  if (options.weights) config.train.eval_weights = *options.weights;
  if (options.metric) config.report_metric = *options.metric;
  config.validate();
  return config;
}

std::string metrics_line(const Checkpoint& cp) {
  json line{{"episode", cp.episode}};
  for (RangeId r : {RangeId::Train, RangeId::Eval, RangeId::Test}) line[std::string(to_string(r))] = to_json(cp.report(r));
  return line.dump();
}

std::vector<MetricsRecord> read_metrics(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::vector<MetricsRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("episode"))
      throw Error(ErrorCode::CorruptFile, path.string() + ": malformed record", line_no);
    MetricsRecord rec;
    rec.episode = j["episode"].get<std::size_t>();
    for (RangeId r : {RangeId::Train, RangeId::Eval, RangeId::Test}) {
      const std::string key(to_string(r));
      if (!j.contains(key)) throw Error(ErrorCode::CorruptFile, path.string() + ": missing " + key, line_no);
      rec.reports[static_cast<std::size_t>(r)] = report_from_json(j[key]);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::string report_json(const EvaluationReport& report) { return to_json(report).dump(2); }

void command_train(const CommandOptions& options, std::ostream& log) {
  const RunConfig config = resolve_run_config(options, false);
  const fs::path dir = out_dir(options, &config);
  fs::create_directories(dir);
  write_file(dir / "config.resolved.json", write_config_json(config));

  const PriceSeries series = load_series(config);
  const DataSplit split = make_split(series.size(), config.split);

  std::ofstream metrics(dir / "metrics.jsonl", std::ios::trunc);
  std::ofstream timings(dir / "timings.jsonl", std::ios::trunc);
  if (!metrics || !timings) throw Error(ErrorCode::MissingFile, "cannot write into " + dir.string());

  TrainHooks hooks;
  hooks.on_checkpoint = [&](const Checkpoint& cp) {
    write_checkpoint(dir / ("checkpoint_" + std::to_string(cp.episode) + ".bin"), cp);
    metrics << metrics_line(cp) << '\n' << std::flush;
    timings << json{{"episode", cp.episode}, {"wall_seconds", cp.wall_seconds}}.dump() << '\n' << std::flush;
    const EvaluationReport& ev = cp.report(RangeId::Eval);
    log << "episode " << cp.episode << "  eval reward " << number(ev.total_reward) << "  eval profit "
        << number(ev.total_profit) << "  eval sharpe " << number(ev.sharpe) << '\n';
  };
  const TrainResult result = train(config.train, series, split, hooks);

  log << "updates " << result.updates << ", environment steps " << result.env_steps << ", checkpoints "
      << result.checkpoints.size() << '\n';
  if (!result.checkpoints.empty()) {
    const Checkpoint& best = select_best_checkpoint(result.checkpoints, config.report_metric);
    log << "best checkpoint by eval " << to_string(config.report_metric) << ": episode " << best.episode << '\n';
  }
}

void command_backtest(const CommandOptions& options, std::ostream& log) {
  const RunConfig config = resolve_run_config(options, true);
  const fs::path dir = out_dir(options, &config);
  const RangeId range_id = options.range.value_or(RangeId::Test);

  fs::path checkpoint_path;
  if (options.checkpoint) {
    checkpoint_path = *options.checkpoint;
  } else {
    std::vector<Checkpoint> scratch;
    const auto records = read_metrics(dir / "metrics.jsonl");
    const Checkpoint& best = best_of(records, config.report_metric, scratch);
    checkpoint_path = dir / ("checkpoint_" + std::to_string(best.episode) + ".bin");
  }
  const Checkpoint cp = read_checkpoint(checkpoint_path);
  if (cp.spec.mode != config.train.mode || cp.spec.lookback != config.train.lookback ||
      cp.spec.generalize_gamma != config.train.generalize_gamma)
    throw Error(ErrorCode::ShapeMismatch, checkpoint_path.string() + " was trained with a different mode or lookback");

  const PriceSeries series = load_series(config);
  const DataSplit split = make_split(series.size(), config.split);
  const IndexRange range = range_id == RangeId::Train ? split.train : range_id == RangeId::Eval ? split.eval : split.test;
  const EvalSettings settings = evaluation_settings(config.train, cp.spec.feature_scale);
  const Rollout rollout = run_policy(cp.net, series, range, settings, std::string(to_string(range_id)));

  json doc = to_json(rollout.report);
  doc["checkpoint"] = checkpoint_path.string();
  doc["episode"] = cp.episode;
  doc["weights"] = std::vector<double>(settings.weights.values.begin(), settings.weights.values.end());
  doc["gamma"] = settings.gamma;
  fs::create_directories(dir);
  write_file(dir / "report.json", doc.dump(2) + "\n");
  log << doc.dump(2) << '\n';
}

void command_walkforward(const CommandOptions& options, std::ostream& log) {
  const RunConfig config = resolve_run_config(options, false);
  const fs::path dir = out_dir(options, &config);
  fs::create_directories(dir);
  write_file(dir / "config.resolved.json", write_config_json(config));

  const PriceSeries series = load_series(config);
  const FoldPlan plan = walk_forward_folds(series.size(), config.n_folds, config.wf_eval_frac, config.wf_test_frac);
  const auto folds = run_walk_forward(config.train, series, plan, config.report_metric, config.parallel_folds);

  json doc{{"metric", std::string(to_string(config.report_metric))}, {"folds", json::array()}};
  std::string csv = "fold,range,metric,value\n";
  log << std::left << std::setw(6) << "fold" << std::setw(10) << "episode" << std::setw(24) << "test profit"
      << std::setw(24) << "test sharpe" << "buy&hold profit\n";
  for (const FoldReport& f : folds) {
    json entry{{"fold", f.fold},
               {"selected_episode", f.selected_episode ? json(*f.selected_episode) : json(nullptr)},
               {"split", split_json(f.split)}};
    for (RangeId r : {RangeId::Train, RangeId::Eval, RangeId::Test}) {
      const EvaluationReport& rep = f.reports[static_cast<std::size_t>(r)];
      entry[std::string(to_string(r))] = to_json(rep);
      for (const char* m : kCurveMetrics)
        csv += std::to_string(f.fold) + "," + std::string(to_string(r)) + "," + m + "," + number(curve_value(rep, m)) + "\n";
    }
    doc["folds"].push_back(std::move(entry));
    const EvaluationReport& test = f.reports[static_cast<std::size_t>(RangeId::Test)];
    log << std::setw(6) << f.fold << std::setw(10) << (f.selected_episode ? std::to_string(*f.selected_episode) : "-")
        << std::setw(24) << number(test.total_profit) << std::setw(24) << number(test.sharpe)
        << number(test.buy_and_hold_profit) << '\n';
  }
  write_file(dir / "report.json", doc.dump(2) + "\n");
  write_file(dir / "folds.csv", csv);
}

void command_report(const CommandOptions& options, std::ostream& log) {
  std::optional<RunConfig> config;
  if (options.config) config = resolve_run_config(options, false);
  const fs::path dir = out_dir(options, config ? &*config : nullptr);
  const auto records = read_metrics(dir / "metrics.jsonl");
  SelectionMetric metric = options.metric.value_or(config ? config->report_metric : SelectionMetric::Sharpe);
  if (!options.metric && !config) {
    std::ifstream resolved(dir / "config.resolved.json");
    if (resolved) {
      const json j = json::parse(resolved, nullptr, false);
      if (!j.is_discarded() && j.contains("report_metric") && j["report_metric"].is_string())
        metric = selection_metric_from_string(j["report_metric"].get<std::string>()).value_or(metric);
    }
  }

  std::string csv = "episode,range,metric,value\n";
  for (const auto& rec : records)
    for (RangeId r : {RangeId::Train, RangeId::Eval, RangeId::Test})
      for (const char* m : kCurveMetrics)
        csv += std::to_string(rec.episode) + "," + std::string(to_string(r)) + "," + m + "," +
               number(curve_value(rec.reports[static_cast<std::size_t>(r)], m)) + "\n";
  write_file(dir / "curves.csv", csv);

  log << std::left << std::setw(9) << "episode";
  for (const char* h : {"train reward", "eval reward", "eval profit", "eval sharpe", "test profit"}) log << std::setw(14) << h;
  log << '\n';
  char buf[32];
  for (const auto& rec : records) {
    log << std::setw(9) << rec.episode;
    const auto& tr = rec.reports[0];
    const auto& ev = rec.reports[1];
    const auto& te = rec.reports[2];
    for (double v : {tr.total_reward, ev.total_reward, ev.total_profit, ev.sharpe, te.total_profit}) {
      std::snprintf(buf, sizeof(buf), "%.6g", v);
      log << std::setw(14) << buf;
    }
    log << '\n';
  }
  if (!records.empty()) {
    std::vector<Checkpoint> scratch;
    const Checkpoint& best = best_of(records, metric, scratch);
    log << "best by eval " << to_string(metric) << ": episode " << best.episode << "  test profit "
        << number(best.report(RangeId::Test).total_profit) << "  buy&hold "
        << number(best.report(RangeId::Test).buy_and_hold_profit) << '\n';
  }
}

std::string error_json(const Error& error) {
  json j{{"error", std::string(to_string(error.code()))}, {"detail", error.detail()}};
  if (error.line()) j["line"] = *error.line();
  return j.dump();
}

int dispatch(std::string_view command, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (command == "train") command_train(options, out);
    else if (command == "backtest") command_backtest(options, out);
    else if (command == "walkforward") command_walkforward(options, out);
    else if (command == "report") command_report(options, out);
    else throw Error(ErrorCode::InvalidValue, "unknown command " + std::string(command));
    return 0;
  } catch (const Error& e) {
    err << error_json(e) << '\n';
  } catch (const fs::filesystem_error& e) {
    err << json{{"error", "MissingFile"}, {"detail", e.what()}}.dump() << '\n';
  } catch (const std::exception& e) {
    err << json{{"error", "Internal"}, {"detail", e.what()}}.dump() << '\n';
  }
  return 1;
}

}  // namespace mordq
