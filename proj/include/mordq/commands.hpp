#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mordq/config.hpp"
#include "mordq/error.hpp"
#include "mordq/evaluation.hpp"

namespace mordq {

// Command-line overrides; unset fields fall back to the config file.
struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<WeightVector> weights;
  std::optional<SelectionMetric> metric;
  std::optional<RangeId> range;
  std::optional<std::filesystem::path> checkpoint;
};

// "0.25,0.25,0.25,0.25" -> weights on the simplex; InvalidValue otherwise.
WeightVector parse_weights(std::string_view text);

// Config from --config (or <out>/config.resolved.json) with overrides applied.
RunConfig resolve_run_config(const CommandOptions& options, bool allow_out_fallback);

// train: checkpoint_<ep>.bin, metrics.jsonl, timings.jsonl, config.resolved.json.
void command_train(const CommandOptions& options, std::ostream& log);
// backtest: naive greedy rollout of one checkpoint on one range -> report.json.
void command_backtest(const CommandOptions& options, std::ostream& log);
// walkforward: per-fold training and selection -> report.json, folds.csv.
void command_walkforward(const CommandOptions& options, std::ostream& log);
// report: summary table on `log` and curves.csv from metrics.jsonl.
void command_report(const CommandOptions& options, std::ostream& log);

// One metrics.jsonl line.
struct MetricsRecord {
  std::size_t episode = 0;
  std::array<EvaluationReport, 3> reports;
};
std::string metrics_line(const Checkpoint& checkpoint);
std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path);
std::string report_json(const EvaluationReport& report);

inline constexpr const char* kCurveMetrics[] = {"total_reward", "total_profit", "sharpe", "long_exposure", "trades"};

std::string error_json(const Error& error);

// Runs one command; module errors become error JSON on `err` and exit code 1.
int dispatch(std::string_view command, const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace mordq
