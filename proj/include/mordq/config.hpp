#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "mordq/agent.hpp"
#include "mordq/evaluation.hpp"
#include "mordq/market_data.hpp"
#include "mordq/synthetic.hpp"

namespace mordq {

struct RunConfig {
  TrainConfig train;
  std::optional<std::filesystem::path> data;  // CSV; otherwise `synthetic` is used
  ColumnMap columns;
  std::optional<SyntheticSpec> synthetic;
  std::filesystem::path out = "run";
  SplitFractions split;
  std::size_t n_folds = 3;
  double wf_eval_frac = 0.1;
  double wf_test_frac = 0.1;
  bool parallel_folds = false;
  SelectionMetric report_metric = SelectionMetric::Sharpe;

  // TrainConfig rules plus data-source and split checks.
  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Flat `key = value` text, one entry per line, `#` starts a comment.
// Values are numbers, true/false, bare or quoted strings, and lists written
// `[a, b]` or `a, b`. A document whose first character is `{` is read as a
// JSON object with the same keys. Relative `data` paths resolve against
// `base_dir`.
RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig parse_config(const std::filesystem::path& path);

// Every effective value, defaults included.
std::string write_config_text(const RunConfig& config);
std::string write_config_json(const RunConfig& config);

// The series the config points at.
PriceSeries load_series(const RunConfig& config);

}  // namespace mordq
