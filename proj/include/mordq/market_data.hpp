#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mordq {

using Instant = std::chrono::sys_time<std::chrono::milliseconds>;

// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
  bool empty() const noexcept { return end <= begin; }
  bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct PriceSeries {
  std::string asset_id;
  std::vector<Instant> timestamps;
  std::vector<double> close;

  std::size_t size() const noexcept { return close.size(); }

  // Throws on unordered timestamps, non-positive prices or mismatched lengths.
  void validate() const;
};

struct ColumnMap {
  std::string timestamp = "timestamp";
  std::string close = "close";
  friend bool operator==(const ColumnMap&, const ColumnMap&) = default;
};

// One header row, comma separated. Timestamps are ISO-8601 dates/datetimes
// or integer epoch seconds. Extra columns are ignored. Error line numbers are
// 1-based file lines (the header is line 1).
PriceSeries load_csv(const std::filesystem::path& path, const ColumnMap& columns = {});

// Parses one timestamp cell; returns false when the text is not a timestamp.
bool parse_instant(std::string_view text, Instant& out);

struct DataSplit {
  IndexRange train;
  IndexRange eval;
  IndexRange test;
  friend bool operator==(const DataSplit&, const DataSplit&) = default;
};

struct SplitFractions {
  double train = 0.64;
  double eval = 0.16;
  double test = 0.20;
  friend bool operator==(const SplitFractions&, const SplitFractions&) = default;
};

DataSplit make_split(std::size_t length, const SplitFractions& fractions = {});
DataSplit make_split(const PriceSeries& series, const SplitFractions& fractions = {});

// out[t] = ln z[t+1] - ln z[t]; length N-1.
std::vector<double> log_return_series(std::span<const double> close);
std::vector<double> log_return_series(const PriceSeries& series);

struct FoldPlan {
  std::vector<DataSplit> folds;
};

// Anchored walk-forward: fold k (1-based) trains on [0, N*k/(n_folds+1)) and
// evaluates/tests on the next floor(eval_frac*N) and floor(test_frac*N) indices.
FoldPlan walk_forward_folds(std::size_t length, std::size_t n_folds, double eval_frac,
                            double test_frac);
FoldPlan walk_forward_folds(const PriceSeries& series, std::size_t n_folds, double eval_frac,
                            double test_frac);

}  // namespace mordq
