#include "mordq/market_data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>

#include "mordq/error.hpp"

namespace mordq {

namespace {

// Floating products like 0.29 * 100 land just below the integer; nudge them.
std::size_t floor_index(double x) {
  return static_cast<std::size_t>(std::floor(x + 1e-9));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i)
    if (s[i] < '0' || s[i] > '9') return false;
  return parse_int(s.substr(pos, len), out);
}

}  // namespace

bool parse_instant(std::string_view text, Instant& out) {
  using namespace std::chrono;
  text = trim(text);
  if (text.empty()) return false;

  std::int64_t epoch = 0;
  if (parse_int(text, epoch)) {
    out = Instant{milliseconds{epoch * 1000}};
    return true;
  }

  // YYYY-MM-DD[(T| )HH:MM[:SS[.fff]]][Z]
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  if (!parse_fixed(text, 0, 4, y) || text.size() < 10 || text[4] != '-' || text[7] != '-' ||
      !parse_fixed(text, 5, 2, mo) || !parse_fixed(text, 8, 2, d))
    return false;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return false;

  std::int64_t millis = 0;
  std::string_view rest = text.substr(10);
  if (!rest.empty()) {
    if (rest.front() != 'T' && rest.front() != ' ') return false;
    rest.remove_prefix(1);
    if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
    if (rest.size() < 5 || rest[2] != ':' || !parse_fixed(rest, 0, 2, hh) || !parse_fixed(rest, 3, 2, mm))
      return false;
    rest.remove_prefix(5);
    if (!rest.empty()) {
      if (rest.size() < 3 || rest[0] != ':' || !parse_fixed(rest, 1, 2, ss)) return false;
      rest.remove_prefix(3);
      if (!rest.empty()) {
        if (rest[0] != '.' || rest.size() < 2) return false;
        rest.remove_prefix(1);
        int frac = 0;
        const std::size_t digits = std::min<std::size_t>(rest.size(), 3);
        if (!parse_fixed(rest, 0, digits, frac)) return false;
        for (std::size_t i = digits; i < 3; ++i) frac *= 10;
        for (std::size_t i = digits; i < rest.size(); ++i)
          if (rest[i] < '0' || rest[i] > '9') return false;
        millis = frac;
      }
    }
    if (hh > 23 || mm > 59 || ss > 60) return false;
  }
  out = Instant{sys_days{ymd}} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis};
  return true;
}

void PriceSeries::validate() const {
  if (timestamps.size() != close.size())
    throw Error(ErrorCode::InvalidValue, "timestamp and close columns differ in length");
  for (std::size_t i = 0; i < close.size(); ++i) {
    if (!(close[i] > 0.0) || !std::isfinite(close[i]))
      throw Error(ErrorCode::NonPositivePrice, "close at index " + std::to_string(i));
    if (i > 0 && timestamps[i] <= timestamps[i - 1])
      throw Error(ErrorCode::NonMonotonicTimestamp, "timestamp at index " + std::to_string(i));
  }
}

PriceSeries load_csv(const std::filesystem::path& path, const ColumnMap& columns) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MissingColumn, "empty file " + path.string());

  const auto header = split_fields(line);
  std::optional<std::size_t> ts_col, close_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == columns.timestamp) ts_col = i;
    if (header[i] == columns.close) close_col = i;
  }
  if (!ts_col) throw Error(ErrorCode::MissingColumn, columns.timestamp);
  if (!close_col) throw Error(ErrorCode::MissingColumn, columns.close);
  const std::size_t needed = std::max(*ts_col, *close_col) + 1;

  PriceSeries series;
  series.asset_id = path.stem().string();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    Instant ts;
    double price = 0.0;
    if (fields.size() < needed || !parse_instant(fields[*ts_col], ts) ||
        !parse_double(fields[*close_col], price))
      throw Error(ErrorCode::UnparsableRow, std::string(trim(line)), line_no);
    if (price <= 0.0) throw Error(ErrorCode::NonPositivePrice, std::string(fields[*close_col]), line_no);
    if (!series.timestamps.empty() && ts <= series.timestamps.back())
      throw Error(ErrorCode::NonMonotonicTimestamp, std::string(fields[*ts_col]), line_no);
    series.timestamps.push_back(ts);
    series.close.push_back(price);
  }
  return series;
}

DataSplit make_split(std::size_t n, const SplitFractions& f) {
  if (!(f.train > 0.0) || !(f.eval > 0.0) || !(f.test > 0.0) ||
      std::abs(f.train + f.eval + f.test - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidValue, "split fractions must be positive and sum to 1");
  if (n < 10) throw Error(ErrorCode::SeriesTooShort, "need at least 10 points, got " + std::to_string(n));

  const std::size_t a = floor_index(f.train * static_cast<double>(n));
  const std::size_t b = std::min(n, floor_index((f.train + f.eval) * static_cast<double>(n)));
  DataSplit split{{0, a}, {a, b}, {b, n}};
  if (split.train.empty() || split.eval.empty() || split.test.empty())
    throw Error(ErrorCode::SeriesTooShort, "a split range is empty for length " + std::to_string(n));
  return split;
}

DataSplit make_split(const PriceSeries& series, const SplitFractions& fractions) {
  return make_split(series.size(), fractions);
}

std::vector<double> log_return_series(std::span<const double> close) {
  if (close.size() < 2) throw Error(ErrorCode::SeriesTooShort, "log returns need two prices");
  std::vector<double> out(close.size() - 1);
  for (std::size_t t = 0; t + 1 < close.size(); ++t) out[t] = std::log(close[t + 1]) - std::log(close[t]);
  return out;
}

std::vector<double> log_return_series(const PriceSeries& series) {
  return log_return_series(std::span<const double>(series.close));
}

FoldPlan walk_forward_folds(std::size_t n, std::size_t n_folds, double eval_frac, double test_frac) {
  if (n_folds < 1) throw Error(ErrorCode::InfeasibleFoldPlan, "n_folds must be at least 1");
  if (!(eval_frac > 0.0) || !(test_frac > 0.0))
    throw Error(ErrorCode::InfeasibleFoldPlan, "eval and test fractions must be positive");

  const std::size_t eval_len = floor_index(eval_frac * static_cast<double>(n));
  const std::size_t test_len = floor_index(test_frac * static_cast<double>(n));
  FoldPlan plan;
  for (std::size_t k = 1; k <= n_folds; ++k) {
    const std::size_t train_end = n * k / (n_folds + 1);
    const DataSplit fold{{0, train_end},
                         {train_end, train_end + eval_len},
                         {train_end + eval_len, train_end + eval_len + test_len}};
    if (fold.train.empty() || fold.eval.empty() || fold.test.empty() || fold.test.end > n)
      throw Error(ErrorCode::InfeasibleFoldPlan, "fold " + std::to_string(k) + " has an empty or out-of-range split");
    if (!plan.folds.empty() && fold.train.end <= plan.folds.back().train.end)
      throw Error(ErrorCode::InfeasibleFoldPlan, "training ranges do not grow");
    plan.folds.push_back(fold);
  }
  return plan;
}

FoldPlan walk_forward_folds(const PriceSeries& series, std::size_t n_folds, double eval_frac,
                            double test_frac) {
  return walk_forward_folds(series.size(), n_folds, eval_frac, test_frac);
}

}  // namespace mordq
