#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mordq {

enum class ErrorCode {
  MissingFile,
  MissingColumn,
  UnparsableRow,
  NonMonotonicTimestamp,
  NonPositivePrice,
  SeriesTooShort,
  InfeasibleFoldPlan,
  InvalidActionForMode,
  RangeTooShort,
  EpisodeExhausted,
  BufferTooSmall,
  ShapeMismatch,
  EmptyCheckpointList,
  UnknownKey,
  InvalidValue,
  CorruptFile,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every module reports failures through this one exception type; the code is
// what the CLI serializes into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail, std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  // 1-based file line for parse errors.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<std::size_t> line_;
};

}  // namespace mordq
