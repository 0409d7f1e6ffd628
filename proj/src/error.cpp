#include "mordq/error.hpp"

namespace mordq {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnparsableRow: return "UnparsableRow";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::InfeasibleFoldPlan: return "InfeasibleFoldPlan";
    case ErrorCode::InvalidActionForMode: return "InvalidActionForMode";
    case ErrorCode::RangeTooShort: return "RangeTooShort";
    case ErrorCode::EpisodeExhausted: return "EpisodeExhausted";
    case ErrorCode::BufferTooSmall: return "BufferTooSmall";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyCheckpointList: return "EmptyCheckpointList";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::CorruptFile: return "CorruptFile";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& detail, std::optional<std::size_t> line) {
  std::string msg(to_string(code));
  if (line) msg += " (line " + std::to_string(*line) + ")";
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, std::string detail, std::optional<std::size_t> line)
    : std::runtime_error(compose(code, detail, line)),
      code_(code),
      detail_(std::move(detail)),
      line_(line) {}

}  // namespace mordq
