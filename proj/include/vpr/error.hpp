#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vpr {

enum class ErrorCode {
  // event_log
  MalformedRecord,
  UnknownEventKind,
  MissingField,
  MixedActors,
  EmptyLog,
  UnknownProfile,
  // step_mapper
  InvalidRules,
  AssetDirMissing,
  // pattern_miner
  EmptyDatabase,
  InvalidSupport,
  EmptyTrace,
  EmptySteps,
  // vpr_model
  InconsistentSections,
  MissingTitle,
  SchemaVersionMismatch,
  CorruptDocument,
  // renderer
  UnresolvedAsset,
  EmptyDocument,
  UnknownPalette,
  // evalstats
  UnknownQuestion,
  DuplicateResponse,
  InconsistentRecord,
  DegenerateVariance,
  TooFewSamples,
  ConstantSeries,
  LengthMismatch,
  OutOfRangeRating,
  InvalidArgument,
  InsufficientGroups,
  SchemaError,
  // cli / io
  InvalidConfig,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::UnknownEventKind: return "UnknownEventKind";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::MixedActors: return "MixedActors";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::UnknownProfile: return "UnknownProfile";
    case ErrorCode::InvalidRules: return "InvalidRules";
    case ErrorCode::AssetDirMissing: return "AssetDirMissing";
    case ErrorCode::EmptyDatabase: return "EmptyDatabase";
    case ErrorCode::InvalidSupport: return "InvalidSupport";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::EmptySteps: return "EmptySteps";
    case ErrorCode::InconsistentSections: return "InconsistentSections";
    case ErrorCode::MissingTitle: return "MissingTitle";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::CorruptDocument: return "CorruptDocument";
    case ErrorCode::UnresolvedAsset: return "UnresolvedAsset";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::UnknownPalette: return "UnknownPalette";
    case ErrorCode::UnknownQuestion: return "UnknownQuestion";
    case ErrorCode::DuplicateResponse: return "DuplicateResponse";
    case ErrorCode::InconsistentRecord: return "InconsistentRecord";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ConstantSeries: return "ConstantSeries";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::OutOfRangeRating: return "OutOfRangeRating";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InsufficientGroups: return "InsufficientGroups";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. `line()` is set for errors tied to
/// a specific input record (1-based).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(compose(code, message, line)), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  static std::string compose(ErrorCode code, const std::string& message,
                             std::optional<std::size_t> line) {
    std::string out(to_string(code));
    if (line) out += " (line " + std::to_string(*line) + ")";
    if (!message.empty()) out += ": " + message;
    return out;
  }

  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace vpr
