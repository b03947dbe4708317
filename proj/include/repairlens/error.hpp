#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace repairlens {

enum class ErrorKind {
  UnknownAdapter,
  MalformedInput,
  MissingRequiredField,
  StateMismatch,
  SpanOutOfBounds,
  MissingSource,
  InvalidParameter,
  InfeasibleTarget,
  UnlabeledRow,
  ConflictingVerdicts,
  SampleTooSmall,
  DegenerateSample,
  ConfigError,
  AdapterFailure,
  Timeout,
  NonZeroExit,
  MissingArtifact,
  StageFailure,
  MissingStageOutput,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownAdapter: return "UnknownAdapter";
    case ErrorKind::MalformedInput: return "MalformedInput";
    case ErrorKind::MissingRequiredField: return "MissingRequiredField";
    case ErrorKind::StateMismatch: return "StateMismatch";
    case ErrorKind::SpanOutOfBounds: return "SpanOutOfBounds";
    case ErrorKind::MissingSource: return "MissingSource";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::InfeasibleTarget: return "InfeasibleTarget";
    case ErrorKind::UnlabeledRow: return "UnlabeledRow";
    case ErrorKind::ConflictingVerdicts: return "ConflictingVerdicts";
    case ErrorKind::SampleTooSmall: return "SampleTooSmall";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::AdapterFailure: return "AdapterFailure";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::NonZeroExit: return "NonZeroExit";
    case ErrorKind::MissingArtifact: return "MissingArtifact";
    case ErrorKind::StageFailure: return "StageFailure";
    case ErrorKind::MissingStageOutput: return "MissingStageOutput";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

// All library failures are reported through this type; `kind()` lets callers
// branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace repairlens
