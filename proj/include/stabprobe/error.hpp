#pragma once

#include <stdexcept>
#include <string>

namespace stabprobe {

enum class ErrorCode {
  MissingCell,
  DuplicateCell,
  ScoreOutOfRange,
  MetaMismatch,
  FormatError,
  UnknownCheckpoint,
  InsufficientRuns,
  LengthMismatch,
  SeriesTooShort,
  AxisMismatch,
  TooFewObservations,
  DatasetTooSmall,
  EmptyTestSet,
  ZeroReferenceStd,
  IoError,
};

const char* to_string(ErrorCode code);

/// Domain error carrying a stable machine-readable code. The CLI maps these
/// to exit code 2 and a one-line JSON diagnostic on stderr.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace stabprobe
