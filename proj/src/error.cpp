#include "stabprobe/error.hpp"

namespace stabprobe {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::MetaMismatch: return "MetaMismatch";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::UnknownCheckpoint: return "UnknownCheckpoint";
    case ErrorCode::InsufficientRuns: return "InsufficientRuns";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::AxisMismatch: return "AxisMismatch";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::ZeroReferenceStd: return "ZeroReferenceStd";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace stabprobe
