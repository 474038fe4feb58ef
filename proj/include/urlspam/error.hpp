#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace urlspam {

enum class ErrorCode {
  EmptyUrl,
  FileNotFound,
  MissingColumn,
  AllRowsMalformed,
  DegenerateSplit,
  TooFewExamples,
  EmptyDataset,
  NonBinaryLabels,
  EmptyTrainingSet,
  NegativeFeature,
  LengthMismatch,
  EmptyMatrix,
  SingleClassTruth,
  EmptySpace,
  InvalidParameter,
  ModelFormat,
  Io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyUrl: return "EmptyUrl";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::AllRowsMalformed: return "AllRowsMalformed";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::TooFewExamples: return "TooFewExamples";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NonBinaryLabels: return "NonBinaryLabels";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::NegativeFeature: return "NegativeFeature";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::SingleClassTruth: return "SingleClassTruth";
    case ErrorCode::EmptySpace: return "EmptySpace";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::ModelFormat: return "ModelFormat";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace urlspam
