#include "gbst/error.hpp"

namespace gbst {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDimension: return "invalid-dimension";
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::DegenerateGraph: return "degenerate-graph";
    case ErrorCode::DecompositionFailure: return "decomposition-failure";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::NotACorrespondence: return "not-a-correspondence";
    case ErrorCode::NonPositiveDefinite: return "non-positive-definite";
    case ErrorCode::DegenerateInput: return "degenerate-input";
    case ErrorCode::EmptyDataset: return "empty-dataset";
    case ErrorCode::InconsistentBlockSize: return "inconsistent-block-size";
    case ErrorCode::FormatError: return "format-error";
    case ErrorCode::Overflow: return "overflow";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown";
}

}  // namespace gbst
