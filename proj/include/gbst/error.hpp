#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gbst {

enum class ErrorCode {
  InvalidDimension,
  InvalidParameter,
  DegenerateGraph,
  DecompositionFailure,
  DimensionMismatch,
  NotACorrespondence,
  NonPositiveDefinite,
  DegenerateInput,
  EmptyDataset,
  InconsistentBlockSize,
  FormatError,
  Overflow,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library is reported through this one exception type;
// callers branch on code() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gbst
