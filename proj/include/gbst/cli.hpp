#pragma once

#include "gbst/trig_oracle.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gbst::cli {

enum ExitCode : int {
  kSuccess = 0,
  kVerificationFailure = 1,
  kUsageError = 2,
  kDataError = 3,
};

struct VerifyOptions {
  std::optional<int> size;
  std::optional<TrigKind> kind;
  bool json = false;
};

// Correspondence table; `generator` is swappable for negative-control tests.
int cmd_verify(const VerifyOptions& options, const TrigGenerator& generator, std::ostream& out);

/// Full command line (without the program name). Output goes to `out`
/// unless a command writes to a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gbst::cli
