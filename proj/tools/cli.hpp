// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cirnn::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  // gradcheck above threshold
  kUsage = 2,        // bad flags or configuration
  kData = 3,         // unreadable, malformed or mismatched data
  kFailure = 4,      // anything else
};

/// Runs one command line (without the program name). Regular output goes to
/// out, diagnostics and warnings to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cirnn::cli
