// Copyright 2026 The mdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mdlab::cli {

/// Exit codes of `run`.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kValidation = 2,
  kPrecision = 3,
  kBudget = 4,
};

/// Runs the command line `args` (without the program name). Results go to
/// `--out` when given, otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mdlab::cli
