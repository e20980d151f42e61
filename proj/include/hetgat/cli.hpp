// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace hetgat {

// Whole command-line front end as a callable, so tests can drive every verb
// in process. args excludes the program name. Returns the process exit code:
// 0 success, 1 usage or configuration errors, 2 numerical failures, 3 a
// property check that ran and found a violation.
int run_cli(const std::vector<std::string>& args);

}  // namespace hetgat
