// SPDX-FileCopyrightText: 2026 The ibp authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ibp::cli {

enum ExitCode : int { kOk = 0, kToleranceFailure = 1, kUsage = 2, kEngine = 3 };

/// Runs one command. `args` excludes the program name. Results go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace ibp::cli
