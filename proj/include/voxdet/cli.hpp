// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef VOXDET_CLI_HPP
#define VOXDET_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace voxdet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

/// Runs the command line `args` (without the program name). Returns 0 on
/// success, 1 on a domain error, 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace voxdet

#endif  // VOXDET_CLI_HPP
