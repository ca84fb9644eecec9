// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "unlearn/json_io.hpp"

namespace unlearn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Sets a dotted key ("solver.lr") to a value parsed as JSON when possible,
/// otherwise as a string. Creates intermediate objects as needed.
void apply_override(json& config, const std::string& assignment);

/// Entry point of the `unlearn` tool. Returns the process exit code; domain
/// errors are reported as one JSON object on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace unlearn
