/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace superyolo::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;

/// Default output directory when neither --output-dir nor the variable is set.
inline constexpr const char* kDefaultOutputDir = "runs";
inline constexpr const char* kOutputDirVariable = "SUPERYOLO_OUTPUT_DIR";

/// Parses and runs one command; never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace superyolo::cli
