// Copyright (c) 2026 inkdet contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace inkdet {

/// Bad run configuration: unknown keys, missing required fields, oversize grids.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Dataset problems: unreadable files, malformed annotations, empty splits.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A caller violated an operation precondition (mixed-class NMS input,
/// degenerate box, mismatched parameter layouts).
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite values where finite ones are required (gradients, losses).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem / serialization failures.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace inkdet
