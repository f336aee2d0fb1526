// Copyright 2026 The andloc Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file errors.hpp
 * @brief Exception hierarchy.
 *
 * Two families: InputError (bad arguments or configuration, CLI exit 2) and
 * NumericError (a computation broke down, CLI exit 4).
 */

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace andloc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

// -- input errors -----------------------------------------------------------

class DimensionError : public InputError {
public:
    using InputError::InputError;
};

class InvalidArgument : public InputError {
public:
    using InputError::InputError;
};

class SizeGuardError : public InputError {
public:
    using InputError::InputError;
};

/// Grid step does not divide the cell length.
class GridError : public InputError {
public:
    using InputError::InputError;
};

/// Critical-energy scan requested over an empty energy interval.
class ScanRangeError : public InputError {
public:
    using InputError::InputError;
};

/// A curve does not cover the requested interval.
class RangeError : public InputError {
public:
    using InputError::InputError;
};

/// Carries every violation found while validating a configuration.
class ConfigError : public InputError {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : InputError(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "invalid configuration:";
        for (const auto& s : v) {
            out += "\n  - ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

// -- numeric errors ---------------------------------------------------------

class SingularityError : public NumericError {
public:
    using NumericError::NumericError;
};

/// QR renormalization lost a direction (r_ii underflow or non-finite).
class InstabilityError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Exterior-power oracle asked to handle a product beyond its safe range.
class OracleRangeError : public NumericError {
public:
    using NumericError::NumericError;
};

class OverflowError : public NumericError {
public:
    using NumericError::NumericError;
};

class FactorizationError : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace andloc
