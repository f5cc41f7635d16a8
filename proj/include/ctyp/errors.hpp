#pragma once

#include <stdexcept>
#include <string>

namespace ctyp {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or input parameters (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

/// Requested computation exceeds the configured memory or capacity budget.
struct CapacityError : Error {
    using Error::Error;
};

/// Malformed, truncated, or unsupported file content.
struct FormatError : Error {
    using Error::Error;
};

/// Dense eigensolver failure.
struct SolverError : Error {
    using Error::Error;
};

/// Evaluation requested outside the reliable domain of a fitted quantity.
struct DomainError : Error {
    using Error::Error;
};

/// Nonlinear fit did not converge.
struct FitError : Error {
    using Error::Error;
};

} // namespace ctyp
