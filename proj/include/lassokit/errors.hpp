#pragma once

#include <stdexcept>
#include <string>

namespace lassokit {

/// Invalid model or argument dimensions (k > n, length mismatch, ...).
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A closed-form bound was requested below its validity threshold.
struct BoundNotApplicable : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// m <= D(lambda_best): no penalty value gives robust recovery.
struct InsufficientMeasurements : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Penalty outside the domain of the requested operation.
struct PenaltyDomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// lambda >= lambda_max: the estimator is not stable, no prediction exists.
struct UnstableRegion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Root bracketing exceeded the hard cap (lambda = 1e3).
struct RootBracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad experiment configuration (harness).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace lassokit
