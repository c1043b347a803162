#pragma once

#include <stdexcept>
#include <string>

namespace bvp {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid problem data: dimension mismatch, bad interval, malformed file.
struct ValidationError : Error {
    using Error::Error;
};

/// A problem file failed schema validation before any computation started.
struct SchemaError : ValidationError {
    using ValidationError::ValidationError;
};

/// Shape of supplied parameters does not match the requested closed form.
struct ShapeMismatch : ValidationError {
    using ValidationError::ValidationError;
};

/// The adaptive integrator could not meet its tolerance (step underflow
/// or step budget exhausted); signals stiffness beyond configured limits.
struct IntegrationFailure : Error {
    using Error::Error;
};

/// Adaptive quadrature failed to converge within its panel budget.
struct QuadratureFailure : Error {
    using Error::Error;
};

/// A derivative of higher order than the data supports was requested.
struct OrderUnavailable : Error {
    using Error::Error;
};

/// Evaluation outside the domain of definition.
struct DomainError : Error {
    using Error::Error;
};

/// Eigenvalue clustering (or a failed decomposition) prevents a reliable
/// interpolation-based matrix function.
struct IllConditioned : Error {
    using Error::Error;
};

/// The requested construction does not apply to the given input
/// (e.g. a rank-raising perturbation of an already full-rank matrix).
struct NotApplicable : Error {
    using Error::Error;
};

}  // namespace bvp
