#pragma once

#include <stdexcept>
#include <string>

namespace sicca {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error {
  using Error::Error;
};

// Raised when an operation needs more samples than the caller provided.
struct InsufficientSamples : Error {
  using Error::Error;
};

// Covariance block is numerically singular after ridge regularization.
struct SingularCovariance : Error {
  using Error::Error;
};

// Leading singular-value gap is too small for the requested operation.
struct GapTooSmall : Error {
  using Error::Error;
};

// A direction has (near) zero norm under the relevant metric.
struct DegenerateDirection : Error {
  using Error::Error;
};

// Model parameters do not describe a valid distribution.
struct InvalidModel : Error {
  using Error::Error;
};

// Shift locator could not certify a bracketed shift.
struct BracketFailure : Error {
  using Error::Error;
};

// One-pass sample source ran out of data.
struct StreamExhausted : Error {
  using Error::Error;
};

// Supplied shift is not above the top correlation.
struct InvalidShift : Error {
  using Error::Error;
};

// Requested accuracy needs more outer iterations than the configured cap.
struct MaxOuterExceeded : Error {
  using Error::Error;
};

// Configuration file or CLI argument problem.
struct ConfigError : Error {
  using Error::Error;
};

// Scaling-law fit is infeasible (too few points, nonpositive values).
struct FitError : Error {
  using Error::Error;
};

// File could not be read or written, or its contents are malformed.
struct IoError : Error {
  using Error::Error;
};

}  // namespace sicca
