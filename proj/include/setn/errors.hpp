#pragma once

#include <stdexcept>
#include <string>

namespace setn {

// Extent or length mismatch between operands.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf input or a numerical breakdown.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid parameters (negative step, unknown key, out-of-range value).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A size guard was hit (memory or dimension cap).
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Truncation left nothing to keep.
struct DegenerateTruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative solver stopped without meeting its tolerance.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual(best_residual) {}
  double best_residual;
};

// Estimation procedure could not produce a value (no peak, too few points).
struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace setn
