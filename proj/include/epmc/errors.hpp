#ifndef EPMC_ERRORS_HPP
#define EPMC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace epmc {

// Base class for all library errors so callers can catch epmc failures
// separately from generic std exceptions.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Diffusion matrix singular (smallest singular value below the floor).
struct NonInvertibleDiffusion : Error {
  using Error::Error;
};

// Running or terminal cost evaluated negative while the problem declares
// nonnegative costs.
struct NegativeCost : Error {
  using Error::Error;
};

// A simulated state picked up a NaN/Inf coordinate.
struct NonFiniteState : Error {
  using Error::Error;
};

// Effective sample size of the twist weights collapsed below the floor.
struct DegenerateWeights : Error {
  using Error::Error;
};

// Weighted Gram matrix could not be factorized even after ridge jitter.
struct SingularRegression : Error {
  using Error::Error;
};

// Pointwise minimizer failed to reach the residual tolerance.
struct NoConvergence : Error {
  using Error::Error;
};

// Invalid or inconsistent parameters at construction time.
struct InvalidParams : Error {
  using Error::Error;
};

// Malformed input file; message carries the line number.
struct ParseError : Error {
  using Error::Error;
};

// Target profile has no usable knots.
struct CoverageError : Error {
  using Error::Error;
};

// Quadrature mass escaped the padded spatial domain of the grid solver.
struct DomainEscape : Error {
  using Error::Error;
};

// Problems with the CLI configuration file.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace epmc

#endif  // EPMC_ERRORS_HPP
