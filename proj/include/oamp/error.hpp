#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oamp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A size is zero or two objects disagree on a dimension.
class InvalidDimension : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation (negative SNR,
/// probability outside [0, 1], misordered rates, degenerate density, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The requested layer SNR cannot be realised at the given density.
class InfeasibleSnr : public DomainError {
 public:
  InfeasibleSnr(const std::string& what, double max_lambda)
      : DomainError(what), max_lambda_(max_lambda) {}
  double max_lambda() const noexcept { return max_lambda_; }

 private:
  double max_lambda_;
};

/// The operation has no meaning for these inputs (e.g. a0 with mu = 0).
class NotApplicable : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, std::size_t iterations)
      : Error(what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

/// An AMP iterate became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t t) : Error(what), t_(t) {}
  std::size_t iteration() const noexcept { return t_; }

 private:
  std::size_t t_;
};

}  // namespace oamp
