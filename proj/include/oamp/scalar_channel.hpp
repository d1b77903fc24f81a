#pragma once

#include <cstddef>
#include <vector>

namespace oamp {

/// Nodes and weights for integrals against a probability density; for the
/// Gauss-Hermite rule, the standard normal.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <class F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

/// k-point Gauss-Hermite rule for E f(Z), Z ~ N(0, 1) (Golub-Welsch on the
/// probabilists' Hermite recurrence). Exact for polynomials of degree <= 2k-1.
/// Throws DomainError when k == 0.
///
/// The rule converges slowly for tanh-type integrands at moderate SNR
/// (poles at distance pi / (2 sqrt(eta)) from the real axis), so the scalar
/// channel below does not use it.
QuadratureRule gauss_hermite_rule(std::size_t k);

/// k-point Gauss-Legendre rule on [-1, 1] (weights sum to 2).
QuadratureRule gauss_legendre_rule(std::size_t k);

/// Overflow-safe log cosh(x) = |x| + log1p(exp(-2|x|)) - log 2.
double log_cosh(double x);

// Scalar channel Y = sqrt(eta) X0 + Z0 with X0 Rademacher.
//
// By symmetry of X0, every expectation reduces to one over
// W = eta + sqrt(eta) Z0 ~ N(eta, eta), and mmse(eta) = E sech^2(W).
// The integrands sech^2 and log1p(exp(-2|w|)) decay like exp(-2|w|), so they
// are integrated in w with composite 16-point Gauss-Legendre on panels
// narrower than both the Gaussian scale sqrt(eta) and the distance to the
// poles of tanh. This gives close to machine precision for every eta; once
// the Gaussian window misses [-kTailCutoff, kTailCutoff] entirely the values
// are the asymptotes mmse = 0, I = log 2 to double precision.

/// 1 - E tanh^2(eta + sqrt(eta) Z0). Throws DomainError for eta < 0.
double scalar_mmse(double eta);

/// 1 - mmse(eta) = E tanh^2(eta + sqrt(eta) Z0), evaluated directly when the
/// whole Gaussian window fits inside the cutoff so that small values keep
/// their relative precision.
double scalar_mmse_complement(double eta);

/// d mmse / d eta.
double scalar_mmse_derivative(double eta);

/// eta - E log cosh(eta + sqrt(eta) Z0). Throws DomainError for eta < 0.
double scalar_mi(double eta);

}  // namespace oamp
