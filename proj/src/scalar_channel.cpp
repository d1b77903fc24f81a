#include "oamp/scalar_channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "oamp/error.hpp"

namespace oamp {

QuadratureRule gauss_hermite_rule(std::size_t k) {
  if (k == 0) throw DomainError("gauss_hermite_rule: k must be at least 1");
  const auto ki = static_cast<Eigen::Index>(k);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(ki);
  Eigen::VectorXd sub(std::max<Eigen::Index>(ki - 1, 0));
  for (Eigen::Index j = 0; j + 1 < ki; ++j) sub[j] = std::sqrt(static_cast<double>(j + 1));

  QuadratureRule rule;
  rule.nodes.resize(k);
  rule.weights.resize(k);
  if (k == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 1.0;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  for (Eigen::Index j = 0; j < ki; ++j) {
    rule.nodes[static_cast<std::size_t>(j)] = vals[j];
    rule.weights[static_cast<std::size_t>(j)] = vecs(0, j) * vecs(0, j);
  }
  // The rule is symmetric about 0; enforce it exactly.
  for (std::size_t i = 0; i < k / 2; ++i) {
    const std::size_t j = k - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (k % 2 == 1) rule.nodes[k / 2] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

QuadratureRule gauss_legendre_rule(std::size_t k) {
  if (k == 0) throw DomainError("gauss_legendre_rule: k must be at least 1");
  QuadratureRule rule;
  rule.nodes.resize(k);
  rule.weights.resize(k);
  const double kd = static_cast<double>(k);
  for (std::size_t i = 0; i < (k + 1) / 2; ++i) {
    // Newton on P_k from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (kd + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t j = 2; j <= k; ++j) {
        const double jd = static_cast<double>(j);
        const double p2 = ((2.0 * jd - 1.0) * x * p1 - (jd - 1.0) * p0) / jd;
        p0 = p1;
        p1 = p2;
      }
      if (k == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = kd * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (k == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[k - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[k - 1 - i] = w;
  }
  if (k % 2 == 1) rule.nodes[k / 2] = 0.0;
  return rule;
}

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

namespace {

// sech^2(w) < 1e-16 and log1p(exp(-2|w|)) < 1e-17 beyond this.
constexpr double kTailCutoff = 20.0;
// Gaussian window half-width in standard deviations (exp(-72) ~ 5e-32).
constexpr double kWindowSigmas = 12.0;

const QuadratureRule& legendre16() {
  static const QuadratureRule rule = gauss_legendre_rule(16);
  return rule;
}

void require_eta(double eta, const char* fn) {
  if (!(eta >= 0.0)) {
    throw DomainError(std::string(fn) + ": eta = " + std::to_string(eta) +
                      " must be non-negative");
  }
}

/// E h(W), W ~ N(eta, eta), for h decaying like exp(-2|w|). Returns 0 when
/// the Gaussian window misses the support of h.
template <class H>
double expect_localized(double eta, H&& integrand) {
  const double sd = std::sqrt(eta);
  const double lo = std::max(-kTailCutoff, eta - kWindowSigmas * sd);
  const double hi = std::min(kTailCutoff, eta + kWindowSigmas * sd);
  if (!(lo < hi)) return 0.0;
  const double width = std::min(1.0, sd);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * eta);
  const auto& gl = legendre16();

  auto integrate_piece = [&](double a, double b) {
    if (!(a < b)) return 0.0;
    const auto panels = static_cast<std::size_t>(std::ceil((b - a) / width));
    const double step = (b - a) / static_cast<double>(panels);
    double acc = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
      const double mid = a + (static_cast<double>(k) + 0.5) * step;
      double panel = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double w = mid + 0.5 * step * gl.nodes[i];
        const double dz = w - eta;
        panel += gl.weights[i] * integrand(w) * std::exp(-0.5 * dz * dz / eta);
      }
      acc += 0.5 * step * panel;
    }
    return acc;
  };
  // Split at 0, where |w| has its kink.
  double total;
  if (lo < 0.0 && hi > 0.0) {
    total = integrate_piece(lo, 0.0) + integrate_piece(0.0, hi);
  } else {
    total = integrate_piece(lo, hi);
  }
  return norm * total;
}

double sech2(double w) {
  const double c = std::cosh(w);
  return 1.0 / (c * c);
}

}  // namespace

double scalar_mmse(double eta) {
  require_eta(eta, "scalar_mmse");
  if (eta == 0.0) return 1.0;
  const double v = expect_localized(eta, [](double w) { return sech2(w); });
  return std::clamp(v, 0.0, 1.0);
}

double scalar_mmse_complement(double eta) {
  require_eta(eta, "scalar_mmse_complement");
  if (eta == 0.0) return 0.0;
  if (eta + kWindowSigmas * std::sqrt(eta) > kTailCutoff) return 1.0 - scalar_mmse(eta);
  const double v = expect_localized(eta, [](double w) {
    const double t = std::tanh(w);
    return t * t;
  });
  return std::clamp(v, 0.0, 1.0);
}

double scalar_mmse_derivative(double eta) {
  require_eta(eta, "scalar_mmse_derivative");
  if (eta == 0.0) return -1.0;
  // d/deta E F(eta + sqrt(eta) Z) = E F'(W) + E F''(W) / 2 (Stein), F = sech^2.
  return expect_localized(eta, [](double w) {
    const double s2 = sech2(w);
    const double t = std::tanh(w);
    const double f1 = -2.0 * s2 * t;
    const double f2 = s2 * (4.0 * t * t - 2.0 * s2);
    return f1 + 0.5 * f2;
  });
}

double scalar_mi(double eta) {
  require_eta(eta, "scalar_mi");
  if (eta == 0.0) return 0.0;
  // eta - E|W| in closed form, written to avoid cancellation.
  const double sd = std::sqrt(eta);
  const double phi = std::exp(-0.5 * eta) / std::sqrt(2.0 * std::numbers::pi);
  const double eta_minus_abs = eta * std::erfc(sd / std::numbers::sqrt2) - 2.0 * sd * phi;
  const double tail =
      expect_localized(eta, [](double w) { return std::log1p(std::exp(-2.0 * std::abs(w))); });
  const double v = eta_minus_abs + std::numbers::ln2 - tail;
  return std::clamp(v, 0.0, std::numbers::ln2);
}

}  // namespace oamp
