#include "oamp/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "oamp/error.hpp"
#include "oamp/rng.hpp"
#include "oamp/scalar_channel.hpp"

namespace oamp {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

void check_snr(double lambda, double mu, double c) {
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and non-negative");
  require(mu >= 0.0 && std::isfinite(mu), "mu must be finite and non-negative");
  require(c > 0.0 && std::isfinite(c), "c must be finite and positive");
}

void check_z(double z) {
  require(z >= 0.0 && z <= 1.0, "scalar state z = " + std::to_string(z) + " is outside [0, 1]");
}

/// Covariate-orbit effective SNR alpha^2 / tau^2 at scalar state z.
double covariate_snr(double z, double mu, double c, double eps, CovariateRevelation rev) {
  const double r = mu * z / (1.0 + mu * z);
  if (rev == CovariateRevelation::excluded) return (mu / c) * (1.0 - eps) * r;
  return (mu / c) * (eps + (1.0 - eps) * r);
}

SeConfig with_eps0(double lambda, double mu, double c) {
  SeConfig cfg;
  cfg.lambda = lambda;
  cfg.mu = mu;
  cfg.c = c;
  cfg.eps = 0.0;
  return cfg;
}

}  // namespace

void validate(const SeConfig& cfg) {
  check_snr(cfg.lambda, cfg.mu, cfg.c);
  require(cfg.eps >= 0.0 && cfg.eps <= 1.0, "eps must lie in [0, 1]");
  require(cfg.tol > 0.0, "tol must be positive");
  require(cfg.t_max >= 1, "t_max must be at least 1");
  if (const auto* r = std::get_if<SeRandomInterval>(&cfg.init)) {
    require(0.0 < r->lo && r->lo <= r->hi, "random SE init needs 0 < lo <= hi");
  }
  if (const auto* f = std::get_if<SeFromZ>(&cfg.init)) check_z(f->z0);
}

double safe_ratio(double num, double den) {
  if (den == 0.0) {
    if (num == 0.0) return 0.0;
    throw DomainError("safe_ratio: nonzero numerator over zero denominator");
  }
  return num / den;
}

double SeTrajectory::gamma(std::size_t t) const {
  return safe_ratio(mu_t.at(t) * mu_t.at(t), sigma2_t.at(t));
}

double SeTrajectory::theta(std::size_t t) const {
  return safe_ratio(beta.at(t) * beta.at(t), theta2.at(t));
}

double se_scalar_step(double z, const SeConfig& cfg) {
  check_z(z);
  const double eta = cfg.lambda * z + covariate_snr(z, cfg.mu, cfg.c, cfg.eps, cfg.revelation);
  return cfg.eps + (1.0 - cfg.eps) * scalar_mmse_complement(eta);
}

double se_scalar_step_derivative(double z, const SeConfig& cfg) {
  check_z(z);
  const double eta = cfg.lambda * z + covariate_snr(z, cfg.mu, cfg.c, cfg.eps, cfg.revelation);
  const double d = 1.0 + cfg.mu * z;
  const double deta = cfg.lambda + (cfg.mu * cfg.mu / cfg.c) * (1.0 - cfg.eps) / (d * d);
  return -(1.0 - cfg.eps) * scalar_mmse_derivative(eta) * deta;
}

double fixed_point_z(const SeConfig& cfg) {
  validate(cfg);
  // With eps = 0, G(0) = 0 and G'(0) = lambda + mu^2/c. A concave G with
  // G'(0) <= 1 lies below the diagonal on (0, 1], so 0 is the only fixed
  // point; iterating would crawl towards it when G'(0) = 1.
  if (cfg.eps == 0.0 && !detection_possible(cfg.lambda, cfg.mu, cfg.c)) return 0.0;
  double z = 1.0;
  double residual = 0.0;
  for (std::size_t k = 0; k < cfg.t_max; ++k) {
    const double g = se_scalar_step(z, cfg);
    residual = g - z;
    if (std::abs(residual) < cfg.tol) return z;
    const double slope = se_scalar_step_derivative(z, cfg) - 1.0;
    double next = g;
    if (slope < 0.0) {
      const double newton = z - residual / slope;
      if (std::isfinite(newton) && newton >= 0.0 && newton <= g) next = newton;
    }
    z = std::clamp(next, 0.0, 1.0);
  }
  throw ConvergenceError("fixed_point_z: no convergence after " + std::to_string(cfg.t_max) +
                             " steps (lambda=" + std::to_string(cfg.lambda) +
                             ", mu=" + std::to_string(cfg.mu) + ", c=" + std::to_string(cfg.c) +
                             ")",
                         std::abs(residual), cfg.t_max);
}

double limit_mmse(double lambda, double mu, double c) {
  const double z = fixed_point_z(with_eps0(lambda, mu, c));
  return 1.0 - z * z;
}

bool detection_possible(double lambda, double mu, double c) {
  check_snr(lambda, mu, c);
  return lambda + mu * mu / c > 1.0;
}

double xi(double z, double lambda, double mu, double c) {
  check_snr(lambda, mu, c);
  check_z(z);
  const double k = 0.5 / c;
  const double d = 1.0 + mu * z;
  const double eta = lambda * z + (mu * mu / c) * z / d;
  const double one_minus_z = 1.0 - z;
  return lambda * one_minus_z * one_minus_z / 4.0 + k * std::log(d) + k * (1.0 + mu) / d +
         scalar_mi(eta) - k * std::log1p(mu) - k;
}

double xi_limit(double lambda, double mu, double c) {
  return xi(fixed_point_z(with_eps0(lambda, mu, c)), lambda, mu, c);
}

double gamma_star(double mu, double c) { return fixed_point_z(with_eps0(0.0, mu, c)); }

SeParams params_from_z(double z, double lambda, double mu, double c, double eps,
                       CovariateRevelation revelation) {
  check_snr(lambda, mu, c);
  check_z(z);
  SeParams out;
  out.mu_next = std::sqrt(lambda) * z;
  out.sigma2_next = z;
  out.beta = std::sqrt(mu * c) * z;
  out.theta2 = c * z;
  const double r = safe_ratio(out.beta * out.beta, out.beta * out.beta + out.theta2);
  const double excluded = (1.0 - eps) * r;
  out.tau2 = revelation == CovariateRevelation::excluded ? excluded : eps + excluded;
  out.alpha = std::sqrt(mu / c) * out.tau2;
  return out;
}

SeTrajectory se_run(const SeConfig& cfg) {
  validate(cfg);
  SeTrajectory tr;
  tr.config = cfg;
  const std::size_t steps = cfg.t_max;
  tr.z.resize(steps + 1);
  tr.alpha.resize(steps + 1);
  tr.tau2.resize(steps + 1);
  tr.beta.resize(steps + 1);
  tr.theta2.resize(steps + 1);
  tr.mu_t.resize(steps + 2);
  tr.sigma2_t.resize(steps + 2);

  const double keep = 1.0 - cfg.eps;
  if (std::holds_alternative<SeZeroInit>(cfg.init)) {
    tr.mu_t[0] = tr.sigma2_t[0] = 0.0;
    tr.z[0] = 1.0 - keep * scalar_mmse(0.0);
  } else if (const auto* f = std::get_if<SeFromZ>(&cfg.init)) {
    const SeParams p = params_from_z(f->z0, cfg.lambda, cfg.mu, cfg.c, cfg.eps, cfg.revelation);
    tr.alpha_init = p.alpha;
    tr.tau2_init = p.tau2;
    tr.mu_t[0] = p.mu_next;
    tr.sigma2_t[0] = p.sigma2_next;
    tr.z[0] = f->z0;
  } else {
    const auto& r = std::get<SeRandomInterval>(cfg.init);
    Rng rng = make_rng(r.seed, Stream::se_init, 0);
    std::uniform_real_distribution<double> unif(r.lo, r.hi);
    const double mu0 = unif(rng);
    const double sigma0 = unif(rng);
    const double alpha_init = unif(rng);
    const double tau_init = unif(rng);
    tr.mu_t[0] = mu0;
    tr.sigma2_t[0] = sigma0 * sigma0;
    tr.alpha_init = alpha_init;
    tr.tau2_init = tau_init * tau_init;
    const double eta = safe_ratio(alpha_init * alpha_init, tr.tau2_init) +
                       safe_ratio(mu0 * mu0, tr.sigma2_t[0]);
    tr.z[0] = cfg.eps + keep * scalar_mmse_complement(eta);
  }

  for (std::size_t t = 0; t <= steps; ++t) {
    const SeParams p = params_from_z(tr.z[t], cfg.lambda, cfg.mu, cfg.c, cfg.eps, cfg.revelation);
    tr.alpha[t] = p.alpha;
    tr.tau2[t] = p.tau2;
    tr.beta[t] = p.beta;
    tr.theta2[t] = p.theta2;
    tr.mu_t[t + 1] = p.mu_next;
    tr.sigma2_t[t + 1] = p.sigma2_next;
    if (t == steps) break;
    const double eta = safe_ratio(p.alpha * p.alpha, p.tau2) + tr.gamma(t + 1);
    tr.z[t + 1] = std::clamp(cfg.eps + keep * scalar_mmse_complement(eta), 0.0, 1.0);
  }
  return tr;
}

}  // namespace oamp
