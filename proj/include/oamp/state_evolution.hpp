#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

namespace oamp {

/// How the revealed part of the spike enters the covariate-orbit SNR.
///
/// `excluded` is the reduced recursion in its printed form, where that SNR is
/// (mu/c)(1-eps) r with r = mu z / (1 + mu z). `included` adds the revealed
/// coordinates, (mu/c)(eps + (1-eps) r), which is what the AMP iterates with
/// eps-revelation actually track. The two agree at eps = 0.
enum class CovariateRevelation { excluded, included };

struct SeZeroInit {};

/// Start the scalar state at z0; the t = 0 denoiser parameters are those of
/// params_from_z(z0).
struct SeFromZ {
  double z0 = 1.0;
};

/// mu_0, sigma_0, alpha_{-1}, tau_{-1} drawn uniformly in [lo, hi].
struct SeRandomInterval {
  double lo = 4.0;
  double hi = 10.0;
  std::uint64_t seed = 0;
};

using SeInit = std::variant<SeZeroInit, SeFromZ, SeRandomInterval>;

struct SeConfig {
  double lambda = 0.0;
  double mu = 0.0;
  double c = 1.0;
  double eps = 0.0;
  SeInit init = SeFromZ{};
  std::size_t t_max = 10000;
  double tol = 1e-12;
  CovariateRevelation revelation = CovariateRevelation::excluded;
};

/// Throws DomainError on negative SNRs, c <= 0, eps outside [0, 1], tol <= 0
/// or t_max == 0.
void validate(const SeConfig& cfg);

/// The parameter tuple consistent with scalar state s (see params_from_z).
struct SeParams {
  double alpha = 0.0;
  double tau2 = 0.0;
  double mu_next = 0.0;
  double sigma2_next = 0.0;
  double beta = 0.0;
  double theta2 = 0.0;
};

/// Indexing: z[t] = s_t for t = 0..T. alpha, tau2, beta, theta2 are indexed by
/// t = 0..T. mu_t and sigma2_t are indexed 0..T+1, with entry 0 the
/// initialisation and entry t+1 produced from s_t. alpha_init and tau2_init are
/// alpha_{-1} and tau2_{-1}.
struct SeTrajectory {
  SeConfig config;
  std::vector<double> z;
  std::vector<double> alpha;
  std::vector<double> tau2;
  std::vector<double> beta;
  std::vector<double> theta2;
  std::vector<double> mu_t;
  std::vector<double> sigma2_t;
  double alpha_init = 0.0;
  double tau2_init = 0.0;

  std::size_t steps() const noexcept { return z.empty() ? 0 : z.size() - 1; }
  /// mu_t^2 / sigma_t^2 (0/0 = 0), t = 0..T+1.
  double gamma(std::size_t t) const;
  /// beta_t^2 / theta_t^2 (0/0 = 0), t = 0..T.
  double theta(std::size_t t) const;
};

/// num / den with 0/0 = 0. Throws DomainError for a nonzero numerator over 0.
double safe_ratio(double num, double den);

/// G_eps(z) = 1 - (1-eps) mmse(eta(z)) with
///   eta = lambda z + (mu^2/c)(1-eps) z/(1+mu z)           (excluded)
///   eta = lambda z + (mu/c)(eps + (1-eps) mu z/(1+mu z))  (included)
/// Throws DomainError unless z is in [0, 1].
double se_scalar_step(double z, const SeConfig& cfg);
double se_scalar_step_derivative(double z, const SeConfig& cfg);

/// Largest fixed point of G_eps on [0, 1]. Iterates downward from z = 1; each
/// step takes the Newton update for G(z) - z when it lies in [0, G(z)] and the
/// plain update z <- G(z) otherwise. Since G is increasing and concave both
/// stay at or above the largest root. Stops once |G(z) - z| < tol; throws
/// ConvergenceError after t_max steps. For eps = 0 below the detection
/// threshold the answer is 0 without iterating.
double fixed_point_z(const SeConfig& cfg);

/// 1 - z*(lambda, mu)^2 at eps = 0.
double limit_mmse(double lambda, double mu, double c);

/// lambda + mu^2 / c > 1.
bool detection_possible(double lambda, double mu, double c);

/// The mutual-information potential at scalar state z.
double xi(double z, double lambda, double mu, double c);

/// xi at z = z*(lambda, mu).
double xi_limit(double lambda, double mu, double c);

/// gamma* = 1 - mmse((mu^2/c) gamma* / (1 + mu gamma*)), the lambda = 0 case.
double gamma_star(double mu, double c);

SeParams params_from_z(double z, double lambda, double mu, double c, double eps,
                       CovariateRevelation revelation = CovariateRevelation::excluded);

/// The full recursion for t = 0..t_max.
SeTrajectory se_run(const SeConfig& cfg);

}  // namespace oamp
