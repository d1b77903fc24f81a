#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "oamp/linalg.hpp"
#include "oamp/model.hpp"
#include "oamp/state_evolution.hpp"

namespace oamp {

/// Scalars of the two denoisers at one time step:
/// f(u, x) = tanh(a u + b x) and g(v) = g_slope * v on unrevealed coordinates.
struct DenoiserParams {
  double a = 0.0;        // alpha_{t-1} / tau2_{t-1}
  double b = 0.0;        // mu_t / sigma2_t
  double g_slope = 0.0;  // beta_t / (beta_t^2 + theta2_t)
};

/// Parameters for step t read off an SE trajectory. Steps past the end of
/// the trajectory reuse its last entry.
DenoiserParams denoiser_params(const SeTrajectory& se, std::size_t t);

struct FValue {
  double value = 0.0;
  double du = 0.0;
  double dx = 0.0;
};

struct GValue {
  double value = 0.0;
  double dv = 0.0;
};

/// E[X0 | u, x] for the label orbit: x0 on revealed coordinates, otherwise
/// tanh(a u + b x) with its partial derivatives.
FValue denoise_f(double u, double x, double x0, bool revealed, const DenoiserParams& params);

/// E[V0 | v] for the spike orbit: v0 on revealed coordinates, otherwise the
/// Gaussian posterior mean g_slope * v.
GValue denoise_g(double v, double v0, bool revealed, const DenoiserParams& params);

/// Iterates at time t. q = f_t(u, x) with derivatives dq_du, dq_dx; q_prev is
/// q^{t-1} and m_prev is g_{t-1}(v^{t-1}), both zero at t = 0. v holds v^{t-1}.
struct AmpState {
  std::size_t t = 0;
  Vector u;
  Vector x;
  Vector v;
  Vector q;
  Vector dq_du;
  Vector dq_dx;
  Vector q_prev;
  Vector m_prev;
};

struct OnsagerCoeffs {
  double c_t = 0.0;  // (1/p) sum dg/dv
  double p_t = 0.0;  // (n/p)(1/n) sum df/du
  double d_t = 0.0;  // (1/n) sum df/dx
};

/// Builds the t = 0 state from u^0, x^0 using params for step 0.
AmpState make_initial_state(const Vector& u0, const Vector& x0_iterate,
                            const RevelationMasks& masks, const DenoiserParams& params);

OnsagerCoeffs onsager_coeffs(const AmpState& state, const RevelationMasks& masks,
                             const DenoiserParams& params, std::size_t n, std::size_t p);

/// One synchronised step t -> t+1 over both orbits:
///   v^t     = B q^t / sqrt(p) - p_t m^{t-1}
///   m^t     = g_t(v^t)
///   u^{t+1} = B^T m^t / sqrt(p) - c_t q^t
///   x^{t+1} = S q^t - d_t q^{t-1}
///   q^{t+1} = f_{t+1}(u^{t+1}, x^{t+1})
/// where S is T/sqrt(n) or the combined centred adjacency. A null `graph`
/// counts as S = 0. `now` supplies g_t, `next` supplies f_{t+1}.
/// Throws DivergenceError if any new iterate is non-finite.
AmpState amp_step(const AmpState& state, const SymmetricOperator* graph, const RectOperator& cov,
                  const RevelationMasks& masks, const DenoiserParams& now,
                  const DenoiserParams& next);

/// Scale of the covariate Gram term in the spectral matrix S + w B^T B.
enum class GramScale {
  by_n,  // a0 B^T B / n
  by_p,  // a0 B^T B / p
};

/// Which eigensolver the spectral initialiser uses.
enum class EigenSolver { lanczos, power };

struct ZeroInit {};

struct SpectralInit {
  /// Solved from (lambda, mu, c) when empty.
  std::optional<double> a0;
  GramScale gram_scale = GramScale::by_n;
  EigenSolver solver = EigenSolver::lanczos;
  LanczosOptions lanczos;
  PowerIterationOptions power{std::nullopt, 1e-7, 20000, 30};
};

struct GivenInit {
  Vector u0;
  Vector x0;
};

using AmpInit = std::variant<ZeroInit, SpectralInit, GivenInit>;

enum class AmpMode { gaussian_surrogate, graph };

struct AmpConfig {
  AmpMode mode = AmpMode::gaussian_surrogate;
  std::size_t n_iter = 100;
  /// Stop once ||q^{t+1} - q^t|| / sqrt(n) falls below this.
  std::optional<double> early_stop_tol;
  SeTrajectory se;
  double lambda = 0.0;
  double mu = 0.0;
  std::uint64_t seed = 0;
};

/// Everything AMP reads: operators, side information, and (optionally) the
/// truth for diagnostics.
struct AmpInstance {
  SymmetricOperatorPtr graph;
  std::shared_ptr<const RectOperator> covariates;
  RevelationMasks masks;
  Vector x_star;  // empty: no diagnostics
};

struct SpectralInfo {
  double a0 = 0.0;
  double eigenvalue = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  double overlap = 0.0;  // |<x^0, x*>| / n, when the truth is known
};

struct AmpResult {
  Vector x_hat;
  std::size_t iterations = 0;
  /// <q^t, x*>/n and the matrix MSE of q^t for t = 0..iterations, when the
  /// truth is known.
  std::vector<double> overlap;
  std::vector<double> mse;
  std::optional<SpectralInfo> spectral;
};

AmpResult run_amp(const AmpConfig& cfg, const AmpInstance& instance, const AmpInit& init);

/// Right-hand side of the a0 equation,
/// [-lambda + (c+mu) a^2 + sqrt((lambda + (c+mu) a^2)^2 - 4 lambda c a^2)] / (2 mu).
double a0_rhs(double a, double lambda, double mu, double c);

/// a0 > 0 with a0_rhs(a0) = mu / (c lambda), by bisection on a bracket whose
/// upper end doubles until it straddles the target. Throws NotApplicable for
/// lambda = 0 or mu = 0, DomainError for c <= 0.
double solve_a0(double lambda, double mu, double c, double tol = 1e-12);

struct SpectralStart {
  Vector x0;
  Vector u0;
  SpectralInfo info;
};

/// x^0 = u^0 = sqrt(n) e, with e the leading eigenvector of
/// graph + w B^T B (w = a0/n or a0/p). A null graph gives the covariate-only
/// method, a null covariate operator (or a0 = 0) the graph-only method.
SpectralStart spectral_initialize(SymmetricOperatorPtr graph,
                                  std::shared_ptr<const RectOperator> covariates, double a0,
                                  const SpectralInit& options, Rng& rng);

}  // namespace oamp
