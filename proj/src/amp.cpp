#include "oamp/amp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "oamp/error.hpp"

namespace oamp {

DenoiserParams denoiser_params(const SeTrajectory& se, std::size_t t) {
  if (se.z.empty()) throw InvalidDimension("denoiser_params: empty SE trajectory");
  const std::size_t last = se.steps();
  DenoiserParams p;
  if (t == 0) {
    p.a = safe_ratio(se.alpha_init, se.tau2_init);
  } else {
    const std::size_t k = std::min(t - 1, last);
    p.a = safe_ratio(se.alpha[k], se.tau2[k]);
  }
  const std::size_t kb = std::min(t, last + 1);
  p.b = safe_ratio(se.mu_t[kb], se.sigma2_t[kb]);
  const std::size_t kg = std::min(t, last);
  p.g_slope = safe_ratio(se.beta[kg], se.beta[kg] * se.beta[kg] + se.theta2[kg]);
  return p;
}

FValue denoise_f(double u, double x, double x0, bool revealed, const DenoiserParams& params) {
  if (revealed) return {x0, 0.0, 0.0};
  const double value = std::tanh(params.a * u + params.b * x);
  const double sech2 = 1.0 - value * value;
  return {value, params.a * sech2, params.b * sech2};
}

GValue denoise_g(double v, double v0, bool revealed, const DenoiserParams& params) {
  if (revealed) return {v0, 0.0};
  return {params.g_slope * v, params.g_slope};
}

namespace {

void apply_f(const Vector& u, const Vector& x, const RevelationMasks& masks,
             const DenoiserParams& params, Vector& q, Vector& du, Vector& dx) {
  const Eigen::Index n = u.size();
  q.resize(n);
  du.resize(n);
  dx.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const FValue f = denoise_f(u[i], x[i], masks.x0[i], masks.revealed_x(k), params);
    q[i] = f.value;
    du[i] = f.du;
    dx[i] = f.dx;
  }
}

double matrix_mse(const Vector& x_hat, const Vector& x_star) {
  const double n = static_cast<double>(x_star.size());
  const double ov = x_hat.dot(x_star) / n;
  const double s = x_hat.squaredNorm() / n;
  return 1.0 - 2.0 * ov * ov + s * s;
}

void check_masks(const RevelationMasks& masks, std::size_t n, std::size_t p) {
  if (masks.mask_x.size() != n || static_cast<std::size_t>(masks.x0.size()) != n ||
      masks.mask_v.size() != p || static_cast<std::size_t>(masks.v0.size()) != p) {
    throw InvalidDimension("AMP: revelation masks do not match (n, p) = (" + std::to_string(n) +
                           ", " + std::to_string(p) + ")");
  }
}

}  // namespace

AmpState make_initial_state(const Vector& u0, const Vector& x0_iterate,
                            const RevelationMasks& masks, const DenoiserParams& params) {
  const auto n = static_cast<std::size_t>(u0.size());
  if (static_cast<std::size_t>(x0_iterate.size()) != n) {
    throw InvalidDimension("make_initial_state: u0 and x0 differ in length");
  }
  check_masks(masks, n, masks.mask_v.size());
  AmpState s;
  s.u = u0;
  s.x = x0_iterate;
  const auto p = static_cast<Eigen::Index>(masks.mask_v.size());
  s.v = Vector::Zero(p);
  s.m_prev = Vector::Zero(p);
  s.q_prev = Vector::Zero(u0.size());
  apply_f(s.u, s.x, masks, params, s.q, s.dq_du, s.dq_dx);
  return s;
}

OnsagerCoeffs onsager_coeffs(const AmpState& state, const RevelationMasks& masks,
                             const DenoiserParams& params, std::size_t n, std::size_t p) {
  if (n == 0 || p == 0) throw InvalidDimension("onsager_coeffs: n and p must be positive");
  OnsagerCoeffs out;
  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  const auto unrevealed_v = static_cast<double>(p - masks.count_v());
  out.c_t = params.g_slope * unrevealed_v / pd;
  out.p_t = state.dq_du.sum() / pd;
  out.d_t = state.dq_dx.sum() / nd;
  return out;
}

AmpState amp_step(const AmpState& state, const SymmetricOperator* graph, const RectOperator& cov,
                  const RevelationMasks& masks, const DenoiserParams& now,
                  const DenoiserParams& next) {
  const std::size_t n = cov.cols();
  const std::size_t p = cov.rows();
  if (static_cast<std::size_t>(state.q.size()) != n) {
    throw InvalidDimension("amp_step: state length differs from B's column count");
  }
  if (graph && graph->dim() != n) {
    throw InvalidDimension("amp_step: graph operator dimension differs from n");
  }
  check_masks(masks, n, p);
  const OnsagerCoeffs oc = onsager_coeffs(state, masks, now, n, p);

  AmpState out;
  out.t = state.t + 1;
  cov.apply(state.q, out.v);
  out.v -= oc.p_t * state.m_prev;

  Vector m(static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < m.size(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    m[j] = denoise_g(out.v[j], masks.v0[j], masks.revealed_v(k), now).value;
  }

  cov.apply_t(m, out.u);
  out.u -= oc.c_t * state.q;

  if (graph) {
    graph->apply(state.q, out.x);
    out.x -= oc.d_t * state.q_prev;
  } else {
    out.x = -oc.d_t * state.q_prev;
  }

  apply_f(out.u, out.x, masks, next, out.q, out.dq_du, out.dq_dx);
  if (!out.v.allFinite() || !out.u.allFinite() || !out.x.allFinite() || !out.q.allFinite()) {
    throw DivergenceError("amp_step: non-finite iterate at t = " + std::to_string(state.t), state.t);
  }
  out.q_prev = state.q;
  out.m_prev = std::move(m);
  return out;
}

double a0_rhs(double a, double lambda, double mu, double c) {
  const double big = (c + mu) * a * a;
  const double disc = std::max(0.0, (lambda + big) * (lambda + big) - 4.0 * lambda * c * a * a);
  return (-lambda + big + std::sqrt(disc)) / (2.0 * mu);
}

double solve_a0(double lambda, double mu, double c, double tol) {
  if (!(c > 0.0)) throw DomainError("solve_a0: c must be positive");
  if (lambda < 0.0 || mu < 0.0) throw DomainError("solve_a0: lambda and mu must be non-negative");
  if (lambda == 0.0 || mu == 0.0) {
    throw NotApplicable("solve_a0: a0 is undefined unless lambda > 0 and mu > 0");
  }
  const double target = mu / (c * lambda);
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; a0_rhs(hi, lambda, mu, c) < target; ++k) {
    if (k > 200) throw ConvergenceError("solve_a0: could not bracket the root", target, 200);
    lo = hi;
    hi *= 2.0;
  }
  double mid = 0.5 * (lo + hi);
  for (int k = 0; k < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++k) {
    mid = 0.5 * (lo + hi);
    if (a0_rhs(mid, lambda, mu, c) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  mid = 0.5 * (lo + hi);
  const double residual = std::abs(a0_rhs(mid, lambda, mu, c) - target);
  if (residual > tol * std::max(1.0, target)) {
    throw ConvergenceError("solve_a0: residual " + std::to_string(residual) + " exceeds tol",
                           residual, 400);
  }
  return mid;
}

SpectralStart spectral_initialize(SymmetricOperatorPtr graph,
                                  std::shared_ptr<const RectOperator> covariates, double a0,
                                  const SpectralInit& options, Rng& rng) {
  double weight = 0.0;
  if (covariates && a0 != 0.0) {
    weight = a0;
    if (options.gram_scale == GramScale::by_n) {
      weight *= static_cast<double>(covariates->rows()) / static_cast<double>(covariates->cols());
    }
  }
  if (weight == 0.0) covariates.reset();
  const SpectralOperator op(std::move(graph), std::move(covariates), weight);

  const EigenPair ep = options.solver == EigenSolver::lanczos
                           ? lanczos_largest(op, options.lanczos, rng)
                           : power_iteration(op, options.power, rng);
  SpectralStart out;
  const double scale = std::sqrt(static_cast<double>(op.dim()));
  out.x0 = scale * ep.eigenvector;
  out.u0 = out.x0;
  out.info.a0 = a0;
  out.info.eigenvalue = ep.eigenvalue;
  out.info.residual = ep.residual;
  out.info.iterations = ep.iterations;
  return out;
}

AmpResult run_amp(const AmpConfig& cfg, const AmpInstance& instance, const AmpInit& init) {
  if (!instance.covariates) throw InvalidDimension("run_amp: covariate operator required");
  if (cfg.n_iter == 0) throw DomainError("run_amp: n_iter must be at least 1");
  const RectOperator& cov = *instance.covariates;
  const std::size_t n = cov.cols();
  const bool track = instance.x_star.size() != 0;
  if (track && static_cast<std::size_t>(instance.x_star.size()) != n) {
    throw InvalidDimension("run_amp: x_star length differs from n");
  }

  AmpResult result;
  Vector u0;
  Vector x0;
  if (std::holds_alternative<ZeroInit>(init)) {
    u0 = Vector::Zero(static_cast<Eigen::Index>(n));
    x0 = u0;
  } else if (const auto* g = std::get_if<GivenInit>(&init)) {
    if (static_cast<std::size_t>(g->u0.size()) != n || static_cast<std::size_t>(g->x0.size()) != n) {
      throw InvalidDimension("run_amp: given initial iterates must have length n");
    }
    u0 = g->u0;
    x0 = g->x0;
  } else {
    const auto& sp = std::get<SpectralInit>(init);
    const double c = static_cast<double>(n) / static_cast<double>(cov.rows());
    SymmetricOperatorPtr graph = instance.graph;
    std::shared_ptr<const RectOperator> covariates = instance.covariates;
    double a0 = 1.0;
    if (cfg.lambda == 0.0) {
      graph.reset();
    } else if (cfg.mu == 0.0) {
      covariates.reset();
    } else {
      a0 = sp.a0.value_or(solve_a0(cfg.lambda, cfg.mu, c));
    }
    Rng rng = make_rng(cfg.seed, Stream::spectral);
    SpectralStart start = spectral_initialize(graph, covariates, a0, sp, rng);
    if (track) start.info.overlap = std::abs(start.x0.dot(instance.x_star)) / double(n);
    u0 = std::move(start.u0);
    x0 = std::move(start.x0);
    result.spectral = start.info;
  }

  AmpState state = make_initial_state(u0, x0, instance.masks, denoiser_params(cfg.se, 0));
  auto record = [&](const AmpState& s) {
    if (!track) return;
    result.overlap.push_back(s.q.dot(instance.x_star) / double(n));
    result.mse.push_back(matrix_mse(s.q, instance.x_star));
  };
  record(state);
  const double root_n = std::sqrt(static_cast<double>(n));
  for (std::size_t t = 0; t < cfg.n_iter; ++t) {
    AmpState next = amp_step(state, instance.graph.get(), cov, instance.masks,
                             denoiser_params(cfg.se, t), denoiser_params(cfg.se, t + 1));
    const double change = (next.q - state.q).norm() / root_n;
    state = std::move(next);
    record(state);
    if (cfg.early_stop_tol && change < *cfg.early_stop_tol) break;
  }
  result.iterations = state.t;
  result.x_hat = std::move(state.q);
  return result;
}

}  // namespace oamp
