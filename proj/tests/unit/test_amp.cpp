#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oamp/amp.hpp"
#include "oamp/error.hpp"
#include "oracles.hpp"

using namespace oamp;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = normal(rng);
  return m;
}

Vector random_signs(Eigen::Index n, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  Vector x(n);
  for (auto& e : x) e = coin(rng) ? 1.0 : -1.0;
  return x;
}

/// Posterior mean of X in {+1, -1} (uniform prior) from u = alpha X + tau Z1 and
/// x = mu X + sigma Z2, computed from the two Gaussian log-likelihoods.
double posterior_mean(double u, double x, double alpha, double tau2, double mu, double sigma2) {
  auto loglik = [&](double s) {
    return -0.5 * (u - alpha * s) * (u - alpha * s) / tau2 -
           0.5 * (x - mu * s) * (x - mu * s) / sigma2;
  };
  const double lp = loglik(1.0), lm = loglik(-1.0);
  const double top = std::max(lp, lm);
  const double wp = std::exp(lp - top), wm = std::exp(lm - top);
  return (wp - wm) / (wp + wm);
}

struct Problem {
  Matrix t;  // symmetric n x n, already divided by sqrt(n)
  Matrix b;  // p x n
  Vector x_star;
  RevelationMasks masks;
};

Problem small_problem(Eigen::Index n, Eigen::Index p, double lambda, double mu, double eps,
                      std::uint64_t seed) {
  Rng rng(seed);
  Problem pr;
  pr.x_star = random_signs(n, rng);
  const Matrix z = random_matrix(n, n, rng);
  const double dn = static_cast<double>(n);
  pr.t = (0.5 * (z + z.transpose()) * std::sqrt(2.0) + std::sqrt(lambda / dn) * pr.x_star * pr.x_star.transpose()) /
         std::sqrt(dn);
  const Vector v = random_matrix(p, 1, rng);
  pr.b = random_matrix(p, n, rng) + std::sqrt(mu / dn) * v * pr.x_star.transpose();
  pr.masks = RevelationMasks::none(static_cast<std::size_t>(n), static_cast<std::size_t>(p));
  std::bernoulli_distribution coin(eps);
  for (Eigen::Index i = 0; i < n; ++i)
    if (coin(rng)) {
      pr.masks.mask_x[static_cast<std::size_t>(i)] = 1;
      pr.masks.x0[i] = pr.x_star[i];
    }
  for (Eigen::Index j = 0; j < p; ++j)
    if (coin(rng)) {
      pr.masks.mask_v[static_cast<std::size_t>(j)] = 1;
      pr.masks.v0[j] = v[j];
    }
  pr.masks.eps = eps;
  return pr;
}

SeTrajectory se_for(double lambda, double mu, double c, double eps, std::size_t steps) {
  SeConfig cfg;
  cfg.lambda = lambda;
  cfg.mu = mu;
  cfg.c = c;
  cfg.eps = eps;
  cfg.t_max = steps;
  cfg.init = SeFromZ{0.6};
  cfg.revelation = CovariateRevelation::included;
  return se_run(cfg);
}

}  // namespace

TEST_SUITE("amp") {
  TEST_CASE("label denoiser equals the two-point posterior mean") {
    Rng rng(1);
    std::uniform_real_distribution<double> snr(0.05, 3.0), obs(-4.0, 4.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double alpha = snr(rng), tau2 = snr(rng), mu = snr(rng), sigma2 = snr(rng);
      const double u = obs(rng), x = obs(rng);
      const DenoiserParams p{alpha / tau2, mu / sigma2, 0.0};
      worst = std::max(worst, std::abs(denoise_f(u, x, 0.0, false, p).value -
                                       posterior_mean(u, x, alpha, tau2, mu, sigma2)));
    }
    CHECK(worst < 1e-12);
  }

  TEST_CASE("revealed coordinates return the side information") {
    const DenoiserParams p{1.3, 0.4, 0.7};
    const auto f = denoise_f(2.0, -1.0, -1.0, true, p);
    CHECK(f.value == -1.0);
    CHECK(f.du == 0.0);
    CHECK(f.dx == 0.0);
    const auto g = denoise_g(5.0, 0.25, true, p);
    CHECK(g.value == 0.25);
    CHECK(g.dv == 0.0);
    CHECK(denoise_f(0.0, 0.0, 0.0, false, p).value == 0.0);
  }

  TEST_CASE("spike denoiser equals the Gaussian posterior mean") {
    for (double beta : {0.3, 1.0, 2.5}) {
      for (double theta2 : {0.2, 1.0, 4.0}) {
        for (double v : {-3.0, -0.5, 0.0, 1.7}) {
          auto lik = [&](double s) { return std::exp(-0.5 * (v - beta * s) * (v - beta * s) / theta2); };
          const double num = oracle::gaussian_expectation([&](double s) { return s * lik(s); });
          const double den = oracle::gaussian_expectation(lik);
          const DenoiserParams p{0.0, 0.0, beta / (beta * beta + theta2)};
          CHECK(std::abs(denoise_g(v, 0.0, false, p).value - num / den) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("denoiser partial derivatives") {
    const DenoiserParams p{0.8, 1.7, 0.3};
    for (double u : {-1.0, 0.2, 1.5}) {
      for (double x : {-0.7, 0.0, 0.9}) {
        const double h = 1e-6;
        const auto f = denoise_f(u, x, 0.0, false, p);
        const double du = (std::tanh(p.a * (u + h) + p.b * x) - std::tanh(p.a * (u - h) + p.b * x)) / (2 * h);
        const double dx = (std::tanh(p.a * u + p.b * (x + h)) - std::tanh(p.a * u + p.b * (x - h))) / (2 * h);
        CHECK(std::abs(f.du - du) < 1e-8);
        CHECK(std::abs(f.dx - dx) < 1e-8);
      }
    }
  }

  TEST_CASE("denoiser parameters from a trajectory") {
    const auto se = se_for(2.0, 1.0, 1.0, 0.0, 5);
    const auto p0 = denoiser_params(se, 0);
    CHECK(p0.a == doctest::Approx(se.alpha_init / se.tau2_init));
    const auto p3 = denoiser_params(se, 3);
    CHECK(p3.a == doctest::Approx(se.alpha[2] / se.tau2[2]));
    CHECK(p3.b == doctest::Approx(se.mu_t[3] / se.sigma2_t[3]));
    CHECK(p3.g_slope == doctest::Approx(se.beta[3] / (se.beta[3] * se.beta[3] + se.theta2[3])));
    const auto far = denoiser_params(se, 1000);
    CHECK(far.a == doctest::Approx(se.alpha[5] / se.tau2[5]));
  }

  TEST_CASE("Onsager coefficients against finite differences") {
    Rng rng(3);
    for (const double eps : {0.0, 0.3}) {
      const auto pr = small_problem(20, 15, 2.0, 1.0, eps, 4);
      const Vector u = random_matrix(20, 1, rng), x = random_matrix(20, 1, rng);
      const DenoiserParams params{0.9, 1.4, 0.35};
      const AmpState s = make_initial_state(u, x, pr.masks, params);
      const auto oc = onsager_coeffs(s, pr.masks, params, 20, 15);
      const double h = 1e-5;
      double sum_du = 0.0, sum_dx = 0.0;
      for (std::size_t i = 0; i < 20; ++i) {
        if (pr.masks.revealed_x(i)) continue;
        const auto k = static_cast<Eigen::Index>(i);
        auto f = [&](double a, double b) { return std::tanh(params.a * a + params.b * b); };
        sum_du += (f(u[k] + h, x[k]) - f(u[k] - h, x[k])) / (2 * h);
        sum_dx += (f(u[k], x[k] + h) - f(u[k], x[k] - h)) / (2 * h);
      }
      double sum_dv = 0.0;
      for (std::size_t j = 0; j < 15; ++j) {
        if (pr.masks.revealed_v(j)) continue;
        sum_dv += (denoise_g(1.0 + h, 0.0, false, params).value - denoise_g(1.0 - h, 0.0, false, params).value) / (2 * h);
      }
      CHECK(std::abs(oc.p_t - sum_du / 15.0) < 1e-6);
      CHECK(std::abs(oc.d_t - sum_dx / 20.0) < 1e-6);
      CHECK(std::abs(oc.c_t - sum_dv / 15.0) < 1e-9);
    }
  }

  TEST_CASE("Onsager coefficients at the extremes") {
    const auto pr = small_problem(10, 5, 1.0, 1.0, 1.0, 5);
    const DenoiserParams params{0.9, 1.4, 0.35};
    const AmpState s = make_initial_state(Vector::Ones(10), Vector::Ones(10), pr.masks, params);
    const auto oc = onsager_coeffs(s, pr.masks, params, 10, 5);
    CHECK(oc.c_t == 0.0);
    CHECK(oc.p_t == 0.0);
    CHECK(oc.d_t == 0.0);

    const auto none = RevelationMasks::none(10, 5);
    const AmpState z = make_initial_state(Vector::Zero(10), Vector::Zero(10), none, params);
    const auto oz = onsager_coeffs(z, none, params, 10, 5);
    CHECK(oz.p_t == doctest::Approx(2.0 * params.a));
    CHECK(oz.d_t == doctest::Approx(params.b));
    CHECK(oz.c_t == doctest::Approx(params.g_slope));
  }

  TEST_CASE("amp_step matches a straight-line transcription") {
    const Eigen::Index n = 8, p = 6;
    const auto pr = small_problem(n, p, 2.0, 1.2, 0.25, 6);
    const auto se = se_for(2.0, 1.2, double(n) / double(p), 0.25, 4);
    const auto graph = std::make_shared<const DenseSymmetricOperator>(std::make_shared<const Matrix>(pr.t));
    const RectOperator cov(std::make_shared<const Matrix>(pr.b));
    Rng rng(7);
    const Vector u0 = random_matrix(n, 1, rng), x0 = random_matrix(n, 1, rng);

    AmpState state = make_initial_state(u0, x0, pr.masks, denoiser_params(se, 0));

    // Hand transcription with explicit loops.
    const double sp = std::sqrt(double(p));
    std::vector<double> u(u0.data(), u0.data() + n), x(x0.data(), x0.data() + n);
    std::vector<double> q(n), q_prev(n, 0.0), m_prev(p, 0.0), dfu(n), dfx(n);
    auto apply_f = [&](const DenoiserParams& d) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (pr.masks.mask_x[i]) {
          q[i] = pr.masks.x0[i];
          dfu[i] = dfx[i] = 0.0;
        } else {
          q[i] = std::tanh(d.a * u[i] + d.b * x[i]);
          dfu[i] = d.a * (1 - q[i] * q[i]);
          dfx[i] = d.b * (1 - q[i] * q[i]);
        }
      }
    };
    apply_f(denoiser_params(se, 0));

    for (std::size_t t = 0; t < 3; ++t) {
      const auto now = denoiser_params(se, t), next = denoiser_params(se, t + 1);
      double sum_u = 0, sum_x = 0, unrev = 0;
      for (Eigen::Index i = 0; i < n; ++i) sum_u += dfu[i], sum_x += dfx[i];
      for (Eigen::Index j = 0; j < p; ++j) unrev += pr.masks.mask_v[j] ? 0.0 : 1.0;
      const double p_t = sum_u / double(p), d_t = sum_x / double(n), c_t = now.g_slope * unrev / double(p);
      std::vector<double> v(p), m(p);
      for (Eigen::Index j = 0; j < p; ++j) {
        double acc = 0;
        for (Eigen::Index i = 0; i < n; ++i) acc += pr.b(j, i) * q[i];
        v[j] = acc / sp - p_t * m_prev[j];
        m[j] = pr.masks.mask_v[j] ? pr.masks.v0[j] : now.g_slope * v[j];
      }
      std::vector<double> nu(n), nx(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0, acc_t = 0;
        for (Eigen::Index j = 0; j < p; ++j) acc += pr.b(j, i) * m[j];
        for (Eigen::Index k = 0; k < n; ++k) acc_t += pr.t(i, k) * q[k];
        nu[i] = acc / sp - c_t * q[i];
        nx[i] = acc_t - d_t * q_prev[i];
      }
      q_prev = q;
      m_prev = m;
      u = nu;
      x = nx;
      apply_f(next);

      state = amp_step(state, graph.get(), cov, pr.masks, now, next);
      for (Eigen::Index i = 0; i < n; ++i) {
        CHECK(std::abs(state.u[i] - u[i]) < 1e-12);
        CHECK(std::abs(state.x[i] - x[i]) < 1e-12);
        CHECK(std::abs(state.q[i] - q[i]) < 1e-12);
      }
      for (Eigen::Index j = 0; j < p; ++j) CHECK(std::abs(state.v[j] - v[j]) < 1e-12);
    }
  }

  TEST_CASE("zero state is a fixed point without side information") {
    const auto pr = small_problem(12, 9, 2.0, 1.0, 0.0, 8);
    const auto graph = std::make_shared<const DenseSymmetricOperator>(std::make_shared<const Matrix>(pr.t));
    const RectOperator cov(std::make_shared<const Matrix>(pr.b));
    const DenoiserParams d{1.0, 1.0, 0.5};
    AmpState s = make_initial_state(Vector::Zero(12), Vector::Zero(12), pr.masks, d);
    for (int t = 0; t < 3; ++t) {
      s = amp_step(s, graph.get(), cov, pr.masks, d, d);
      CHECK(s.q.norm() == 0.0);
    }
  }

  TEST_CASE("full revelation recovers the truth after one step") {
    const auto pr = small_problem(30, 20, 1.0, 1.0, 1.0, 9);
    AmpInstance inst;
    inst.graph = std::make_shared<const DenseSymmetricOperator>(std::make_shared<const Matrix>(pr.t));
    inst.covariates = std::make_shared<const RectOperator>(std::make_shared<const Matrix>(pr.b));
    inst.masks = pr.masks;
    inst.x_star = pr.x_star;
    AmpConfig cfg;
    cfg.se = se_for(1.0, 1.0, 1.5, 1.0, 3);
    cfg.n_iter = 1;
    const auto r = run_amp(cfg, inst, ZeroInit{});
    CHECK(r.x_hat == pr.x_star);
    CHECK(r.mse.back() == 0.0);
  }

  TEST_CASE("divergence is reported") {
    const auto pr = small_problem(6, 4, 1.0, 1.0, 0.0, 10);
    const RectOperator cov(std::make_shared<const Matrix>(pr.b));
    Vector u = Vector::Zero(6);
    u[2] = std::numeric_limits<double>::quiet_NaN();
    const DenoiserParams d{1.0, 1.0, 0.5};
    const AmpState s = make_initial_state(u, Vector::Zero(6), pr.masks, d);
    CHECK_THROWS_AS(amp_step(s, nullptr, cov, pr.masks, d, d), DivergenceError);
  }

  TEST_CASE("sign flip of the initial iterate flips every iterate exactly") {
    const auto pr = small_problem(40, 30, 2.0, 1.0, 0.0, 11);
    AmpInstance inst;
    inst.graph = std::make_shared<const DenseSymmetricOperator>(std::make_shared<const Matrix>(pr.t));
    inst.covariates = std::make_shared<const RectOperator>(std::make_shared<const Matrix>(pr.b));
    inst.masks = pr.masks;
    inst.x_star = pr.x_star;
    AmpConfig cfg;
    cfg.se = se_for(2.0, 1.0, 4.0 / 3.0, 0.0, 10);
    cfg.n_iter = 10;
    Rng rng(12);
    const Vector u0 = random_matrix(40, 1, rng), x0 = random_matrix(40, 1, rng);
    const auto a = run_amp(cfg, inst, GivenInit{u0, x0});
    const auto b = run_amp(cfg, inst, GivenInit{-u0, -x0});
    CHECK(a.x_hat == -b.x_hat);
    CHECK(a.mse == b.mse);
  }

  TEST_CASE("relabelling the nodes permutes the estimate") {
    const Eigen::Index n = 40, p = 30;
    const auto pr = small_problem(n, p, 2.0, 1.0, 0.0, 13);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
    perm.setIdentity();
    Rng rng(14);
    std::shuffle(perm.indices().data(), perm.indices().data() + n, rng);

    AmpConfig cfg;
    cfg.se = se_for(2.0, 1.0, double(n) / double(p), 0.0, 10);
    cfg.n_iter = 10;
    const Vector u0 = random_matrix(n, 1, rng), x0 = random_matrix(n, 1, rng);

    auto build = [&](const Matrix& t, const Matrix& b, const Vector& xs) {
      AmpInstance inst;
      inst.graph = std::make_shared<const DenseSymmetricOperator>(std::make_shared<const Matrix>(t));
      inst.covariates = std::make_shared<const RectOperator>(std::make_shared<const Matrix>(b));
      inst.masks = RevelationMasks::none(std::size_t(n), std::size_t(p));
      inst.x_star = xs;
      return inst;
    };
    const auto a = run_amp(cfg, build(pr.t, pr.b, pr.x_star), GivenInit{u0, x0});
    const Matrix tp = perm * pr.t * perm.transpose();
    const Matrix bp = pr.b * perm.transpose();
    const auto b = run_amp(cfg, build(tp, bp, perm * pr.x_star), GivenInit{perm * u0, perm * x0});
    CHECK((perm * a.x_hat - b.x_hat).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("a0 equation") {
    CHECK(a0_rhs(0.0, 2.0, 1.0, 1.0) == 0.0);
    for (double lambda : {0.2, 0.8, 1.5, 3.0, 6.0}) {
      for (double mu : {0.1, 0.5, 0.9, 1.5, 3.0}) {
        for (double c : {0.5, 1.0, 5.0 / 3.0}) {
          const double a0 = solve_a0(lambda, mu, c);
          CHECK(a0 > 0.0);
          CHECK(std::abs(a0_rhs(a0, lambda, mu, c) - mu / (c * lambda)) < 1e-10);
        }
      }
    }
    double prev = 0.0;
    for (double a = 0.1; a < 10.0; a += 0.1) {
      const double r = a0_rhs(a, 2.0, 0.9, 5.0 / 3.0);
      CHECK(r > prev);
      prev = r;
    }
    CHECK_THROWS_AS(solve_a0(0.0, 1.0, 1.0), NotApplicable);
    CHECK_THROWS_AS(solve_a0(1.0, 0.0, 1.0), NotApplicable);
    CHECK_THROWS_AS(solve_a0(1.0, 1.0, 0.0), DomainError);
  }

  TEST_CASE("spectral start against the dense eigenvector") {
    const Eigen::Index n = 60, p = 40;
    const auto pr = small_problem(n, p, 3.0, 1.0, 0.0, 15);
    const auto graph = std::make_shared<const DenseSymmetricOperator>(std::make_shared<const Matrix>(pr.t));
    const auto cov = std::make_shared<const RectOperator>(std::make_shared<const Matrix>(pr.b));
    for (auto scale : {GramScale::by_n, GramScale::by_p}) {
      SpectralInit opts;
      opts.gram_scale = scale;
      opts.lanczos.tol = 1e-12;
      Rng rng(16);
      const auto s = spectral_initialize(graph, cov, 0.8, opts, rng);
      const double w = scale == GramScale::by_n ? 0.8 / double(n) : 0.8 / double(p);
      const Matrix dense = pr.t + w * pr.b.transpose() * pr.b;
      Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
      Vector e = es.eigenvectors().col(n - 1);
      fix_sign(e);
      CHECK(s.x0.norm() == doctest::Approx(std::sqrt(double(n))).epsilon(1e-12));
      CHECK((s.x0 / std::sqrt(double(n)) - e).norm() < 1e-8);
      CHECK(s.u0 == s.x0);
      CHECK(s.info.eigenvalue == doctest::Approx(es.eigenvalues()(n - 1)).epsilon(1e-10));

      opts.solver = EigenSolver::power;
      opts.power.tol = 1e-12;
      const auto pw = spectral_initialize(graph, cov, 0.8, opts, rng);
      CHECK((pw.x0 - s.x0).norm() / std::sqrt(double(n)) < 1e-4);
    }
  }
}
