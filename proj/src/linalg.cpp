#include "oamp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "oamp/error.hpp"

namespace oamp {

DenseSymmetricOperator::DenseSymmetricOperator(std::shared_ptr<const Matrix> matrix, double scale)
    : matrix_(std::move(matrix)), scale_(scale) {
  if (!matrix_ || matrix_->rows() != matrix_->cols() || matrix_->rows() == 0) {
    throw InvalidDimension("DenseSymmetricOperator: matrix must be square and non-empty");
  }
}

void DenseSymmetricOperator::apply(const Vector& in, Vector& out) const {
  if (static_cast<std::size_t>(in.size()) != dim()) {
    throw InvalidDimension("DenseSymmetricOperator::apply: input has wrong length");
  }
  out.noalias() = *matrix_ * in;
  out *= scale_;
}

WeightedSumOperator::WeightedSumOperator(std::vector<SymmetricOperatorPtr> terms,
                                         std::vector<double> weights)
    : terms_(std::move(terms)), weights_(std::move(weights)), n_(0) {
  if (terms_.empty()) {
    throw InvalidDimension("WeightedSumOperator: no terms");
  }
  if (terms_.size() != weights_.size()) {
    throw InvalidDimension("WeightedSumOperator: one weight per term required");
  }
  n_ = terms_.front()->dim();
  for (const auto& t : terms_) {
    if (!t || t->dim() != n_) {
      throw InvalidDimension("WeightedSumOperator: terms disagree on dimension");
    }
  }
}

void WeightedSumOperator::apply(const Vector& in, Vector& out) const {
  out = Vector::Zero(static_cast<Eigen::Index>(n_));
  Vector tmp;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    terms_[i]->apply(in, tmp);
    out += weights_[i] * tmp;
  }
}

RectOperator::RectOperator(std::shared_ptr<const Matrix> b) : b_(std::move(b)) {
  if (!b_ || b_->rows() == 0 || b_->cols() == 0) {
    throw InvalidDimension("RectOperator: matrix must be non-empty");
  }
  inv_sqrt_p_ = 1.0 / std::sqrt(static_cast<double>(b_->rows()));
}

void RectOperator::apply(const Vector& v, Vector& out) const {
  if (v.size() != b_->cols()) {
    throw InvalidDimension("RectOperator::apply: input must have length n");
  }
  out.noalias() = *b_ * v;
  out *= inv_sqrt_p_;
}

void RectOperator::apply_t(const Vector& w, Vector& out) const {
  if (w.size() != b_->rows()) {
    throw InvalidDimension("RectOperator::apply_t: input must have length p");
  }
  out.noalias() = b_->transpose() * w;
  out *= inv_sqrt_p_;
}

SpectralOperator::SpectralOperator(SymmetricOperatorPtr graph,
                                   std::shared_ptr<const RectOperator> covariates,
                                   double gram_weight, double graph_weight)
    : graph_(std::move(graph)),
      covariates_(std::move(covariates)),
      gram_weight_(gram_weight),
      graph_weight_(graph_weight),
      n_(0) {
  if (!graph_ && !covariates_) {
    throw InvalidDimension("SpectralOperator: needs a graph or a covariate operator");
  }
  if (graph_ && covariates_ && graph_->dim() != covariates_->cols()) {
    throw InvalidDimension("SpectralOperator: graph is " + std::to_string(graph_->dim()) +
                           "-dimensional but B has " + std::to_string(covariates_->cols()) +
                           " columns");
  }
  n_ = graph_ ? graph_->dim() : covariates_->cols();
}

void SpectralOperator::apply(const Vector& in, Vector& out) const {
  if (graph_ && graph_weight_ != 0.0) {
    graph_->apply(in, out);
    if (graph_weight_ != 1.0) out *= graph_weight_;
  } else {
    out = Vector::Zero(static_cast<Eigen::Index>(n_));
  }
  if (covariates_ && gram_weight_ != 0.0) {
    // B^T B v / p == apply_t(apply(v)).
    Vector bv;
    Vector btbv;
    covariates_->apply(in, bv);
    covariates_->apply_t(bv, btbv);
    out += gram_weight_ * btbv;
  }
}

std::shared_ptr<const SpectralOperator> compose_spectral_operator(
    SymmetricOperatorPtr graph, std::shared_ptr<const RectOperator> covariates, double a0) {
  return std::make_shared<const SpectralOperator>(std::move(graph), std::move(covariates), a0);
}

void fix_sign(Vector& v) {
  if (v.size() == 0) return;
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0) v = -v;
}

namespace {

Vector random_unit(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = normal(rng);
  const double nrm = v.norm();
  return nrm > 0.0 ? Vector(v / nrm) : Vector(Vector::Ones(v.size()) / std::sqrt(double(n)));
}

}  // namespace

double estimate_spectral_radius(const SymmetricOperator& op, std::size_t iters, Rng& rng) {
  Vector v = random_unit(op.dim(), rng);
  Vector mv;
  double radius = 0.0;
  for (std::size_t k = 0; k < std::max<std::size_t>(iters, 1); ++k) {
    op.apply(v, mv);
    radius = mv.norm();
    if (radius == 0.0) return 0.0;
    v = mv / radius;
  }
  return radius;
}

EigenPair power_iteration(const SymmetricOperator& op, const PowerIterationOptions& options,
                          Rng& rng) {
  if (!(options.tol > 0.0)) {
    throw DomainError("power_iteration: tol must be positive");
  }
  const std::size_t n = op.dim();
  // A 10% margin over the (lower) radius estimate keeps op + shift*I
  // positive semidefinite in practice.
  const double shift = options.shift.value_or(
      1.1 * estimate_spectral_radius(op, options.shift_probe_iter, rng));

  Vector v = random_unit(n, rng);
  Vector mv;
  double theta_prev = 0.0;
  double residual = 0.0;
  double theta = 0.0;
  for (std::size_t k = 1; k <= options.max_iter; ++k) {
    op.apply(v, mv);
    theta = v.dot(mv);
    residual = (mv - theta * v).norm();
    const bool rq_settled = k > 1 && std::abs(theta - theta_prev) < options.tol;
    if ((rq_settled || residual == 0.0) &&
        residual <= 10.0 * options.tol * std::max(1.0, std::abs(theta))) {
      fix_sign(v);
      return EigenPair{theta, v, residual, k, shift};
    }
    theta_prev = theta;
    Vector next = mv + shift * v;
    const double nrm = next.norm();
    if (!std::isfinite(nrm)) {
      throw ConvergenceError("power_iteration: iterate became non-finite", residual, k);
    }
    if (nrm == 0.0) {
      // v is in the kernel of op + shift*I; theta = -shift is exact.
      fix_sign(v);
      return EigenPair{theta, v, residual, k, shift};
    }
    v = next / nrm;
  }
  throw ConvergenceError("power_iteration: no convergence after " +
                             std::to_string(options.max_iter) +
                             " iterations (last residual " + std::to_string(residual) + ")",
                         residual, options.max_iter);
}

EigenPair lanczos_largest(const SymmetricOperator& op, const LanczosOptions& options, Rng& rng) {
  if (!(options.tol > 0.0)) throw DomainError("lanczos_largest: tol must be positive");
  const std::size_t n = op.dim();
  const auto basis_cap = static_cast<Eigen::Index>(std::clamp<std::size_t>(options.max_basis, 2, n));
  const auto ni = static_cast<Eigen::Index>(n);

  Matrix basis(ni, basis_cap);
  Vector alpha(basis_cap);
  Vector beta(basis_cap);
  Vector start = random_unit(n, rng);
  Vector w;
  std::size_t applications = 0;
  double residual = 0.0;

  for (std::size_t restart = 0; restart <= options.max_restarts; ++restart) {
    basis.col(0) = start;
    Eigen::Index k = 0;
    for (; k < basis_cap; ++k) {
      op.apply(basis.col(k), w);
      ++applications;
      alpha[k] = basis.col(k).dot(w);
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        const Vector coeffs = basis.leftCols(k + 1).transpose() * w;
        w.noalias() -= basis.leftCols(k + 1) * coeffs;
      }
      beta[k] = w.norm();
      if (!std::isfinite(beta[k])) {
        throw ConvergenceError("lanczos_largest: iterate became non-finite", residual,
                               applications);
      }
      const bool exhausted = beta[k] <= 1e-14 * std::max(1.0, std::abs(alpha[k]));
      if (exhausted || k + 1 == basis_cap) break;
      basis.col(k + 1) = w / beta[k];
    }
    const Eigen::Index m = std::min<Eigen::Index>(k + 1, basis_cap);

    Eigen::SelfAdjointEigenSolver<Matrix> tri;
    if (m == 1) {
      start = basis.col(0);
    } else {
      tri.computeFromTridiagonal(alpha.head(m), beta.head(m - 1), Eigen::ComputeEigenvectors);
      start = basis.leftCols(m) * tri.eigenvectors().col(m - 1);
    }
    start.normalize();
    op.apply(start, w);
    ++applications;
    const double theta = start.dot(w);
    residual = (w - theta * start).norm();
    if (residual <= options.tol * std::max(1.0, std::abs(theta))) {
      fix_sign(start);
      return EigenPair{theta, start, residual, applications, 0.0};
    }
  }
  throw ConvergenceError("lanczos_largest: no convergence after " +
                             std::to_string(options.max_restarts) +
                             " restarts (last residual " + std::to_string(residual) + ")",
                         residual, applications);
}

}  // namespace oamp
