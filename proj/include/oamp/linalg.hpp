#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "oamp/rng.hpp"

namespace oamp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A symmetric linear map R^n -> R^n known only through its action.
///
/// Implementations are immutable once built, so `apply` may be called from
/// several threads at once.
class SymmetricOperator {
 public:
  virtual ~SymmetricOperator() = default;

  virtual std::size_t dim() const = 0;

  /// out = M * in. `out` is resized as needed and must not alias `in`.
  virtual void apply(const Vector& in, Vector& out) const = 0;

  Vector operator()(const Vector& in) const {
    Vector out;
    apply(in, out);
    return out;
  }
};

using SymmetricOperatorPtr = std::shared_ptr<const SymmetricOperator>;

/// v -> scale * M v for a dense symmetric M (the caller guarantees symmetry).
class DenseSymmetricOperator final : public SymmetricOperator {
 public:
  DenseSymmetricOperator(std::shared_ptr<const Matrix> matrix, double scale = 1.0);

  std::size_t dim() const override { return static_cast<std::size_t>(matrix_->rows()); }
  void apply(const Vector& in, Vector& out) const override;

  double scale() const noexcept { return scale_; }
  const Matrix& matrix() const noexcept { return *matrix_; }

 private:
  std::shared_ptr<const Matrix> matrix_;
  double scale_;
};

/// v -> sum_i w_i M_i v.
class WeightedSumOperator final : public SymmetricOperator {
 public:
  WeightedSumOperator(std::vector<SymmetricOperatorPtr> terms, std::vector<double> weights);

  std::size_t dim() const override { return n_; }
  void apply(const Vector& in, Vector& out) const override;

  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  std::vector<SymmetricOperatorPtr> terms_;
  std::vector<double> weights_;
  std::size_t n_;
};

/// The rectangular sensing map of the covariate orbit: v -> B v / sqrt(p)
/// and its adjoint w -> B^T w / sqrt(p), for a p x n matrix B.
class RectOperator {
 public:
  explicit RectOperator(std::shared_ptr<const Matrix> b);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(b_->rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(b_->cols()); }

  /// out (length p) = B v / sqrt(p), v of length n.
  void apply(const Vector& v, Vector& out) const;
  /// out (length n) = B^T w / sqrt(p), w of length p.
  void apply_t(const Vector& w, Vector& out) const;

  Vector apply(const Vector& v) const {
    Vector out;
    apply(v, out);
    return out;
  }
  Vector apply_t(const Vector& w) const {
    Vector out;
    apply_t(w, out);
    return out;
  }

  const Matrix& matrix() const noexcept { return *b_; }

 private:
  std::shared_ptr<const Matrix> b_;
  double inv_sqrt_p_;
};

/// v -> graph_weight * G(v) + gram_weight * B^T B v / p, where G is the graph
/// (or surrogate) operator. A null graph operator counts as zero.
class SpectralOperator final : public SymmetricOperator {
 public:
  SpectralOperator(SymmetricOperatorPtr graph, std::shared_ptr<const RectOperator> covariates,
                   double gram_weight, double graph_weight = 1.0);

  std::size_t dim() const override { return n_; }
  void apply(const Vector& in, Vector& out) const override;

 private:
  SymmetricOperatorPtr graph_;
  std::shared_ptr<const RectOperator> covariates_;
  double gram_weight_;
  double graph_weight_;
  std::size_t n_;
};

/// T_op + a0 * B^T B / p, composed lazily.
std::shared_ptr<const SpectralOperator> compose_spectral_operator(
    SymmetricOperatorPtr graph, std::shared_ptr<const RectOperator> covariates, double a0);

struct PowerIterationOptions {
  /// Diagonal shift. When empty it is estimated from a short unshifted run
  /// (see `estimate_spectral_radius`).
  std::optional<double> shift;
  double tol = 1e-10;
  std::size_t max_iter = 20000;
  /// Unshifted iterations used to estimate the shift.
  std::size_t shift_probe_iter = 30;
};

struct EigenPair {
  double eigenvalue = 0.0;
  Vector eigenvector;  // unit norm, largest-magnitude coordinate positive
  double residual = 0.0;  // ||M v - theta v||
  std::size_t iterations = 0;
  double shift = 0.0;
};

/// Lower estimate of the spectral radius after `iters` normalised
/// multiplications from a random start.
double estimate_spectral_radius(const SymmetricOperator& op, std::size_t iters, Rng& rng);

/// Algebraically largest eigenpair of `op` by power iteration on op + shift*I.
///
/// Stops once successive Rayleigh quotients differ by less than `tol` and the
/// residual ||M v - theta v|| is at most 10 * tol * max(1, |theta|).
/// Throws ConvergenceError after `max_iter` iterations.
EigenPair power_iteration(const SymmetricOperator& op, const PowerIterationOptions& options,
                          Rng& rng);

struct LanczosOptions {
  /// Converged once ||M v - theta v|| <= tol * max(1, |theta|).
  double tol = 1e-8;
  /// Krylov basis size before an explicit restart from the current Ritz vector.
  std::size_t max_basis = 200;
  std::size_t max_restarts = 50;
};

/// Algebraically largest eigenpair by Lanczos with full reorthogonalisation.
/// `iterations` counts operator applications. Throws ConvergenceError after
/// `max_restarts` restarts.
EigenPair lanczos_largest(const SymmetricOperator& op, const LanczosOptions& options, Rng& rng);

/// Flip `v` so that its largest-magnitude coordinate is positive.
void fix_sign(Vector& v);

}  // namespace oamp
