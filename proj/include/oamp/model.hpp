#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "oamp/linalg.hpp"
#include "oamp/rng.hpp"

namespace oamp {

/// Ground-truth community assignment x* in {+1, -1}^n.
class CommunityLabels {
 public:
  /// Throws DomainError unless every entry is exactly +1 or -1.
  explicit CommunityLabels(Vector x_star);

  std::size_t n() const noexcept { return static_cast<std::size_t>(x_.size()); }
  const Vector& x_star() const noexcept { return x_; }
  double operator[](std::size_t i) const { return x_[static_cast<Eigen::Index>(i)]; }

 private:
  Vector x_;
};

/// Edge rates of one SBM layer. a_n/n within groups, b_n/n across.
struct LayerParams {
  double lambda = 0.0;  // layer SNR
  double p_bar = 0.0;   // (a_n + b_n) / (2n)
  double delta = 0.0;   // (a_n - b_n) / (2n)
  double a_n = 0.0;
  double b_n = 0.0;
  std::size_t n = 0;
};

/// Symmetric 0/1 adjacency with zero diagonal, stored as sorted compressed rows.
class SbmLayer {
 public:
  /// Builds the layer from an undirected edge list (pairs with k != l;
  /// duplicates and orientation are normalised away).
  SbmLayer(LayerParams params, std::size_t n,
           const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);

  const LayerParams& params() const noexcept { return params_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return col_idx_.size() / 2; }
  std::size_t degree(std::size_t k) const { return row_ptr_[k + 1] - row_ptr_[k]; }
  bool has_edge(std::size_t k, std::size_t l) const;

  /// Neighbours of k in increasing order.
  std::pair<const std::uint32_t*, const std::uint32_t*> neighbours(std::size_t k) const {
    return {col_idx_.data() + row_ptr_[k], col_idx_.data() + row_ptr_[k + 1]};
  }

  /// Each undirected edge once, as (k, l) with k < l, sorted.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

  /// out = G v.
  void multiply(const Vector& v, Vector& out) const;

  Matrix to_dense() const;

 private:
  LayerParams params_;
  std::size_t n_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_idx_;
};

/// B = sqrt(mu/n) v* x*^T + R, with B of shape p x n.
struct CovariateModel {
  double mu = 0.0;
  Vector v_star;
  std::shared_ptr<const Matrix> B;
  std::size_t p = 0;
  std::size_t n = 0;

  /// Finite-sample aspect ratio n / p.
  double c() const noexcept { return static_cast<double>(n) / static_cast<double>(p); }
};

/// T = sqrt(lambda/n) x* x*^T + Z with Z symmetric, Var 1 off the diagonal
/// and Var 2 on it.
struct GaussianSurrogate {
  std::shared_ptr<const Matrix> T;
  double lambda = 0.0;
};

/// Independent Bernoulli(eps) revelation of label and spike coordinates.
/// The masks are the source of truth for what is revealed.
struct RevelationMasks {
  double eps = 0.0;
  Vector x0;
  std::vector<std::uint8_t> mask_x;
  Vector v0;
  std::vector<std::uint8_t> mask_v;

  /// Nothing revealed.
  static RevelationMasks none(std::size_t n, std::size_t p);

  bool revealed_x(std::size_t i) const { return mask_x[i] != 0; }
  bool revealed_v(std::size_t j) const { return mask_v[j] != 0; }
  std::size_t count_x() const;
  std::size_t count_v() const;
};

/// Sample moments of a set of draws; used by the generation-time self-checks.
struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t count = 0;
};

CommunityLabels sample_labels(std::size_t n, Rng& rng);

/// Inverse of the SNR formula: delta = sqrt(lambda p_bar (1 - p_bar) / n).
/// Throws InfeasibleSnr when delta >= p_bar or p_bar + delta > 1.
LayerParams rates_from_lambda(double lambda_i, double p_bar, std::size_t n);

/// Largest lambda for which rates_from_lambda succeeds (exclusive bound).
double max_feasible_lambda(double p_bar, std::size_t n);

/// n (a - b)^2 / ((a + b)(2n - a - b)).
double lambda_from_rates(double a_n, double b_n, std::size_t n);
double lambda_from_rates(const LayerParams& params, std::size_t n);

SbmLayer sample_sbm_layer(const CommunityLabels& labels, const LayerParams& params, Rng& rng);

CovariateModel sample_covariates(const CommunityLabels& labels, double mu, std::size_t p,
                                 Rng& rng);

GaussianSurrogate sample_gaussian_surrogate(const CommunityLabels& labels, double lambda, Rng& rng);

RevelationMasks sample_revelation(const CommunityLabels& labels, const Vector& v_star, double eps,
                                  Rng& rng);

/// Moments of R = B - sqrt(mu/n) v* x*^T.
Moments covariate_noise_moments(const CovariateModel& model, const CommunityLabels& labels);

/// Off-diagonal and diagonal moments of Z = T - sqrt(lambda/n) x* x*^T.
std::pair<Moments, Moments> surrogate_noise_moments(const GaussianSurrogate& surrogate,
                                                    const CommunityLabels& labels);

/// A = (G - p_bar 1 1^T) / sqrt(n p_bar (1 - p_bar)), applied as a sparse
/// product plus a rank-one correction. The dense matrix is never formed.
class CenteredAdjacencyOperator final : public SymmetricOperator {
 public:
  explicit CenteredAdjacencyOperator(std::shared_ptr<const SbmLayer> layer);

  std::size_t dim() const override { return layer_->n(); }
  void apply(const Vector& in, Vector& out) const override;

  double p_bar() const noexcept { return p_bar_; }

 private:
  std::shared_ptr<const SbmLayer> layer_;
  double p_bar_;
  double inv_scale_;
};

std::shared_ptr<const CenteredAdjacencyOperator> center_scale_layer(
    std::shared_ptr<const SbmLayer> layer);

/// A = sum_i sqrt(lambda_i / lambda) A_i with lambda = sum_i lambda_i.
std::shared_ptr<const WeightedSumOperator> combine_layers(
    const std::vector<SymmetricOperatorPtr>& layers, const std::vector<double>& lambdas);

/// T / sqrt(n) as an operator.
std::shared_ptr<const DenseSymmetricOperator> surrogate_operator(const GaussianSurrogate& s);

/// Plain-text exports: "k l" per line (0-indexed, k < l); CSV with one value
/// per row for x*, and p rows of n comma-separated values for B.
void write_edge_list(std::ostream& os, const SbmLayer& layer);
void write_labels_csv(std::ostream& os, const CommunityLabels& labels);
void write_matrix_csv(std::ostream& os, const Matrix& m);

}  // namespace oamp
