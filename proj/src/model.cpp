#include "oamp/model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "oamp/csv.hpp"
#include "oamp/error.hpp"

namespace oamp {

namespace {

// Self-checks on freshly drawn noise flag a broken generator, not bad luck:
// at 8 sigma a false alarm is ~1e-15.
constexpr double kSelfCheckSigmas = 8.0;

void check_standard_moments(const Moments& m, double variance, const char* what) {
  const double count = static_cast<double>(m.count);
  if (m.count == 0) return;
  const double mean_tol = kSelfCheckSigmas * std::sqrt(variance / count);
  const double var_tol = kSelfCheckSigmas * variance * std::sqrt(2.0 / count);
  if (std::abs(m.mean) > mean_tol || std::abs(m.variance - variance) > var_tol) {
    throw Error(std::string(what) + ": noise moments (mean " + std::to_string(m.mean) +
                ", variance " + std::to_string(m.variance) + ") are inconsistent with N(0, " +
                std::to_string(variance) + ")");
  }
}

struct MomentAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  // Variance about the known mean 0.
  Moments moments() const {
    if (count == 0) return {};
    const double c = static_cast<double>(count);
    return {sum / c, sum_sq / c, count};
  }
};

}  // namespace

CommunityLabels::CommunityLabels(Vector x_star) : x_(std::move(x_star)) {
  if (x_.size() == 0) {
    throw InvalidDimension("CommunityLabels: n must be at least 1");
  }
  for (Eigen::Index i = 0; i < x_.size(); ++i) {
    if (x_[i] != 1.0 && x_[i] != -1.0) {
      throw DomainError("CommunityLabels: entry " + std::to_string(i) + " is not +1 or -1");
    }
  }
}

CommunityLabels sample_labels(std::size_t n, Rng& rng) {
  if (n == 0) {
    throw InvalidDimension("sample_labels: n must be at least 1");
  }
  std::bernoulli_distribution coin(0.5);
  Vector x(static_cast<Eigen::Index>(n));
  for (auto& xi : x) xi = coin(rng) ? 1.0 : -1.0;
  return CommunityLabels(std::move(x));
}

double max_feasible_lambda(double p_bar, std::size_t n) {
  // Need delta < p_bar and p_bar + delta <= 1.
  const double d = std::min(p_bar, 1.0 - p_bar);
  return static_cast<double>(n) * d * d / (p_bar * (1.0 - p_bar));
}

LayerParams rates_from_lambda(double lambda_i, double p_bar, std::size_t n) {
  if (n == 0) throw InvalidDimension("rates_from_lambda: n must be at least 1");
  if (!(lambda_i >= 0.0) || !std::isfinite(lambda_i)) {
    throw DomainError("rates_from_lambda: lambda must be finite and non-negative");
  }
  if (!(p_bar > 0.0 && p_bar < 1.0)) {
    throw DomainError("rates_from_lambda: p_bar must lie in (0, 1)");
  }
  const double nd = static_cast<double>(n);
  const double delta = std::sqrt(lambda_i * p_bar * (1.0 - p_bar) / nd);
  if (delta >= p_bar || p_bar + delta > 1.0) {
    const double max_lambda = max_feasible_lambda(p_bar, n);
    throw InfeasibleSnr("rates_from_lambda: lambda = " + std::to_string(lambda_i) +
                            " is infeasible at p_bar = " + std::to_string(p_bar) +
                            ", n = " + std::to_string(n) +
                            "; the maximal feasible lambda is " + std::to_string(max_lambda),
                        max_lambda);
  }
  LayerParams lp;
  lp.lambda = lambda_i;
  lp.p_bar = p_bar;
  lp.delta = delta;
  lp.a_n = nd * (p_bar + delta);
  lp.b_n = nd * (p_bar - delta);
  lp.n = n;
  return lp;
}

double lambda_from_rates(double a_n, double b_n, std::size_t n) {
  const double nd = static_cast<double>(n);
  if (a_n == b_n && a_n > 0.0 && a_n < nd) return 0.0;
  if (!(b_n > 0.0 && b_n < a_n && a_n < nd)) {
    throw DomainError("lambda_from_rates: requires 0 < b_n < a_n < n (got a_n = " +
                      std::to_string(a_n) + ", b_n = " + std::to_string(b_n) + ")");
  }
  const double diff = a_n - b_n;
  return nd * diff * diff / ((a_n + b_n) * (2.0 * nd - a_n - b_n));
}

double lambda_from_rates(const LayerParams& params, std::size_t n) {
  return lambda_from_rates(params.a_n, params.b_n, n);
}

SbmLayer::SbmLayer(LayerParams params, std::size_t n,
                   const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges)
    : params_(params), n_(n), row_ptr_(n + 1, 0) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> directed;
  directed.reserve(2 * edges.size());
  for (auto [k, l] : edges) {
    if (k >= n || l >= n) throw InvalidDimension("SbmLayer: edge endpoint out of range");
    if (k == l) throw DomainError("SbmLayer: self-loops are not allowed");
    directed.emplace_back(k, l);
    directed.emplace_back(l, k);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
  col_idx_.reserve(directed.size());
  for (auto [k, l] : directed) {
    ++row_ptr_[k + 1];
    col_idx_.push_back(l);
  }
  for (std::size_t k = 0; k < n; ++k) row_ptr_[k + 1] += row_ptr_[k];
}

bool SbmLayer::has_edge(std::size_t k, std::size_t l) const {
  auto [first, last] = neighbours(k);
  return std::binary_search(first, last, static_cast<std::uint32_t>(l));
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> SbmLayer::edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(edge_count());
  for (std::size_t k = 0; k < n_; ++k) {
    auto [first, last] = neighbours(k);
    for (auto it = first; it != last; ++it) {
      if (*it > k) out.emplace_back(static_cast<std::uint32_t>(k), *it);
    }
  }
  return out;
}

void SbmLayer::multiply(const Vector& v, Vector& out) const {
  out.resize(static_cast<Eigen::Index>(n_));
  for (std::size_t k = 0; k < n_; ++k) {
    double acc = 0.0;
    for (std::size_t e = row_ptr_[k]; e < row_ptr_[k + 1]; ++e) acc += v[col_idx_[e]];
    out[static_cast<Eigen::Index>(k)] = acc;
  }
}

Matrix SbmLayer::to_dense() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Matrix g = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < n_; ++k) {
    for (std::size_t e = row_ptr_[k]; e < row_ptr_[k + 1]; ++e) {
      g(static_cast<Eigen::Index>(k), col_idx_[e]) = 1.0;
    }
  }
  return g;
}

SbmLayer sample_sbm_layer(const CommunityLabels& labels, const LayerParams& params, Rng& rng) {
  const std::size_t n = labels.n();
  const double nd = static_cast<double>(n);
  const double p_in = params.a_n / nd;
  const double p_out = params.b_n / nd;
  if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
    throw DomainError("sample_sbm_layer: edge probabilities a_n/n = " + std::to_string(p_in) +
                      " and b_n/n = " + std::to_string(p_out) + " must lie in [0, 1]");
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(static_cast<std::size_t>(0.3 * nd * (params.a_n + params.b_n)) + 16);
  const Vector& x = labels.x_star();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      const double prob = x[static_cast<Eigen::Index>(k)] == x[static_cast<Eigen::Index>(l)]
                              ? p_in
                              : p_out;
      // One uniform per pair keeps the draw sequence independent of the rates.
      if (unif(rng) < prob) {
        edges.emplace_back(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(l));
      }
    }
  }
  LayerParams stored = params;
  stored.n = n;
  return SbmLayer(stored, n, edges);
}

CovariateModel sample_covariates(const CommunityLabels& labels, double mu, std::size_t p,
                                 Rng& rng) {
  if (p == 0) throw InvalidDimension("sample_covariates: p must be at least 1");
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw DomainError("sample_covariates: mu must be finite and non-negative");
  }
  const std::size_t n = labels.n();
  std::normal_distribution<double> normal;
  CovariateModel model;
  model.mu = mu;
  model.p = p;
  model.n = n;
  model.v_star.resize(static_cast<Eigen::Index>(p));
  for (auto& v : model.v_star) v = normal(rng);

  const auto pi = static_cast<Eigen::Index>(p);
  const auto ni = static_cast<Eigen::Index>(n);
  auto b = std::make_shared<Matrix>(pi, ni);
  // Column-major fill: R column by column.
  for (Eigen::Index j = 0; j < ni; ++j) {
    for (Eigen::Index i = 0; i < pi; ++i) (*b)(i, j) = normal(rng);
  }
  const double spike = std::sqrt(mu / static_cast<double>(n));
  b->noalias() += spike * model.v_star * labels.x_star().transpose();
  model.B = std::move(b);

  check_standard_moments(covariate_noise_moments(model, labels), 1.0, "sample_covariates");
  return model;
}

Moments covariate_noise_moments(const CovariateModel& model, const CommunityLabels& labels) {
  const double spike = std::sqrt(model.mu / static_cast<double>(model.n));
  const Matrix& b = *model.B;
  MomentAccumulator acc;
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    const double xj = labels.x_star()[j];
    for (Eigen::Index i = 0; i < b.rows(); ++i) acc.add(b(i, j) - spike * model.v_star[i] * xj);
  }
  return acc.moments();
}

GaussianSurrogate sample_gaussian_surrogate(const CommunityLabels& labels, double lambda,
                                            Rng& rng) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("sample_gaussian_surrogate: lambda must be finite and non-negative");
  }
  const auto n = static_cast<Eigen::Index>(labels.n());
  std::normal_distribution<double> normal;
  auto t = std::make_shared<Matrix>(n, n);
  const double diag_sd = std::sqrt(2.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    (*t)(j, j) = diag_sd * normal(rng);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double z = normal(rng);
      (*t)(i, j) = z;
      (*t)(j, i) = z;
    }
  }
  const double spike = std::sqrt(lambda / static_cast<double>(n));
  const Vector& x = labels.x_star();
  t->noalias() += spike * x * x.transpose();

  GaussianSurrogate s{std::move(t), lambda};
  const auto [off, diag] = surrogate_noise_moments(s, labels);
  check_standard_moments(off, 1.0, "sample_gaussian_surrogate (off-diagonal)");
  check_standard_moments(diag, 2.0, "sample_gaussian_surrogate (diagonal)");
  return s;
}

std::pair<Moments, Moments> surrogate_noise_moments(const GaussianSurrogate& surrogate,
                                                    const CommunityLabels& labels) {
  const Matrix& t = *surrogate.T;
  const Vector& x = labels.x_star();
  const double spike = std::sqrt(surrogate.lambda / static_cast<double>(labels.n()));
  MomentAccumulator off;
  MomentAccumulator diag;
  for (Eigen::Index j = 0; j < t.cols(); ++j) {
    diag.add(t(j, j) - spike);
    for (Eigen::Index i = j + 1; i < t.rows(); ++i) off.add(t(i, j) - spike * x[i] * x[j]);
  }
  return {off.moments(), diag.moments()};
}

RevelationMasks RevelationMasks::none(std::size_t n, std::size_t p) {
  RevelationMasks m;
  m.eps = 0.0;
  m.x0 = Vector::Zero(static_cast<Eigen::Index>(n));
  m.mask_x.assign(n, 0);
  m.v0 = Vector::Zero(static_cast<Eigen::Index>(p));
  m.mask_v.assign(p, 0);
  return m;
}

std::size_t RevelationMasks::count_x() const {
  return static_cast<std::size_t>(std::count(mask_x.begin(), mask_x.end(), std::uint8_t{1}));
}

std::size_t RevelationMasks::count_v() const {
  return static_cast<std::size_t>(std::count(mask_v.begin(), mask_v.end(), std::uint8_t{1}));
}

RevelationMasks sample_revelation(const CommunityLabels& labels, const Vector& v_star, double eps,
                                  Rng& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw DomainError("sample_revelation: eps = " + std::to_string(eps) +
                      " must lie in [0, 1]");
  }
  const std::size_t n = labels.n();
  const auto p = static_cast<std::size_t>(v_star.size());
  RevelationMasks m = RevelationMasks::none(n, p);
  m.eps = eps;
  std::bernoulli_distribution coin(eps);
  for (std::size_t i = 0; i < n; ++i) {
    if (coin(rng)) {
      m.mask_x[i] = 1;
      m.x0[static_cast<Eigen::Index>(i)] = labels[i];
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    if (coin(rng)) {
      m.mask_v[j] = 1;
      m.v0[static_cast<Eigen::Index>(j)] = v_star[static_cast<Eigen::Index>(j)];
    }
  }
  return m;
}

CenteredAdjacencyOperator::CenteredAdjacencyOperator(std::shared_ptr<const SbmLayer> layer)
    : layer_(std::move(layer)) {
  if (!layer_) throw InvalidDimension("CenteredAdjacencyOperator: null layer");
  p_bar_ = layer_->params().p_bar;
  if (!(p_bar_ > 0.0 && p_bar_ < 1.0)) {
    throw DomainError("center_scale_layer: p_bar = " + std::to_string(p_bar_) +
                      " is degenerate; it must lie strictly inside (0, 1)");
  }
  inv_scale_ = 1.0 / std::sqrt(static_cast<double>(layer_->n()) * p_bar_ * (1.0 - p_bar_));
}

void CenteredAdjacencyOperator::apply(const Vector& in, Vector& out) const {
  if (static_cast<std::size_t>(in.size()) != dim()) {
    throw InvalidDimension("CenteredAdjacencyOperator::apply: input has wrong length");
  }
  layer_->multiply(in, out);
  out.array() -= p_bar_ * in.sum();
  out *= inv_scale_;
}

std::shared_ptr<const CenteredAdjacencyOperator> center_scale_layer(
    std::shared_ptr<const SbmLayer> layer) {
  return std::make_shared<const CenteredAdjacencyOperator>(std::move(layer));
}

std::shared_ptr<const WeightedSumOperator> combine_layers(
    const std::vector<SymmetricOperatorPtr>& layers, const std::vector<double>& lambdas) {
  if (layers.empty()) throw InvalidDimension("combine_layers: no layers");
  if (layers.size() != lambdas.size()) {
    throw InvalidDimension("combine_layers: one SNR per layer required");
  }
  double total = 0.0;
  for (double l : lambdas) {
    if (!(l > 0.0)) throw DomainError("combine_layers: every layer SNR must be positive");
    total += l;
  }
  std::vector<double> weights;
  weights.reserve(lambdas.size());
  for (double l : lambdas) weights.push_back(std::sqrt(l / total));
  return std::make_shared<const WeightedSumOperator>(layers, std::move(weights));
}

std::shared_ptr<const DenseSymmetricOperator> surrogate_operator(const GaussianSurrogate& s) {
  return std::make_shared<const DenseSymmetricOperator>(
      s.T, 1.0 / std::sqrt(static_cast<double>(s.T->rows())));
}

void write_edge_list(std::ostream& os, const SbmLayer& layer) {
  for (auto [k, l] : layer.edges()) os << k << ' ' << l << '\n';
}

void write_labels_csv(std::ostream& os, const CommunityLabels& labels) {
  os << "x_star\n";
  for (std::size_t i = 0; i < labels.n(); ++i) os << (labels[i] > 0 ? "1" : "-1") << '\n';
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_real(m(i, j));
    }
    os << '\n';
  }
}

}  // namespace oamp
