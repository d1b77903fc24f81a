#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oamp/amp.hpp"
#include "oamp/model.hpp"

namespace oamp {

/// (1/n^2) ||x* x*^T - x_hat x_hat^T||_F^2 = 1 - 2 <x_hat, x*>_n^2 + <x_hat, x_hat>_n^2.
double empirical_mse(const Vector& x_hat, const CommunityLabels& x_star);

/// |<x*, sign(x_hat)>| / n, with sign(0) = +1.
double empirical_overlap(const Vector& x_hat, const CommunityLabels& x_star);

enum class Family { gaussian, contextual_sbm, multilayer };
enum class SweepAxis { lambda, mu };
enum class InitKind { spectral, revelation };

std::string to_string(Family f);
std::string to_string(SweepAxis a);
std::string to_string(InitKind k);
/// Throws DomainError on unknown names.
Family parse_family(const std::string& s);
SweepAxis parse_axis(const std::string& s);
InitKind parse_init(const std::string& s);

struct ExperimentConfig {
  Family family = Family::gaussian;
  std::size_t n = 1500;
  std::size_t p = 900;
  double lambda = 3.0;
  double mu = 0.9;
  /// Layer shares of lambda (contextual_sbm uses the first entry only).
  std::vector<double> r = {1.0};
  /// Layer densities are p_bar_i = p_bar_scale_i / sqrt(n).
  std::vector<double> p_bar_scale = {0.7};
  SweepAxis axis = SweepAxis::lambda;
  std::vector<double> grid = {3.0};
  std::size_t replicates = 25;
  std::size_t n_iter = 100;
  std::uint64_t seed = 1;
  InitKind init = InitKind::spectral;
  /// Revelation probability (revelation init only).
  double eps = 0.1;
  GramScale gram_scale = GramScale::by_n;
  std::optional<double> early_stop_tol;
  std::size_t threads = 1;

  double c() const noexcept { return static_cast<double>(n) / static_cast<double>(p); }
  std::size_t layers() const noexcept { return family == Family::multilayer ? r.size() : 1; }
};

/// Throws DomainError describing the first invalid field.
void validate(const ExperimentConfig& cfg);

/// One grid point: the config with lambda or mu set to `value`.
ExperimentConfig at_point(const ExperimentConfig& cfg, double value);

/// One sampled problem instance of a family at the config's (lambda, mu).
struct SampledInstance {
  CommunityLabels labels;
  CovariateModel covariates;
  std::vector<std::shared_ptr<const SbmLayer>> layers;  // graph families
  std::optional<GaussianSurrogate> surrogate;           // gaussian family
  SymmetricOperatorPtr graph;  // T/sqrt(n) or the combined centred adjacency
  double min_average_degree = 0.0;
};

/// Deterministic in (cfg, seed); run_replicate draws exactly this instance.
SampledInstance sample_instance(const ExperimentConfig& cfg, std::uint64_t seed);

/// Writes labels.csv, covariates.csv (B) and layer_<i>.edges for the graph
/// families into `dir`, which must exist.
void export_instance(const SampledInstance& inst, const std::string& dir);

struct ReplicateResult {
  std::uint64_t seed = 0;
  double empirical_mse = 0.0;
  double empirical_overlap = 0.0;
  std::vector<double> overlap_trajectory;  // <q^t, x*>_n, t = 0..n_iter
  std::vector<double> mse_trajectory;
  std::optional<SpectralInfo> spectral;
  double min_average_degree = 0.0;  // 0 for the gaussian family
  double wall_time_s = 0.0;
};

/// Samples one instance of the family at the config's (lambda, mu), runs AMP
/// and scores it. Deterministic in (cfg, seed).
ReplicateResult run_replicate(const ExperimentConfig& cfg, std::uint64_t seed);

/// Seed of replicate `rep` at grid point `point`.
std::uint64_t replicate_seed(std::uint64_t root, std::size_t point, std::size_t rep);

struct AggregateResult {
  double value = 0.0;  // grid coordinate
  double lambda = 0.0;
  double mu = 0.0;
  double theory_mmse = 0.0;
  bool detectable = false;
  std::size_t replicates = 0;  // successful ones
  double mean_mse = 0.0;
  double sd_mse = 0.0;  // sample SD (0 for a single replicate)
  double min_mse = 0.0;
  double max_mse = 0.0;
  double mean_overlap = 0.0;
  double wall_time_s = 0.0;  // sum over replicates
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  std::vector<ReplicateResult> runs;
};

/// Every grid point and replicate, spread over cfg.threads workers. Results
/// are placed by index, so the output does not depend on scheduling. Errors
/// are recorded per point and the sweep continues.
std::vector<AggregateResult> run_sweep(const ExperimentConfig& cfg);

struct SeCheckRow {
  std::size_t t = 0;
  double z_theory = 0.0;
  double mean_overlap = 0.0;
  double abs_gap = 0.0;
  double mse_theory = 0.0;  // 1 - z_t^2
  double mean_mse = 0.0;
};

struct SeCheckConfig {
  double lambda = 2.0;
  double mu = 1.0;
  double c = 1.0;
  double eps = 0.1;
  std::size_t n = 4000;
  std::size_t t_max = 10;
  std::size_t replicates = 10;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  CovariateRevelation revelation = CovariateRevelation::included;
};

/// Gaussian family, zero init with eps-revelation: mean <q^t, x*>_n over
/// replicates against the SE prediction z_t, for t = 1..t_max. Row t
/// compares the iterate after t steps with z_t.
std::vector<SeCheckRow> se_consistency_check(const SeCheckConfig& cfg);

/// Runs f(i) for i in [0, count) on `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& f);

}  // namespace oamp
