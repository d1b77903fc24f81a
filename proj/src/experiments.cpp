#include "oamp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "oamp/error.hpp"
#include "oamp/state_evolution.hpp"

namespace oamp {

double empirical_mse(const Vector& x_hat, const CommunityLabels& x_star) {
  if (static_cast<std::size_t>(x_hat.size()) != x_star.n()) {
    throw InvalidDimension("empirical_mse: x_hat and x* differ in length");
  }
  const double n = static_cast<double>(x_star.n());
  const double ov = x_hat.dot(x_star.x_star()) / n;
  const double s = x_hat.squaredNorm() / n;
  return 1.0 - 2.0 * ov * ov + s * s;
}

double empirical_overlap(const Vector& x_hat, const CommunityLabels& x_star) {
  if (static_cast<std::size_t>(x_hat.size()) != x_star.n()) {
    throw InvalidDimension("empirical_overlap: x_hat and x* differ in length");
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x_hat.size(); ++i) {
    acc += (x_hat[i] >= 0.0 ? 1.0 : -1.0) * x_star.x_star()[i];
  }
  return std::abs(acc) / static_cast<double>(x_star.n());
}

std::string to_string(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::contextual_sbm: return "contextual_sbm";
    case Family::multilayer: return "multilayer";
  }
  return "?";
}

std::string to_string(SweepAxis a) { return a == SweepAxis::lambda ? "lambda" : "mu"; }

std::string to_string(InitKind k) { return k == InitKind::spectral ? "spectral" : "revelation"; }

Family parse_family(const std::string& s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "contextual_sbm" || s == "contextual-sbm") return Family::contextual_sbm;
  if (s == "multilayer") return Family::multilayer;
  throw DomainError("unknown family '" + s + "' (expected gaussian, contextual_sbm, multilayer)");
}

SweepAxis parse_axis(const std::string& s) {
  if (s == "lambda") return SweepAxis::lambda;
  if (s == "mu") return SweepAxis::mu;
  throw DomainError("unknown sweep axis '" + s + "' (expected lambda or mu)");
}

InitKind parse_init(const std::string& s) {
  if (s == "spectral") return InitKind::spectral;
  if (s == "revelation") return InitKind::revelation;
  throw DomainError("unknown init '" + s + "' (expected spectral or revelation)");
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& m) { throw DomainError("experiment config: " + m); };
  if (cfg.n < 2) fail("n must be at least 2");
  if (cfg.p < 1) fail("p must be at least 1");
  if (!(cfg.lambda >= 0.0)) fail("lambda must be non-negative");
  if (!(cfg.mu >= 0.0)) fail("mu must be non-negative");
  if (cfg.replicates < 1) fail("replicates must be at least 1");
  if (cfg.n_iter < 1) fail("n_iter must be at least 1");
  if (cfg.grid.empty()) fail("grid must not be empty");
  for (double g : cfg.grid) {
    if (!(g >= 0.0) || !std::isfinite(g)) fail("grid values must be finite and non-negative");
  }
  if (cfg.init == InitKind::revelation && !(cfg.eps >= 0.0 && cfg.eps <= 1.0)) {
    fail("eps must lie in [0, 1]");
  }
  if (cfg.family != Family::gaussian) {
    const std::size_t m = cfg.layers();
    if (cfg.r.size() < m || cfg.p_bar_scale.size() < m) {
      fail("r and p_bar_scale need one entry per layer");
    }
    if (cfg.family == Family::multilayer) {
      if (cfg.r.size() != cfg.p_bar_scale.size()) fail("r and p_bar_scale differ in length");
      double sum = 0.0;
      for (double r : cfg.r) {
        if (!(r > 0.0)) fail("layer shares r must be positive");
        sum += r;
      }
      if (std::abs(sum - 1.0) > 1e-12) fail("layer shares r must sum to 1");
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double pb = cfg.p_bar_scale[i] / std::sqrt(static_cast<double>(cfg.n));
      if (!(pb > 0.0 && pb < 1.0)) fail("p_bar_scale gives a density outside (0, 1)");
    }
  }
}

ExperimentConfig at_point(const ExperimentConfig& cfg, double value) {
  ExperimentConfig out = cfg;
  if (cfg.axis == SweepAxis::lambda) {
    out.lambda = value;
  } else {
    out.mu = value;
  }
  return out;
}

std::uint64_t replicate_seed(std::uint64_t root, std::size_t point, std::size_t rep) {
  return derive_seed(root, Stream::replicate, (static_cast<std::uint64_t>(point) << 24) + rep);
}

namespace {

SymmetricOperatorPtr combined_graph(const ExperimentConfig& cfg,
                                    const std::vector<SymmetricOperatorPtr>& ops,
                                    const std::vector<double>& lambdas) {
  if (ops.size() == 1) return ops.front();
  if (cfg.lambda > 0.0) return combine_layers(ops, lambdas);
  // With no signal the layer weights are immaterial; keep them equal.
  std::vector<double> w(ops.size(), 1.0 / std::sqrt(static_cast<double>(ops.size())));
  return std::make_shared<const WeightedSumOperator>(ops, w);
}

CommunityLabels draw_labels(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::labels);
  return sample_labels(n, rng);
}

CovariateModel draw_covariates(const CommunityLabels& labels, double mu, std::size_t p,
                               std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::covariates);
  return sample_covariates(labels, mu, p, rng);
}

}  // namespace

SampledInstance sample_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  CommunityLabels labels = draw_labels(cfg.n, seed);
  CovariateModel cov = draw_covariates(labels, cfg.mu, cfg.p, seed);
  SampledInstance out{std::move(labels), std::move(cov), {}, std::nullopt, nullptr, 0.0};
  const std::size_t n = cfg.n;
  if (cfg.family == Family::gaussian) {
    Rng rng = make_rng(seed, Stream::surrogate);
    out.surrogate = sample_gaussian_surrogate(out.labels, cfg.lambda, rng);
    out.graph = surrogate_operator(*out.surrogate);
    return out;
  }
  std::vector<SymmetricOperatorPtr> ops;
  std::vector<double> lambdas;
  out.min_average_degree = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cfg.layers(); ++i) {
    const double share = cfg.family == Family::multilayer ? cfg.r[i] : 1.0;
    const double p_bar = cfg.p_bar_scale[i] / std::sqrt(static_cast<double>(n));
    const LayerParams params = rates_from_lambda(share * cfg.lambda, p_bar, n);
    Rng rng = make_rng(seed, Stream::layer, i);
    auto layer = std::make_shared<const SbmLayer>(sample_sbm_layer(out.labels, params, rng));
    out.min_average_degree = std::min(
        out.min_average_degree, 2.0 * static_cast<double>(layer->edge_count()) / double(n));
    ops.push_back(center_scale_layer(layer));
    lambdas.push_back(share * cfg.lambda);
    out.layers.push_back(std::move(layer));
  }
  out.graph = combined_graph(cfg, ops, lambdas);
  return out;
}

void export_instance(const SampledInstance& inst, const std::string& dir) {
  auto open = [&](const std::string& name) {
    std::ofstream f(dir + "/" + name, std::ios::binary);
    if (!f) throw Error("export_instance: cannot write " + dir + "/" + name);
    return f;
  };
  {
    auto f = open("labels.csv");
    write_labels_csv(f, inst.labels);
  }
  {
    auto f = open("covariates.csv");
    write_matrix_csv(f, *inst.covariates.B);
  }
  for (std::size_t i = 0; i < inst.layers.size(); ++i) {
    auto f = open("layer_" + std::to_string(i) + ".edges");
    write_edge_list(f, *inst.layers[i]);
  }
}

ReplicateResult run_replicate(const ExperimentConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  ReplicateResult res;
  res.seed = seed;

  const SampledInstance sampled = sample_instance(cfg, seed);
  const CommunityLabels& labels = sampled.labels;
  const CovariateModel& cov = sampled.covariates;
  res.min_average_degree = sampled.min_average_degree;

  AmpInstance inst;
  inst.graph = sampled.graph;
  inst.covariates = std::make_shared<const RectOperator>(cov.B);
  inst.x_star = labels.x_star();

  SeConfig se;
  se.lambda = cfg.lambda;
  se.mu = cfg.mu;
  se.c = cfg.c();
  se.t_max = cfg.n_iter + 1;
  se.revelation = CovariateRevelation::included;
  AmpInit init;
  if (cfg.init == InitKind::spectral) {
    inst.masks = RevelationMasks::none(cfg.n, cfg.p);
    se.eps = 0.0;
    se.init = SeFromZ{1.0};
    SpectralInit sp;
    sp.gram_scale = cfg.gram_scale;
    init = sp;
  } else {
    Rng rev_rng = make_rng(seed, Stream::revelation);
    inst.masks = sample_revelation(labels, cov.v_star, cfg.eps, rev_rng);
    se.eps = cfg.eps;
    se.init = SeZeroInit{};
    init = ZeroInit{};
  }

  AmpConfig amp;
  amp.mode = cfg.family == Family::gaussian ? AmpMode::gaussian_surrogate : AmpMode::graph;
  amp.n_iter = cfg.n_iter;
  amp.early_stop_tol = cfg.early_stop_tol;
  amp.se = se_run(se);
  amp.lambda = cfg.lambda;
  amp.mu = cfg.mu;
  amp.seed = seed;

  AmpResult out = run_amp(amp, inst, init);
  res.empirical_mse = empirical_mse(out.x_hat, labels);
  res.empirical_overlap = empirical_overlap(out.x_hat, labels);
  res.overlap_trajectory = std::move(out.overlap);
  res.mse_trajectory = std::move(out.mse);
  res.spectral = out.spectral;
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& f) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<AggregateResult> run_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::size_t points = cfg.grid.size();
  const std::size_t reps = cfg.replicates;
  std::vector<std::optional<ReplicateResult>> slots(points * reps);
  std::vector<std::string> failures(points * reps);

  parallel_for(points * reps, cfg.threads, [&](std::size_t k) {
    const std::size_t point = k / reps;
    const std::size_t rep = k % reps;
    try {
      slots[k] = run_replicate(at_point(cfg, cfg.grid[point]),
                               replicate_seed(cfg.seed, point, rep));
    } catch (const std::exception& e) {
      failures[k] = "replicate " + std::to_string(rep) + ": " + e.what();
    }
  });

  std::vector<AggregateResult> table(points);
  for (std::size_t point = 0; point < points; ++point) {
    const ExperimentConfig pc = at_point(cfg, cfg.grid[point]);
    AggregateResult& row = table[point];
    row.value = cfg.grid[point];
    row.lambda = pc.lambda;
    row.mu = pc.mu;
    try {
      row.theory_mmse = limit_mmse(pc.lambda, pc.mu, pc.c());
      row.detectable = detection_possible(pc.lambda, pc.mu, pc.c());
    } catch (const std::exception& e) {
      row.theory_mmse = std::numeric_limits<double>::quiet_NaN();
      row.errors.push_back(std::string("theory: ") + e.what());
    }
    std::vector<double> mses;
    double overlap = 0.0;
    double min_degree = std::numeric_limits<double>::infinity();
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const std::size_t k = point * reps + rep;
      if (!slots[k]) {
        row.errors.push_back(failures[k]);
        continue;
      }
      mses.push_back(slots[k]->empirical_mse);
      overlap += slots[k]->empirical_overlap;
      row.wall_time_s += slots[k]->wall_time_s;
      if (cfg.family != Family::gaussian) {
        min_degree = std::min(min_degree, slots[k]->min_average_degree);
      }
      row.runs.push_back(std::move(*slots[k]));
    }
    row.replicates = mses.size();
    if (mses.empty()) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.mean_mse = row.sd_mse = row.min_mse = row.max_mse = row.mean_overlap = nan;
      continue;
    }
    const double count = static_cast<double>(mses.size());
    row.mean_mse = std::accumulate(mses.begin(), mses.end(), 0.0) / count;
    double ss = 0.0;
    for (double m : mses) ss += (m - row.mean_mse) * (m - row.mean_mse);
    row.sd_mse = mses.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
    row.min_mse = *std::min_element(mses.begin(), mses.end());
    row.max_mse = *std::max_element(mses.begin(), mses.end());
    row.mean_overlap = overlap / count;
    if (min_degree < 10.0) {
      std::ostringstream w;
      w << "average degree " << min_degree << " is below 10; the dense-graph limit may not apply";
      row.warnings.push_back(w.str());
    }
  }
  return table;
}

std::vector<SeCheckRow> se_consistency_check(const SeCheckConfig& cfg) {
  if (!(cfg.eps > 0.0 && cfg.eps <= 1.0)) {
    throw DomainError("se_consistency_check: eps must lie in (0, 1]");
  }
  if (!(cfg.c > 0.0)) throw DomainError("se_consistency_check: c must be positive");
  if (cfg.t_max < 1 || cfg.replicates < 1) {
    throw DomainError("se_consistency_check: t_max and replicates must be at least 1");
  }
  ExperimentConfig ec;
  ec.family = Family::gaussian;
  ec.n = cfg.n;
  ec.p = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(double(cfg.n) / cfg.c)));
  ec.lambda = cfg.lambda;
  ec.mu = cfg.mu;
  ec.grid = {cfg.lambda};
  ec.replicates = cfg.replicates;
  ec.n_iter = cfg.t_max;
  ec.seed = cfg.seed;
  ec.init = InitKind::revelation;
  ec.eps = cfg.eps;
  ec.threads = cfg.threads;
  validate(ec);

  SeConfig se;
  se.lambda = cfg.lambda;
  se.mu = cfg.mu;
  se.c = ec.c();
  se.eps = cfg.eps;
  se.init = SeZeroInit{};
  se.t_max = cfg.t_max;
  se.revelation = cfg.revelation;
  const SeTrajectory tr = se_run(se);

  std::vector<ReplicateResult> runs(cfg.replicates);
  std::vector<std::string> failures(cfg.replicates);
  parallel_for(cfg.replicates, cfg.threads, [&](std::size_t rep) {
    try {
      runs[rep] = run_replicate(ec, replicate_seed(cfg.seed, 0, rep));
    } catch (const std::exception& e) {
      failures[rep] = e.what();
    }
  });
  for (std::size_t rep = 0; rep < cfg.replicates; ++rep) {
    if (!failures[rep].empty()) {
      throw Error("se_consistency_check: replicate " + std::to_string(rep) + ": " +
                  failures[rep]);
    }
  }

  std::vector<SeCheckRow> rows(cfg.t_max);
  const double count = static_cast<double>(cfg.replicates);
  for (std::size_t t = 1; t <= cfg.t_max; ++t) {
    SeCheckRow& row = rows[t - 1];
    row.t = t;
    row.z_theory = tr.z[t];
    row.mse_theory = 1.0 - tr.z[t] * tr.z[t];
    for (const auto& r : runs) {
      row.mean_overlap += r.overlap_trajectory[t];
      row.mean_mse += r.mse_trajectory[t];
    }
    row.mean_overlap /= count;
    row.mean_mse /= count;
    row.abs_gap = std::abs(row.mean_overlap - row.z_theory);
  }
  return rows;
}

}  // namespace oamp
