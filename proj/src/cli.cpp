#include "oamp/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "oamp/csv.hpp"
#include "oamp/error.hpp"
#include "oamp/experiments.hpp"
#include "oamp/state_evolution.hpp"
#include "oamp/svg.hpp"

namespace oamp::cli {

namespace {

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw DomainError("'" + s + "' is not a finite number");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

CovariateRevelation parse_variant(const std::string& s) {
  if (s == "excluded") return CovariateRevelation::excluded;
  if (s == "included") return CovariateRevelation::included;
  throw DomainError("unknown SE variant '" + s + "' (expected excluded or included)");
}

GramScale parse_gram(const std::string& s) {
  if (s == "n") return GramScale::by_n;
  if (s == "p") return GramScale::by_p;
  throw DomainError("unknown gram scale '" + s + "' (expected n or p)");
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// CSV either to `out` or to <dir>/<name>; the effective config goes next to it.
class Sink {
 public:
  Sink(const std::string& dir, const std::string& name, std::ostream& fallback)
      : dir_(dir), name_(name), fallback_(fallback) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  std::ostream& csv() {
    if (dir_.empty()) return fallback_;
    file_.open(std::filesystem::path(dir_) / name_, std::ios::binary);
    if (!file_) throw Error("cannot write " + (std::filesystem::path(dir_) / name_).string());
    return file_;
  }

  void write_file(const std::string& name, const std::string& content) const {
    if (dir_.empty()) return;
    std::ofstream f(std::filesystem::path(dir_) / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (std::filesystem::path(dir_) / name).string());
    f << content;
  }

 private:
  std::string dir_;
  std::string name_;
  std::ostream& fallback_;
  std::ofstream file_;
};

struct TheoryArgs {
  std::vector<std::string> lambda;
  std::vector<std::string> mu;
  double c = 1.0;
  double eps = 0.0;
  std::string variant = "excluded";
  std::string out_dir;
};

struct SimulateArgs {
  std::string family = "gaussian";
  std::size_t n = 1500;
  std::size_t p = 900;
  double lambda = 3.0;
  double mu = 0.9;
  std::vector<double> r = {1.0};
  std::vector<double> p_bar_scale = {0.7};
  std::string axis = "lambda";
  std::vector<std::string> grid;
  std::size_t replicates = 25;
  std::size_t n_iter = 100;
  std::uint64_t seed = 1;
  std::string init = "spectral";
  double eps = 0.1;
  std::string gram = "n";
  double early_stop = 0.0;
  bool timing = false;
  std::string svg;
  std::string export_dir;
  std::string out_dir;
};

struct SeCheckArgs {
  double lambda = 2.0;
  double mu = 1.0;
  double c = 1.0;
  double eps = 0.1;
  std::size_t n = 4000;
  std::size_t t_max = 10;
  std::size_t replicates = 10;
  std::uint64_t seed = 1;
  std::string variant = "included";
  std::string out_dir;
};

int cmd_theory(const TheoryArgs& a, const std::string& config, std::ostream& out) {
  const std::vector<double> lambdas = parse_grid(a.lambda);
  const std::vector<double> mus = parse_grid(a.mu);
  if (!(a.c > 0.0)) throw DomainError("--c must be positive");
  SeConfig base;
  base.c = a.c;
  base.eps = a.eps;
  base.revelation = parse_variant(a.variant);
  base.lambda = lambdas.front();
  base.mu = mus.front();
  validate(base);

  Sink sink(a.out_dir, "theory.csv", out);
  std::ostream& os = sink.csv();
  CsvWriter csv(os);
  csv.header({"lambda", "mu", "c", "z_star", "limit_mmse", "detectable", "xi"});
  for (double lambda : lambdas) {
    for (double mu : mus) {
      SeConfig cfg = base;
      cfg.lambda = lambda;
      cfg.mu = mu;
      const double z = fixed_point_z(cfg);
      csv.row({format_real(lambda), format_real(mu), format_real(a.c), format_real(z),
               format_real(limit_mmse(lambda, mu, a.c)),
               detection_possible(lambda, mu, a.c) ? "true" : "false",
               format_real(xi_limit(lambda, mu, a.c))});
    }
  }
  os.flush();
  sink.write_file("config.ini", config);
  return kSuccess;
}

ExperimentConfig to_experiment(const SimulateArgs& a, std::size_t threads) {
  ExperimentConfig cfg;
  cfg.family = parse_family(a.family);
  cfg.n = a.n;
  cfg.p = a.p;
  cfg.lambda = a.lambda;
  cfg.mu = a.mu;
  cfg.r = a.r;
  cfg.p_bar_scale = a.p_bar_scale;
  if (cfg.family == Family::contextual_sbm) {
    cfg.r = {1.0};
    cfg.p_bar_scale.resize(1);
  }
  cfg.axis = parse_axis(a.axis);
  cfg.grid = a.grid.empty() ? std::vector<double>{cfg.axis == SweepAxis::lambda ? a.lambda : a.mu}
                            : parse_grid(a.grid);
  cfg.replicates = a.replicates;
  cfg.n_iter = a.n_iter;
  cfg.seed = a.seed;
  cfg.init = parse_init(a.init);
  cfg.eps = a.eps;
  cfg.gram_scale = parse_gram(a.gram);
  if (a.early_stop > 0.0) cfg.early_stop_tol = a.early_stop;
  cfg.threads = threads;
  validate(cfg);
  return cfg;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

int cmd_simulate(const SimulateArgs& a, std::size_t threads, const std::string& config,
                 std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = to_experiment(a, threads);

  if (!a.export_dir.empty()) {
    std::filesystem::create_directories(a.export_dir);
    export_instance(sample_instance(at_point(cfg, cfg.grid.front()),
                                    replicate_seed(cfg.seed, 0, 0)),
                    a.export_dir);
  }

  const std::vector<AggregateResult> table = run_sweep(cfg);

  Sink sink(a.out_dir, "simulate.csv", out);
  std::ostream& os = sink.csv();
  CsvWriter csv(os);
  csv.header({"family", "n", "p", "lambda", "mu", "c", "replicates", "theory_mmse", "mean_mse",
              "sd_mse", "min_mse", "max_mse", "mean_overlap", "wall_time_s", "errors"});
  bool failed = false;
  for (const auto& row : table) {
    failed = failed || !row.errors.empty();
    for (const auto& w : row.warnings) {
      err << "warning: " << to_string(cfg.axis) << " = " << format_real(row.value) << ": " << w
          << '\n';
    }
    csv.row({to_string(cfg.family), std::to_string(cfg.n), std::to_string(cfg.p),
             format_real(row.lambda), format_real(row.mu), format_real(cfg.c()),
             std::to_string(row.replicates), format_real(row.theory_mmse),
             format_real(row.mean_mse), format_real(row.sd_mse), format_real(row.min_mse),
             format_real(row.max_mse), format_real(row.mean_overlap),
             a.timing ? format_real(row.wall_time_s) : "NA", join(row.errors, "; ")});
  }
  os.flush();
  sink.write_file("config.ini", config);

  if (!a.svg.empty()) {
    SvgPlot plot;
    plot.title = to_string(cfg.family) + " (n=" + std::to_string(cfg.n) +
                 ", p=" + std::to_string(cfg.p) + ")";
    plot.x_label = to_string(cfg.axis);
    plot.y_label = "MSE";
    SvgSeries theory{"theory 1 - z*^2", "#d62728", {}, {}, {}, false};
    SvgSeries empirical{"AMP mean +/- sd", "#1f77b4", {}, {}, {}, true};
    for (const auto& row : table) {
      theory.x.push_back(row.value);
      theory.y.push_back(row.theory_mmse);
      empirical.x.push_back(row.value);
      empirical.y.push_back(row.mean_mse);
      empirical.band.push_back(row.sd_mse);
    }
    plot.series = {empirical, theory};
    std::filesystem::path path(a.svg);
    if (!a.out_dir.empty() && path.is_relative()) path = std::filesystem::path(a.out_dir) / path;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << render_svg(plot);
  }
  for (const auto& row : table) {
    for (const auto& e : row.errors) {
      err << "error: " << to_string(cfg.axis) << " = " << format_real(row.value) << ": " << e
          << '\n';
    }
  }
  return failed ? kFailure : kSuccess;
}

SeCheckConfig to_se_check(const SeCheckArgs& a, std::size_t threads) {
  SeCheckConfig cfg;
  cfg.lambda = a.lambda;
  cfg.mu = a.mu;
  cfg.c = a.c;
  cfg.eps = a.eps;
  cfg.n = a.n;
  cfg.t_max = a.t_max;
  cfg.replicates = a.replicates;
  cfg.seed = a.seed;
  cfg.threads = threads;
  cfg.revelation = parse_variant(a.variant);
  if (!(cfg.eps > 0.0 && cfg.eps <= 1.0)) throw DomainError("--eps must lie in (0, 1]");
  if (!(cfg.c > 0.0)) throw DomainError("--c must be positive");
  if (cfg.lambda < 0.0 || cfg.mu < 0.0) throw DomainError("--lambda and --mu must be >= 0");
  if (cfg.t_max < 1 || cfg.replicates < 1 || cfg.n < 2) {
    throw DomainError("--t-max and --replicates must be >= 1 and --n >= 2");
  }
  return cfg;
}

int cmd_se_check(const SeCheckArgs& a, std::size_t threads, const std::string& config,
                 std::ostream& out) {
  const SeCheckConfig cfg = to_se_check(a, threads);
  const std::vector<SeCheckRow> rows = se_consistency_check(cfg);
  Sink sink(a.out_dir, "se_check.csv", out);
  std::ostream& os = sink.csv();
  CsvWriter csv(os);
  csv.header({"t", "z_t_theory", "mean_overlap_empirical", "abs_gap"});
  for (const auto& r : rows) {
    csv.row({std::to_string(r.t), format_real(r.z_theory), format_real(r.mean_overlap),
             format_real(r.abs_gap)});
  }
  os.flush();
  sink.write_file("config.ini", config);
  return kSuccess;
}

}  // namespace

std::vector<double> parse_grid(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& raw : items) {
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const auto c1 = item.find(':');
      if (c1 == std::string::npos) {
        out.push_back(parse_number(item));
        continue;
      }
      const auto c2 = item.find(':', c1 + 1);
      if (c2 == std::string::npos || item.find(':', c2 + 1) != std::string::npos) {
        throw DomainError("grid range '" + item + "' must be start:stop:count");
      }
      const double a = parse_number(item.substr(0, c1));
      const double b = parse_number(item.substr(c1 + 1, c2 - c1 - 1));
      const double k = parse_number(item.substr(c2 + 1));
      if (k < 1 || k != std::floor(k)) {
        throw DomainError("grid range '" + item + "' needs a positive integer count");
      }
      const auto count = static_cast<std::size_t>(k);
      for (std::size_t i = 0; i < count; ++i) {
        out.push_back(count == 1 ? a : a + (b - a) * double(i) / double(count - 1));
      }
    }
  }
  if (out.empty()) throw DomainError("grid is empty");
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Orchestrated AMP for block models with Gaussian covariates: theory curves, "
               "Monte-Carlo sweeps and state-evolution checks.",
               "oamp"};
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "",
                 "INI file with [theory], [simulate] or [se-check] sections of key = value "
                 "pairs named like the long flags; flags given on the command line win");
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads; 0 uses every hardware thread")
      ->envname("OAMP_THREADS")
      ->capture_default_str();
  app.require_subcommand(1);

  TheoryArgs ta;
  auto* theory = app.add_subcommand("theory", "Tabulate z*, the limiting MMSE, detectability and xi");
  theory->add_option("--lambda", ta.lambda, "lambda grid: values and start:stop:count ranges")
      ->required()
      ->delimiter(',');
  theory->add_option("--mu", ta.mu, "mu grid")->required()->delimiter(',');
  theory->add_option("--c", ta.c, "Aspect ratio n/p")->capture_default_str();
  theory->add_option("--eps", ta.eps, "Revelation probability used for z_star")
      ->capture_default_str();
  theory->add_option("--variant", ta.variant, "SE variant for eps > 0: excluded or included")
      ->capture_default_str();
  theory->add_option("--out-dir", ta.out_dir, "Write theory.csv and config.ini here");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo sweep of AMP against the theory");
  sim->add_option("--family", sa.family, "gaussian, contextual_sbm or multilayer")
      ->capture_default_str();
  sim->add_option("--n", sa.n, "Number of subjects")->capture_default_str();
  sim->add_option("--p", sa.p, "Number of covariates")->capture_default_str();
  sim->add_option("--lambda", sa.lambda, "Total graph SNR (fixed when sweeping mu)")
      ->capture_default_str();
  sim->add_option("--mu", sa.mu, "Covariate SNR (fixed when sweeping lambda)")
      ->capture_default_str();
  sim->add_option("--r", sa.r, "Layer shares of lambda (multilayer)")
      ->delimiter(',')
      ->capture_default_str();
  sim->add_option("--p-bar-scale", sa.p_bar_scale, "Layer densities times sqrt(n)")
      ->delimiter(',')
      ->capture_default_str();
  sim->add_option("--axis", sa.axis, "Swept parameter: lambda or mu")->capture_default_str();
  sim->add_option("--grid", sa.grid, "Grid for the swept parameter (default: its fixed value)")
      ->delimiter(',');
  sim->add_option("--replicates", sa.replicates, "Replicates per grid point")
      ->capture_default_str();
  sim->add_option("--n-iter", sa.n_iter, "AMP iterations")->capture_default_str();
  sim->add_option("--seed", sa.seed, "Root seed")->capture_default_str();
  sim->add_option("--init", sa.init, "spectral, or revelation (zero start plus eps-revelation)")
      ->capture_default_str();
  sim->add_option("--eps", sa.eps, "Revelation probability for --init revelation")
      ->capture_default_str();
  sim->add_option("--gram-scale", sa.gram, "Spectral Gram term a0 B^T B / n (n) or / p (p)")
      ->capture_default_str();
  sim->add_option("--early-stop", sa.early_stop, "Stop when ||dq|| / sqrt(n) < this; 0 = off")
      ->capture_default_str();
  sim->add_flag("--timing", sa.timing, "Fill wall_time_s (otherwise NA, keeping output stable)");
  sim->add_option("--svg", sa.svg, "Write an SVG plot of MSE against theory");
  sim->add_option("--export", sa.export_dir,
                  "Write labels, covariates and edge lists of the first instance here");
  sim->add_option("--out-dir", sa.out_dir, "Write simulate.csv and config.ini here");

  SeCheckArgs ca;
  auto* se = app.add_subcommand("se-check", "Compare AMP overlaps with state evolution");
  se->add_option("--lambda", ca.lambda, "Graph SNR")->capture_default_str();
  se->add_option("--mu", ca.mu, "Covariate SNR")->capture_default_str();
  se->add_option("--c", ca.c, "Aspect ratio n/p")->capture_default_str();
  se->add_option("--eps", ca.eps, "Revelation probability, in (0, 1]")->capture_default_str();
  se->add_option("--n", ca.n, "Number of subjects")->capture_default_str();
  se->add_option("--t-max", ca.t_max, "Iterations compared")->capture_default_str();
  se->add_option("--replicates", ca.replicates, "Replicates")->capture_default_str();
  se->add_option("--seed", ca.seed, "Root seed")->capture_default_str();
  se->add_option("--variant", ca.variant, "SE variant: included or excluded")
      ->capture_default_str();
  se->add_option("--out-dir", ca.out_dir, "Write se_check.csv and config.ini here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  const std::string config = app.config_to_str(true, false);
  const std::size_t workers = resolve_threads(threads);
  try {
    if (theory->parsed()) return cmd_theory(ta, config, out);
    if (sim->parsed()) return cmd_simulate(sa, workers, config, out, err);
    return cmd_se_check(ca, workers, config, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace oamp::cli
