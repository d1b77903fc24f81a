#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "oamp/amp.hpp"
#include "oamp/error.hpp"
#include "oamp/experiments.hpp"
#include "oamp/scalar_channel.hpp"
#include "oamp/state_evolution.hpp"

namespace py = pybind11;
using namespace oamp;

namespace {

SeConfig se_config(double lambda, double mu, double c, double eps, CovariateRevelation rev) {
  SeConfig cfg;
  cfg.lambda = lambda;
  cfg.mu = mu;
  cfg.c = c;
  cfg.eps = eps;
  cfg.revelation = rev;
  return cfg;
}

double overlap_of(const Vector& x_hat, const Vector& x_star) {
  return empirical_overlap(x_hat, CommunityLabels(x_star));
}

double mse_of(const Vector& x_hat, const Vector& x_star) {
  return empirical_mse(x_hat, CommunityLabels(x_star));
}

}  // namespace

PYBIND11_MODULE(_oamp, m) {
  m.doc() = "Orchestrated AMP for block models with Gaussian covariates";

  auto base = py::register_exception<Error>(m, "OampError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InvalidDimension>(m, "InvalidDimension", PyExc_ValueError);
  py::register_exception<NotApplicable>(m, "NotApplicable", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());

  py::enum_<CovariateRevelation>(m, "CovariateRevelation")
      .value("excluded", CovariateRevelation::excluded)
      .value("included", CovariateRevelation::included);
  py::enum_<Family>(m, "Family")
      .value("gaussian", Family::gaussian)
      .value("contextual_sbm", Family::contextual_sbm)
      .value("multilayer", Family::multilayer);
  py::enum_<SweepAxis>(m, "SweepAxis").value("lambda_", SweepAxis::lambda).value("mu", SweepAxis::mu);
  py::enum_<InitKind>(m, "InitKind")
      .value("spectral", InitKind::spectral)
      .value("revelation", InitKind::revelation);
  py::enum_<GramScale>(m, "GramScale").value("by_n", GramScale::by_n).value("by_p", GramScale::by_p);

  m.def("scalar_mmse", &scalar_mmse, py::arg("eta"));
  m.def("scalar_mmse_derivative", &scalar_mmse_derivative, py::arg("eta"));
  m.def("scalar_mi", &scalar_mi, py::arg("eta"));

  m.def(
      "se_scalar_step",
      [](double z, double lambda, double mu, double c, double eps, CovariateRevelation rev) {
        return se_scalar_step(z, se_config(lambda, mu, c, eps, rev));
      },
      py::arg("z"), py::arg("lambda_"), py::arg("mu"), py::arg("c") = 1.0, py::arg("eps") = 0.0,
      py::arg("revelation") = CovariateRevelation::excluded);
  m.def(
      "fixed_point_z",
      [](double lambda, double mu, double c, double eps, CovariateRevelation rev) {
        return fixed_point_z(se_config(lambda, mu, c, eps, rev));
      },
      py::arg("lambda_"), py::arg("mu"), py::arg("c") = 1.0, py::arg("eps") = 0.0,
      py::arg("revelation") = CovariateRevelation::excluded);
  m.def("limit_mmse", &limit_mmse, py::arg("lambda_"), py::arg("mu"), py::arg("c") = 1.0);
  m.def("detection_possible", &detection_possible, py::arg("lambda_"), py::arg("mu"),
        py::arg("c") = 1.0);
  m.def("xi", &xi, py::arg("z"), py::arg("lambda_"), py::arg("mu"), py::arg("c") = 1.0);
  m.def("xi_limit", &xi_limit, py::arg("lambda_"), py::arg("mu"), py::arg("c") = 1.0);
  m.def("gamma_star", &gamma_star, py::arg("mu"), py::arg("c") = 1.0);
  m.def("a0_rhs", &a0_rhs, py::arg("a"), py::arg("lambda_"), py::arg("mu"), py::arg("c"));
  m.def("solve_a0", &solve_a0, py::arg("lambda_"), py::arg("mu"), py::arg("c"),
        py::arg("tol") = 1e-12);

  py::class_<SeTrajectory>(m, "SeTrajectory")
      .def_readonly("z", &SeTrajectory::z)
      .def_readonly("alpha", &SeTrajectory::alpha)
      .def_readonly("tau2", &SeTrajectory::tau2)
      .def_readonly("beta", &SeTrajectory::beta)
      .def_readonly("theta2", &SeTrajectory::theta2)
      .def_readonly("mu_t", &SeTrajectory::mu_t)
      .def_readonly("sigma2_t", &SeTrajectory::sigma2_t)
      .def_readonly("alpha_init", &SeTrajectory::alpha_init)
      .def_readonly("tau2_init", &SeTrajectory::tau2_init)
      .def("steps", &SeTrajectory::steps)
      .def("gamma", &SeTrajectory::gamma, py::arg("t"))
      .def("theta", &SeTrajectory::theta, py::arg("t"));

  m.def(
      "se_run",
      [](double lambda, double mu, double c, double eps, std::size_t t_max, const std::string& init,
         double z0, std::uint64_t seed, CovariateRevelation rev) {
        SeConfig cfg = se_config(lambda, mu, c, eps, rev);
        cfg.t_max = t_max;
        if (init == "zero") {
          cfg.init = SeZeroInit{};
        } else if (init == "from_z") {
          cfg.init = SeFromZ{z0};
        } else if (init == "random") {
          cfg.init = SeRandomInterval{4.0, 10.0, seed};
        } else {
          throw DomainError("init must be 'zero', 'from_z' or 'random'");
        }
        return se_run(cfg);
      },
      py::arg("lambda_"), py::arg("mu"), py::arg("c") = 1.0, py::arg("eps") = 0.0,
      py::arg("t_max") = 100, py::arg("init") = "from_z", py::arg("z0") = 1.0,
      py::arg("seed") = 0, py::arg("revelation") = CovariateRevelation::excluded);

  m.def("empirical_mse", &mse_of, py::arg("x_hat"), py::arg("x_star"));
  m.def("empirical_overlap", &overlap_of, py::arg("x_hat"), py::arg("x_star"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("family", &ExperimentConfig::family)
      .def_readwrite("n", &ExperimentConfig::n)
      .def_readwrite("p", &ExperimentConfig::p)
      .def_readwrite("lambda_", &ExperimentConfig::lambda)
      .def_readwrite("mu", &ExperimentConfig::mu)
      .def_readwrite("r", &ExperimentConfig::r)
      .def_readwrite("p_bar_scale", &ExperimentConfig::p_bar_scale)
      .def_readwrite("axis", &ExperimentConfig::axis)
      .def_readwrite("grid", &ExperimentConfig::grid)
      .def_readwrite("replicates", &ExperimentConfig::replicates)
      .def_readwrite("n_iter", &ExperimentConfig::n_iter)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("init", &ExperimentConfig::init)
      .def_readwrite("eps", &ExperimentConfig::eps)
      .def_readwrite("gram_scale", &ExperimentConfig::gram_scale)
      .def_readwrite("early_stop_tol", &ExperimentConfig::early_stop_tol)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_property_readonly("c", &ExperimentConfig::c)
      .def("validate", [](const ExperimentConfig& c) { validate(c); });

  py::class_<SpectralInfo>(m, "SpectralInfo")
      .def_readonly("a0", &SpectralInfo::a0)
      .def_readonly("eigenvalue", &SpectralInfo::eigenvalue)
      .def_readonly("residual", &SpectralInfo::residual)
      .def_readonly("iterations", &SpectralInfo::iterations)
      .def_readonly("overlap", &SpectralInfo::overlap);

  py::class_<ReplicateResult>(m, "ReplicateResult")
      .def_readonly("seed", &ReplicateResult::seed)
      .def_readonly("empirical_mse", &ReplicateResult::empirical_mse)
      .def_readonly("empirical_overlap", &ReplicateResult::empirical_overlap)
      .def_readonly("overlap_trajectory", &ReplicateResult::overlap_trajectory)
      .def_readonly("mse_trajectory", &ReplicateResult::mse_trajectory)
      .def_readonly("spectral", &ReplicateResult::spectral)
      .def_readonly("min_average_degree", &ReplicateResult::min_average_degree)
      .def_readonly("wall_time_s", &ReplicateResult::wall_time_s);

  py::class_<AggregateResult>(m, "AggregateResult")
      .def_readonly("value", &AggregateResult::value)
      .def_readonly("lambda_", &AggregateResult::lambda)
      .def_readonly("mu", &AggregateResult::mu)
      .def_readonly("theory_mmse", &AggregateResult::theory_mmse)
      .def_readonly("detectable", &AggregateResult::detectable)
      .def_readonly("replicates", &AggregateResult::replicates)
      .def_readonly("mean_mse", &AggregateResult::mean_mse)
      .def_readonly("sd_mse", &AggregateResult::sd_mse)
      .def_readonly("min_mse", &AggregateResult::min_mse)
      .def_readonly("max_mse", &AggregateResult::max_mse)
      .def_readonly("mean_overlap", &AggregateResult::mean_overlap)
      .def_readonly("wall_time_s", &AggregateResult::wall_time_s)
      .def_readonly("errors", &AggregateResult::errors)
      .def_readonly("warnings", &AggregateResult::warnings)
      .def_readonly("runs", &AggregateResult::runs);

  m.def("replicate_seed", &replicate_seed, py::arg("root"), py::arg("point"), py::arg("rep"));
  m.def("run_replicate", &run_replicate, py::arg("config"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_sweep", &run_sweep, py::arg("config"), py::call_guard<py::gil_scoped_release>());

  m.def(
      "sample_instance",
      [](const ExperimentConfig& cfg, std::uint64_t seed) {
        const SampledInstance inst = sample_instance(cfg, seed);
        py::dict out;
        out["x_star"] = inst.labels.x_star();
        out["v_star"] = inst.covariates.v_star;
        out["B"] = Matrix(*inst.covariates.B);
        if (inst.surrogate) out["T"] = Matrix(*inst.surrogate->T);
        py::list layers;
        for (const auto& layer : inst.layers) layers.append(layer->edges());
        out["edges"] = layers;
        return out;
      },
      py::arg("config"), py::arg("seed"));

  py::class_<SeCheckConfig>(m, "SeCheckConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &SeCheckConfig::lambda)
      .def_readwrite("mu", &SeCheckConfig::mu)
      .def_readwrite("c", &SeCheckConfig::c)
      .def_readwrite("eps", &SeCheckConfig::eps)
      .def_readwrite("n", &SeCheckConfig::n)
      .def_readwrite("t_max", &SeCheckConfig::t_max)
      .def_readwrite("replicates", &SeCheckConfig::replicates)
      .def_readwrite("seed", &SeCheckConfig::seed)
      .def_readwrite("threads", &SeCheckConfig::threads)
      .def_readwrite("revelation", &SeCheckConfig::revelation);

  py::class_<SeCheckRow>(m, "SeCheckRow")
      .def_readonly("t", &SeCheckRow::t)
      .def_readonly("z_theory", &SeCheckRow::z_theory)
      .def_readonly("mean_overlap", &SeCheckRow::mean_overlap)
      .def_readonly("abs_gap", &SeCheckRow::abs_gap)
      .def_readonly("mse_theory", &SeCheckRow::mse_theory)
      .def_readonly("mean_mse", &SeCheckRow::mean_mse);

  m.def("se_consistency_check", &se_consistency_check, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
}
