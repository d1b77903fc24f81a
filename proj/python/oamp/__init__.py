"""Orchestrated AMP for block models with Gaussian covariates.

Thin wrapper over the C++ core. ``experiment(**fields)`` and
``se_check_config(**fields)`` build configs from keyword arguments; the
``lambda`` field is spelled ``lambda_``.
"""

from ._oamp import (  # noqa: F401
    AggregateResult,
    ConvergenceError,
    CovariateRevelation,
    DivergenceError,
    DomainError,
    ExperimentConfig,
    Family,
    GramScale,
    InitKind,
    InvalidDimension,
    NotApplicable,
    OampError,
    ReplicateResult,
    SeCheckConfig,
    SeCheckRow,
    SeTrajectory,
    SweepAxis,
    a0_rhs,
    detection_possible,
    empirical_mse,
    empirical_overlap,
    fixed_point_z,
    gamma_star,
    limit_mmse,
    replicate_seed,
    run_replicate,
    run_sweep,
    sample_instance,
    scalar_mi,
    scalar_mmse,
    scalar_mmse_derivative,
    se_consistency_check,
    se_run,
    se_scalar_step,
    solve_a0,
    xi,
    xi_limit,
)

_ENUMS = {
    "family": Family,
    "axis": SweepAxis,
    "init": InitKind,
    "gram_scale": GramScale,
    "revelation": CovariateRevelation,
}


def _fill(obj, fields):
    for key, value in fields.items():
        if key == "lambda":
            key = "lambda_"
        if not hasattr(obj, key):
            raise TypeError(f"unknown field {key!r}")
        if isinstance(value, str) and key in _ENUMS:
            name = "lambda_" if value == "lambda" else value.replace("-", "_")
            value = getattr(_ENUMS[key], name)
        setattr(obj, key, value)
    return obj


def experiment(**fields):
    """ExperimentConfig with the given fields; enum fields accept their names."""
    cfg = _fill(ExperimentConfig(), fields)
    cfg.validate()
    return cfg


def se_check_config(**fields):
    return _fill(SeCheckConfig(), fields)
