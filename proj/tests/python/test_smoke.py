import math

import numpy as np
import pytest

import oamp


def test_scalar_channel_endpoints():
    assert oamp.scalar_mmse(0.0) == 1.0
    assert oamp.scalar_mi(0.0) == 0.0
    h = 1e-4
    fd = (oamp.scalar_mi(1.0 + h) - oamp.scalar_mi(1.0 - h)) / (2 * h)
    assert abs(fd - oamp.scalar_mmse(1.0) / 2) < 1e-8


def test_fixed_point_dichotomy():
    assert oamp.fixed_point_z(0.5, 0.5, c=5 / 3) == 0.0
    z = oamp.fixed_point_z(2.0, 1.0)
    assert 0.0 < z < 1.0
    assert abs(oamp.se_scalar_step(z, 2.0, 1.0) - z) < 1e-12
    assert oamp.limit_mmse(2.0, 1.0) == pytest.approx(1 - z * z)
    assert oamp.detection_possible(1.0, 0.5)
    assert not oamp.detection_possible(1.0, 0.0)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        oamp.fixed_point_z(-1.0, 1.0)
    with pytest.raises(oamp.NotApplicable):
        oamp.solve_a0(0.0, 1.0, 1.0)


def test_a0_and_trajectory():
    a0 = oamp.solve_a0(2.0, 0.9, 5 / 3)
    assert abs(oamp.a0_rhs(a0, 2.0, 0.9, 5 / 3) - 0.9 / (5 / 3 * 2.0)) < 1e-10
    tr = oamp.se_run(2.0, 1.0, t_max=200)
    assert tr.z[0] == 1.0
    assert abs(tr.z[-1] - oamp.fixed_point_z(2.0, 1.0)) < 1e-8
    assert all(b <= a + 1e-15 for a, b in zip(tr.z, tr.z[1:]))


def test_metrics_accept_numpy():
    x = np.array([1.0, -1.0, 1.0, -1.0])
    assert oamp.empirical_mse(x, x) == 0.0
    assert oamp.empirical_overlap(-x, x) == 1.0
    xh = np.array([0.3, -0.2, 0.5, 0.1])
    dense = np.linalg.norm(np.outer(x, x) - np.outer(xh, xh)) ** 2 / 16
    assert abs(oamp.empirical_mse(xh, x) - dense) < 1e-12


def test_replicate_is_deterministic():
    cfg = oamp.experiment(family="gaussian", n=200, p=120, lambda_=3.0, mu=0.9, grid=[3.0],
                          replicates=2, n_iter=15)
    a = oamp.run_replicate(cfg, 7)
    b = oamp.run_replicate(cfg, 7)
    assert a.empirical_mse == b.empirical_mse
    assert len(a.mse_trajectory) == 16
    rows = oamp.run_sweep(cfg)
    assert len(rows) == 1 and rows[0].replicates == 2
    assert rows[0].theory_mmse == pytest.approx(oamp.limit_mmse(3.0, 0.9, 200 / 120))


def test_sample_instance_shapes():
    cfg = oamp.experiment(family="contextual_sbm", n=60, p=30, p_bar_scale=[3.0], grid=[1.0])
    inst = oamp.sample_instance(cfg, 3)
    assert inst["B"].shape == (30, 60)
    assert set(np.unique(inst["x_star"])) <= {-1.0, 1.0}
    assert all(k < l for k, l in inst["edges"][0])


def test_se_check_full_revelation():
    cfg = oamp.se_check_config(eps=1.0, n=100, t_max=2, replicates=1)
    rows = oamp.se_consistency_check(cfg)
    assert [r.t for r in rows] == [1, 2]
    assert all(r.abs_gap == 0.0 for r in rows)
    assert not math.isnan(rows[0].mean_mse)
