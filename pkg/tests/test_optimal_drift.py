import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftfk.eigensolve import principal_eigenpair
from driftfk.errors import NonConvergenceError
from driftfk.geometry import Disk, Rectangle, rasterize
from driftfk.operator import DriftSpec, assemble
from driftfk.optimal_drift import lambda_max, lambda_min, nonlinear_residual
from driftfk.radial import radial_eigen

TOL = 1e-8


@pytest.fixture(scope="module")
def disk_pair(disk_mask_64):
    return lambda_min(disk_mask_64, 1.0, tol=TOL), lambda_max(disk_mask_64, 1.0, tol=TOL)


@pytest.fixture(scope="module")
def square_pair(square_mask_64):
    return lambda_min(square_mask_64, 1.0, tol=TOL), lambda_max(square_mask_64, 1.0, tol=TOL)


def test_zero_amplitude_reduces_to_plain_eigenvalue(square_mask_64):
    lam0 = principal_eigenpair(assemble(square_mask_64), tol=1e-10).lam
    for solver in (lambda_min, lambda_max):
        res = solver(square_mask_64, 0.0)
        assert res.lam == pytest.approx(lam0, rel=1e-9)
        assert np.all(res.drift == 0)


def _mean_angle(mask, drift, outward):
    x = mask.coords()
    r = np.linalg.norm(x, axis=1)
    speed = np.linalg.norm(drift, axis=1)
    ok = (r > 0) & (speed > 0)
    cos = np.sum(drift[ok] * x[ok], axis=1) / (r[ok] * speed[ok])
    if not outward:
        cos = -cos
    return float(np.degrees(np.arccos(np.clip(cos, -1, 1))).mean())


def test_disk_optimal_drifts_are_radial(disk_mask_64, disk_pair):
    lo, hi = disk_pair
    assert _mean_angle(disk_mask_64, lo.drift, outward=True) < 5
    assert _mean_angle(disk_mask_64, hi.drift, outward=False) < 5
    assert lo.lam == pytest.approx(radial_eigen(2, 1.0, 1.0, +1).lam, rel=0.02)
    assert hi.lam == pytest.approx(radial_eigen(2, 1.0, 1.0, -1).lam, rel=0.02)


@pytest.mark.parametrize("which", [0, 1])
def test_result_invariants(square_mask_64, square_pair, which):
    res = square_pair[which]
    stats = res.alignment_stats(square_mask_64)
    assert stats["full_speed_fraction"] >= 0.95
    assert stats["max_speed"] <= 1.0 + 1e-12
    assert stats["max_relative_misalignment"] <= 1e-6
    assert res.residual <= 5 * TOL * res.lam
    assert res.residual == pytest.approx(
        nonlinear_residual(square_mask_64, res.phi, res.lam, 1.0, res.mode), rel=1e-12)
    assert np.all(res.phi > 0) and res.phi.max() == 1.0
    steps = np.diff(res.history)
    sign = -1 if res.mode == "min" else 1
    assert np.all(sign * steps >= -TOL * res.lam)
    d = res.to_dict(square_mask_64)
    assert {"lambda", "iterations", "lambda_history", "drift_alignment_stats"} <= set(d)


def test_square_minimal_below_drift_free(square_pair):
    assert square_pair[0].lam < 2 * math.pi**2
    assert square_pair[1].lam > 2 * math.pi**2 * 0.99


def test_square_maximal_increasing_in_tau(square_mask_64):
    lams = [lambda_max(square_mask_64, t).lam for t in (0.5, 1.0, 2.0)]
    assert lams[0] < lams[1] < lams[2]


def test_non_convergence_reports_history(square_mask_64):
    with pytest.raises(NonConvergenceError) as info:
        lambda_min(square_mask_64, 2.0, max_outer=1)
    assert len(info.value.history) == 2


def test_negative_amplitude_rejected(square_mask_64):
    with pytest.raises(ValueError):
        lambda_min(square_mask_64, -1.0)
    with pytest.raises(ValueError):
        lambda_max(square_mask_64, -1.0)


@settings(max_examples=20, deadline=None)
@given(kind=st.sampled_from(["constant", "radial", "rotational", "random"]),
       seed=st.integers(0, 10**6), scale=st.floats(0.0, 1.0),
       sign=st.sampled_from([1, -1]))
def test_sandwich(square_mask_64, square_pair, kind, seed, scale, sign):
    lo, hi = square_pair
    ang = seed * 1e-3
    drift = DriftSpec(kind, scale, direction=(math.cos(ang), math.sin(ang)),
                      center=(0.5, 0.5), sign=sign, seed=seed)
    lam = principal_eigenpair(assemble(square_mask_64, drift.sample(square_mask_64))).lam
    assert lo.lam - TOL * lo.lam <= lam <= hi.lam + TOL * hi.lam
