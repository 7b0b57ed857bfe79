"""Extremal drifts of bounded amplitude: the nonlinear eigenproblems

    -Delta phi - tau |grad phi| = lam_min phi,     -Delta phi + tau |grad phi| = lam_max phi.

The extremal drift is ``v = -+ tau grad phi / |grad phi|``.  We iterate on
the drift field: solve the linear Perron problem for the current drift,
rebuild the drift from the new eigenfunction, repeat until ``lam`` settles.

In the central (hybrid, low Peclet) regime each row of the assembled matrix
depends linearly on the drift at that node only, through the same central
gradient used to rebuild it.  The rebuilt drift therefore minimises (or
maximises) every row of ``A(v) phi`` at once, and the Collatz-Wielandt
bounds force ``lam`` to move monotonically.  Damping only engages if a
step goes the wrong way.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .eigensolve import principal_eigenpair
from .errors import NonConvergenceError
from .geometry import GridMask
from .operator import assemble, gradient, laplacian

log = logging.getLogger(__name__)

GRADIENT_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class OptimalDriftResult:
    """Converged extremal drift.

    ``mode`` is ``"min"`` or ``"max"``; ``drift`` is rebuilt from the final
    ``phi`` and ``residual`` is ``max |-Delta phi -+ tau |grad phi| - lam phi|``.
    """

    mode: str
    tau: float
    lam: float
    phi: np.ndarray
    drift: np.ndarray
    iterations: int
    history: list = field(default_factory=list)
    residual: float = 0.0

    def alignment_stats(self, mask: GridMask) -> dict:
        g = gradient(mask, self.phi, one_sided=False)
        gn = np.linalg.norm(g, axis=1)
        speed = np.linalg.norm(self.drift, axis=1)
        active = gn > GRADIENT_FLOOR / mask.h
        want = (1.0 if self.mode == "max" else -1.0) * self.tau * gn
        dot = np.sum(self.drift * g, axis=1)
        if self.tau > 0 and active.any():
            rel = np.abs(dot[active] - want[active]) / (self.tau * gn[active])
            misalign = float(rel.max())
        else:
            misalign = 0.0
        full_speed = np.abs(speed - self.tau) <= 1e-6
        return {
            "full_speed_fraction": float(np.mean(full_speed)),
            "max_speed": float(speed.max()) if speed.size else 0.0,
            "max_relative_misalignment": misalign,
        }

    def to_dict(self, mask: GridMask | None = None) -> dict:
        out = {
            "mode": self.mode,
            "tau": self.tau,
            "lambda": self.lam,
            "iterations": self.iterations,
            "lambda_history": list(self.history),
            "residual": self.residual,
        }
        if mask is not None:
            out["drift_alignment_stats"] = self.alignment_stats(mask)
        return out


def _extremal_drift(mask: GridMask, phi, tau: float, sign: float) -> np.ndarray:
    g = gradient(mask, phi, one_sided=False)
    gn = np.linalg.norm(g, axis=1)
    v = np.zeros_like(g)
    active = gn > GRADIENT_FLOOR * phi.max() / mask.h
    v[active] = sign * tau * g[active] / gn[active, None]
    return v


def _renormalize(v: np.ndarray, tau: float) -> np.ndarray:
    speed = np.linalg.norm(v, axis=1)
    out = np.zeros_like(v)
    ok = speed > 1e-12 * max(tau, 1.0)
    out[ok] = tau * v[ok] / speed[ok, None]
    return out


def nonlinear_residual(mask: GridMask, phi, lam: float, tau: float, mode: str) -> float:
    """``max |-Delta_h phi -+ tau |grad_h phi| - lam phi|`` on interior nodes."""
    sign = -1.0 if mode == "min" else 1.0
    g = np.linalg.norm(gradient(mask, phi, one_sided=False), axis=1)
    return float(np.abs(-laplacian(mask, phi) + sign * tau * g - lam * phi).max())


def _solve(mask, tau, mode, tol, max_outer, theta, eig_tol, scheme):
    sign = -1.0 if mode == "min" else 1.0
    drift = np.zeros((mask.n_interior, mask.ndim))
    res = principal_eigenpair(assemble(mask, drift, scheme), tol=eig_tol)
    history = [res.lam]
    if tau == 0:
        return OptimalDriftResult(mode, 0.0, res.lam, res.phi, drift, 0, history,
                                  nonlinear_residual(mask, res.phi, res.lam, 0.0, mode))
    phi = res.phi
    for it in range(1, max_outer + 1):
        target = _extremal_drift(mask, phi, tau, sign)
        drift = _renormalize((1.0 - theta) * drift + theta * target, tau)
        res = principal_eigenpair(assemble(mask, drift, scheme), tol=eig_tol, x0=phi)
        prev = history[-1]
        history.append(res.lam)
        phi = res.phi
        wrong_way = sign * (res.lam - prev) < -tol * abs(prev)
        if wrong_way and theta > 1 / 16:
            theta *= 0.5
            log.debug("%s iteration %d moved the wrong way; damping %.3g", mode, it, theta)
            continue
        if abs(res.lam - prev) <= tol * abs(res.lam):
            final = _extremal_drift(mask, phi, tau, sign)
            return OptimalDriftResult(
                mode, float(tau), res.lam, phi, final, it, history,
                nonlinear_residual(mask, phi, res.lam, tau, mode),
            )
    raise NonConvergenceError(
        f"{mode} drift iteration did not settle in {max_outer} steps", history=history
    )


def lambda_min(mask: GridMask, tau: float, tol: float = 1e-8, max_outer: int = 100,
               theta: float = 1.0, eig_tol: float | None = None,
               scheme: str = "hybrid") -> OptimalDriftResult:
    """Smallest principal eigenvalue over drifts with ``|v| <= tau``.

    Solves ``-Delta phi - tau |grad phi| = lam phi``; the optimal drift points
    down the gradient of ``phi``.  ``tol`` is the relative change in ``lam``
    that ends the iteration, ``theta`` the initial damping factor.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    eig_tol = tol * 1e-2 if eig_tol is None else eig_tol
    return _solve(mask, float(tau), "min", tol, max_outer, theta, eig_tol, scheme)


def lambda_max(mask: GridMask, tau: float, tol: float = 1e-8, max_outer: int = 100,
               theta: float = 1.0, eig_tol: float | None = None,
               scheme: str = "hybrid") -> OptimalDriftResult:
    """Largest principal eigenvalue over drifts with ``|v| <= tau``.

    Mirror of :func:`lambda_min` with the drift pointing up the gradient.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    eig_tol = tol * 1e-2 if eig_tol is None else eig_tol
    return _solve(mask, float(tau), "max", tol, max_outer, theta, eig_tol, scheme)
