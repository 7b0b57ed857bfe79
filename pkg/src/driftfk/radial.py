"""Radial eigenproblems on balls: shooting for the drift ODE, closed forms, asymptotics.

For a ball ``B_R`` in R^n with drift ``sign * tau * e_r`` the principal
eigenfunction is radial, ``phi(x) = u(|x|)``, with

    -u'' - (n - 1) u' / r + sign * tau * u' = lam * u,   u'(0) = 0,  u(R) = 0.

The shooting map ``lam -> u(R; lam)`` is integrated with fixed-step RK4 from a
Taylor start just off the origin.  By Sturm comparison the set of ``lam`` for
which ``u`` vanishes somewhere in ``(0, R]`` is a half-line starting at the
principal eigenvalue, which gives a robust bisection predicate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, PreconditionError, ProfileValidityError
from .geometry import equal_measure_radius

DEFAULT_STEPS = 2000
# RK4 must resolve the exp(tau r) boundary layer: tau * dr <= STIFF_STEP
STIFF_STEP = 0.02
START_FRACTION = 1e-6


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Principal radial eigenpair; ``u`` is sampled on the uniform grid ``r``."""

    n: int
    R: float
    tau: float
    sign: int
    lam: float
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray


def _bessel_series(nu: float, x: float) -> float:
    # J_nu(x) / (x/2)^nu, which has the same sign as J_nu for x > 0
    term = 1.0 / math.gamma(nu + 1.0)
    total = term
    q = -(x * x) / 4.0
    k = 0
    while abs(term) > 1e-17 * max(1.0, abs(total)) or k < 5:
        k += 1
        term *= q / (k * (k + nu))
        total += term
    return total


@lru_cache(maxsize=None)
def first_bessel_zero(nu: float) -> float:
    """First positive zero of ``J_nu`` (power series plus bisection), ``nu > -1``."""
    step = 0.05
    a = step
    fa = _bessel_series(nu, a)
    while True:
        b = a + step
        fb = _bessel_series(nu, b)
        if fa * fb <= 0:
            break
        a, fa = b, fb
        if a > 50 + 2 * nu:
            raise BracketError(f"no zero of J_{nu} found")
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = _bessel_series(nu, mid)
        if fa * fm <= 0:
            b = mid
        else:
            a, fa = mid, fm
        if b - a < 1e-15 * b:
            break
    return 0.5 * (a + b)


def ball_eigenvalue(n: int, R: float) -> float:
    """Dirichlet eigenvalue of the n-ball with no drift, ``(j_{n/2-1,1} / R)^2``."""
    return (first_bessel_zero(n / 2 - 1) / R) ** 2


def _steps_for(R: float, tau: float, steps: int | None) -> int:
    if steps is not None:
        return int(steps)
    n = DEFAULT_STEPS
    if tau > 0:
        n = max(n, int(math.ceil(tau * R / STIFF_STEP)))
    return n


def _shoot(n, R, tau, sign, lam, steps, stop_at_zero):
    """Integrate the radial ODE; returns ``(u(R), crossed)``.

    With ``stop_at_zero`` the march halts as soon as ``u <= 0``.
    """
    r0 = START_FRACTION * R
    dr = (R - r0) / steps
    c = float(n - 1)
    b = sign * tau
    r = r0
    u = 1.0 - lam * r0 * r0 / (2 * n)
    p = -lam * r0 / n
    half = 0.5 * dr
    crossed = False
    for _ in range(steps):
        rm = r + half
        r1 = r + dr
        k1u = p
        k1p = -lam * u + (b - c / r) * p
        u2 = u + half * k1u
        p2 = p + half * k1p
        k2u = p2
        k2p = -lam * u2 + (b - c / rm) * p2
        u3 = u + half * k2u
        p3 = p + half * k2p
        k3u = p3
        k3p = -lam * u3 + (b - c / rm) * p3
        u4 = u + dr * k3u
        p4 = p + dr * k3p
        k4u = p4
        k4p = -lam * u4 + (b - c / r1) * p4
        u += dr / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        p += dr / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        r = r1
        if u <= 0.0:
            crossed = True
            if stop_at_zero:
                return u, True
    if not math.isfinite(u):
        raise BracketError("radial integration blew up; reduce the step size")
    return u, crossed


def _trajectory(n, R, tau, sign, lam, steps):
    r0 = START_FRACTION * R
    dr = (R - r0) / steps
    c = float(n - 1)
    b = sign * tau
    rs = np.empty(steps + 2)
    us = np.empty(steps + 2)
    ps = np.empty(steps + 2)
    rs[0], us[0], ps[0] = 0.0, 1.0, 0.0
    r = r0
    u = 1.0 - lam * r0 * r0 / (2 * n)
    p = -lam * r0 / n
    rs[1], us[1], ps[1] = r, u, p

    def f(r, u, p):
        return p, -lam * u + (b - c / r) * p

    for i in range(steps):
        k1 = f(r, u, p)
        k2 = f(r + dr / 2, u + dr / 2 * k1[0], p + dr / 2 * k1[1])
        k3 = f(r + dr / 2, u + dr / 2 * k2[0], p + dr / 2 * k2[1])
        k4 = f(r + dr, u + dr * k3[0], p + dr * k3[1])
        u += dr / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        p += dr / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        r = r0 + (i + 1) * dr
        rs[i + 2], us[i + 2], ps[i + 2] = r, u, p
    return rs, us, ps


def radial_eigen(n: int, R: float, tau: float = 0.0, sign: int = 1,
                 steps: int | None = None) -> RadialProfile:
    """Principal eigenpair of ``-Delta + sign * tau * e_r . grad`` on ``B_R``.

    ``sign=+1`` is the outward drift (the minimising configuration), ``-1``
    the inward one.  ``steps`` overrides the RK4 step count, which otherwise
    is ``max(2000, tau R / 0.02)``.
    """
    if int(n) != n or n < 1:
        raise ValueError("dimension must be an integer >= 1")
    if not R > 0:
        raise ValueError("radius must be positive")
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    n = int(n)
    N = _steps_for(R, tau, steps)

    def crossed(lam):
        return _shoot(n, R, tau, sign, lam, N, True)[1]

    # outward drift lowers the eigenvalue, so the drift-free value bounds it
    hi = ball_eigenvalue(n, R) * (1.0 + 1e-3)
    doublings = 0
    while not crossed(hi):
        hi *= 2.0
        doublings += 1
        if doublings > 80:
            raise BracketError("could not bracket the principal eigenvalue")
    lo = 0.0
    while lo == 0.0 or hi - lo > 1e-3 * hi:
        mid = hi / 16.0 if lo == 0.0 else 0.5 * (lo + hi)
        if crossed(mid):
            hi = mid
        else:
            lo = mid
        if hi < 1e-300:
            raise BracketError("eigenvalue underflow")

    def shot(lam):
        return _shoot(n, R, tau, sign, lam, N, False)[0]

    g_lo, g_hi = shot(lo), shot(hi)
    if not (g_lo > 0 > g_hi):
        raise BracketError(f"shooting map has no sign change on [{lo}, {hi}]")
    lam = brentq(shot, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)

    r, u, du = _trajectory(n, R, tau, sign, lam, N)
    if abs(u[-1]) > 1e-8:
        raise ProfileValidityError(f"|u(R)| = {abs(u[-1]):.3g} exceeds 1e-8")
    if not np.all(du[1:] < 0) or not np.all(np.diff(u) <= 0):
        raise ProfileValidityError("radial profile is not strictly decreasing")
    return RadialProfile(n, float(R), float(tau), sign, float(lam), r, u, du)


def fk_bound(m: float, tau: float, n: int = 2) -> float:
    """Smallest principal eigenvalue over domains of measure ``m`` and drifts
    bounded by ``tau``: the ball of measure ``m`` with outward drift ``tau e_r``.
    """
    return radial_eigen(n, equal_measure_radius(m, n), tau, +1).lam


def interval_closed_form(m: float, tau: float, rtol: float = 1e-10) -> float:
    """Principal eigenvalue on an interval of length ``m`` with drift ``tau e_r``.

    Root of ``lam = tau^2/4 (1 + s)^2 exp(-s tau m / 2)``, ``s = sqrt(1 - 4 lam / tau^2)``,
    found by a 64-cell sign scan of ``(0, tau^2/4)`` and bisection.
    Requires ``tau >= 2 pi / m`` so that ``tau^2 >= 4 lam``.
    """
    if not m > 0:
        raise PreconditionError("interval length must be positive")
    if tau < 2 * math.pi / m:
        raise PreconditionError(
            f"closed form needs tau >= 2 pi / m = {2 * math.pi / m:.4g}; use radial_eigen"
        )
    R = m / 2
    top = tau * tau / 4

    def g(lam):
        s = math.sqrt(max(0.0, 1.0 - lam / top))
        return lam - top * (1.0 + s) ** 2 * math.exp(-s * tau * R)

    # g(top) = 0 is the degenerate double root; stop the scan just short of it
    grid = [top * k / 64 for k in range(64)] + [top * (1 - 2.0**-30)]
    vals = [g(x) for x in grid]
    changes = [k for k in range(64) if vals[k] * vals[k + 1] < 0]
    if len(changes) != 1:
        raise PreconditionError(f"expected one sign change, found {len(changes)}")
    a, b = grid[changes[0]], grid[changes[0] + 1]
    ga = vals[changes[0]]
    while b - a > rtol * b:
        mid = 0.5 * (a + b)
        gm = g(mid)
        if ga * gm <= 0:
            b = mid
        else:
            a, ga = mid, gm
    return 0.5 * (a + b)


def log_decay_rates(m: float, n: int, taus) -> list[tuple[float, float]]:
    """Pairs ``(tau, -log(fk_bound(m, tau, n)) / tau)`` for increasing ``tau >= 1``.

    The rates approach the radius ``(m / |B_1|)^(1/n)`` as ``tau`` grows.
    """
    taus = [float(t) for t in taus]
    if any(t < 1 for t in taus) or any(b <= a for a, b in zip(taus, taus[1:])):
        raise PreconditionError("tau values must be increasing and >= 1")
    return [(t, -math.log(fk_bound(m, t, n)) / t) for t in taus]
