"""Level-set rearrangement of a positive grid field onto the equal-measure ball.

Given ``phi > 0`` with Dirichlet zero outside the mask:

* ``rho(a)`` is the radius of the ball with the measure of ``{phi > a}``;
* ``flux(a)`` is the integral of ``Delta phi`` over ``{phi > a}``, summed
  with the same discrete Laplacian the operator uses;
* ``v(r) = flux(rho^-1(r)) / (n |B_1| r^(n-1))`` is the radial derivative of
  the symmetrized profile, and ``u(r) = -int_r^R v``.

For superharmonic ``phi`` the isoperimetric inequality gives
``u(rho(a)) >= a``; :func:`check_bound` reports the margin of that bound and
the slope ``dU/da`` of ``U(a) = u(rho(a))``, which should be at least 1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .errors import PositivityError
from .geometry import GridMask, unit_ball_volume
from .operator import laplacian

# levels within this many grid spacings of the centre or of the boundary
# radius are not resolved by the grid
RESOLVED_CELLS = 3.0
# slopes dU/da are taken across level gaps of at least this fraction of max(phi)
SLOPE_WINDOW = 1.0 / 16


@dataclass(frozen=True, eq=False)
class RearrangementProfile:
    """Level table and (after :func:`symmetrize`) the radial profile.

    Arrays are indexed by level; ``a`` increases and ``rho`` strictly
    decreases.  ``r``, ``v``, ``u`` are ``None`` until symmetrized; they
    cover only levels with ``rho >= h`` and ``r[j] == rho[j]`` there.
    """

    ndim: int
    h: float
    a: np.ndarray
    measure: np.ndarray
    rho: np.ndarray
    R: float
    flux: np.ndarray | None = None
    r: np.ndarray | None = None
    v: np.ndarray | None = None
    u: np.ndarray | None = None
    margin: float | None = None

    @property
    def resolved(self) -> np.ndarray:
        """Mask of symmetrized levels used in bound statistics."""
        pad = RESOLVED_CELLS * self.h
        return (self.r >= pad) & (self.r <= self.R - pad)

    def rows(self) -> list[dict]:
        out = []
        k = 0 if self.r is None else len(self.r)
        for j in range(len(self.a)):
            row = {"a": self.a[j], "measure": self.measure[j], "rho": self.rho[j],
                   "flux": None if self.flux is None else self.flux[j],
                   "r": None, "v": None, "u": None, "margin": None}
            if j < k:
                row.update(r=self.r[j], v=self.v[j], u=self.u[j],
                           margin=self.u[j] - self.a[j])
            out.append(row)
        return out

    def to_csv(self) -> str:
        cols = ["a", "measure", "rho", "flux", "r", "v", "u", "margin"]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({k: "" if row[k] is None else repr(float(row[k])) for k in cols})
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def _sorted_cumulative(phi, weights):
    order = np.argsort(-phi, kind="stable")
    return phi[order], np.cumsum(weights[order])


def _count_above(sorted_desc, levels):
    # number of entries strictly greater than each level
    return np.searchsorted(-sorted_desc, -np.asarray(levels), side="left")


def level_table(phi, mask: GridMask, L: int = 128) -> RearrangementProfile:
    """Super-level measures and equal-measure radii at ``a_i = i max(phi) / L``.

    Levels whose super-level set equals the previous one are merged away,
    so ``rho`` is strictly decreasing; the top level ``max(phi)`` has
    ``rho = 0``.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (mask.n_interior,):
        raise ValueError("field size must equal the interior node count")
    if np.any(phi <= 0):
        raise PositivityError("rearrangement needs a strictly positive field")
    if L < 32:
        raise ValueError("use at least 32 levels")
    n = mask.ndim
    top = float(phi.max())
    levels = top * np.arange(L + 1) / L
    levels[-1] = top
    desc = np.sort(phi)[::-1]
    counts = _count_above(desc, levels)
    keep = np.ones(L + 1, dtype=bool)
    last = counts[0]
    for i in range(1, L + 1):
        if counts[i] == last:
            keep[i] = False
        else:
            last = counts[i]
    meas = counts[keep] * mask.h**n
    rho = (meas / unit_ball_volume(n)) ** (1.0 / n)
    return RearrangementProfile(n, mask.h, levels[keep], meas, rho, float(rho[0]))


def symmetrize(phi, mask: GridMask, table: RearrangementProfile) -> RearrangementProfile:
    """Fill in flux, ``v`` and ``u`` for a level table built from ``phi``."""
    phi = np.asarray(phi, dtype=float)
    n = table.ndim
    cell = mask.h**n
    desc, csum = _sorted_cumulative(phi, laplacian(mask, phi) * cell)
    counts = _count_above(desc, table.a)
    flux = np.where(counts > 0, csum[np.maximum(counts - 1, 0)], 0.0)

    usable = table.rho >= mask.h
    r = table.rho[usable]
    v = flux[usable] / (n * unit_ball_volume(n) * r ** (n - 1))
    u = np.zeros_like(r)
    # integrate -v inwards from R, where u vanishes
    u[1:] = np.cumsum(-0.5 * (v[1:] + v[:-1]) * (r[:-1] - r[1:]))
    out = replace(table, flux=flux, r=r, v=v, u=u)
    return replace(out, margin=check_bound(out)["margin"])


def check_bound(table: RearrangementProfile, window: float = SLOPE_WINDOW) -> dict:
    """Bound margin and minimum slope of ``U(a) = u(rho(a))`` over resolved levels.

    ``margin = min(u(r_j) - a_j)``.  The slope is ``(U(a_k) - U(a_j)) / (a_k - a_j)``
    where ``a_k`` is the first resolved level at least ``window * max(phi)``
    above ``a_j``; shorter gaps are dominated by node-count noise.
    """
    res = table.resolved
    a = table.a[: len(table.r)]
    margin = float(np.min(table.u[res] - a[res])) if res.any() else float("nan")
    idx = np.nonzero(res)[0]
    gap = window * table.a[-1]
    slopes = []
    for j in idx:
        later = idx[a[idx] >= a[j] + gap]
        if later.size:
            k = later[0]
            slopes.append((table.u[k] - table.u[j]) / (a[k] - a[j]))
    min_slope = float(min(slopes)) if slopes else float("nan")
    return {"margin": margin, "min_slope": min_slope}


def _simplices(mask: GridMask, phi):
    """Node values and gradient norms of the piecewise-linear interpolant.

    Each grid cell touching an interior node is split into two right
    triangles (one segment per cell in 1D); exterior nodes carry 0.
    """
    F = mask.scatter(phi)
    h = mask.h
    if mask.ndim == 1:
        act = mask.inside[:-1] | mask.inside[1:]
        vals = np.stack([F[:-1][act], F[1:][act]], axis=1)
        return vals, np.abs(vals[:, 1] - vals[:, 0]) / h, h
    if mask.ndim != 2:
        raise ValueError("perimeters are implemented for 1D and 2D masks")
    inside = mask.inside
    act = inside[:-1, :-1] | inside[1:, :-1] | inside[:-1, 1:] | inside[1:, 1:]
    f00, f10 = F[:-1, :-1][act], F[1:, :-1][act]
    f01, f11 = F[:-1, 1:][act], F[1:, 1:][act]
    vals = np.concatenate([np.stack([f00, f10, f11], 1), np.stack([f00, f01, f11], 1)])
    gx = np.concatenate([f10 - f00, f11 - f01]) / h
    gy = np.concatenate([f11 - f10, f01 - f00]) / h
    return vals, np.hypot(gx, gy), 0.5 * h * h


def _coarea_measure(vals, gnorm, size, levels):
    # -d/da |{f > a}| per simplex times |grad f|, summed: the length of {f = a}
    f = np.sort(vals, axis=1)
    out = np.empty(len(levels))
    if f.shape[1] == 2:
        lo, hi = f[:, 0], f[:, 1]
        for i, a in enumerate(levels):
            cut = (lo < a) & (a < hi)
            out[i] = np.sum(gnorm[cut] * size / (hi[cut] - lo[cut]))
        return out
    f0, f1, f2 = f[:, 0], f[:, 1], f[:, 2]
    for i, a in enumerate(levels):
        dens = np.zeros_like(f0)
        s = (f0 < a) & (a <= f1) & (f1 > f0)
        dens[s] = 2 * size * (a - f0[s]) / ((f2[s] - f0[s]) * (f1[s] - f0[s]))
        s = (f1 < a) & (a < f2)
        dens[s] += 2 * size * (f2[s] - a) / ((f2[s] - f0[s]) * (f2[s] - f1[s]))
        out[i] = np.sum(gnorm * dens)
    return out


def level_perimeter(phi, mask: GridMask, table: RearrangementProfile,
                    max_level: float = 0.95) -> tuple[np.ndarray, np.ndarray]:
    """Perimeters ``i(a)`` of the level sets ``{phi = a}`` by the co-area formula.

    ``i(a) = -d/da int_{phi > a} |grad phi|`` is evaluated exactly for the
    piecewise-linear interpolant of ``phi`` (with zero exterior values).
    At ``a = 0`` that level set is the staircase outline of the grid, so
    ``i(0)`` is extrapolated by a quadratic fit over ``a in [0.02, 0.1] max(phi)``.
    Returns ``(a, i)`` for table levels up to ``max_level * max(phi)``.
    """
    phi = np.asarray(phi, dtype=float)
    top = float(phi.max())
    vals, gnorm, size = _simplices(mask, phi)
    a = table.a[table.a <= max_level * top]
    per = _coarea_measure(vals, gnorm, size, a)
    if mask.ndim == 1:
        per[0] = _coarea_measure(vals, gnorm, size, [1e-12 * top])[0]
    else:
        probe = top * np.linspace(0.02, 0.1, 9)
        coef = np.polyfit(probe, _coarea_measure(vals, gnorm, size, probe), 2)
        per[0] = np.polyval(coef, 0.0)
    return a, per
