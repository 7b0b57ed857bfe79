"""Verification campaigns: random domains, inequality checks, sweeps, reports.

Every campaign returns a :class:`Report` of per-row results with a pass flag
and a summary recomputed from those rows.  Reports written to disk contain
no timings, so a fixed configuration (including the seed) reproduces them
byte for byte; wall-clock time lives on ``Report.runtime``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from .eigensolve import principal_eigenpair
from .errors import DriftFKError, InvalidDomainError
from .geometry import (
    Disk,
    DomainSpec,
    Ellipse,
    Rectangle,
    Star,
    equal_measure_radius,
    rasterize,
)
from .operator import DriftSpec, assemble
from .optimal_drift import lambda_max, lambda_min
from .radial import fk_bound, radial_eigen
from .rearrange import check_bound, level_table, symmetrize

FK_TOLERANCE = 0.03
CONTROL_TOLERANCE = 0.03
SHIFT_TOLERANCE = 0.03
REARRANGE_TOLERANCE = 0.02
DRIFT_KINDS = ("constant", "radial", "rotational", "random")


@dataclass
class Report:
    """Rows of one campaign plus a summary derived from them.

    ``columns`` fixes the CSV column order; every row has a boolean
    ``pass`` entry and may have a numeric ``margin``.
    """

    command: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def summary(self) -> dict:
        n = len(self.rows)
        passed = sum(bool(r["pass"]) for r in self.rows)
        margins = [r["margin"] for r in self.rows
                   if isinstance(r.get("margin"), float) and math.isfinite(r["margin"])]
        return {
            "rows": n,
            "passed": passed,
            "pass_rate": passed / n if n else 0.0,
            "min_margin": min(margins) if margins else None,
            "h": self.config.get("h"),
            "all_pass": n > 0 and passed == n,
        }

    @property
    def ok(self) -> bool:
        return self.summary["all_pass"]

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "columns": self.columns,
            "rows": [{c: r.get(c) for c in self.columns} for r in self.rows],
            "summary": self.summary,
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), indent=2, sort_keys=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def write(self, path, fmt: str = "csv") -> None:
        text = self.to_json() if fmt == "json" else self.to_csv()
        write_atomic(path, text)


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def h_budget(lam: float, h: float) -> float:
    """Discretisation allowance for inequality checks: ``h * lam``."""
    return h * abs(lam)


def domain_center(spec: DomainSpec) -> tuple[float, ...]:
    center = getattr(spec, "center", None)
    if center is not None:
        return tuple(center)
    lo, hi = spec.bbox()
    return tuple(0.5 * (np.asarray(lo) + np.asarray(hi)))


# --------------------------------------------------------------------------
# random domains


def random_domain(seed: int, mode_count: int = 4, amplitude: float = 0.15,
                  m: float = math.pi) -> Star:
    """Seeded star domain of measure ``m`` centred at the origin.

    Mode ``k`` gets the coefficient pair ``A_k (cos psi_k, sin psi_k)`` with
    ``A_k`` uniform in ``[0, amplitude]``, so the boundary radius stays within
    ``sum A_k`` of ``r0``.  ``r0`` is then chosen so the polar area
    ``pi r0^2 + pi/2 sum A_k^2`` equals ``m``.  If the result is not a valid
    star the draw is repeated with half the amplitude.
    """
    if mode_count < 0:
        raise ValueError("mode_count must be >= 0")
    if not m > 0:
        raise ValueError("measure must be positive")
    amp = float(amplitude)
    for _ in range(60):
        rng = np.random.default_rng(seed)
        size = amp * rng.uniform(0.0, 1.0, mode_count)
        angle = rng.uniform(0.0, 2 * math.pi, mode_count)
        cos = tuple(float(c) for c in size * np.cos(angle))
        sin = tuple(float(s) for s in size * np.sin(angle))
        rest = m - 0.5 * math.pi * float(np.sum(size**2))
        if rest > 0:
            r0 = math.sqrt(rest / math.pi)
            if amp * mode_count < r0:
                try:
                    return Star(r0, cos, sin)
                except InvalidDomainError:
                    pass
        amp *= 0.5
    raise InvalidDomainError("could not generate a valid star domain")


def _random_drift(rng: np.random.Generator, tau: float, center) -> DriftSpec:
    kind = DRIFT_KINDS[int(rng.integers(len(DRIFT_KINDS)))]
    if kind == "constant":
        ang = rng.uniform(0.0, 2 * math.pi)
        return DriftSpec("constant", tau, direction=(math.cos(ang), math.sin(ang)))
    if kind == "radial":
        sign = int(rng.choice([-1, 1]))
        return DriftSpec("radial", tau, center=center, sign=sign)
    if kind == "rotational":
        return DriftSpec("rotational", tau, center=center)
    return DriftSpec("random", tau, seed=int(rng.integers(2**31)))


def _lambda(spec: DomainSpec, drift: DriftSpec, h: float, tol: float = 1e-8) -> float:
    mask = rasterize(spec, h)
    return principal_eigenpair(assemble(mask, drift.sample(mask)), tol=tol).lam


# --------------------------------------------------------------------------
# campaigns


FK_COLUMNS = ["trial", "domain", "drift", "tau", "h", "lambda", "reference",
              "margin", "tolerance", "refined", "pass", "error"]


def verify_fk(trials: int, tau: float, m: float = math.pi, h: float = 1 / 128,
              seed: int = 0, mode_count: int = 4, amplitude: float = 0.15,
              control: bool = True) -> Report:
    """Check ``lambda_1(Omega, v) >= F_2(|Omega|, tau)`` on random domains and drifts.

    Each trial draws a star domain of measure ``m`` and a drift of amplitude
    ``tau`` (constant, radial, rotational or i.i.d. random directions).
    ``margin = lambda_1 - F_2``; a trial passes when
    ``margin >= -0.03 F_2``.  A negative margin triggers one re-run at
    ``h / 2`` and the refined value decides.  With ``control`` a final row
    solves the equality configuration (disk with outward drift), which
    passes when ``|margin| <= 0.03 F_2``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if tau < 0:
        raise ValueError("tau must be >= 0")
    t0 = time.perf_counter()
    ref = fk_bound(m, tau, 2)
    tol = FK_TOLERANCE * ref
    report = Report("verify-fk", FK_COLUMNS, config={
        "trials": trials, "tau": tau, "m": m, "h": h, "seed": seed,
        "mode_count": mode_count, "amplitude": amplitude})
    children = np.random.SeedSequence(seed).spawn(trials)
    for k, child in enumerate(children):
        rng = np.random.default_rng(child)
        spec = random_domain(int(rng.integers(2**31)), mode_count, amplitude, m)
        drift = _random_drift(rng, tau, spec.center)
        row = {"trial": k, "domain": json.dumps(spec.to_dict()), "drift": drift.kind,
               "tau": tau, "h": h, "reference": ref, "tolerance": tol, "refined": False}
        try:
            lam = _lambda(spec, drift, h)
            if lam - ref < 0:
                lam = _lambda(spec, drift, h / 2)
                row["refined"] = True
                row["h"] = h / 2
            row.update({"lambda": lam, "margin": lam - ref, "pass": lam - ref >= -tol})
        except DriftFKError as exc:
            row.update({"lambda": None, "margin": None, "pass": False, "error": str(exc)})
        report.rows.append(row)
    if control:
        disk = Disk(equal_measure_radius(m, 2))
        drift = DriftSpec("radial", tau, sign=1)
        lam = _lambda(disk, drift, h)
        report.rows.append({
            "trial": "control", "domain": json.dumps(disk.to_dict()), "drift": "radial",
            "tau": tau, "h": h, "lambda": lam, "reference": ref, "margin": lam - ref,
            "tolerance": CONTROL_TOLERANCE * ref, "refined": False,
            "pass": abs(lam - ref) <= CONTROL_TOLERANCE * ref,
        })
    report.runtime = time.perf_counter() - t0
    return report


SHIFT_COLUMNS = ["tau", "expected", "h", "shift", "rel_error", "h_fine", "shift_fine",
                 "rel_error_fine", "margin", "pass"]


def verify_shift(spec: DomainSpec, tau_list, h: float = 1 / 128,
                 tol: float = 1e-9) -> Report:
    """Check ``lambda_1(Omega, tau e_1) - lambda_1(Omega, 0) = tau^2 / 4``.

    Each row is solved at ``h`` and ``h / 2``.  A row passes when the
    relative error at ``h / 2`` is at most 3% and is no more than half the
    error at ``h`` (errors below ``1e-6`` count as converged).
    ``margin`` is ``0.03 - rel_error_fine``.
    """
    t0 = time.perf_counter()
    report = Report("verify-shift", SHIFT_COLUMNS, config={
        "domain": spec.to_dict(), "tau_list": list(tau_list), "h": h})
    d = spec.ndim
    e1 = (1.0,) + (0.0,) * (d - 1)
    base = {}
    for hh in (h, h / 2):
        base[hh] = _lambda(spec, DriftSpec("zero", 0.0, direction=e1), hh, tol)
    for tau in tau_list:
        tau = float(tau)
        expected = tau * tau / 4
        shifts, errs = [], []
        for hh in (h, h / 2):
            if tau == 0:
                shift = 0.0
            else:
                drift = DriftSpec("constant", tau, direction=e1, center=(0.0,) * d)
                shift = _lambda(spec, drift, hh, tol) - base[hh]
            shifts.append(shift)
            errs.append(abs(shift - expected) / expected if expected > 0 else abs(shift))
        halves = errs[1] <= 0.5 * errs[0] or errs[1] <= 1e-6
        report.rows.append({
            "tau": tau, "expected": expected, "h": h, "shift": shifts[0],
            "rel_error": errs[0], "h_fine": h / 2, "shift_fine": shifts[1],
            "rel_error_fine": errs[1], "margin": SHIFT_TOLERANCE - errs[1],
            "pass": errs[1] <= SHIFT_TOLERANCE and halves,
        })
    report.runtime = time.perf_counter() - t0
    return report


DIVFREE_COLUMNS = ["tau", "h", "lambda_zero", "lambda_drift", "difference", "budget",
                   "margin", "pass"]


def verify_divfree(spec: DomainSpec, tau: float, h: float = 1 / 128,
                   tol: float = 1e-9) -> Report:
    """Check that a solid-rotation drift does not lower ``lambda_1``.

    The rotation is about the domain centre, scaled to sup-norm ``tau``.
    Passes when ``lambda_1(v) >= lambda_1(0) - 3 h lambda_1(0)``.
    """
    t0 = time.perf_counter()
    report = Report("verify-divfree", DIVFREE_COLUMNS, config={
        "domain": spec.to_dict(), "tau": tau, "h": h})
    mask = rasterize(spec, h)
    lam0 = principal_eigenpair(assemble(mask), tol=tol).lam
    drift = DriftSpec("rotational", tau, center=domain_center(spec))
    lam = principal_eigenpair(assemble(mask, drift.sample(mask)), tol=tol).lam
    budget = 3 * h_budget(lam0, h)
    report.rows.append({
        "tau": float(tau), "h": h, "lambda_zero": lam0, "lambda_drift": lam,
        "difference": lam - lam0, "budget": budget, "margin": lam - lam0 + budget,
        "pass": lam - lam0 >= -budget,
    })
    report.runtime = time.perf_counter() - t0
    return report


SWEEP_COLUMNS = ["tau", "h", "lambda_min", "lambda_max", "lambda_zero", "radial_min",
                 "radial_max", "iterations_min", "iterations_max", "pass"]


def sweep_tau(spec: DomainSpec, tau_list, h: float = 1 / 128, tol: float = 1e-8) -> Report:
    """Extremal eigenvalues over a list of drift amplitudes.

    A row passes when ``lambda_min <= lambda_zero <= lambda_max`` and both
    columns move strictly in the right direction from the previous row
    (``tau_list`` must increase).  On a disk the radial shooting values for
    outward and inward drift are added as reference columns.
    """
    taus = [float(t) for t in tau_list]
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("tau values must be strictly increasing")
    t0 = time.perf_counter()
    report = Report("sweep-tau", SWEEP_COLUMNS, config={
        "domain": spec.to_dict(), "tau_list": taus, "h": h})
    mask = rasterize(spec, h)
    lam0 = principal_eigenpair(assemble(mask), tol=tol * 1e-2).lam
    prev = None
    for tau in taus:
        lo = lambda_min(mask, tau, tol=tol)
        hi = lambda_max(mask, tau, tol=tol)
        slack = 10 * tol * lam0
        ok = lo.lam <= lam0 + slack and hi.lam >= lam0 - slack
        if prev is not None:
            ok = ok and lo.lam < prev[0] and hi.lam > prev[1]
        row = {"tau": tau, "h": h, "lambda_min": lo.lam, "lambda_max": hi.lam,
               "lambda_zero": lam0, "radial_min": None, "radial_max": None,
               "iterations_min": lo.iterations, "iterations_max": hi.iterations, "pass": ok}
        if isinstance(spec, Disk):
            row["radial_min"] = radial_eigen(2, spec.radius, tau, +1).lam
            row["radial_max"] = radial_eigen(2, spec.radius, tau, -1).lam
        report.rows.append(row)
        prev = (lo.lam, hi.lam)
    report.runtime = time.perf_counter() - t0
    return report


SLAB_COLUMNS = ["epsilon", "tau", "m", "h", "lambda_min", "bound", "budget", "margin",
                "pass"]


def slab_lower_bound(epsilon: float, tau: float) -> float:
    """``pi^2 / (9 eps^2) - 2 tau pi / (3 sqrt(3) eps)``."""
    return math.pi**2 / (9 * epsilon**2) - 2 * tau * math.pi / (3 * math.sqrt(3) * epsilon)


def slab(epsilon: float, m: float = 1.0) -> Rectangle:
    """Rectangle ``(eps, 2 eps) x (0, m / eps)`` of measure ``m``."""
    return Rectangle((epsilon, 0.0), (2 * epsilon, m / epsilon))


def slab_bound(epsilon_list, tau: float, m: float = 1.0, cells: int = 16,
               tol: float = 1e-8) -> Report:
    """Lower bound for thin slabs of fixed measure.

    Each slab of width ``eps`` is gridded with ``h = eps / cells``.  Passes
    when ``lambda_min >= bound - h lambda_min``; the bound grows like
    ``eps^-2``, so the minimal eigenvalue is unbounded over domains of
    measure ``m``.
    """
    t0 = time.perf_counter()
    report = Report("slab-bound", SLAB_COLUMNS, config={
        "epsilon_list": [float(e) for e in epsilon_list], "tau": tau, "m": m,
        "cells": cells})
    for eps in epsilon_list:
        eps = float(eps)
        h = eps / cells
        mask = rasterize(slab(eps, m), h)
        lam = lambda_min(mask, tau, tol=tol).lam
        bound = slab_lower_bound(eps, tau)
        budget = h_budget(lam, h)
        report.rows.append({
            "epsilon": eps, "tau": float(tau), "m": m, "h": h, "lambda_min": lam,
            "bound": bound, "budget": budget, "margin": lam - bound + budget,
            "pass": lam >= bound - budget,
        })
    report.runtime = time.perf_counter() - t0
    return report


REARRANGE_COLUMNS = ["tau", "h", "levels", "lambda_min", "margin", "min_slope", "pass"]


def rearrange_report(spec: DomainSpec, tau: float, h: float = 1 / 128, L: int = 128,
                     profile_path=None) -> tuple[Report, object]:
    """Symmetrize the minimal-drift eigenfunction and check ``u >= rho^-1``.

    Passes when the bound margin is at least ``-0.02``.  Returns the report
    and the filled :class:`~driftfk.rearrange.RearrangementProfile`; with
    ``profile_path`` the profile is also written as CSV.
    """
    t0 = time.perf_counter()
    mask = rasterize(spec, h)
    res = lambda_min(mask, tau)
    table = symmetrize(res.phi, mask, level_table(res.phi, mask, L))
    stats = check_bound(table)
    report = Report("rearrange", REARRANGE_COLUMNS, config={
        "domain": spec.to_dict(), "tau": tau, "h": h, "levels": L})
    report.rows.append({
        "tau": float(tau), "h": h, "levels": L, "lambda_min": res.lam,
        "margin": stats["margin"], "min_slope": stats["min_slope"],
        "pass": stats["margin"] >= -REARRANGE_TOLERANCE,
    })
    if profile_path is not None:
        write_atomic(profile_path, table.to_csv())
    report.runtime = time.perf_counter() - t0
    return report, table


PRESETS = {
    "disk": Disk(1.0),
    "square": Rectangle((0.0, 0.0), (1.0, 1.0)),
    "ellipse": Ellipse((math.sqrt(2.0), 1 / math.sqrt(2.0))),
}
