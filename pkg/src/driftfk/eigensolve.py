"""Principal (Perron) eigenpair of an M-matrix with a Collatz-Wielandt certificate.

For an irreducible M-matrix ``A`` the inverse is entrywise positive, so
inverse iteration from a positive vector stays positive and converges to the
principal eigenvector.  For every positive ``phi`` the principal eigenvalue
lies in ``[min (A phi)/phi, max (A phi)/phi]``; the iteration stops once that
bracket is narrower than ``tol * lambda`` (or than its round-off floor).

The lower end of the bracket never exceeds the principal eigenvalue, so
``A - lo I`` is still a nonsingular M-matrix.  When convergence is slow the
solver refactors with that shift, which keeps iterates positive while
speeding up inverse iteration on nearly degenerate spectra.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .errors import IllConditionedError, NonConvergenceError, PositivityError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EigenResult:
    """Principal eigenpair.

    ``phi`` is strictly positive with max 1, ``bracket`` is the
    Collatz-Wielandt interval of ``phi`` and ``residual`` is
    ``max |A phi - lam phi|``.
    """

    lam: float
    phi: np.ndarray
    residual: float
    bracket: tuple[float, float]
    iterations: int

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "residual": self.residual,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
        }


def collatz_bracket(A, phi) -> tuple[float, float]:
    """Return ``(min, max)`` of ``(A phi)_i / phi_i`` over all nodes."""
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0) or not np.all(np.isfinite(phi)):
        raise PositivityError("Collatz-Wielandt bracket needs a strictly positive vector")
    ratio = (A @ phi) / phi
    return float(ratio.min()), float(ratio.max())


class _Factorized:
    """Sparse LU of ``A`` with iterative refinement to a residual target."""

    def __init__(self, A: sp.csr_matrix, shift: float = 0.0):
        self.shift = shift
        self.A = A - shift * sp.identity(A.shape[0], format="csr") if shift else A
        # the stencil pattern is structurally symmetric, and M-matrices need
        # no pivoting: diagonal pivots keep the triangular solves sign-exact
        self.lu = sla.splu(self.A.tocsc(), permc_spec="MMD_AT_PLUS_A",
                           diag_pivot_thresh=0.0)

    def solve(self, b: np.ndarray, rtol: float) -> np.ndarray:
        x = self.lu.solve(b)
        bnorm = np.abs(b).max()
        for _ in range(3):
            r = b - self.A @ x
            if np.abs(r).max() <= rtol * bnorm:
                break
            x += self.lu.solve(r)
        return x


def _arnoldi_vector(fac: _Factorized, x0: np.ndarray, tol: float) -> np.ndarray:
    """Shift-invert Arnoldi about 0 for the smallest-magnitude eigenvector."""
    n = x0.size
    op = sla.LinearOperator((n, n), matvec=lambda b: fac.solve(b, 1e-14), dtype=float)
    ncv = min(n - 1, 40)
    _, vecs = sla.eigs(fac.A, k=1, sigma=0.0, OPinv=op, v0=x0, ncv=ncv,
                       tol=tol, which="LM")
    v = np.real(vecs[:, 0])
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    # clip round-off negatives; the next inverse step restores positivity
    return np.abs(v) / np.abs(v).max()


MAX_SHIFTS = 8


def principal_eigenpair(A, tol: float = 1e-8, max_iter: int = 500, x0=None,
                        accelerate_after: int = 40) -> EigenResult:
    """Principal eigenpair of an irreducible M-matrix by inverse iteration.

    Parameters
    ----------
    A : sparse matrix
        M-matrix (positive diagonal, non-positive off-diagonals, row sums >= 0).
    tol : float
        Stop when the Collatz-Wielandt bracket width is at most ``tol * lam``,
        or at most ``16 eps ||A||_inf`` when that round-off floor is larger.
    max_iter : int
        Inverse-iteration budget.
    x0 : array, optional
        Positive start vector; all-ones by default.
    accelerate_after : int
        If still unconverged after this many steps (tiny spectral gap), the
        iterate is replaced once by a shift-invert Arnoldi eigenvector and
        inverse iteration resumes from it.

    Returns
    -------
    EigenResult
        ``lam`` is the median of ``(A phi)/phi``.

    Raises
    ------
    NonConvergenceError
        Budget exhausted; carries the last bracket.
    IllConditionedError
        ``||A^-1||_inf`` is so large that ``lam`` is below round-off (for
        example a strong outward drift, whose exit time is exponential).
    PositivityError
        An iterate lost positivity, which signals a non-M-matrix input.
    """
    A = sp.csr_matrix(A, dtype=float)
    n = A.shape[0]
    x = np.ones(n) if x0 is None else np.abs(np.asarray(x0, dtype=float))
    if not np.any(x > 0):
        raise PositivityError("start vector must have a positive entry")
    x = x / x.max()
    fac = _Factorized(A)
    floor = 16 * np.finfo(float).eps * float(abs(A).sum(axis=1).max())
    # for an M-matrix ||A^-1||_inf = max(A^-1 1) >= 1 / lam
    exit_time = float(np.abs(fac.solve(np.ones(n), 1e-14)).max())
    if exit_time * floor > 1e-2:
        raise IllConditionedError(
            f"||A^-1|| ~ {exit_time:.3g} exceeds the round-off limit; "
            "the principal eigenvalue is not resolvable in double precision"
        )
    bracket = (np.nan, np.nan)
    accelerated = False
    shifts = 0
    width_prev = np.inf
    for it in range(1, max_iter + 1):
        y = fac.solve(x, tol / 10)
        top = y.max()
        if not top > 0:
            raise PositivityError("inverse iterate has no positive entry")
        y = y / top
        if np.any(y <= 0):
            raise PositivityError(
                f"non-positive eigenvector entry at iteration {it}; operator is not an M-matrix"
            )
        ratio = (A @ y) / y
        lo, hi = float(ratio.min()), float(ratio.max())
        lam = float(np.median(ratio))
        bracket = (lo, hi)
        width = hi - lo
        if width <= max(tol * abs(lam), floor):
            residual = float(np.abs(A @ y - lam * y).max())
            return EigenResult(lam, y, residual, bracket, it)
        x = y
        sigma = lo - width
        slow = width > 0.5 * width_prev and width < 0.5 * abs(lam)
        width_prev = width
        if slow and shifts < MAX_SHIFTS and lam - sigma < 0.5 * (lam - fac.shift):
            shifts += 1
            log.debug("shifting inverse iteration to %.10g", sigma)
            fac = _Factorized(A, sigma)
            continue
        if it == accelerate_after and not accelerated:
            accelerated = True
            log.debug("slow inverse iteration (bracket %s); switching to Arnoldi", bracket)
            x = _arnoldi_vector(fac, x, tol * 1e-2)
    raise NonConvergenceError(
        f"inverse iteration did not converge in {max_iter} steps; bracket {bracket}",
        bracket=bracket,
    )
