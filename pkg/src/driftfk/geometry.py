"""Planar (and 1D) domain descriptions, rasterization onto a lattice, measure.

All grids are windows of the global lattice ``h * Z^d``: node ``k`` along an
axis sits at ``k * h``.  Two masks built with the same ``h`` therefore share
node positions, which keeps nested-domain comparisons exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .errors import (
    DomainMeasureError,
    InvalidDimensionError,
    InvalidDomainError,
    ResolutionError,
)

MIN_INTERIOR_NODES = 100


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n, ``pi^(n/2) / Gamma(n/2 + 1)``.

    Gamma at integers and half-integers is built by the recursion
    ``Gamma(x + 1) = x Gamma(x)`` from ``Gamma(1) = 1``, ``Gamma(1/2) = sqrt(pi)``.
    """
    if int(n) != n or n < 1:
        raise InvalidDimensionError(f"dimension must be an integer >= 1, got {n!r}")
    n = int(n)
    if n % 2 == 0:
        x, gamma = 1.0, 1.0
    else:
        x, gamma = 0.5, math.sqrt(math.pi)
    target = n / 2 + 1
    while x < target - 1e-12:
        gamma *= x
        x += 1.0
    return math.pi ** (n / 2) / gamma


def equal_measure_radius(m: float, n: int) -> float:
    """Radius of the ball in R^n whose measure is ``m``."""
    if not m > 0:
        raise DomainMeasureError(f"measure must be positive, got {m!r}")
    return (m / unit_ball_volume(n)) ** (1.0 / n)


# --------------------------------------------------------------------------
# domain descriptions


def _pt(p) -> tuple[float, float]:
    x, y = p
    return (float(x), float(y))


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    ndim = 1
    kind = "interval"

    def __post_init__(self):
        if not self.upper > self.lower:
            raise InvalidDomainError("interval needs lower < upper")

    def contains(self, x):
        return (x > self.lower) & (x < self.upper)

    def area(self) -> float:
        return self.upper - self.lower

    def bbox(self):
        return np.array([self.lower]), np.array([self.upper])

    def to_dict(self) -> dict:
        return {"type": self.kind, "lower": self.lower, "upper": self.upper}


@dataclass(frozen=True)
class Disk:
    radius: float
    center: tuple[float, float] = (0.0, 0.0)

    ndim = 2
    kind = "disk"

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidDomainError("disk radius must be positive")
        object.__setattr__(self, "center", _pt(self.center))

    def contains(self, x, y):
        cx, cy = self.center
        return (x - cx) ** 2 + (y - cy) ** 2 < self.radius**2

    def area(self) -> float:
        return math.pi * self.radius**2

    def bbox(self):
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def to_dict(self) -> dict:
        return {"type": self.kind, "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Rectangle:
    lower: tuple[float, float]
    upper: tuple[float, float]

    ndim = 2
    kind = "rectangle"

    def __post_init__(self):
        object.__setattr__(self, "lower", _pt(self.lower))
        object.__setattr__(self, "upper", _pt(self.upper))
        if not (self.upper[0] > self.lower[0] and self.upper[1] > self.lower[1]):
            raise InvalidDomainError("rectangle corners must satisfy lower < upper")

    def contains(self, x, y):
        (x0, y0), (x1, y1) = self.lower, self.upper
        return (x > x0) & (x < x1) & (y > y0) & (y < y1)

    def area(self) -> float:
        return (self.upper[0] - self.lower[0]) * (self.upper[1] - self.lower[1])

    def bbox(self):
        return np.array(self.lower), np.array(self.upper)

    def to_dict(self) -> dict:
        return {"type": self.kind, "lower": list(self.lower), "upper": list(self.upper)}


@dataclass(frozen=True)
class Ellipse:
    semi_axes: tuple[float, float]
    center: tuple[float, float] = (0.0, 0.0)

    ndim = 2
    kind = "ellipse"

    def __post_init__(self):
        object.__setattr__(self, "semi_axes", _pt(self.semi_axes))
        object.__setattr__(self, "center", _pt(self.center))
        if min(self.semi_axes) <= 0:
            raise InvalidDomainError("ellipse semi-axes must be positive")

    def contains(self, x, y):
        a, b = self.semi_axes
        cx, cy = self.center
        return ((x - cx) / a) ** 2 + ((y - cy) / b) ** 2 < 1.0

    def area(self) -> float:
        return math.pi * self.semi_axes[0] * self.semi_axes[1]

    def bbox(self):
        c = np.array(self.center)
        s = np.array(self.semi_axes)
        return c - s, c + s

    def to_dict(self) -> dict:
        return {"type": self.kind, "center": list(self.center),
                "semi_axes": list(self.semi_axes)}


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


@dataclass(frozen=True)
class Polygon:
    """Simple polygon, vertices listed counterclockwise."""

    vertices: tuple[tuple[float, float], ...]

    ndim = 2
    kind = "polygon"

    def __post_init__(self):
        verts = tuple(_pt(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise InvalidDomainError("polygon needs at least 3 vertices")
        if self._signed_area() <= 0:
            raise InvalidDomainError("polygon must be counterclockwise with positive area")
        k = len(verts)
        edges = [(verts[i], verts[(i + 1) % k]) for i in range(k)]
        for i in range(k):
            for j in range(i + 2, k):
                if i == 0 and j == k - 1:
                    continue
                if _segments_cross(*edges[i], *edges[j]):
                    raise InvalidDomainError("polygon is self-intersecting")

    def _signed_area(self) -> float:
        v = np.asarray(self.vertices)
        x, y = v[:, 0], v[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    def contains(self, x, y):
        # crossing-number test, vectorised over query points
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        v = self.vertices
        k = len(v)
        for i in range(k):
            (xa, ya), (xb, yb) = v[i], v[(i + 1) % k]
            if ya == yb:
                continue
            straddle = (ya > y) != (yb > y)
            xcross = xa + (y - ya) * (xb - xa) / (yb - ya)
            inside ^= straddle & (x < xcross)
        return inside

    def area(self) -> float:
        return self._signed_area()

    def bbox(self):
        v = np.asarray(self.vertices)
        return v.min(axis=0), v.max(axis=0)

    def to_dict(self) -> dict:
        return {"type": self.kind, "vertices": [list(p) for p in self.vertices]}


@dataclass(frozen=True)
class Star:
    """Star-shaped domain ``|x - c| < r(theta)``.

    ``r(theta) = r0 + sum_k cos[k-1] cos(k theta) + sin[k-1] sin(k theta)``.
    """

    r0: float
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()
    center: tuple[float, float] = (0.0, 0.0)

    ndim = 2
    kind = "star"

    def __post_init__(self):
        object.__setattr__(self, "cos", tuple(float(c) for c in self.cos))
        object.__setattr__(self, "sin", tuple(float(s) for s in self.sin))
        object.__setattr__(self, "center", _pt(self.center))
        slack = self.r0 - sum(abs(c) for c in self.cos) - sum(abs(s) for s in self.sin)
        if not slack > 0:
            raise InvalidDomainError("star boundary radius must stay positive")

    def radius(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = np.full(theta.shape, float(self.r0))
        for k, c in enumerate(self.cos, start=1):
            r += c * np.cos(k * theta)
        for k, s in enumerate(self.sin, start=1):
            r += s * np.sin(k * theta)
        return r

    def contains(self, x, y):
        dx = x - self.center[0]
        dy = y - self.center[1]
        return np.hypot(dx, dy) < self.radius(np.arctan2(dy, dx))

    def area(self) -> float:
        squares = sum(c * c for c in self.cos) + sum(s * s for s in self.sin)
        return math.pi * self.r0**2 + 0.5 * math.pi * squares

    def bbox(self):
        rmax = self.r0 + sum(abs(c) for c in self.cos) + sum(abs(s) for s in self.sin)
        c = np.array(self.center)
        return c - rmax, c + rmax

    def to_dict(self) -> dict:
        return {"type": self.kind, "center": list(self.center), "r0": self.r0,
                "cos": list(self.cos), "sin": list(self.sin)}


DomainSpec = Interval | Disk | Rectangle | Ellipse | Polygon | Star

_KINDS = {cls.kind: cls for cls in (Interval, Disk, Rectangle, Ellipse, Polygon, Star)}


def domain_from_dict(d: dict) -> DomainSpec:
    """Build a domain from its JSON form, e.g. ``{"type": "disk", "radius": 1}``."""
    d = dict(d)
    try:
        cls = _KINDS[d.pop("type")]
    except KeyError as exc:
        raise InvalidDomainError(f"unknown or missing domain type in {d!r}") from exc
    if cls is Polygon:
        return Polygon(tuple(tuple(p) for p in d["vertices"]))
    return cls(**d)


# --------------------------------------------------------------------------
# grid masks


@dataclass(frozen=True, eq=False)
class GridMask:
    """Rasterized domain on a window of the lattice ``h * Z^d``.

    Arrays use ``ij`` indexing (axis ``i`` is coordinate ``i``).  ``offset``
    is the lattice index of array element ``(0, ..., 0)``; ``index`` maps an
    array position to its interior-node number, ``-1`` outside.  Interior
    nodes are numbered in C order.
    """

    h: float
    offset: tuple[int, ...]
    inside: np.ndarray
    index: np.ndarray = field(repr=False)

    @property
    def ndim(self) -> int:
        return self.inside.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.inside.shape

    @property
    def origin(self) -> tuple[float, ...]:
        return tuple(k * self.h for k in self.offset)

    @property
    def n_interior(self) -> int:
        return int(self.inside.sum())

    def axes(self) -> list[np.ndarray]:
        """Node coordinates along each axis."""
        return [(o + np.arange(s)) * self.h for o, s in zip(self.offset, self.shape)]

    def coords(self) -> np.ndarray:
        """``(N, ndim)`` coordinates of interior nodes, in node order."""
        sub = np.nonzero(self.inside)
        return np.stack([(o + s) * self.h for o, s in zip(self.offset, sub)], axis=1)

    def scatter(self, values, fill=0.0) -> np.ndarray:
        """Place per-node values into a full grid array, ``fill`` outside."""
        values = np.asarray(values)
        out = np.full(self.shape + values.shape[1:], fill, dtype=values.dtype)
        out[self.inside] = values
        return out

    def neighbor(self, axis: int, step: int) -> np.ndarray:
        """Interior index of each node's neighbour along ``axis``, or -1."""
        shifted = np.roll(self.index, -step, axis=axis)
        return shifted[self.inside]


def mask_from_array(inside: np.ndarray, h: float, offset: Sequence[int]) -> GridMask:
    inside = np.asarray(inside, dtype=bool)
    # one exterior ring is required so every interior node has all neighbours
    for axis in range(inside.ndim):
        if inside.take(0, axis=axis).any() or inside.take(-1, axis=axis).any():
            raise ValueError("mask must be padded by an exterior ring")
    index = np.full(inside.shape, -1, dtype=np.int64)
    index[inside] = np.arange(int(inside.sum()))
    return GridMask(float(h), tuple(int(o) for o in offset), inside, index)


def rasterize(spec: DomainSpec, h: float) -> GridMask:
    """Mark lattice nodes lying strictly inside ``spec``.

    Raises ResolutionError when fewer than 100 nodes are interior.
    """
    if not h > 0:
        raise ValueError("grid spacing must be positive")
    lo, hi = spec.bbox()
    kmin = np.floor(np.asarray(lo) / h).astype(int) - 1
    kmax = np.ceil(np.asarray(hi) / h).astype(int) + 1
    axes = [np.arange(a, b + 1) * h for a, b in zip(kmin, kmax)]
    grids = np.meshgrid(*axes, indexing="ij")
    inside = np.asarray(spec.contains(*grids), dtype=bool)
    count = int(inside.sum())
    if count < MIN_INTERIOR_NODES:
        raise ResolutionError(
            f"only {count} interior nodes at h={h}; need >= {MIN_INTERIOR_NODES}"
        )
    return mask_from_array(inside, h, kmin)


def measure(mask: GridMask) -> float:
    """Node-count measure ``N * h^d``."""
    return mask.n_interior * mask.h**mask.ndim


def is_connected(mask: GridMask) -> bool:
    """True when the interior nodes form one axis-neighbour connected set."""
    structure = ndimage.generate_binary_structure(mask.ndim, 1)
    _, count = ndimage.label(mask.inside, structure=structure)
    return count == 1
