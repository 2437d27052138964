"""Convex set representations and a lazy support-function calculus.

Concrete sets (hyperrectangles, zonotopes) answer support queries in closed
form; composite operations (linear map, Minkowski sum, convex hull,
intersection, Cartesian product) are kept as lazy expression nodes that
evaluate support functions recursively.  Exact closed-form combinations
(e.g. the Minkowski sum of two zonotopes) are materialized eagerly since no
precision is lost by doing so.

All sets are immutable: arrays are copied on construction and marked
read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, EmptySetError


def _as_vector(value, name: str = "vector") -> np.ndarray:
    vec = np.array(value, dtype=float)
    if vec.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {vec.shape}")
    vec.setflags(write=False)
    return vec


def _as_matrix(value, name: str = "matrix") -> np.ndarray:
    mat = np.array(value, dtype=float)
    if mat.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {mat.shape}")
    mat.setflags(write=False)
    return mat


def _check_direction(set_: "ConvexSet", direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    if d.ndim != 1 or d.shape[0] != set_.dim:
        raise DimensionError(
            f"direction of length {d.shape} incompatible with set of dimension {set_.dim}"
        )
    return d


class ConvexSet:
    """A compact convex set queried through its support function."""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def support(self, direction) -> float:
        """Maximum of <direction, x> over the set (upper bound for lazy nodes)."""
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Interval:
    """A closed scalar interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("interval bounds must be finite")
        if self.lo > self.hi:
            raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else None

    def scale(self, factor: float) -> "Interval":
        a, b = self.lo * factor, self.hi * factor
        return Interval(min(a, b), max(a, b))

    def to_box(self) -> "Hyperrectangle":
        return Hyperrectangle([self.midpoint], [0.5 * self.width])


@dataclass(frozen=True, eq=False)
class Hyperrectangle(ConvexSet):
    """Axis-aligned box <center, radius> with nonnegative per-axis radii."""

    center: np.ndarray
    radius: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vector(self.center, "center"))
        object.__setattr__(self, "radius", _as_vector(self.radius, "radius"))
        if self.center.shape != self.radius.shape:
            raise DimensionError("center and radius must have equal length")
        if np.any(self.radius < 0.0):
            raise ValueError("box radius must be nonnegative")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def lo(self) -> np.ndarray:
        return self.center - self.radius

    @property
    def hi(self) -> np.ndarray:
        return self.center + self.radius

    def support(self, direction) -> float:
        d = _check_direction(self, direction)
        return float(d @ self.center + np.abs(d) @ self.radius)

    def to_zonotope(self) -> "Zonotope":
        """Lossless conversion: one axis-aligned generator per nonzero radius."""
        keep = self.radius > 0.0
        gens = np.zeros((self.dim, int(keep.sum())))
        gens[keep, np.arange(int(keep.sum()))] = self.radius[keep]
        return Zonotope(self.center, gens)


@dataclass(frozen=True, eq=False)
class Zonotope(ConvexSet):
    """Zonotope <center, generators>: {c + G xi : xi in [-1, 1]^p}.

    A singleton is represented by an empty generator matrix (p = 0).
    """

    center: np.ndarray
    generators: np.ndarray

    def __post_init__(self):
        center = _as_vector(self.center, "center")
        gens = np.array(self.generators, dtype=float)
        if gens.ndim != 2:
            raise DimensionError(f"generators must be an (n, p) matrix, got {gens.shape}")
        if gens.shape[0] != center.shape[0]:
            raise DimensionError(
                f"generators have {gens.shape[0]} rows for a center of length {center.shape[0]}"
            )
        gens.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "generators", gens)

    @classmethod
    def singleton(cls, point) -> "Zonotope":
        point = np.asarray(point, dtype=float)
        return cls(point, np.zeros((point.shape[0], 0)))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def order(self) -> int:
        return self.generators.shape[1]

    def support(self, direction) -> float:
        d = _check_direction(self, direction)
        return float(d @ self.center + np.abs(self.generators.T @ d).sum())


@dataclass(frozen=True, eq=False)
class LinearMap(ConvexSet):
    """Lazy image M @ X; support(d) = support_X(M^T d)."""

    matrix: np.ndarray
    child: ConvexSet

    def __post_init__(self):
        mat = _as_matrix(self.matrix)
        if mat.shape[1] != self.child.dim:
            raise DimensionError(
                f"matrix with {mat.shape[1]} columns cannot map a set of dimension {self.child.dim}"
            )
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def support(self, direction) -> float:
        d = _check_direction(self, direction)
        return self.child.support(self.matrix.T @ d)


@dataclass(frozen=True, eq=False)
class MinkowskiSum(ConvexSet):
    """Lazy Minkowski sum; support is the sum of the operand supports."""

    first: ConvexSet
    second: ConvexSet

    def __post_init__(self):
        if self.first.dim != self.second.dim:
            raise DimensionError("Minkowski sum operands must share a dimension")

    @property
    def dim(self) -> int:
        return self.first.dim

    def support(self, direction) -> float:
        d = _check_direction(self, direction)
        return self.first.support(d) + self.second.support(d)


@dataclass(frozen=True, eq=False)
class ConvexHull(ConvexSet):
    """Lazy convex hull of two sets; support is the max of the operand supports."""

    first: ConvexSet
    second: ConvexSet

    def __post_init__(self):
        if self.first.dim != self.second.dim:
            raise DimensionError("convex hull operands must share a dimension")

    @property
    def dim(self) -> int:
        return self.first.dim

    def support(self, direction) -> float:
        d = _check_direction(self, direction)
        return max(self.first.support(d), self.second.support(d))


@dataclass(frozen=True, eq=False)
class Intersection(ConvexSet):
    """Lazy intersection evaluated with the min rule.

    min(support_A(d), support_B(d)) is an upper bound on the true support of
    A & B (exact only in special cases), which keeps every downstream bound
    sound without solving an optimization problem per query.
    """

    first: ConvexSet
    second: ConvexSet

    def __post_init__(self):
        if self.first.dim != self.second.dim:
            raise DimensionError("intersection operands must share a dimension")

    @property
    def dim(self) -> int:
        return self.first.dim

    def support(self, direction) -> float:
        d = _check_direction(self, direction)
        return min(self.first.support(d), self.second.support(d))


@dataclass(frozen=True, eq=False)
class CartesianProduct(ConvexSet):
    """Lazy Cartesian product; a direction is split blockwise over the parts."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("Cartesian product needs at least one part")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self) -> int:
        return sum(p.dim for p in self.parts)

    def support(self, direction) -> float:
        d = _check_direction(self, direction)
        total, offset = 0.0, 0
        for part in self.parts:
            total += part.support(d[offset : offset + part.dim])
            offset += part.dim
        return total


def support(set_: ConvexSet, direction) -> float:
    """Support function of any concrete set or lazy expression."""
    d = _check_direction(set_, direction)
    if not np.all(np.isfinite(d)):
        raise ValueError("direction must be finite")
    return set_.support(d)


def support_batch(set_: ConvexSet, directions) -> np.ndarray:
    """Support values for a batch of directions (one per row), vectorized.

    Equivalent to ``[support(set_, d) for d in directions]`` but walks a lazy
    expression once with matrix arithmetic instead of once per direction.
    """
    dirs = np.asarray(directions, dtype=float)
    if dirs.ndim != 2 or dirs.shape[1] != set_.dim:
        raise DimensionError(
            f"direction batch of shape {dirs.shape} incompatible with set of dimension {set_.dim}"
        )
    if isinstance(set_, Hyperrectangle):
        return dirs @ set_.center + np.abs(dirs) @ set_.radius
    if isinstance(set_, Zonotope):
        return dirs @ set_.center + np.abs(dirs @ set_.generators).sum(axis=1)
    if isinstance(set_, LinearMap):
        return support_batch(set_.child, dirs @ set_.matrix)
    if isinstance(set_, MinkowskiSum):
        return support_batch(set_.first, dirs) + support_batch(set_.second, dirs)
    if isinstance(set_, ConvexHull):
        return np.maximum(support_batch(set_.first, dirs), support_batch(set_.second, dirs))
    if isinstance(set_, Intersection):
        return np.minimum(support_batch(set_.first, dirs), support_batch(set_.second, dirs))
    if isinstance(set_, CartesianProduct):
        total, offset = np.zeros(dirs.shape[0]), 0
        for part in set_.parts:
            total += support_batch(part, dirs[:, offset : offset + part.dim])
            offset += part.dim
        return total
    return np.array([set_.support(d) for d in dirs])


def linear_map(matrix, set_: ConvexSet) -> ConvexSet:
    """Image of a set under a linear map, materialized when exact and cheap."""
    mat = np.asarray(matrix, dtype=float)
    if isinstance(set_, Hyperrectangle):
        set_ = set_.to_zonotope()
    if isinstance(set_, Zonotope):
        gens = mat @ set_.generators
        nonzero = np.any(gens != 0.0, axis=0)
        return Zonotope(mat @ set_.center, gens[:, nonzero])
    return LinearMap(mat, set_)


def minkowski_sum(first: ConvexSet, second: ConvexSet) -> ConvexSet:
    """Minkowski sum, materialized exactly for boxes and zonotopes."""
    if isinstance(first, Hyperrectangle) and isinstance(second, Hyperrectangle):
        return Hyperrectangle(first.center + second.center, first.radius + second.radius)
    if isinstance(first, (Hyperrectangle, Zonotope)) and isinstance(second, (Hyperrectangle, Zonotope)):
        za = first.to_zonotope() if isinstance(first, Hyperrectangle) else first
        zb = second.to_zonotope() if isinstance(second, Hyperrectangle) else second
        return Zonotope(za.center + zb.center, np.hstack([za.generators, zb.generators]))
    return MinkowskiSum(first, second)


def convex_hull(first: ConvexSet, second: ConvexSet) -> ConvexSet:
    return ConvexHull(first, second)


def intersect(first: ConvexSet, second: ConvexSet) -> ConvexSet:
    return Intersection(first, second)


def cartesian_product(parts: Sequence) -> ConvexSet:
    """Cartesian product of sets (Interval parts are promoted to 1-D boxes).

    Products of boxes collapse to a box, products of zonotopes/boxes to a
    block-diagonal zonotope; anything else stays a lazy node.  A single part
    is returned unchanged.
    """
    normalized = []
    for part in parts:
        if isinstance(part, Interval):
            part = part.to_box()
        if not isinstance(part, ConvexSet):
            raise TypeError(f"cannot take a Cartesian product with {type(part).__name__}")
        normalized.append(part)
    if not normalized:
        raise ValueError("Cartesian product needs at least one part")
    if len(normalized) == 1:
        return normalized[0]
    if all(isinstance(p, Hyperrectangle) for p in normalized):
        return Hyperrectangle(
            np.concatenate([p.center for p in normalized]),
            np.concatenate([p.radius for p in normalized]),
        )
    if all(isinstance(p, (Hyperrectangle, Zonotope)) for p in normalized):
        zonos = [p.to_zonotope() if isinstance(p, Hyperrectangle) else p for p in normalized]
        total_dim = sum(z.dim for z in zonos)
        total_order = sum(z.order for z in zonos)
        gens = np.zeros((total_dim, total_order))
        row, col = 0, 0
        for z in zonos:
            gens[row : row + z.dim, col : col + z.order] = z.generators
            row += z.dim
            col += z.order
        return Zonotope(np.concatenate([z.center for z in zonos]), gens)
    return CartesianProduct(tuple(normalized))


def box_approximation(set_: ConvexSet) -> Hyperrectangle:
    """Tightest axis-aligned box containing the set (per-axis support queries).

    Raises EmptySetError when upper and lower bounds cross, which is how an
    empty lazy intersection surfaces.
    """
    if isinstance(set_, Hyperrectangle):
        return set_
    if isinstance(set_, Zonotope):
        return Hyperrectangle(set_.center, np.abs(set_.generators).sum(axis=1))
    if isinstance(set_, CartesianProduct):
        boxes = [box_approximation(p) for p in set_.parts]
        return Hyperrectangle(
            np.concatenate([b.center for b in boxes]),
            np.concatenate([b.radius for b in boxes]),
        )
    n = set_.dim
    eye = np.eye(n)
    values = support_batch(set_, np.vstack([eye, -eye]))
    hi, lo = values[:n], -values[n:]
    radius = 0.5 * (hi - lo)
    if np.any(radius < 0.0):
        worst = int(np.argmin(radius))
        raise EmptySetError(
            f"empty set detected: upper bound {hi[worst]} below lower bound {lo[worst]} "
            f"in component {worst}"
        )
    return Hyperrectangle(0.5 * (hi + lo), radius)


def symmetric_interval_hull(set_: ConvexSet) -> Hyperrectangle:
    """Smallest origin-centered box containing the set."""
    if isinstance(set_, Hyperrectangle):
        return Hyperrectangle(np.zeros(set_.dim), np.abs(set_.center) + set_.radius)
    if isinstance(set_, Zonotope):
        return Hyperrectangle(
            np.zeros(set_.dim),
            np.abs(set_.center) + np.abs(set_.generators).sum(axis=1),
        )
    n = set_.dim
    eye = np.eye(n)
    values = support_batch(set_, np.vstack([eye, -eye]))
    hi, lo = values[:n], -values[n:]
    return Hyperrectangle(np.zeros(n), np.maximum(np.abs(hi), np.abs(lo)))
