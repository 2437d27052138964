"""Flowpipe computation by wrapping-free set propagation.

All three schemes advance one first-step enclosure Omega0 through the
recurrence X_{k+1} = Phi X_k without ever forming the matrix power Phi^k
on a set: the zonotope scheme maps center and generators, the box scheme
is the zonotope scheme with diagonal generators read back as radii, and
the support scheme iterates directions through Phi^T instead.  The k-th
reach set covers the time slice [k*delta, (k+1)*delta].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    InconsistentFlowpipeError,
    NumericError,
    QueryError,
)
from .sets import (
    ConvexSet,
    Hyperrectangle,
    Zonotope,
    box_approximation,
    support_batch,
)


@dataclass(frozen=True, eq=False)
class SupportRecord:
    """Per-step support bounds along a fixed batch of directions (rows)."""

    directions: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        dirs = np.asarray(self.directions, dtype=float)
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if dirs.ndim != 2 or lo.shape != (dirs.shape[0],) or hi.shape != (dirs.shape[0],):
            raise DimensionError("support record needs one lo/hi pair per direction row")
        for arr, name in ((dirs, "directions"), (lo, "lo"), (hi, "hi")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True, eq=False)
class ReachSet:
    """One reach set of a flowpipe, covering the time interval [t_lo, t_hi]."""

    t_lo: float
    t_hi: float
    geometry: object  # Zonotope | Hyperrectangle | SupportRecord

    def __post_init__(self):
        if self.t_hi <= self.t_lo:
            raise InconsistentFlowpipeError(
                f"reach set with empty time interval [{self.t_lo}, {self.t_hi}]"
            )


@dataclass(frozen=True, eq=False)
class Flowpipe:
    """Ordered reach sets covering [0, N*delta] with contiguous time slices."""

    reach_sets: tuple
    delta: float
    scheme: str
    system: str = ""

    def __post_init__(self):
        sets = tuple(self.reach_sets)
        if not sets:
            raise InconsistentFlowpipeError("a flowpipe needs at least one reach set")
        tol = 1e-9 * self.delta
        if abs(sets[0].t_lo) > tol:
            raise InconsistentFlowpipeError("flowpipe must start at t = 0")
        for k, rs in enumerate(sets):
            if abs((rs.t_hi - rs.t_lo) - self.delta) > tol:
                raise InconsistentFlowpipeError(f"reach set {k} does not span one step")
            if k and abs(rs.t_lo - sets[k - 1].t_hi) > tol:
                raise InconsistentFlowpipeError(f"time gap between reach sets {k - 1} and {k}")
        object.__setattr__(self, "reach_sets", sets)

    def __len__(self) -> int:
        return len(self.reach_sets)

    def __iter__(self):
        return iter(self.reach_sets)

    def __getitem__(self, k) -> ReachSet:
        return self.reach_sets[k]

    @property
    def horizon(self) -> float:
        return self.reach_sets[-1].t_hi


def _check_phi(phi, dim: int) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
        raise DimensionError(f"step matrix must be square, got shape {phi.shape}")
    if phi.shape[0] != dim:
        raise DimensionError(
            f"step matrix of size {phi.shape[0]} cannot propagate sets of dimension {dim}"
        )
    return phi


def _check_steps(steps: int) -> int:
    steps = int(steps)
    if steps < 1:
        raise ValueError("need at least one propagation step")
    return steps


def _finite_or_raise(array: np.ndarray, step: int, scheme: str) -> None:
    if not np.all(np.isfinite(array)):
        raise NumericError(f"{scheme} propagation produced non-finite values at step {step}")


def propagate_zonotope(phi, initial, steps: int, delta: float, system: str = "") -> Flowpipe:
    """Zonotope flowpipe: c and G are mapped by Phi once per step.

    The generator count never grows, so no order reduction is needed, and no
    interval hull ever wraps the set.
    """
    if isinstance(initial, Hyperrectangle):
        initial = initial.to_zonotope()
    if not isinstance(initial, Zonotope):
        raise TypeError("zonotope propagation needs a zonotope (or box) start set")
    steps = _check_steps(steps)
    phi = _check_phi(phi, initial.dim)
    center, gens = initial.center, initial.generators
    sets = []
    for k in range(steps):
        sets.append(ReachSet(k * delta, (k + 1) * delta, Zonotope(center, gens)))
        if k + 1 < steps:
            with np.errstate(over="ignore", invalid="ignore"):
                center = phi @ center
                gens = phi @ gens
            _finite_or_raise(center, k + 1, "zonotope")
            _finite_or_raise(gens, k + 1, "zonotope")
    return Flowpipe(tuple(sets), delta, "zonotope", system)


def propagate_box(phi, initial, steps: int, delta: float, system: str = "") -> Flowpipe:
    """Tight hyperrectangle flowpipe: c_k = Phi^k c0, r_k = |Phi^k| r0.

    Runs the zonotope recurrence on diagonal generators diag(r0) and reads
    each radius back as row-wise absolute sums, which reproduces |Phi^k| r0
    without maintaining a matrix power.
    """
    initial = box_approximation(initial)
    steps = _check_steps(steps)
    phi = _check_phi(phi, initial.dim)
    center = initial.center
    gens = np.diag(initial.radius)
    sets = []
    for k in range(steps):
        radius = np.abs(gens).sum(axis=1)
        sets.append(ReachSet(k * delta, (k + 1) * delta, Hyperrectangle(center, radius)))
        if k + 1 < steps:
            with np.errstate(over="ignore", invalid="ignore"):
                center = phi @ center
                gens = phi @ gens
            _finite_or_raise(center, k + 1, "box")
            _finite_or_raise(gens, k + 1, "box")
    return Flowpipe(tuple(sets), delta, "box", system)


def propagate_support(
    phi, initial: ConvexSet, directions, steps: int, delta: float, system: str = ""
) -> Flowpipe:
    """Support-function flowpipe along fixed directions.

    Uses rho(d, Phi^k X) = rho((Phi^T)^k d, X): directions are iterated
    through Phi^T while the start set (any lazy expression) stays put, so
    the enclosure is evaluated exactly in every queried direction.
    """
    dirs = np.asarray(directions, dtype=float)
    if dirs.ndim == 1:
        dirs = dirs[None, :]
    if dirs.ndim != 2 or dirs.shape[1] != initial.dim:
        raise DimensionError(
            f"direction batch of shape {dirs.shape} incompatible with dimension {initial.dim}"
        )
    steps = _check_steps(steps)
    phi = _check_phi(phi, initial.dim)
    running = np.vstack([dirs, -dirs])
    m = dirs.shape[0]
    sets = []
    for k in range(steps):
        values = support_batch(initial, running)
        _finite_or_raise(values, k, "support")
        sets.append(
            ReachSet(k * delta, (k + 1) * delta, SupportRecord(dirs, -values[m:], values[:m]))
        )
        if k + 1 < steps:
            with np.errstate(over="ignore", invalid="ignore"):
                running = running @ phi
            _finite_or_raise(running, k + 1, "support")
    return Flowpipe(tuple(sets), delta, "support", system)


def _direction_for_index(dim: int, index: int) -> np.ndarray:
    if not 0 <= index < dim:
        raise QueryError(f"component {index} out of range for dimension {dim}")
    d = np.zeros(dim)
    d[index] = 1.0
    return d


def flowpipe_bounds(flowpipe: Flowpipe, index: int = None, direction=None) -> list:
    """Per-step bounds [(t_lo, t_hi, lo, hi), ...] of a component or direction.

    Zonotope flowpipes answer arbitrary directions exactly; box flowpipes
    only canonical (single-component) directions; support flowpipes only the
    directions they were propagated with.
    """
    if (index is None) == (direction is None):
        raise QueryError("query exactly one of index or direction")
    geometry = flowpipe[0].geometry

    if isinstance(geometry, SupportRecord):
        if index is not None:
            direction = _direction_for_index(geometry.directions.shape[1], index)
        direction = np.asarray(direction, dtype=float)
        rows = np.where(
            np.all(np.isclose(geometry.directions, direction, rtol=1e-12, atol=0.0), axis=1)
        )[0]
        if rows.size == 0:
            raise QueryError("direction was not among those propagated")
        row = int(rows[0])
        return [
            (rs.t_lo, rs.t_hi, float(rs.geometry.lo[row]), float(rs.geometry.hi[row]))
            for rs in flowpipe
        ]

    if isinstance(geometry, Hyperrectangle):
        if direction is not None:
            direction = np.asarray(direction, dtype=float)
            nonzero = np.nonzero(direction)[0]
            if nonzero.size != 1:
                raise QueryError(
                    "box flowpipes only answer canonical (single-component) directions"
                )
            index, scale = int(nonzero[0]), float(direction[nonzero[0]])
        else:
            scale = 1.0
        if not 0 <= index < geometry.dim:
            raise QueryError(f"component {index} out of range for dimension {geometry.dim}")
        out = []
        for rs in flowpipe:
            mid = scale * rs.geometry.center[index]
            spread = abs(scale) * rs.geometry.radius[index]
            out.append((rs.t_lo, rs.t_hi, mid - spread, mid + spread))
        return out

    if isinstance(geometry, Zonotope):
        if direction is None:
            direction = _direction_for_index(geometry.dim, index)
        direction = np.asarray(direction, dtype=float)
        out = []
        for rs in flowpipe:
            mid = float(direction @ rs.geometry.center)
            spread = float(np.abs(rs.geometry.generators.T @ direction).sum())
            out.append((rs.t_lo, rs.t_hi, mid - spread, mid + spread))
        return out

    raise QueryError(f"cannot query flowpipe geometry {type(geometry).__name__}")
