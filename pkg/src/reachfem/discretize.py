"""Conservative time discretization: from x' = Ax to a first-step enclosure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NumericError
from .matfun import e_plus, expm
from .model import LinearSystem
from .sets import (
    ConvexSet,
    Hyperrectangle,
    box_approximation,
    convex_hull,
    intersect,
    linear_map,
    minkowski_sum,
)

MODES = ("symbolic", "box")


@dataclass(frozen=True, eq=False)
class DiscretizedProblem:
    """Time-discretized reachability problem.

    ``omega0`` is the symbolic first-step enclosure; ``omega0_box`` is its
    interval hull, filled in only when the problem was built in box mode.
    """

    system: LinearSystem
    phi: np.ndarray
    omega0: ConvexSet
    delta: float
    steps: int
    mode: str = "symbolic"
    omega0_box: Optional[Hyperrectangle] = field(default=None)

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def dim(self) -> int:
        return self.phi.shape[0]


def first_step_enclosure(matrix, initial: ConvexSet, delta: float, phi=None) -> ConvexSet:
    """Enclosure of all solutions of x' = Ax over [0, delta].

    Fattens both the forward hull CH(X0, Phi X0 + E+) and the backward hull
    CH(Phi X0, X0 + E+) and intersects them, which is tighter than either
    alone while still covering every trajectory chord.
    """
    if phi is None:
        phi = expm(matrix, delta)
    mapped = linear_map(phi, initial)
    forward = convex_hull(initial, minkowski_sum(mapped, e_plus(matrix, initial, delta)))
    backward = convex_hull(mapped, minkowski_sum(initial, e_plus(matrix, mapped, delta)))
    return intersect(forward, backward)


def discretize(
    system: LinearSystem,
    delta: float,
    steps: int,
    mode: str = "symbolic",
) -> DiscretizedProblem:
    """Build the one-step matrix and first-step enclosure for a linear system."""
    if mode not in MODES:
        raise ValueError(f"unknown discretization mode {mode!r}; expected one of {MODES}")
    if not delta > 0.0:
        raise NumericError(f"time step must be positive, got {delta}")
    if steps < 1:
        raise ValueError(f"step count must be at least 1, got {steps}")
    phi = expm(system.matrix, delta)
    omega0 = first_step_enclosure(system.matrix, system.initial, delta, phi=phi)
    omega0_box = box_approximation(omega0) if mode == "box" else None
    return DiscretizedProblem(
        system=system,
        phi=phi,
        omega0=omega0,
        delta=delta,
        steps=steps,
        mode=mode,
        omega0_box=omega0_box,
    )
