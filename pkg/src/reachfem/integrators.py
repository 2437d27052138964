"""Classical time integrators: Backward Euler, Newmark and Bathe.

All three factorize their effective matrices once and then perform one (or
two, for Bathe) back-substitutions per step.  Initial states may carry a
trailing sample axis, in which case every column is integrated at once.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import DimensionError, NumericError, SingularMatrixError
from .model import SecondOrderSystem


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-stepped states: temperature for heat problems, a displacement/
    velocity/acceleration triple for dynamics.  State arrays are indexed
    [step, dof] or [step, dof, sample]."""

    times: np.ndarray
    temperature: Optional[np.ndarray] = None
    displacement: Optional[np.ndarray] = None
    velocity: Optional[np.ndarray] = None
    acceleration: Optional[np.ndarray] = None
    method: str = ""

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.shape[0] < 1:
            raise DimensionError("times must be a non-empty vector")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

        heat = self.temperature is not None
        triple = (self.displacement, self.velocity, self.acceleration)
        if heat == any(t is not None for t in triple):
            raise ValueError("provide temperature or the displacement triple, not both")
        if not heat and any(t is None for t in triple):
            raise ValueError("dynamics trajectories need displacement, velocity and acceleration")
        fields = ("temperature",) if heat else ("displacement", "velocity", "acceleration")
        for name in fields:
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape[0] != times.shape[0]:
                raise DimensionError(f"{name} has {arr.shape[0]} rows for {times.shape[0]} times")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def steps(self) -> int:
        return self.times.shape[0] - 1

    @property
    def delta(self) -> float:
        return float(self.times[1] - self.times[0]) if self.steps else 0.0


class _Factorized:
    """LU factorization (dense or sparse) with solve-many reuse."""

    def __init__(self, matrix, name: str = "effective matrix"):
        try:
            if scipy.sparse.issparse(matrix):
                lu = scipy.sparse.linalg.splu(scipy.sparse.csc_matrix(matrix))
                self._solve = lu.solve
            else:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
                    lu, piv = scipy.linalg.lu_factor(np.asarray(matrix, dtype=float))
                if np.any(np.diag(lu) == 0.0):
                    raise SingularMatrixError(f"{name} is singular")
                self._solve = lambda b: scipy.linalg.lu_solve((lu, piv), b)
        except SingularMatrixError:
            raise
        except (np.linalg.LinAlgError, RuntimeError, ValueError) as exc:
            raise SingularMatrixError(f"{name} could not be factorized: {exc}") from exc

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self._solve(np.asarray(rhs, dtype=float))


def _combine(terms) -> object:
    """Weighted sum of matrices; stays sparse only if every term is sparse."""
    used = [(coef, mat) for coef, mat in terms if mat is not None and coef != 0.0]
    if all(scipy.sparse.issparse(mat) for _, mat in used):
        total = used[0][0] * used[0][1]
        for coef, mat in used[1:]:
            total = total + coef * mat
        return scipy.sparse.csc_matrix(total)
    total = None
    for coef, mat in used:
        dense = mat.toarray() if scipy.sparse.issparse(mat) else np.asarray(mat, dtype=float)
        total = coef * dense if total is None else total + coef * dense
    return total


def _matvec(matrix, vec):
    if matrix is None:
        return 0.0
    return matrix @ vec


def _forcing_at(forcing: Optional[Callable], t: float, like: np.ndarray):
    if forcing is None:
        return 0.0
    f = np.asarray(forcing(float(t)), dtype=float)
    if like.ndim == 2 and f.ndim == 1:
        f = f[:, None]
    return f


def _initial_state(values, n: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim not in (1, 2) or arr.shape[0] != n:
        raise DimensionError(f"{name} must have leading dimension {n}, got shape {arr.shape}")
    return arr


def _check_finite(method: str, *arrays) -> None:
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise NumericError(f"{method} produced non-finite values")


def backward_euler(
    system: SecondOrderSystem,
    forcing: Optional[Callable],
    theta0,
    delta: float,
    steps: int,
) -> Trajectory:
    """Backward Euler for C_th T' + K_th T = f: one factorization, N solves."""
    if system.kind != "heat":
        raise ValueError("backward_euler integrates heat-type systems")
    if delta <= 0.0:
        raise ValueError("time step must be positive")
    theta = _initial_state(theta0, system.n, "theta0")
    capacity = system.damping
    solver = _Factorized(
        _combine([(delta, system.stiffness), (1.0, capacity)]), "backward Euler matrix"
    )
    out = np.empty((steps + 1,) + theta.shape)
    out[0] = theta
    for k in range(1, steps + 1):
        rhs = _matvec(capacity, theta) + delta * _forcing_at(forcing, k * delta, theta)
        theta = solver.solve(rhs)
        out[k] = theta
    _check_finite("backward Euler", out)
    times = delta * np.arange(steps + 1)
    return Trajectory(times=times, temperature=out, method="backward_euler")


def _initial_acceleration(system, forcing, u0, v0) -> np.ndarray:
    f0 = _forcing_at(forcing, 0.0, u0)
    residual = f0 - _matvec(system.damping, v0) - _matvec(system.stiffness, u0)
    return _Factorized(system.mass, "mass matrix").solve(residual)


def newmark(
    system: SecondOrderSystem,
    forcing: Optional[Callable],
    u0,
    v0,
    delta: float,
    steps: int,
) -> Trajectory:
    """Average-acceleration Newmark (gamma = 1/2, beta = 1/4)."""
    if system.kind != "dynamics":
        raise ValueError("newmark integrates dynamics-type systems")
    if delta <= 0.0:
        raise ValueError("time step must be positive")
    u = _initial_state(u0, system.n, "u0")
    v = _initial_state(v0, system.n, "v0")
    if u.shape != v.shape:
        raise DimensionError("u0 and v0 must have the same shape")
    mass, damping, stiffness = system.mass, system.damping, system.stiffness
    b0 = 4.0 / (delta * delta)
    b1 = 2.0 / delta
    b2 = 4.0 / delta
    solver = _Factorized(_combine([(b0, mass), (b1, damping), (1.0, stiffness)]))
    acc = _initial_acceleration(system, forcing, u, v)

    disp = np.empty((steps + 1,) + u.shape)
    vel = np.empty_like(disp)
    accel = np.empty_like(disp)
    disp[0], vel[0], accel[0] = u, v, acc
    for k in range(1, steps + 1):
        rhs = (
            _forcing_at(forcing, k * delta, u)
            + _matvec(mass, b0 * u + b2 * v + acc)
            + _matvec(damping, b1 * u + v)
        )
        u_next = solver.solve(rhs)
        acc_next = b0 * (u_next - u) - b2 * v - acc
        v_next = v + 0.5 * delta * (acc + acc_next)
        disp[k], vel[k], accel[k] = u_next, v_next, acc_next
        u, v, acc = u_next, v_next, acc_next
    _check_finite("Newmark", disp, vel, accel)
    times = delta * np.arange(steps + 1)
    return Trajectory(
        times=times, displacement=disp, velocity=vel, acceleration=accel, method="newmark"
    )


def bathe(
    system: SecondOrderSystem,
    forcing: Optional[Callable],
    u0,
    v0,
    delta: float,
    steps: int,
) -> Trajectory:
    """Composite Bathe: trapezoidal half step, then 3-point backward difference.

    The second sub-step solve determines the velocity update
    v_{k+1} = -a7*u_k - a1*u_{k+1/2} + a3*u_{k+1} (the same 3-point rule the
    effective system is built from), and likewise for the acceleration.
    """
    if system.kind != "dynamics":
        raise ValueError("bathe integrates dynamics-type systems")
    if delta <= 0.0:
        raise ValueError("time step must be positive")
    u = _initial_state(u0, system.n, "u0")
    v = _initial_state(v0, system.n, "v0")
    if u.shape != v.shape:
        raise DimensionError("u0 and v0 must have the same shape")
    mass, damping, stiffness = system.mass, system.damping, system.stiffness
    a0 = 16.0 / (delta * delta)
    a1 = 4.0 / delta
    a2 = 9.0 / (delta * delta)
    a3 = 3.0 / delta
    a4 = 8.0 / delta
    a5 = 12.0 / (delta * delta)
    a6 = -3.0 / (delta * delta)
    a7 = -1.0 / delta
    solve_half = _Factorized(_combine([(a0, mass), (a1, damping), (1.0, stiffness)]))
    solve_full = _Factorized(_combine([(a2, mass), (a3, damping), (1.0, stiffness)]))
    acc = _initial_acceleration(system, forcing, u, v)

    disp = np.empty((steps + 1,) + u.shape)
    vel = np.empty_like(disp)
    accel = np.empty_like(disp)
    disp[0], vel[0], accel[0] = u, v, acc
    for k in range(1, steps + 1):
        t_prev = (k - 1) * delta
        rhs = (
            _forcing_at(forcing, t_prev + 0.5 * delta, u)
            + _matvec(mass, a0 * u + a4 * v + acc)
            + _matvec(damping, a1 * u + v)
        )
        u_half = solve_half.solve(rhs)
        v_half = a1 * (u_half - u) - v
        rhs = (
            _forcing_at(forcing, k * delta, u)
            + _matvec(mass, a5 * u_half + a6 * u + a1 * v_half + a7 * v)
            + _matvec(damping, a1 * u_half + a7 * u)
        )
        u_next = solve_full.solve(rhs)
        v_next = -a7 * u - a1 * u_half + a3 * u_next
        acc_next = -a7 * v - a1 * v_half + a3 * v_next
        disp[k], vel[k], accel[k] = u_next, v_next, acc_next
        u, v, acc = u_next, v_next, acc_next
    _check_finite("Bathe", disp, vel, accel)
    times = delta * np.arange(steps + 1)
    return Trajectory(
        times=times, displacement=disp, velocity=vel, acceleration=accel, method="bathe"
    )
