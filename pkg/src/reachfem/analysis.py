"""Accuracy analysis: analytic references, period/amplitude estimation from
flowpipes and trajectories, and envelope norms for Monte Carlo comparisons.

Period and amplitude work on displacement maxima: a "crossing" is a maximal
run of consecutive reach-sets whose velocity interval contains zero while the
displacement interval stays strictly positive.  The run covering t = 0 (the
initial maximum, when the motion starts at one) is the reference; the m-th
later run marks m full periods.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionError,
    InconsistentFlowpipeError,
    InsufficientDataError,
)
from .integrators import Trajectory
from .propagate import Flowpipe, ReachSet, flowpipe_bounds
from .sets import Hyperrectangle, Interval


# ---------------------------------------------------------------------------
# analytic references
# ---------------------------------------------------------------------------


def analytic_oscillator(omega: float, u0: float, v0: float, t):
    """Exact solution of u'' + omega^2 u = 0: returns (u(t), v(t))."""
    if omega <= 0.0:
        raise ValueError("frequency must be positive")
    t = np.asarray(t, dtype=float)
    c, s = np.cos(omega * t), np.sin(omega * t)
    u = u0 * c + (v0 / omega) * s
    v = -u0 * omega * s + v0 * c
    return u, v


def analytic_clamped_bar(
    x,
    t,
    force: float,
    modulus: float,
    area: float,
    density: float,
    length: float,
    s_max: int = 1000,
):
    """Mode-superposition displacement of a clamped-free bar under a step load.

    u(x,t) = 8FL/(pi^2 EA) * sum_s (-1)^(s-1)/(2s-1)^2
             * sin((2s-1) pi x / 2L) * (1 - cos((2s-1) pi mu t / 2L))

    with mu = sqrt(E/rho).  The tail of the partial sum is bounded by
    8FL/(pi^2 EA) * sum_{s > s_max} (2s-1)^-2.  Array ``x`` and ``t`` are
    combined pairwise: the result has shape x.shape + t.shape.
    """
    if s_max < 1:
        raise ValueError("s_max must be at least 1")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    mu = np.sqrt(modulus / density)
    odd = 2.0 * np.arange(1, s_max + 1) - 1.0
    signs = np.where(np.arange(s_max) % 2 == 0, 1.0, -1.0)
    coeff = signs / odd**2
    spatial = np.sin(np.multiply.outer(x, odd) * (np.pi / (2.0 * length)))
    temporal = 1.0 - np.cos(np.multiply.outer(t, odd) * (np.pi * mu / (2.0 * length)))
    scale = 8.0 * force * length / (np.pi**2 * modulus * area)
    return scale * np.tensordot(spatial * coeff, temporal, axes=([-1], [-1]))


def analytic_heat_rod(eps: float, x, t):
    """Exact rod temperature for the (1+eps)(sin(pi x) + sin(3 pi x)/2) profile
    under T' = T_xx with zero end temperatures.

    The result has shape x.shape + t.shape.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    pi2 = np.pi * np.pi
    first = np.multiply.outer(np.sin(np.pi * x), np.exp(-pi2 * t))
    third = np.multiply.outer(0.5 * np.sin(3.0 * np.pi * x), np.exp(-9.0 * pi2 * t))
    return (1.0 + eps) * (first + third)


# ---------------------------------------------------------------------------
# period / amplitude from flowpipes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodEstimate:
    """Enclosure of the oscillation period from maxima crossings."""

    s_t: Interval
    crossings_used: int


@dataclass(frozen=True)
class EnvelopeMetrics:
    """Norms of the absolute envelope: l1 = integral, linf = peak."""

    l1: float
    linf: float


@dataclass(frozen=True)
class _Run:
    t_lo: float
    t_hi: float
    min_lower: float


def _maxima_runs(fp: Flowpipe, u_index: int, v_index: int):
    """Runs of reach-sets with 0 in the v-interval and u strictly positive.

    Returns (leading, later): the run covering step 0, or None, and the list
    of later runs in time order.  The zero-velocity test carries a tiny
    relative tolerance: reach-sets that merely touch v = 0 (a maximum on a
    step boundary) must not drop out by one rounding error.
    """
    u_bounds = flowpipe_bounds(fp, index=u_index)
    v_bounds = flowpipe_bounds(fp, index=v_index)
    v_scale = max((max(abs(lo), abs(hi)) for _, _, lo, hi in v_bounds), default=0.0)
    tol = 1e-12 * v_scale
    runs = []
    start = None
    for k, ((t_lo, t_hi, u_lo, _), (_, _, v_lo, v_hi)) in enumerate(zip(u_bounds, v_bounds)):
        hit = v_lo <= tol and v_hi >= -tol and u_lo > 0.0
        if hit and start is None:
            start = k
        elif not hit and start is not None:
            runs.append((start, k - 1))
            start = None
    if start is not None:
        runs.append((start, len(u_bounds) - 1))

    def pack(first: int, last: int) -> _Run:
        return _Run(
            t_lo=u_bounds[first][0],
            t_hi=u_bounds[last][1],
            min_lower=min(u_bounds[k][2] for k in range(first, last + 1)),
        )

    leading = None
    if runs and runs[0][0] == 0:
        leading = pack(*runs[0])
        runs = runs[1:]
    return leading, [pack(first, last) for first, last in runs]


def estimate_period(fp: Flowpipe, u_index: int, v_index: int, m_max: int) -> PeriodEstimate:
    """Period enclosure S_T = intersection over m of (m-th crossing span)/m.

    The motion must start at a displacement maximum; the m-th later maxima
    run then spans m full periods.
    """
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    leading, runs = _maxima_runs(fp, u_index, v_index)
    if leading is None:
        raise InsufficientDataError("flowpipe does not start at a displacement maximum")
    if not runs:
        raise InsufficientDataError("no maxima crossing after the initial one")
    runs = runs[:m_max]
    lo = max(run.t_lo / m for m, run in enumerate(runs, start=1))
    hi = min(run.t_hi / m for m, run in enumerate(runs, start=1))
    if lo > hi:
        raise InconsistentFlowpipeError(
            f"maxima spans have empty intersection ({lo} > {hi}); "
            "the flowpipe is too coarse for period estimation"
        )
    return PeriodEstimate(s_t=Interval(lo, hi), crossings_used=len(runs))


def estimate_amplitude_decay(
    fp: Flowpipe,
    u_index: int,
    v_index: int,
    n_a: int,
    reference: Optional[float] = None,
) -> float:
    """Per-period amplitude decay 1 - (A_num / A)^(1/n_a).

    A_num is the safe (lowest) displacement lower bound over the n_a-th
    maxima run.  ``reference`` defaults to the same measurement on the
    first run, so the reach-set chord undershoot common to every maximum
    cancels and only genuine decay remains; pass the exact amplitude to
    compare against it instead.
    """
    if n_a < 1:
        raise ValueError("n_a must be at least 1")
    leading, runs = _maxima_runs(fp, u_index, v_index)
    if leading is None:
        raise InsufficientDataError("flowpipe does not start at a displacement maximum")
    if len(runs) < n_a:
        raise InsufficientDataError(
            f"need {n_a} maxima crossings, found {len(runs)}"
        )
    if reference is None:
        reference = runs[0].min_lower
    a_num = runs[n_a - 1].min_lower
    if reference <= 0.0:
        raise InsufficientDataError("reference amplitude is not positive")
    return 1.0 - (a_num / reference) ** (1.0 / n_a)


# ---------------------------------------------------------------------------
# trajectories as degenerate flowpipes
# ---------------------------------------------------------------------------


def chord_flowpipe(traj: Trajectory, u_index: int = 0, v_index: Optional[int] = None) -> Flowpipe:
    """Per-step chord boxes of a dynamics trajectory in the (u, v) plane.

    The k-th box spans consecutive samples, so the point trajectory gets the
    same interval treatment as a set-propagation flowpipe.
    """
    if traj.displacement is None:
        raise ValueError("chord flowpipes need a dynamics trajectory")
    if traj.displacement.ndim != 2:
        raise ValueError("chord flowpipes need an unbatched trajectory")
    if traj.steps < 1:
        raise InsufficientDataError("trajectory has no steps")
    v_index = u_index if v_index is None else v_index
    u = traj.displacement[:, u_index]
    v = traj.velocity[:, v_index]
    delta = traj.delta
    sets = []
    for k in range(traj.steps):
        pair_u = u[k : k + 2]
        pair_v = v[k : k + 2]
        center = np.array([pair_u.mean(), pair_v.mean()])
        radius = np.array([np.ptp(pair_u) / 2.0, np.ptp(pair_v) / 2.0])
        sets.append(ReachSet(k * delta, (k + 1) * delta, Hyperrectangle(center, radius)))
    return Flowpipe(tuple(sets), delta=delta, scheme="chord")


def _parabola_peak(t3: np.ndarray, u3: np.ndarray) -> float:
    """Vertex value of the parabola through three samples (max of the three
    when they are not concave)."""
    denom = 2.0 * u3[1] - u3[0] - u3[2]
    if denom <= 0.0:
        return float(np.max(u3))
    return float(u3[1] + (u3[2] - u3[0]) ** 2 / (8.0 * denom))


def trajectory_amplitudes(traj: Trajectory, u_index: int = 0, v_index: Optional[int] = None):
    """Refined (time, amplitude) of each displacement maximum of a trajectory.

    Maxima are located by the + to - sign change of the velocity; the
    amplitude is the vertex of the parabola through the three displacement
    samples around the crossing.  The initial state counts as the first
    maximum when it starts with zero velocity and positive displacement.
    """
    if traj.displacement is None:
        raise ValueError("amplitude extraction needs a dynamics trajectory")
    if traj.displacement.ndim != 2:
        raise ValueError("amplitude extraction needs an unbatched trajectory")
    v_index = u_index if v_index is None else v_index
    u = traj.displacement[:, u_index]
    v = traj.velocity[:, v_index]
    t = traj.times
    peaks = []
    for k in range(traj.steps):
        if not (v[k] >= 0.0 > v[k + 1] and u[k] > 0.0):
            continue
        if v[k] == 0.0:
            t_cross = t[k]
        else:
            t_cross = t[k] + (t[k + 1] - t[k]) * v[k] / (v[k] - v[k + 1])
        j = k if t_cross - t[k] <= t[k + 1] - t_cross else k + 1
        if 0 < j < traj.steps:
            amp = _parabola_peak(t[j - 1 : j + 2], u[j - 1 : j + 2])
        else:
            amp = float(u[j])
        peaks.append((float(t_cross), amp))
    return peaks


def trajectory_amplitude_decay(
    traj: Trajectory,
    u_index: int,
    v_index: int,
    n_a: int,
    reference: Optional[float] = None,
) -> float:
    """Per-period amplitude decay of a point trajectory from refined maxima.

    ``reference`` defaults to the refined amplitude of the first maximum
    after the start, mirroring the flowpipe estimator.
    """
    if n_a < 1:
        raise ValueError("n_a must be at least 1")
    peaks = trajectory_amplitudes(traj, u_index, v_index)
    if not peaks or peaks[0][0] != traj.times[0]:
        raise InsufficientDataError("trajectory does not start at a displacement maximum")
    if len(peaks) < n_a + 1:
        raise InsufficientDataError(f"need {n_a} maxima after the start, found {len(peaks) - 1}")
    if reference is None:
        reference = peaks[1][1]
    if reference <= 0.0:
        raise InsufficientDataError("reference amplitude is not positive")
    return 1.0 - (peaks[n_a][1] / reference) ** (1.0 / n_a)


# ---------------------------------------------------------------------------
# envelopes
# ---------------------------------------------------------------------------


def envelopes_from_samples(
    trajs: Sequence[Trajectory],
    index: int,
    field: Optional[str] = None,
):
    """Pointwise max/min envelopes over sampled trajectories at one DOF.

    ``field`` picks the state array ("temperature", "displacement",
    "velocity", "acceleration"); by default temperature for heat
    trajectories and velocity for dynamics ones.  Batched trajectories
    contribute all their sample columns.  Returns (upper, lower, metrics)
    with the L1 norm by the trapezoid rule on max(|upper|, |lower|).
    """
    if isinstance(trajs, Trajectory):
        trajs = [trajs]
    if not trajs:
        raise InsufficientDataError("no trajectories given")
    times = trajs[0].times
    if field is None:
        field = "temperature" if trajs[0].temperature is not None else "velocity"
    columns = []
    for traj in trajs:
        if not np.array_equal(traj.times, times):
            raise DimensionError("trajectories must share the same time grid")
        arr = getattr(traj, field, None)
        if arr is None:
            raise ValueError(f"trajectory has no {field!r} data")
        series = arr[:, index]
        columns.append(series[:, None] if series.ndim == 1 else series)
    stacked = np.hstack(columns)
    upper = stacked.max(axis=1)
    lower = stacked.min(axis=1)
    envelope = np.maximum(np.abs(upper), np.abs(lower))
    l1 = float(0.5 * np.sum((envelope[1:] + envelope[:-1]) * np.diff(times)))
    return upper, lower, EnvelopeMetrics(l1=l1, linf=float(envelope.max()))


def envelope_metrics_from_bounds(bounds) -> EnvelopeMetrics:
    """Envelope norms of per-step flowpipe bounds (t_lo, t_hi, lo, hi).

    The flowpipe envelope is piecewise constant, so its L1 norm is the exact
    sum of max(|lo|, |hi|) times the step span.
    """
    bounds = list(bounds)
    if not bounds:
        raise InsufficientDataError("no bounds given")
    values = np.array([max(abs(lo), abs(hi)) for _, _, lo, hi in bounds])
    spans = np.array([t_hi - t_lo for t_lo, t_hi, _, _ in bounds])
    return EnvelopeMetrics(l1=float(values @ spans), linf=float(values.max()))


def vertex_sampler(box: Hyperrectangle, count: int, seed: int) -> np.ndarray:
    """Seeded uniform samples from the vertices of a box, one per row."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    signs = 2.0 * rng.integers(0, 2, size=(count, box.dim)) - 1.0
    return box.center + signs * box.radius
