"""First-step enclosure soundness and tightness."""

import numpy as np
import pytest
import scipy.linalg

from reachfem.discretize import DiscretizedProblem, discretize, first_step_enclosure
from reachfem.errors import NumericError
from reachfem.matfun import e_plus
from reachfem.model import homogenize
from reachfem.sets import (
    Hyperrectangle,
    box_approximation,
    convex_hull,
    linear_map,
    minkowski_sum,
    support,
)

OMEGA = 4.0 * np.pi
OSC = np.array([[0.0, 1.0], [-(OMEGA**2), 0.0]])
X0 = Hyperrectangle([1.0, 0.0], [0.1, 0.1])


def test_zero_matrix_keeps_initial_set():
    system = homogenize(np.zeros((2, 2)), initial=X0)
    problem = discretize(system, 0.1, 5, mode="box")
    assert np.allclose(problem.phi, np.eye(2))
    assert np.allclose(problem.omega0_box.center, X0.center, atol=1e-15)
    assert np.allclose(problem.omega0_box.radius, X0.radius, atol=1e-15)


def test_oscillator_first_step_box():
    system = homogenize(OSC, initial=X0)
    problem = discretize(system, 0.025, 160, mode="box")
    assert np.allclose(problem.omega0_box.center, [0.97471, -2.13332], atol=1e-5)
    assert np.allclose(problem.omega0_box.radius, [0.12868, 2.23332], atol=1e-5)


def test_enclosure_contains_sampled_trajectories():
    system = homogenize(OSC, initial=X0)
    delta = 0.025
    problem = discretize(system, delta, 1, mode="box")
    box = problem.omega0_box
    rng = np.random.default_rng(7)
    starts = X0.center + X0.radius * rng.uniform(-1.0, 1.0, size=(50, 2))
    times = np.linspace(0.0, delta, 100)
    slack = 0.0
    for t in times:
        states = starts @ scipy.linalg.expm(OSC * t).T
        slack = min(slack, float(np.min(states - box.lo)), float(np.min(box.hi - states)))
    assert slack >= -1e-9
    # same check against the symbolic enclosure along a few directions
    dirs = rng.normal(size=(8, 2))
    for d in dirs:
        bound = support(problem.omega0, d)
        for t in times:
            states = starts @ scipy.linalg.expm(OSC * t).T
            assert float(np.max(states @ d)) <= bound + 1e-9


def test_enclosure_shrinks_toward_initial_under_refinement():
    system = homogenize(OSC, initial=X0)
    delta = 0.025
    prev = None
    gaps = []
    for _ in range(5):
        box = discretize(system, delta, 1, mode="box").omega0_box
        if prev is not None:
            assert np.all(box.radius <= prev.radius + 1e-12)
        prev = box
        gaps.append(float(np.max(box.radius - X0.radius)))
        delta /= 2.0
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.2 * gaps[0]


def test_intersection_is_tighter_than_forward_hull():
    system = homogenize(OSC, initial=X0)
    delta = 0.025
    problem = discretize(system, delta, 1, mode="box")
    mapped = linear_map(problem.phi, X0)
    forward = convex_hull(X0, minkowski_sum(mapped, e_plus(OSC, X0, delta)))
    fwd_box = box_approximation(forward)
    assert np.all(problem.omega0_box.lo >= fwd_box.lo - 1e-12)
    assert np.all(problem.omega0_box.hi <= fwd_box.hi + 1e-12)


def test_first_step_enclosure_accepts_precomputed_phi():
    phi = scipy.linalg.expm(OSC * 0.025)
    a = first_step_enclosure(OSC, X0, 0.025, phi=phi)
    b = first_step_enclosure(OSC, X0, 0.025)
    box_a, box_b = box_approximation(a), box_approximation(b)
    assert np.allclose(box_a.lo, box_b.lo)
    assert np.allclose(box_a.hi, box_b.hi)


def test_discretize_validation():
    system = homogenize(OSC, initial=X0)
    with pytest.raises(ValueError):
        discretize(system, 0.025, 10, mode="interval")
    with pytest.raises(NumericError):
        discretize(system, 0.0, 10)
    with pytest.raises(ValueError):
        discretize(system, 0.025, 0)


def test_problem_fields():
    system = homogenize(OSC, initial=X0)
    problem = discretize(system, 0.025, 160)
    assert isinstance(problem, DiscretizedProblem)
    assert problem.dim == 2
    assert problem.mode == "symbolic"
    assert problem.omega0_box is None
    assert not problem.phi.flags.writeable
