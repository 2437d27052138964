"""Backward Euler, Newmark and composite Bathe stepping."""

import numpy as np
import pytest

from reachfem.errors import DimensionError, SingularMatrixError
from reachfem.integrators import Trajectory, backward_euler, bathe, newmark
from reachfem.model import SecondOrderSystem, assemble_bar_1d, assemble_heat_1d

OMEGA = 2.0 * np.pi  # unit natural period


def _oscillator():
    return SecondOrderSystem("dynamics", np.array([[OMEGA**2]]), mass=np.eye(1))


def _conduction(k=3.0, c=2.0):
    return SecondOrderSystem("heat", np.array([[k]]), damping=np.array([[c]]))


def _peak_value(times, series, around, half_window):
    """Parabola-interpolated maximum of a sampled signal near a given time."""
    mask = (times >= around - half_window) & (times <= around + half_window)
    idx = np.nonzero(mask)[0]
    j = idx[np.argmax(series[idx])]
    lo, mid, hi = series[j - 1], series[j], series[j + 1]
    denom = lo - 2.0 * mid + hi
    if denom == 0.0:
        return mid
    return mid - (hi - lo) ** 2 / (8.0 * denom)


# ---------------------------------------------------------------------------
# exactness anchors
# ---------------------------------------------------------------------------


def test_backward_euler_scalar_recurrence():
    k, c, delta = 3.0, 2.0, 0.05
    traj = backward_euler(_conduction(k, c), None, np.array([1.0]), delta, 20)
    ratio = c / (c + delta * k)
    expected = ratio ** np.arange(21)
    assert np.allclose(traj.temperature[:, 0], expected, rtol=1e-12)


def test_backward_euler_holds_equilibrium():
    system = assemble_heat_1d(1.0, 1.0, 1.0, 1.0, 8)
    rng = np.random.default_rng(0)
    load = rng.uniform(0.5, 1.5, size=system.n)
    theta_star = np.linalg.solve(system.stiffness.toarray(), load)
    traj = backward_euler(system, lambda t: load, theta_star, 0.01, 50)
    assert np.allclose(traj.temperature, theta_star, rtol=1e-10)


def test_newmark_and_bathe_hold_equilibrium():
    system = assemble_bar_1d(1.0, 1.0, 1.0, 1.0, 6)
    rng = np.random.default_rng(1)
    load = rng.uniform(0.5, 1.5, size=system.n)
    u_star = np.linalg.solve(system.stiffness.toarray(), load)
    zeros = np.zeros(system.n)
    for method in (newmark, bathe):
        traj = method(system, lambda t: load, u_star, zeros, 0.01, 50)
        assert np.allclose(traj.displacement, u_star, rtol=1e-9)
        assert np.allclose(traj.velocity, 0.0, atol=1e-9 * np.max(np.abs(u_star)))


def test_newmark_conserves_oscillator_energy():
    traj = newmark(_oscillator(), None, np.array([1.0]), np.array([0.0]), 0.01, 1000)
    u, v = traj.displacement[:, 0], traj.velocity[:, 0]
    energy = 0.5 * v**2 + 0.5 * OMEGA**2 * u**2
    assert np.max(np.abs(energy / energy[0] - 1.0)) < 1e-6


def test_newmark_amplitude_survives_fifty_periods():
    delta = 0.005
    traj = newmark(_oscillator(), None, np.array([1.0]), np.array([0.0]), delta, 10_000)
    u = traj.displacement[:, 0]
    first = _peak_value(traj.times, u, 1.0, 0.6)
    last = _peak_value(traj.times, u, 49.0, 0.6)
    assert abs(1.0 - last / first) < 1e-6


def test_bathe_damping_grows_with_step_size():
    decays = []
    for delta in (0.05, 0.1):
        steps = int(round(50.0 / delta))
        traj = bathe(_oscillator(), None, np.array([1.0]), np.array([0.0]), delta, steps)
        u = traj.displacement[:, 0]
        first = _peak_value(traj.times, u, 1.0, 0.6)
        last = _peak_value(traj.times, u, 49.0, 0.6)
        decays.append(1.0 - last / first)
    assert 1e-4 < decays[0] < decays[1] < 1.0


# ---------------------------------------------------------------------------
# convergence orders
# ---------------------------------------------------------------------------


def test_backward_euler_is_first_order():
    system = _conduction(k=1.0, c=1.0)
    exact = np.exp(-1.0)
    errors = []
    for steps in (100, 200):
        traj = backward_euler(system, None, np.array([1.0]), 1.0 / steps, steps)
        errors.append(abs(traj.temperature[-1, 0] - exact))
    ratio = errors[0] / errors[1]
    assert 1.8 < ratio < 2.2


@pytest.mark.parametrize("method", [newmark, bathe])
def test_second_order_methods_gain_four_per_halving(method):
    # compare at a quarter period, where the phase error enters linearly
    system = _oscillator()
    errors = []
    for steps in (200, 400):
        traj = method(system, None, np.array([1.0]), np.array([0.0]), 1.0 / steps, steps)
        errors.append(abs(traj.displacement[steps // 4, 0] - np.cos(0.25 * OMEGA)))
    ratio = errors[0] / errors[1]
    assert 3.5 < ratio < 4.5


# ---------------------------------------------------------------------------
# batching, determinism, validation
# ---------------------------------------------------------------------------


def test_batched_columns_match_individual_runs():
    system = assemble_bar_1d(2.0, 1.0, 1.0, 1.0, 3)
    rng = np.random.default_rng(2)
    u0 = rng.normal(size=(3, 4))
    v0 = rng.normal(size=(3, 4))
    load = rng.normal(size=3)
    forcing = lambda t: load * np.cos(t)
    batch = newmark(system, forcing, u0, v0, 0.02, 25)
    for j in range(4):
        single = newmark(system, forcing, u0[:, j], v0[:, j], 0.02, 25)
        assert np.allclose(batch.displacement[:, :, j], single.displacement, rtol=1e-12)
        assert np.allclose(batch.velocity[:, :, j], single.velocity, rtol=1e-12)
    euler_batch = backward_euler(_conduction(), None, np.array([[1.0, -2.0]]), 0.1, 10)
    assert euler_batch.temperature.shape == (11, 1, 2)


def test_integrators_are_deterministic():
    system = assemble_bar_1d(1.0, 1.0, 1.0, 1.0, 4)
    u0, v0 = np.ones(4), np.zeros(4)
    a = bathe(system, None, u0, v0, 0.01, 100)
    b = bathe(system, None, u0, v0, 0.01, 100)
    assert np.array_equal(a.displacement, b.displacement)
    assert np.array_equal(a.velocity, b.velocity)
    assert np.array_equal(a.acceleration, b.acceleration)


def test_kind_mismatch_is_rejected():
    with pytest.raises(ValueError):
        backward_euler(_oscillator(), None, np.array([1.0]), 0.1, 5)
    with pytest.raises(ValueError):
        newmark(_conduction(), None, np.array([1.0]), np.array([0.0]), 0.1, 5)
    with pytest.raises(ValueError):
        bathe(_conduction(), None, np.array([1.0]), np.array([0.0]), 0.1, 5)


def test_step_and_shape_validation():
    system = _oscillator()
    with pytest.raises(ValueError):
        newmark(system, None, np.array([1.0]), np.array([0.0]), 0.0, 5)
    with pytest.raises(DimensionError):
        newmark(system, None, np.array([1.0, 2.0]), np.array([0.0, 0.0]), 0.1, 5)
    with pytest.raises(DimensionError):
        newmark(system, None, np.array([1.0]), np.array([[0.0], [1.0]]), 0.1, 5)


def test_singular_matrices_are_reported():
    singular_mass = SecondOrderSystem(
        "dynamics", np.array([[1.0, 0.0], [0.0, 1.0]]), mass=np.zeros((2, 2))
    )
    with pytest.raises(SingularMatrixError):
        newmark(singular_mass, None, np.zeros(2), np.zeros(2), 0.1, 5)
    degenerate = SecondOrderSystem("heat", np.zeros((2, 2)), damping=np.zeros((2, 2)))
    with pytest.raises(SingularMatrixError):
        backward_euler(degenerate, None, np.zeros(2), 0.1, 5)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 0.0]), temperature=np.zeros((2, 1)))
    with pytest.raises(ValueError):
        Trajectory(
            times=np.array([0.0, 1.0]),
            temperature=np.zeros((2, 1)),
            displacement=np.zeros((2, 1)),
        )
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 1.0]), displacement=np.zeros((2, 1)))
    with pytest.raises(DimensionError):
        Trajectory(times=np.array([0.0, 1.0]), temperature=np.zeros((3, 1)))
    traj = Trajectory(times=np.array([0.0, 0.5, 1.0]), temperature=np.zeros((3, 2)))
    assert traj.steps == 2
    assert traj.delta == pytest.approx(0.5)
