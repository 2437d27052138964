"""Set representations and the lazy expression calculus."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import MultiPoint

from reachfem.errors import DimensionError, EmptySetError
from reachfem.sets import (
    Hyperrectangle,
    Interval,
    Zonotope,
    box_approximation,
    cartesian_product,
    convex_hull,
    intersect,
    linear_map,
    minkowski_sum,
    support,
    support_batch,
    symmetric_interval_hull,
)


# ---------------------------------------------------------------------------
# concrete leaves
# ---------------------------------------------------------------------------


def test_hyperrectangle_basics():
    box = Hyperrectangle([1.0, -2.0], [0.5, 0.0])
    assert box.dim == 2
    assert np.array_equal(box.lo, [0.5, -2.0])
    assert np.array_equal(box.hi, [1.5, -2.0])


def test_hyperrectangle_rejects_negative_radius():
    with pytest.raises(ValueError):
        Hyperrectangle([0.0], [-1e-12])


def test_hyperrectangle_rejects_length_mismatch():
    with pytest.raises(DimensionError):
        Hyperrectangle([0.0, 1.0], [0.1])


def test_support_singleton_at_origin_is_zero():
    z = Zonotope.singleton([0.0, 0.0])
    assert support(z, [1.0, 0.0]) == 0.0


def test_support_axis_aligned_box_zonotope():
    z = Zonotope([1.0, 0.0], np.diag([0.1, 0.1]))
    assert support(z, [1.0, 0.0]) == pytest.approx(1.1, abs=1e-15)


def test_support_oscillator_zonotope_step_six():
    # sixth reach set of the sample oscillator run, queried along +e1
    z = Zonotope(
        [-0.16976461, -12.24853154],
        np.array([[0.0, 0.17772235], [-1.61711795, 0.0]]),
    )
    assert support(z, [1.0, 0.0]) == pytest.approx(0.00795774, abs=1e-8)


def test_support_dimension_mismatch():
    z = Zonotope.singleton([0.0, 0.0])
    with pytest.raises(DimensionError):
        support(z, [1.0, 0.0, 0.0])


def test_box_to_zonotope_preserves_canonical_supports():
    box = Hyperrectangle([1.0, -3.0, 0.25], [0.5, 0.0, 2.0])
    z = box.to_zonotope()
    for i in range(3):
        for sign in (1.0, -1.0):
            d = np.zeros(3)
            d[i] = sign
            assert support(z, d) == support(box, d)


def test_interval_operations():
    iv = Interval(-1.0, 3.0)
    assert iv.width == 4.0
    assert iv.midpoint == 1.0
    assert iv.contains(0.0)
    assert not iv.contains(3.5)
    clipped = iv.intersect(Interval(2.0, 5.0))
    assert (clipped.lo, clipped.hi) == (2.0, 3.0)
    assert iv.intersect(Interval(4.0, 5.0)) is None
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)


# ---------------------------------------------------------------------------
# lazy expressions
# ---------------------------------------------------------------------------


def test_linear_map_of_singleton():
    phi = np.array([[0.0, 1.0], [-2.0, 0.0]])
    x0 = np.array([1.0, 0.5])
    mapped = linear_map(phi, Zonotope.singleton(x0))
    for d in ([1.0, 0.0], [0.0, 1.0], [0.3, -0.7]):
        assert support(mapped, d) == pytest.approx(np.dot(d, phi @ x0), rel=1e-14)


def test_minkowski_sum_of_intervals():
    one = Hyperrectangle([0.0], [1.0])
    assert support(minkowski_sum(one, one), [1.0]) == 2.0


def test_convex_hull_support_is_max():
    a = Hyperrectangle([0.0, 0.0], [1.0, 1.0])
    b = Hyperrectangle([3.0, 0.0], [0.5, 0.5])
    ch = convex_hull(a, b)
    assert support(ch, [1.0, 0.0]) == 3.5
    assert support(ch, [-1.0, 0.0]) == 1.0


def test_cartesian_product_of_boxes_concatenates():
    left = Hyperrectangle([1.0, 0.0], [0.1, 0.1])
    right = Interval(-0.1, 0.1)
    prod = cartesian_product([left, right])
    box = box_approximation(prod)
    assert np.allclose(box.center, [1.0, 0.0, 0.0])
    assert np.allclose(box.radius, [0.1, 0.1, 0.1])


def test_cartesian_product_of_singletons():
    prod = cartesian_product([Zonotope.singleton([1.0]), Zonotope.singleton([2.0, 3.0])])
    box = box_approximation(prod)
    assert np.allclose(box.center, [1.0, 2.0, 3.0])
    assert np.allclose(box.radius, 0.0)


def test_cartesian_product_rejects_empty_list():
    with pytest.raises(ValueError):
        cartesian_product([])


def test_initial_condition_product_matches_example_box():
    # U0 x V0 = [0.9, 1.1] x [-0.1, 0.1]
    prod = cartesian_product([Interval(0.9, 1.1), Interval(-0.1, 0.1)])
    box = box_approximation(prod)
    assert np.allclose(box.center, [1.0, 0.0])
    assert np.allclose(box.radius, [0.1, 0.1])


# ---------------------------------------------------------------------------
# box approximation and symmetric hull
# ---------------------------------------------------------------------------


def test_box_approximation_idempotent_on_boxes():
    box = Hyperrectangle([2.0, -1.0], [0.3, 0.7])
    again = box_approximation(box)
    assert np.array_equal(again.center, box.center)
    assert np.array_equal(again.radius, box.radius)


def test_box_approximation_of_rotated_square():
    quarter = np.array([[0.0, -1.0], [1.0, 0.0]])
    square = Hyperrectangle([0.0, 0.0], [1.0, 1.0])
    rotated = box_approximation(linear_map(quarter, square))
    assert np.allclose(rotated.center, 0.0, atol=1e-15)
    assert np.allclose(rotated.radius, 1.0)


def test_box_approximation_empty_intersection_raises():
    a = Hyperrectangle([0.0], [0.1])
    b = Hyperrectangle([1.0], [0.1])
    with pytest.raises(EmptySetError):
        box_approximation(intersect(a, b))


def test_symmetric_interval_hull_of_shifted_box():
    hull = symmetric_interval_hull(Hyperrectangle([1.0, 1.0], [0.5, 0.5]))
    assert np.allclose(hull.center, 0.0)
    assert np.allclose(hull.radius, [1.5, 1.5])


def test_symmetric_interval_hull_fixed_point():
    box = Hyperrectangle([0.0, 0.0], [0.25, 2.0])
    hull = symmetric_interval_hull(box)
    assert np.allclose(hull.radius, box.radius)


# ---------------------------------------------------------------------------
# randomized properties
# ---------------------------------------------------------------------------


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_support_pairs_are_nonnegative(seed):
    rng = np.random.default_rng(seed)
    n, p = int(rng.integers(1, 5)), int(rng.integers(0, 4))
    z = Zonotope(rng.normal(size=n), rng.normal(size=(n, p)))
    d = rng.normal(size=n)
    assert support(z, d) + support(z, -d) >= -1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_linear_map_adjoint_identity(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    z = Zonotope(rng.normal(size=n), rng.normal(size=(n, int(rng.integers(0, 5)))))
    mat = rng.normal(size=(n, n))
    d = rng.normal(size=n)
    lhs = support(linear_map(mat, z), d)
    rhs = support(z, mat.T @ d)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_sampled_points_respect_support():
    rng = np.random.default_rng(7)
    z = Zonotope(rng.normal(size=3), rng.normal(size=(3, 5)))
    for _ in range(1000):
        xi = rng.uniform(-1.0, 1.0, size=5)
        x = z.center + z.generators @ xi
        d = rng.normal(size=3)
        assert d @ x <= support(z, d) + 1e-12


def _zonotope_polygon(z):
    signs = np.array(np.meshgrid(*([[-1.0, 1.0]] * z.generators.shape[1]))).T.reshape(
        -1, z.generators.shape[1]
    )
    points = z.center + signs @ z.generators.T
    return MultiPoint([tuple(p) for p in points]).convex_hull


def test_intersection_support_bounds_true_support():
    # min-of-children is only an upper bound; compare against exact polygon
    # intersections in 2D
    rng = np.random.default_rng(42)
    tested = 0
    while tested < 20:
        a = Zonotope(rng.normal(scale=0.5, size=2), rng.normal(size=(2, 3)))
        b = Zonotope(rng.normal(scale=0.5, size=2), rng.normal(size=(2, 3)))
        poly = _zonotope_polygon(a).intersection(_zonotope_polygon(b))
        if poly.is_empty or poly.area < 1e-9:
            continue
        tested += 1
        lazy = intersect(a, b)
        verts = np.asarray(poly.exterior.coords)
        for _ in range(10):
            d = rng.normal(size=2)
            exact = float(np.max(verts @ d))
            assert support(lazy, d) >= exact - 1e-9


def test_support_batch_matches_scalar_support():
    rng = np.random.default_rng(3)
    box = Hyperrectangle(rng.normal(size=4), rng.uniform(0.1, 1.0, size=4))
    expr = minkowski_sum(linear_map(rng.normal(size=(4, 4)), box), box)
    dirs = rng.normal(size=(12, 4))
    batch = support_batch(expr, dirs)
    for row, value in zip(dirs, batch):
        assert value == pytest.approx(support(expr, row), rel=1e-13)
