import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from mmgan.neural import NumericalError
from mmgan.manifold import (
    ManifoldTracker,
    SphereManifold,
    centroid,
    estimate,
    matches,
    radius,
    tracker_update,
)
from oracles import brute_centroid, brute_mean_distance

SQUARE = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]])


def test_centroid_of_square():
    np.testing.assert_allclose(centroid(SQUARE), [1.0, 1.0])


def test_radius_of_square_is_sqrt2():
    # all four corners sit at distance sqrt(2) from (1,1)
    assert radius(SQUARE, [1.0, 1.0]) == pytest.approx(np.sqrt(2.0), abs=1e-12)


def test_radius_is_mean_distance_not_rms():
    pts = np.array([[0.0, 0.0], [4.0, 0.0]])
    c = centroid(pts)
    np.testing.assert_allclose(c, [2.0, 0.0])
    assert radius(pts, c) == pytest.approx(2.0)
    # a cloud with unequal distances: mean(1, 3) = 2, rms would be sqrt(5)
    pts = np.array([[1.0, 0.0], [-1.0, 0.0], [3.0, 0.0], [-3.0, 0.0]])
    assert radius(pts, [0.0, 0.0]) == pytest.approx(2.0)


def test_against_brute_force_oracle():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(17, 5))
    np.testing.assert_allclose(centroid(pts), brute_centroid(pts), rtol=1e-12)
    c = centroid(pts)
    assert radius(pts, c) == pytest.approx(brute_mean_distance(pts, c), rel=1e-12)


def test_centroid_minimizes_sum_squared_distance():
    # grid search over candidate centers: the mean must win
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(12, 2))
    c = centroid(pts)
    best = ((pts - c) ** 2).sum()
    for gx in np.linspace(-2, 2, 21):
        for gy in np.linspace(-2, 2, 21):
            cand = ((pts - np.array([gx, gy])) ** 2).sum()
            assert cand >= best - 1e-9


def test_estimate_bundles_both():
    m = estimate(SQUARE)
    np.testing.assert_allclose(m.centroid, [1.0, 1.0])
    assert m.radius == pytest.approx(np.sqrt(2.0))
    assert m.dim == 2


def test_input_validation():
    with pytest.raises(ValueError, match="empty"):
        centroid(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        centroid(np.zeros(3))
    with pytest.raises(ValueError):
        radius(SQUARE, np.zeros(3))
    with pytest.raises(ValueError):
        SphereManifold(np.array([1.0]), -0.5)
    with pytest.raises(ValueError):
        SphereManifold(np.array([[1.0]]), 0.5)
    with pytest.raises(NumericalError):
        SphereManifold(np.array([np.inf]), 0.5)
    with pytest.raises(NumericalError):
        SphereManifold(np.array([1.0]), float("nan"))


def test_matches_condition():
    a = SphereManifold(np.array([0.0, 0.0]), 1.0)
    b = SphereManifold(np.array([0.3, 0.4]), 1.2)  # centroid gap 0.5, radius gap 0.2
    assert matches(a, b, tol=0.5)
    assert not matches(a, b, tol=0.4)
    assert not matches(a, b, tol=0.19) is True
    assert matches(a, a, tol=0.0)
    with pytest.raises(ValueError, match="dimension"):
        matches(a, SphereManifold(np.zeros(3), 1.0), tol=1.0)
    with pytest.raises(ValueError):
        matches(a, b, tol=-1.0)


def test_tracker_first_update_adopts_mini():
    t = ManifoldTracker(delta=0.9)
    assert not t.initialized
    m = SphereManifold(np.array([0.0, 0.0]), 1.0)
    out = tracker_update(t, m)
    assert t.initialized
    assert out is m


def test_tracker_blend_sequence():
    t = ManifoldTracker(delta=0.9)
    tracker_update(t, SphereManifold(np.array([0.0, 0.0]), 1.0))
    out = tracker_update(t, SphereManifold(np.array([1.0, 1.0]), 2.0))
    np.testing.assert_allclose(out.centroid, [0.1, 0.1])
    assert out.radius == pytest.approx(1.1)
    assert t.current is out


def test_tracker_delta_zero_tracks_mini_exactly():
    t = ManifoldTracker(delta=0.0)
    tracker_update(t, SphereManifold(np.array([5.0]), 3.0))
    out = tracker_update(t, SphereManifold(np.array([-2.0]), 0.5))
    np.testing.assert_allclose(out.centroid, [-2.0])
    assert out.radius == pytest.approx(0.5)


def test_tracker_validation():
    with pytest.raises(ValueError):
        ManifoldTracker(delta=1.0)
    with pytest.raises(ValueError):
        ManifoldTracker(delta=-0.1)
    t = ManifoldTracker(delta=0.5)
    tracker_update(t, SphereManifold(np.zeros(2), 1.0))
    with pytest.raises(ValueError, match="dimension"):
        tracker_update(t, SphereManifold(np.zeros(3), 1.0))


def test_tracker_method_alias():
    t = ManifoldTracker(delta=0.5)
    t.update(SphereManifold(np.zeros(1), 2.0))
    out = t.update(SphereManifold(np.zeros(1), 4.0))
    assert out.radius == pytest.approx(3.0)


points_strategy = hnp.arrays(
    np.float64, st.tuples(st.integers(1, 8), st.integers(1, 4)),
    elements=st.floats(-10, 10, allow_nan=False))


@settings(deadline=None, max_examples=60)
@given(points_strategy)
def test_radius_nonnegative_and_zero_iff_identical(pts):
    m = estimate(pts)
    assert m.radius >= 0.0
    if np.ptp(pts, axis=0).max(initial=0.0) == 0.0:
        assert m.radius == pytest.approx(0.0, abs=1e-12)


@settings(deadline=None, max_examples=60)
@given(points_strategy, st.floats(-5, 5), st.floats(-5, 5))
def test_translation_equivariance(pts, tx, ty):
    shift = np.resize(np.array([tx, ty]), pts.shape[1])
    a = estimate(pts)
    b = estimate(pts + shift)
    np.testing.assert_allclose(b.centroid, a.centroid + shift, atol=1e-9)
    assert b.radius == pytest.approx(a.radius, abs=1e-9)


@settings(deadline=None, max_examples=60)
@given(points_strategy, st.floats(0.1, 7.0))
def test_radius_scales_linearly(pts, k):
    a = estimate(pts)
    b = estimate(pts * k)
    assert b.radius == pytest.approx(k * a.radius, rel=1e-9, abs=1e-9)


def test_radius_rotation_invariant():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(9, 2))
    th = 0.7
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    a = estimate(pts)
    b = estimate(pts @ rot.T)
    assert b.radius == pytest.approx(a.radius, rel=1e-12)
