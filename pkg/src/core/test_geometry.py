"""Tests for hyperboloid/ball/half-space conversions, boosts and reflections."""

import math
import unittest

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from src.core.errors import DomainError, InvalidPointError, OutOfModelError
from src.core.geometry import (
    BallPoint,
    Foliation,
    HPoint,
    HalfSpacePoint,
    ball_to_hyperboloid,
    boost,
    cosh_dist_radial,
    dist,
    half_space_to_hyperboloid,
    hyperboloid_to_ball,
    hyperboloid_to_half_space,
    leaf_coordinate,
    lorentz_inner,
    origin,
    point_at,
    radial_distance,
    reflect,
)


coordinate = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
spatial = st.lists(coordinate, min_size=3, max_size=3)
shift = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


def _point(xs) -> HPoint:
    return HPoint.from_array([0.0, *xs])


def _close(a: HPoint, b: HPoint, tol: float = 1e-10) -> bool:
    return bool(np.allclose(a.array, b.array, rtol=tol, atol=tol))


def test_ball_distance_matches_lorentz_oracle() -> None:
    a = ball_to_hyperboloid(BallPoint((0.3, 0.0)))
    b = ball_to_hyperboloid(BallPoint((-0.3, 0.0)))
    oracle = math.acosh(-lorentz_inner(a.coords, b.coords))
    assert dist(a, b) == pytest.approx(oracle, abs=1e-12)
    assert dist(a, b) == pytest.approx(4.0 * math.atanh(0.3), abs=1e-12)


def test_ball_and_half_space_round_trips() -> None:
    p = HPoint.from_array([0.0, 0.4, -1.2, 0.7])
    assert _close(ball_to_hyperboloid(hyperboloid_to_ball(p)), p)
    assert _close(half_space_to_hyperboloid(hyperboloid_to_half_space(p)), p)
    assert hyperboloid_to_ball(origin(3)).coords == (0.0, 0.0, 0.0)


def test_invalid_points_are_rejected() -> None:
    with pytest.raises(InvalidPointError):
        HPoint((2.0, 0.0, 0.0))
    with pytest.raises(InvalidPointError):
        HPoint((-1.0, 0.0, 0.0))
    with pytest.raises(InvalidPointError):
        HPoint((1.0, 0.0))
    with pytest.raises(OutOfModelError):
        BallPoint((0.8, 0.6))
    with pytest.raises(OutOfModelError):
        HalfSpacePoint((0.2, 0.0))


def test_boost_moves_origin_along_the_axis() -> None:
    moved = boost(0.7, origin(3), Foliation(1))
    assert moved.coords == pytest.approx((math.cosh(0.7), math.sinh(0.7), 0.0, 0.0), abs=1e-15)


def test_boost_group_law() -> None:
    f = Foliation(2)
    p = HPoint.from_array([0.0, 0.3, -0.5, 1.1])
    assert _close(boost(0.3, boost(0.4, p, f), f), boost(0.7, p, f), 1e-12)


def test_reflection_fixes_its_leaf_and_is_an_involution() -> None:
    f = Foliation(1)
    on_leaf = boost(0.8, HPoint.from_array([0.0, 0.0, 1.3, -0.4]), f)
    assert leaf_coordinate(on_leaf, f) == pytest.approx(0.8, abs=1e-12)
    assert _close(reflect(0.8, on_leaf, f), on_leaf)
    p = HPoint.from_array([0.0, 1.5, 0.2, -0.3])
    assert _close(reflect(0.8, reflect(0.8, p, f), f), p)
    assert leaf_coordinate(reflect(0.8, p, f), f) == pytest.approx(
        1.6 - leaf_coordinate(p, f), abs=1e-12
    )


def test_foliation_direction_must_exist() -> None:
    with pytest.raises(DomainError):
        Foliation(0)
    with pytest.raises(DomainError):
        boost(0.1, origin(2), Foliation(3))


def test_law_of_cosines_against_constructed_points() -> None:
    assert cosh_dist_radial(1.0, 2.0, math.pi / 2) == pytest.approx(
        math.cosh(1.0) * math.cosh(2.0), rel=1e-14
    )
    for theta in (1e-4, 0.3, math.pi / 2, 2.5, math.pi):
        a = point_at(1.0, 3)
        b = HPoint.from_array(
            [0.0, math.sinh(2.0) * math.cos(theta), math.sinh(2.0) * math.sin(theta), 0.0]
        )
        assert radial_distance(1.0, 2.0, theta) == pytest.approx(dist(a, b), rel=1e-12)
        assert math.cosh(radial_distance(1.0, 2.0, theta)) == pytest.approx(
            cosh_dist_radial(1.0, 2.0, theta), rel=1e-12
        )
    with pytest.raises(DomainError):
        radial_distance(-1.0, 1.0, 0.0)


def test_radial_distance_resolves_nearby_points() -> None:
    rho = radial_distance(5.0, 5.0 + 1e-9, 0.0)
    assert rho == pytest.approx(1e-9, rel=1e-5)


@settings(max_examples=60, deadline=None)
@given(spatial, spatial, shift, st.integers(min_value=1, max_value=3))
def test_boosts_and_reflections_are_isometries(xs, ys, t, k) -> None:
    f = Foliation(k)
    a, b = _point(xs), _point(ys)
    expected = dist(a, b)
    assert dist(boost(t, a, f), boost(t, b, f)) == pytest.approx(expected, rel=1e-10, abs=1e-10)
    assert dist(reflect(t, a, f), reflect(t, b, f)) == pytest.approx(
        expected, rel=1e-10, abs=1e-10
    )


@settings(max_examples=60, deadline=None)
@given(spatial, spatial, spatial)
def test_distance_is_a_metric(xs, ys, zs) -> None:
    a, b, c = _point(xs), _point(ys), _point(zs)
    assert dist(a, a) == 0.0
    assert dist(a, b) == dist(b, a)
    assert dist(a, c) <= dist(a, b) + dist(b, c) + 1e-10


@settings(max_examples=60, deadline=None)
@given(spatial, shift)
def test_boost_shifts_the_leaf_coordinate(xs, t) -> None:
    f = Foliation(1)
    p = _point(xs)
    assert leaf_coordinate(boost(t, p, f), f) == pytest.approx(
        leaf_coordinate(p, f) + t, abs=1e-9
    )


class GeometryTests(unittest.TestCase):
    def test_ball_distance(self) -> None:
        test_ball_distance_matches_lorentz_oracle()

    def test_round_trips(self) -> None:
        test_ball_and_half_space_round_trips()

    def test_invalid_points(self) -> None:
        test_invalid_points_are_rejected()

    def test_boost(self) -> None:
        test_boost_moves_origin_along_the_axis()
        test_boost_group_law()

    def test_reflection(self) -> None:
        test_reflection_fixes_its_leaf_and_is_an_involution()

    def test_foliation(self) -> None:
        test_foliation_direction_must_exist()

    def test_law_of_cosines(self) -> None:
        test_law_of_cosines_against_constructed_points()
        test_radial_distance_resolves_nearby_points()

    def test_isometries(self) -> None:
        test_boosts_and_reflections_are_isometries()
        test_boost_shifts_the_leaf_coordinate()
        test_distance_is_a_metric()
