import logging
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from artin_deligne import hyp_trig as ht
from artin_deligne.core import GeometryError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

angles = st.floats(min_value=0.2, max_value=1.2)


def assert_shape(shape, tol=1e-8):
    """Checks every shape invariant and that the placed triangle realizes the shape."""
    assert shape.violations(tol) == [], f"inconsistent shape {shape}"
    p = ht.place_triangle(shape)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        side = ht.distance(p[j], p[k])
        angle = ht.angle_at(p[i], p[j], p[k])
        assert abs(side - shape.sides[i]) < tol, f"side {i}: placed {side} vs {shape.sides[i]}"
        assert abs(angle - shape.angles[i]) < tol, f"angle {i}: placed {angle} vs {shape.angles[i]}"
    assert ht.orientation(*p) > 0, "place_triangle must be counterclockwise"


def test_distance_from_origin():
    for r in (0.1, 1.0, 3.5):
        p = ht.from_polar(r, 0.7)
        assert abs(ht.distance(ht.origin(), p) - r) < 1e-12


def test_acosh_clamp():
    p = ht.origin()
    assert ht.distance(p, p) == 0.0
    with pytest.raises(GeometryError):
        ht._acosh(0.5)


def test_isometry_to_origin():
    p = ht.from_polar(1.3, 2.1)
    q = ht.from_polar(0.4, -0.3)
    M = ht.isometry_to_origin(p)
    assert np.allclose(M @ p, ht.origin(), atol=1e-12)
    assert abs(ht.distance(M @ p, M @ q) - ht.distance(p, q)) < 1e-12
    x = ht.from_polar(0.9, 1.0)
    assert np.sign(ht.orientation(M @ p, M @ q, M @ x)) == np.sign(ht.orientation(p, q, x))


def test_equilateral_right_angles():
    shape = ht.equilateral(math.pi / 4)
    assert_shape(shape)
    assert abs(shape.area - math.pi / 4) < 1e-12
    assert len(set(round(s, 12) for s in shape.sides)) == 1


def test_solve_aaa_rejects_euclidean():
    with pytest.raises(GeometryError):
        ht.solve_aaa(math.pi / 3, math.pi / 3, math.pi / 3)


def test_right_triangle():
    shape = ht.right_triangle(0.8, 0.5)
    assert_shape(shape)
    assert shape.angles[1] == math.pi / 2
    assert abs(shape.sides[2] - 0.8) < 1e-12


def test_euclidean_triangle():
    shape = ht.euclidean_triangle([math.pi / 2, math.pi / 3, math.pi / 6], 1.0)
    assert shape.violations() == []
    assert abs(shape.sides[0] - 2.0) < 1e-12, "hypotenuse of the 30-60-90 triangle with short leg 1"


@settings(max_examples=60, deadline=None)
@given(angles, angles, angles)
def test_angle_angle_side_recovers_third_angle(a, b, c):
    assume(a + b + c < math.pi - 0.05)
    reference = ht.solve_aaa(a, b, c)
    shape = ht.solve_angle_angle_side(b, c, reference.sides[2])
    assert_shape(shape)
    assert abs(shape.angles[0] - a) < 1e-8, f"expected alpha {a}, got {shape.angles[0]}"


@settings(max_examples=60, deadline=None)
@given(angles, angles, angles)
def test_sss_inverts_aaa(a, b, c):
    assume(a + b + c < math.pi - 0.05)
    reference = ht.solve_aaa(a, b, c)
    shape = ht.solve_sss(*reference.sides)
    assert np.allclose(shape.angles, reference.angles, atol=1e-8)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1.0), (2.0, 1.5, 1.0), (1.0, 1.0, -1.0)])
def test_angle_angle_side_rejects(args):
    with pytest.raises(GeometryError):
        ht.solve_angle_angle_side(*args)


def test_sss_triangle_inequality():
    with pytest.raises(GeometryError):
        ht.solve_sss(1.0, 1.0, 2.5)


def test_attach_puts_apex_across_the_edge():
    shape = ht.equilateral(1.0)
    p = ht.place_triangle(shape)
    placed = ht.attach(p[2], p[1], p[0], shape, 0)
    apex = placed[0]
    assert ht.orientation(p[1], p[2], apex) * ht.orientation(p[1], p[2], p[0]) < 0
    assert abs(ht.distance(apex, p[1]) - shape.sides[2]) < 1e-9


def test_develop_chain_fan_closes_up():
    """Eight right-angled equilateral triangles around a vertex close to a full turn plus one sheet."""
    shape = ht.equilateral(math.pi / 4)
    placed = ht.develop_chain([shape] * 8, [(1, 2)] * 7)
    centre = placed[0][0]
    total = sum(ht.angle_at(centre, tri[1], tri[2]) for tri in placed)
    assert all(np.allclose(tri[0], centre, atol=1e-9) for tri in placed), "every triangle shares vertex 0"
    assert abs(total - 2 * math.pi) < 1e-9
    assert np.allclose(placed[-1][2], placed[0][1], atol=1e-8), "the fan closes after eight triangles"


def test_develop_chain_length_mismatch():
    with pytest.raises(GeometryError):
        ht.develop_chain([ht.equilateral(1.0), ht.equilateral(0.5)], [(0, 0)])


def test_segment_distance():
    a, b = ht.origin(), ht.from_polar(2.0, 0.0)
    p = ht.shoot(ht.from_polar(1.0, 0.0), b, math.pi / 2, 0.5)
    assert abs(ht.segment_distance(p, a, b) - 0.5) < 1e-9
    far = ht.from_polar(1.0, math.pi)
    assert abs(ht.segment_distance(far, a, b) - 1.0) < 1e-9
