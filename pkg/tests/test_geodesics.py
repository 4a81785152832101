import logging

import networkx as nx
import numpy as np
import pytest

from artin_deligne.core import BudgetExceededError, GeometryError
from artin_deligne.geodesics import (LinkPoint, extended_gallery, gallery, geodesic, link_distance, point_at,
                                     vertex_visibility, visible_targets)
from artin_deligne.hyp_trig import attach, develop_chain, distance, normalize, orientation
from artin_deligne.ph_complex import CPoint, heptagon_star, two_star

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

ANGLE = 0.98


@pytest.fixture(scope="module")
def star():
    return heptagon_star(ANGLE)


def developed_distance(Y, x, y):
    """Distance between points of triangles 0 and 1 after unfolding them along their common spoke."""
    placed = develop_chain([Y.shapes[0], Y.shapes[1]], [(1, 2)])
    px = normalize(sum(w * v for w, v in zip(x.bary, placed[0])))
    py = normalize(sum(w * v for w, v in zip(y.bary, placed[1])))
    return distance(px, py)


def test_same_triangle(star):
    x, y = star.point(0, [0.6, 0.3, 0.1]), star.point(0, [0.1, 0.2, 0.7])
    gamma = geodesic(star, x, y)
    expected = distance(star.position(x), star.position(y))
    assert gamma.length == pytest.approx(expected, rel=1e-12)
    assert gamma.bends == () and len(gamma.segments) == 1
    assert gamma.locally_geodesic


def test_zero_length(star):
    x = star.point(2, [0.2, 0.3, 0.5])
    gamma = geodesic(star, x, x)
    assert gamma.length == 0.0 and gamma.pieces == ()


def test_straight_across_a_spoke(star):
    x, y = star.point(0, [0.2, 0.7, 0.1]), star.point(1, [0.2, 0.1, 0.7])
    gamma = geodesic(star, x, y)
    assert gamma.bends == ()
    assert gamma.segments[0].chain == (0, 1)
    assert gamma.length == pytest.approx(developed_distance(star, x, y), rel=1e-9)
    assert sum(p.length for p in gamma.pieces) == pytest.approx(gamma.length, rel=1e-9)
    crossing = gamma.segments[0].crossings[0]
    assert star.carrier(crossing) == frozenset((0, 2)), "the segment crosses the spoke interior"


def test_bend_at_the_cone_point(star):
    # x on the spoke towards vertex 1, y on the bisector of triangle 3: both ways round are 3.5 * angle > pi
    x = star.point(0, [0.5, 0.5, 0.0])
    y = star.point(3, [0.4, 0.3, 0.3])
    gamma = geodesic(star, x, y)
    via_centre = distance(star.position(x), star.positions(0)[0]) + distance(star.position(y), star.positions(3)[0])
    logger.info(f"bend angles {gamma.bend_angles}, length {gamma.length} vs {via_centre}")
    assert gamma.bends == (0,)
    assert gamma.bend_angles[0] == pytest.approx(3.5 * ANGLE, abs=1e-9)
    assert gamma.locally_geodesic
    assert gamma.length == pytest.approx(via_centre, rel=1e-9)


def test_extended_gallery_at_the_cone_point(star):
    x = star.point(0, [0.5, 0.5, 0.0])
    y = star.point(3, [0.4, 0.3, 0.3])
    gamma = geodesic(star, x, y)
    narrow = extended_gallery(star, gamma, 0.05)
    assert narrow.extensions[0].triangles == ()
    assert narrow.extensions[0].unique(0.05)
    wide = extended_gallery(star, gamma, 0.2)
    ext = wide.extensions[0]
    assert ext.triangles, "a link path shorter than pi + 2 alpha adds its triangles"
    assert not ext.unique(0.2), "both ways around the cone point have the same length"
    assert gallery(star, gamma).simplices <= wide.simplices
    assert frozenset((0,)) in gallery(star, gamma).carriers


def test_random_geodesics_are_consistent(star):
    rng = np.random.RandomState(11)
    centre = star.vertex_point(0)
    for _ in range(25):
        x, y = star.random_point(rng), star.random_point(rng)
        gamma = geodesic(star, x, y)
        back = geodesic(star, y, x)
        dx = geodesic(star, x, centre).length
        dy = geodesic(star, centre, y).length
        assert gamma.length == pytest.approx(back.length, rel=1e-9, abs=1e-12)
        assert gamma.length <= dx + dy + 1e-9, "the path through the centre is never shorter"
        assert gamma.length >= abs(dx - dy) - 1e-9
        assert gamma.locally_geodesic
        assert set(gamma.bends) <= {0}, "rim vertices have too little angle to bend at"


def test_point_at_is_at_the_right_distance(star):
    x = star.point(0, [0.5, 0.5, 0.0])
    y = star.point(3, [0.4, 0.3, 0.3])
    gamma = geodesic(star, x, y)
    for fraction in (0.0, 0.25, 0.5, 0.9, 1.0):
        s = fraction * gamma.length
        p = point_at(star, gamma, s)
        assert geodesic(star, x, p).length == pytest.approx(s, abs=1e-8)
        assert geodesic(star, p, y).length == pytest.approx(gamma.length - s, abs=1e-8)


def test_vertex_visibility(star):
    table = vertex_visibility(star)
    assert set(table[0]) == set(range(1, 8)), "the centre sees every rim vertex"
    assert 3 in table[1] and table[1][3].chain == (0, 1)
    assert set(table[1]) == set(range(8)) - {1}, "rim vertices are at most 3 * angle < pi apart around the centre"
    assert star.cache["visibility"] is table


def test_visibility_cap(star):
    with pytest.raises(BudgetExceededError):
        visible_targets(star, star.vertex_point(1), {u: star.vertex_point(u) for u in range(2, 8)}, cap=1)


def test_link_distance(star):
    assert link_distance(star, 0, LinkPoint(0, 0.0), LinkPoint(3, 0.49)) == pytest.approx(3.5 * ANGLE)
    assert link_distance(star, 0, LinkPoint(0, 0.2), LinkPoint(0, 0.5)) == pytest.approx(0.3)
    assert link_distance(star, 1, LinkPoint(0, 0.0), LinkPoint(0, 0.0)) == 0.0


def test_rejects_points_outside(star):
    with pytest.raises(GeometryError):
        geodesic(star, CPoint(0, (0.5, 0.6, -0.1)), star.point(1, [1, 1, 1]))
    with pytest.raises(GeometryError):
        geodesic(star, CPoint(40, (1.0, 0.0, 0.0)), star.point(1, [1, 1, 1]))


def test_two_star_geodesic_between_rim_vertices():
    Y = two_star()
    gamma = geodesic(Y, Y.vertex_point(4), Y.vertex_point(9))
    assert gamma.length > 0
    assert gamma.locally_geodesic
    g2 = gallery(Y, gamma)
    assert g2.vertex_count() >= 2


def _strictly_apart(p, q, a, b) -> bool:
    """a and b lie strictly on opposite sides of the line through p and q."""
    scale = np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(p) * np.linalg.norm(q)
    return orientation(p, q, a) * orientation(p, q, b) < -1e-20 * scale


def chain_lengths(Y, source, targets):
    """
    Shortest length from source to each target along some simple chain of triangles.

    Every chain starting at a triangle that contains source is developed into the plane; the
    candidate path goes straight from source to target through the points where that line
    meets each glued edge, so every candidate is the length of a real path in Y.
    """
    best = {}
    carriers = {key: Y.carrier(p) for key, p in targets.items()}

    def visit(chain, placed, crossed, px):
        t = chain[-1]
        for key, carrier in carriers.items():
            if not carrier <= frozenset(Y.triangles[t]):
                continue
            py = Y.position(Y.transfer(targets[key], t), placed)
            if distance(px, py) < 1e-12:
                continue
            points = [px]
            for a, b in crossed:
                if not _strictly_apart(px, py, a, b):
                    break
                z = np.cross(np.cross(px, py), np.cross(a, b))
                points.append(normalize(z if z[0] > 0 else -z))
            else:
                points.append(py)
                length = sum(distance(u, w) for u, w in zip(points, points[1:]))
                best[key] = min(best.get(key, np.inf), length)
        pos = dict(zip(Y.triangles[t], placed))
        for i in range(3):
            edge = Y.edge_key(t, i)
            for t2, f in Y.edges[edge]:
                if t2 in chain:
                    continue
                tri2 = Y.triangles[t2]
                placed2 = attach(pos[tri2[(f + 1) % 3]], pos[tri2[(f + 2) % 3]], placed[i], Y.shapes[t2], f,
                                 Y.tol * 10)
                a, b = (pos[v] for v in sorted(edge))
                visit(chain + (t2,), placed2, crossed + ((a, b),), px)

    for t in Y.star(Y.carrier(source)):
        placed = Y.positions(t)
        visit((t,), placed, (), Y.position(Y.transfer(source, t), placed))
    return best


def chain_distance(Y, x, y, vertex_table):
    """Shortest path over straight chain segments between x, y and the vertices."""
    graph = nx.Graph()
    for v, row in vertex_table.items():
        for u, length in row.items():
            graph.add_edge(v, u, length=length)
    vertices = {v: Y.vertex_point(v) for v in Y.vertices}
    for key, length in chain_lengths(Y, x, {**vertices, "y": y}).items():
        graph.add_edge("x", key, length=length)
    for key, length in chain_lengths(Y, y, vertices).items():
        graph.add_edge("y", key, length=length)
    return nx.dijkstra_path_length(graph, "x", "y", weight="length")


@pytest.mark.parametrize("builder", [
    heptagon_star,
    pytest.param(two_star, marks=pytest.mark.slow),
])
def test_geodesic_lengths_match_all_chains(builder):
    Y = builder(ANGLE)
    vertex_table = {v: chain_lengths(Y, Y.vertex_point(v), {u: Y.vertex_point(u) for u in Y.vertices if u != v})
                    for v in Y.vertices}
    rng = np.random.RandomState(23)
    for _ in range(100):
        x, y = Y.random_point(rng), Y.random_point(rng)
        expected = chain_distance(Y, x, y, vertex_table)
        assert geodesic(Y, x, y).length == pytest.approx(expected, abs=1e-6), f"{Y.name}: {x} to {y}"
