"""
Geodesics, galleries and extended galleries in a PHComplex.

A geodesic is a chain of straight segments that cross edges in their interiors
and bend only at vertices. Straight segments are found by developing triangle
chains around a source into the hyperbolic plane and keeping the wedge of
directions that still crosses every edge of the chain; the geodesic is then a
shortest path in the visibility graph on {x, y} and the vertices.
"""
import logging
import math
from typing import Dict, FrozenSet, Hashable, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .core import BudgetExceededError, GeometryError
from .hyp_trig import HPoint, angle_at, attach, distance, isometry_to_origin, normalize, orientation, origin, point_along
from .ph_complex import CPoint, PHComplex, Simplex, closure

logger = logging.getLogger(__name__)

CHAIN_CAP = 10_000
ORIENT_TOL = 1e-12
LINK_TOL = 1e-12
LOCAL_TOL = 1e-9


class Segment(NamedTuple):
    """Straight piece between two points, crossing only edge interiors."""
    start: CPoint
    end: CPoint
    length: float
    chain: Tuple[int, ...]          # triangles met, in order
    crossings: Tuple[CPoint, ...]   # crossing point of each consecutive pair of the chain

    def reversed(self) -> "Segment":
        return Segment(self.end, self.start, self.length, self.chain[::-1], self.crossings[::-1])


class Piece(NamedTuple):
    tri: int
    start: CPoint
    end: CPoint
    length: float


class LinkPoint(NamedTuple):
    """Direction at a vertex v: triangle t at v and the angle from the edge (v, vertex i+1)."""
    tri: int
    angle: float


class Geodesic(NamedTuple):
    x: CPoint
    y: CPoint
    length: float
    segments: Tuple[Segment, ...]
    bends: Tuple[int, ...]
    pieces: Tuple[Piece, ...]
    bend_angles: Tuple[float, ...]  # link distance between the two directions at each bend

    @property
    def locally_geodesic(self) -> bool:
        return all(a >= math.pi - LOCAL_TOL for a in self.bend_angles)

    def to_record(self) -> Dict:
        return {
            "length": self.length,
            "bends": list(self.bends),
            "bend_angles": list(self.bend_angles),
            "pieces": [{"triangle": p.tri, "start": list(p.start.bary), "end": list(p.end.bary),
                        "length": p.length} for p in self.pieces],
            "locally_geodesic": self.locally_geodesic,
        }


class VertexExtension(NamedTuple):
    vertex: int
    link_length: float              # link distance between the directions of the geodesic
    second_length: Optional[float]  # the next shortest link path, certifying uniqueness
    triangles: Tuple[int, ...]      # triangles of the short link path, empty when none is short

    def unique(self, alpha: float) -> bool:
        return self.second_length is None or self.second_length >= math.pi + 2 * alpha


class Gallery(NamedTuple):
    carriers: FrozenSet[Simplex]    # simplices containing a point of the geodesic in their interior
    simplices: FrozenSet[Simplex]   # the subcomplex they span
    extensions: Tuple[VertexExtension, ...] = ()

    def vertex_count(self) -> int:
        return sum(1 for s in self.simplices if len(s) == 1)

    def triangles(self) -> FrozenSet[Simplex]:
        return frozenset(s for s in self.simplices if len(s) == 3)


class _Wedge(NamedTuple):
    left: HPoint
    right: HPoint
    ends: Tuple[Tuple[int, HPoint], Tuple[int, HPoint]]  # the edge to cross
    far: HPoint                                           # vertex of the current triangle off that edge
    chain: Tuple[int, ...]
    frames: Tuple[List[HPoint], ...]                      # developed vertices of each chain triangle
    crossed: Tuple[Tuple[HPoint, HPoint, Simplex], ...]


def _side(o: HPoint, a: HPoint, b: HPoint) -> float:
    return orientation(o, a, b) / (np.linalg.norm(a) * np.linalg.norm(b))


def _inside(o: HPoint, left: HPoint, right: HPoint, x: HPoint) -> bool:
    return _side(o, left, x) > ORIENT_TOL and _side(o, x, right) > ORIENT_TOL


def _crossing(o: HPoint, x: HPoint, a: HPoint, b: HPoint) -> HPoint:
    z = np.cross(np.cross(o, x), np.cross(a, b))
    if z[0] < 0:
        z = -z
    return normalize(z)


def _segment(Y: PHComplex, source: CPoint, target: CPoint, o: HPoint, x: HPoint,
             chain: Tuple[int, ...], frames, crossed) -> Segment:
    crossings = []
    for k, (a, b, edge) in enumerate(crossed):
        z = _crossing(o, x, a, b)
        crossings.append(Y.from_position(chain[k], frames[k], z, snap=edge))
    return Segment(source, target, distance(o, x), chain, tuple(crossings))


def visible_targets(Y: PHComplex, source: CPoint, targets: Dict[Hashable, CPoint],
                    cap: int = CHAIN_CAP) -> Dict[Hashable, Segment]:
    """
    Straight segments from source to every target it sees through edge interiors.

    Raises:
        BudgetExceededError: more than cap chain extensions were needed.
    """
    found: Dict[Hashable, Segment] = {}
    carriers = {key: Y.carrier(p) for key, p in targets.items()}
    src_carrier = Y.carrier(source)
    o = origin()
    expansions = 0

    def record(key, segment):
        if segment.length > 1e-12 and (key not in found or segment.length < found[key].length):
            found[key] = segment

    stack: List[_Wedge] = []
    for t in Y.star(src_carrier):
        start = Y.transfer(source, t)
        iso = isometry_to_origin(Y.position(start))
        placed = [iso @ v for v in Y.positions(t)]
        tri = Y.triangles[t]
        for key, carrier in carriers.items():
            if carrier <= frozenset(tri):
                x = Y.position(Y.transfer(targets[key], t), placed)
                record(key, Segment(source, targets[key], distance(o, x), (t,), ()))
        for i in range(3):
            edge = Y.edge_key(t, i)
            if src_carrier <= edge:
                continue
            ia, ib = (i + 1) % 3, (i + 2) % 3
            a, b = placed[ia], placed[ib]
            side = _side(o, a, b)
            if abs(side) <= ORIENT_TOL:
                continue
            left, right = (a, b) if side > 0 else (b, a)
            stack.append(_Wedge(left, right, ((tri[ia], a), (tri[ib], b)), placed[i], (t,), (placed,), ()))

    while stack:
        wedge = stack.pop()
        (id_a, pa), (id_b, pb) = wedge.ends
        edge = frozenset((id_a, id_b))
        for t2, f in Y.edges[edge]:
            if t2 in wedge.chain:
                continue
            expansions += 1
            if expansions > cap:
                raise BudgetExceededError(f"visibility search from {source} exceeded {cap} chain extensions")
            tri2 = Y.triangles[t2]
            pos = {id_a: pa, id_b: pb}
            placed2 = attach(pos[tri2[(f + 1) % 3]], pos[tri2[(f + 2) % 3]], wedge.far, Y.shapes[t2], f, Y.tol * 10)
            chain = wedge.chain + (t2,)
            frames = wedge.frames + (placed2,)
            crossed = wedge.crossed + ((pa, pb, edge),)
            for key, carrier in carriers.items():
                if carrier <= frozenset(tri2) and not carrier <= edge:
                    x = Y.position(Y.transfer(targets[key], t2), placed2)
                    if _inside(o, wedge.left, wedge.right, x):
                        record(key, _segment(Y, source, targets[key], o, x, chain, frames, crossed))

            c_id, c = tri2[f], placed2[f]
            id_left = id_a if _side(o, pa, pb) > 0 else id_b
            id_right = id_b if id_left == id_a else id_a
            left_of = _side(o, wedge.left, c) > ORIENT_TOL
            right_of = _side(o, c, wedge.right) > ORIENT_TOL
            p_left, p_right = pos[id_left], pos[id_right]
            if left_of:
                # rays between the left boundary and c leave through the edge (left end, c)
                stack.append(_Wedge(wedge.left, c if right_of else wedge.right,
                                    ((id_left, p_left), (c_id, c)), p_right, chain, frames, crossed))
            if right_of:
                stack.append(_Wedge(c if left_of else wedge.left, wedge.right,
                                    ((c_id, c), (id_right, p_right)), p_left, chain, frames, crossed))
    logger.debug(f"Visibility from {source}: {len(found)} targets, {expansions} chain extensions")
    return found


def vertex_visibility(Y: PHComplex, cap: int = CHAIN_CAP) -> Dict[int, Dict[int, Segment]]:
    """Vertex-to-vertex straight segments, cached on the complex."""
    if "visibility" not in Y.cache:
        table = {}
        for v in Y.vertices:
            targets = {u: Y.vertex_point(u) for u in Y.vertices if u != v}
            table[v] = visible_targets(Y, Y.vertex_point(v), targets, cap)
        Y.cache["visibility"] = table
    return Y.cache["visibility"]


def pieces(Y: PHComplex, segment: Segment) -> List[Piece]:
    points = [segment.start] + list(segment.crossings) + [segment.end]
    result = []
    for k, t in enumerate(segment.chain):
        a, b = Y.transfer(points[k], t), Y.transfer(points[k + 1], t)
        result.append(Piece(t, a, b, distance(Y.position(a), Y.position(b))))
    return result


def direction_at(Y: PHComplex, v: int, segment: Segment) -> LinkPoint:
    """Direction at v of a segment starting at v."""
    t = segment.chain[0]
    nxt = segment.crossings[0] if segment.crossings else segment.end
    i = Y.local_index(t, v)
    placed = Y.positions(t)
    w = Y.position(Y.transfer(nxt, t))
    return LinkPoint(t, angle_at(placed[i], placed[(i + 1) % 3], w))


def link_with_points(Y: PHComplex, v: int, points: Sequence[LinkPoint]) -> Tuple[nx.Graph, List[Hashable]]:
    """The link of v with the given directions inserted by subdividing link edges."""
    link = Y.link(v).graph.copy()
    nodes: List[Hashable] = [None] * len(points)
    by_tri: Dict[int, List[int]] = {}
    for k, lp in enumerate(points):
        by_tri.setdefault(lp.tri, []).append(k)
    for t, ks in by_tri.items():
        i = Y.local_index(t, v)
        tri = Y.triangles[t]
        a, b = ("edge", tri[(i + 1) % 3]), ("edge", tri[(i + 2) % 3])
        total = Y.shapes[t].angles[i]
        link.remove_edge(a, b)
        prev, prev_angle = a, 0.0
        for k in sorted(ks, key=lambda j: points[j].angle):
            theta = min(max(points[k].angle, 0.0), total)
            if theta <= LINK_TOL:
                nodes[k] = a
            elif total - theta <= LINK_TOL:
                nodes[k] = b
            elif theta - prev_angle <= LINK_TOL and prev != a:
                nodes[k] = prev
            else:
                node = ("dir", k)
                link.add_node(node, kind="dir", label=f"dir{k}")
                link.add_edge(prev, node, length=theta - prev_angle, tri=t)
                prev, prev_angle, nodes[k] = node, theta, node
        link.add_edge(prev, b, length=total - prev_angle, tri=t)
    return link, nodes


def link_distance(Y: PHComplex, v: int, p: LinkPoint, q: LinkPoint) -> float:
    link, (a, b) = link_with_points(Y, v, [p, q])
    if a == b:
        return 0.0
    try:
        return nx.dijkstra_path_length(link, a, b, weight="length")
    except nx.NetworkXNoPath:
        return math.inf


def _check_point(Y: PHComplex, p: CPoint):
    if not 0 <= p.tri < len(Y.triangles) or len(p.bary) != 3 or min(p.bary) < 0 or abs(sum(p.bary) - 1) > 1e-9:
        raise GeometryError(f"{p} is not a point of {Y.name}")


def geodesic(Y: PHComplex, x: CPoint, y: CPoint, cap: int = CHAIN_CAP) -> Geodesic:
    """
    The geodesic from x to y.

    Raises:
        GeometryError: a point lies outside the complex or y cannot be reached.
        BudgetExceededError: the chain search exceeded cap.
    """
    _check_point(Y, x)
    _check_point(Y, y)
    if Y.same_point(x, y):
        return Geodesic(x, y, 0.0, (), (), (), ())

    vertices = {v: Y.vertex_point(v) for v in Y.vertices}
    graph = nx.Graph()
    graph.add_nodes_from(("x", "y"))

    def add(u, w, segment):
        if not graph.has_edge(u, w) or segment.length < graph.edges[u, w]["length"]:
            graph.add_edge(u, w, length=segment.length, segment=segment, tail=u)

    for key, seg in visible_targets(Y, x, {**vertices, "y": y}, cap).items():
        add("x", key, seg)
    for key, seg in visible_targets(Y, y, vertices, cap).items():
        add("y", key, seg)
    for v, row in vertex_visibility(Y, cap).items():
        for u, seg in row.items():
            add(v, u, seg)
    try:
        path = nx.dijkstra_path(graph, "x", "y", weight="length")
    except nx.NetworkXNoPath:
        raise GeometryError(f"{y} cannot be reached from {x} in {Y.name}") from None

    segments = []
    for u, w in zip(path, path[1:]):
        data = graph.edges[u, w]
        segments.append(data["segment"] if data["tail"] == u else data["segment"].reversed())
    bends = tuple(path[1:-1])
    angles = []
    for k, v in enumerate(bends):
        back = direction_at(Y, v, segments[k].reversed())
        ahead = direction_at(Y, v, segments[k + 1])
        angles.append(link_distance(Y, v, back, ahead))
    result = Geodesic(
        x=x, y=y,
        length=sum(s.length for s in segments),
        segments=tuple(segments),
        bends=bends,
        pieces=tuple(p for s in segments for p in pieces(Y, s)),
        bend_angles=tuple(angles),
    )
    if not result.locally_geodesic:
        logger.warning(f"Geodesic in {Y.name} bends at an angle below pi: {angles}")
    return result


def point_at(Y: PHComplex, gamma: Geodesic, s: float) -> CPoint:
    """The point of gamma at distance s from x."""
    if not gamma.pieces:
        return gamma.x
    s = min(max(s, 0.0), gamma.length)
    for piece in gamma.pieces:
        if s <= piece.length or piece is gamma.pieces[-1]:
            a, b = Y.position(piece.start), Y.position(piece.end)
            if piece.length < 1e-15:
                return piece.start
            x = point_along(a, b, min(s, piece.length))
            return Y.from_position(piece.tri, Y.positions(piece.tri), x,
                                   snap=Y.carrier(piece.start) | Y.carrier(piece.end))
        s -= piece.length
    return gamma.y


def gallery(Y: PHComplex, gamma: Geodesic) -> Gallery:
    carriers = {Y.carrier(gamma.x), Y.carrier(gamma.y)}
    for segment in gamma.segments:
        carriers.add(Y.carrier(segment.start))
        carriers.add(Y.carrier(segment.end))
        carriers.update(Y.carrier(c) for c in segment.crossings)
        if len(segment.chain) > 1:
            carriers.update(frozenset(Y.triangles[t]) for t in segment.chain)
        else:
            carriers.add(Y.carrier(segment.start) | Y.carrier(segment.end))
    return Gallery(carriers=frozenset(carriers), simplices=closure(carriers))


def extended_gallery(Y: PHComplex, gamma: Geodesic, alpha: float) -> Gallery:
    """
    Gal*(gamma): the gallery plus, at every interior vertex v of gamma, the triangles of
    the link geodesic between the two directions of gamma when it is shorter than pi + 2 alpha.
    """
    base = gallery(Y, gamma)
    carriers = set(base.carriers)
    extensions = []
    for k, v in enumerate(gamma.bends):
        back = direction_at(Y, v, gamma.segments[k].reversed())
        ahead = direction_at(Y, v, gamma.segments[k + 1])
        link, (a, b) = link_with_points(Y, v, [back, ahead])
        paths = nx.shortest_simple_paths(link, a, b, weight="length")
        first = next(paths)
        length = nx.path_weight(link, first, weight="length")
        second = next(paths, None)
        second_length = None if second is None else nx.path_weight(link, second, weight="length")
        triangles: Tuple[int, ...] = ()
        if length < math.pi + 2 * alpha:
            triangles = tuple(sorted({link.edges[u, w]["tri"] for u, w in zip(first, first[1:])}))
            carriers.update(frozenset(Y.triangles[t]) for t in triangles)
        ext = VertexExtension(v, length, second_length, triangles)
        if not ext.unique(alpha):
            logger.warning(f"Two short link paths at vertex {v}: {length}, {second_length}")
        extensions.append(ext)
    return Gallery(carriers=frozenset(carriers), simplices=closure(carriers), extensions=tuple(extensions))
