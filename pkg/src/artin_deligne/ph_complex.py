"""
Finite piecewise hyperbolic simplicial 2-complexes.

Triangles list their vertex ids in the order of their shape: shape.angles[i] is
the angle at triangles[t][i] and edge i (opposite vertex i) joins vertices i+1
and i+2. Points are stored intrinsically as (triangle, barycentric weights) where
the weights combine the hyperboloid positions of the vertices linearly, so a
point is normalize(sum w_i V_i) in any placement of its triangle.
"""
import logging
import math
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import yaml
from networkx.utils import UnionFind

from .core import DocumentError, GeometryError
from .hyp_trig import (TOL, HPoint, HypTriangleShape, equilateral, normalize, place_triangle,
                       right_triangle, solve_sss)
from .links import MetricGraph, shortest_cycle
from .metric_synth import HYPERBOLIC, MetricParams

logger = logging.getLogger(__name__)

Simplex = FrozenSet[int]

BARY_TOL = 1e-12


class CPoint(NamedTuple):
    tri: int
    bary: Tuple[float, float, float]


def simplex_order(simplex: Simplex) -> Tuple:
    return (len(simplex), tuple(sorted(simplex)))


def faces(simplex: Simplex) -> List[Simplex]:
    """All nonempty faces of a simplex, itself included."""
    items = sorted(simplex)
    result = []
    for mask in range(1, 1 << len(items)):
        result.append(frozenset(v for i, v in enumerate(items) if mask >> i & 1))
    return result


def closure(simplices) -> FrozenSet[Simplex]:
    return frozenset(f for s in simplices for f in faces(s))


class PHComplex:
    """
    A finite complex of hyperbolic triangles glued isometrically along edges.

    Args:
        triangles: Vertex ids per triangle, in shape order.
        shapes: One HypTriangleShape per triangle.
        name: Used in logs and reports.
        tol: Tolerance for glued edge lengths and shape invariants.
    """

    def __init__(self, triangles: Sequence[Sequence[int]], shapes: Sequence[HypTriangleShape],
                 name: str = "complex", tol: float = TOL):
        if len(triangles) != len(shapes):
            raise GeometryError(f"{len(triangles)} triangles but {len(shapes)} shapes")
        if not triangles:
            raise GeometryError("a complex needs at least one triangle")
        self.name = name
        self.tol = tol
        self.triangles: Tuple[Tuple[int, int, int], ...] = tuple(tuple(int(v) for v in tri) for tri in triangles)
        self.shapes: Tuple[HypTriangleShape, ...] = tuple(shapes)

        seen: Dict[Simplex, int] = {}
        for t, tri in enumerate(self.triangles):
            if len(tri) != 3 or len(set(tri)) != 3:
                raise GeometryError(f"triangle {t} needs three distinct vertices, got {tri}")
            key = frozenset(tri)
            if key in seen:
                raise GeometryError(f"triangles {seen[key]} and {t} have the same vertices; the complex is not simplicial")
            seen[key] = t
            problems = self.shapes[t].violations(tol)
            if problems:
                raise GeometryError(f"triangle {t}: {'; '.join(problems)}")

        self.edges: Dict[Simplex, List[Tuple[int, int]]] = {}
        for t in range(len(self.triangles)):
            for i in range(3):
                self.edges.setdefault(self.edge_key(t, i), []).append((t, i))
        for key, sides in self.edges.items():
            lengths = [self.shapes[t].sides[i] for t, i in sides]
            if max(lengths) - min(lengths) > tol * max(1.0, max(lengths)):
                raise GeometryError(f"edge {sorted(key)} is glued with lengths {lengths}")

        self.vertices: Tuple[int, ...] = tuple(sorted({v for tri in self.triangles for v in tri}))
        self._placed = [place_triangle(shape) for shape in self.shapes]
        self._star = {v: [t for t, tri in enumerate(self.triangles) if v in tri] for v in self.vertices}
        self.cache: Dict = {}
        logger.debug(f"Built complex {name}: {len(self.triangles)} triangles, {len(self.vertices)} vertices")

    def __repr__(self):
        return f"PHComplex({self.name!r}, triangles={len(self.triangles)}, vertices={len(self.vertices)})"

    # -- combinatorics ------------------------------------------------------

    def edge_key(self, t: int, i: int) -> Simplex:
        tri = self.triangles[t]
        return frozenset((tri[(i + 1) % 3], tri[(i + 2) % 3]))

    def local_index(self, t: int, v: int) -> int:
        try:
            return self.triangles[t].index(v)
        except ValueError:
            raise GeometryError(f"vertex {v} is not a vertex of triangle {t}") from None

    def star(self, simplex: Simplex) -> List[int]:
        """Triangles containing the simplex."""
        return [t for t, tri in enumerate(self.triangles) if simplex <= frozenset(tri)]

    def vertex_star(self, v: int) -> List[int]:
        return list(self._star[v])

    def simplices(self) -> List[Simplex]:
        result = {frozenset((v,)) for v in self.vertices}
        result.update(self.edges)
        result.update(frozenset(tri) for tri in self.triangles)
        return sorted(result, key=simplex_order)

    def triangle_of(self, simplex: Simplex) -> int:
        """Triangle id of a 2-simplex given by its vertex set."""
        for t, tri in enumerate(self.triangles):
            if frozenset(tri) == simplex:
                return t
        raise GeometryError(f"{sorted(simplex)} is not a triangle of {self.name}")

    # -- metric data ----------------------------------------------------------

    def positions(self, t: int) -> List[HPoint]:
        """Canonical placement of triangle t (vertex 0 at the origin)."""
        return self._placed[t]

    def corner_angle(self, t: int, v: int) -> float:
        return self.shapes[t].angles[self.local_index(t, v)]

    def edge_length(self, edge: Simplex) -> float:
        t, i = self.edges[edge][0]
        return self.shapes[t].sides[i]

    def min_angle(self) -> float:
        return min(min(shape.angles) for shape in self.shapes)

    def max_edge_length(self) -> float:
        return max(max(shape.sides) for shape in self.shapes)

    def link(self, v: int) -> MetricGraph:
        """Angular link of v: one node per edge at v, one link edge per triangle at v."""
        graph = nx.Graph()
        for t in self._star[v]:
            i = self.local_index(t, v)
            tri = self.triangles[t]
            a, b = tri[(i + 1) % 3], tri[(i + 2) % 3]
            for u in (a, b):
                graph.add_node(("edge", u), kind="edge", label=f"{v}-{u}")
            graph.add_edge(("edge", a), ("edge", b), length=self.shapes[t].angles[i], tri=t)
        return MetricGraph(graph=graph, vertex_type=(str(v),))

    def link_girth(self, v: int) -> Optional[float]:
        length, _ = shortest_cycle(self.link(v).graph)
        return length

    def min_link_girth(self) -> Optional[float]:
        girths = [g for g in (self.link_girth(v) for v in self.vertices) if g is not None]
        return min(girths) if girths else None

    def is_acute(self) -> Tuple[bool, Optional[int]]:
        """True when every angle is < pi/2; otherwise the first offending triangle."""
        for t, shape in enumerate(self.shapes):
            if not all(a < math.pi / 2 for a in shape.angles):
                return False, t
        return True, None

    def rescale(self, n: int) -> "PHComplex":
        """Same combinatorics with every side length divided by n."""
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ValueError(f"rescaling factor must be an integer >= 1, got {n!r}")
        if n == 1:
            return PHComplex(self.triangles, self.shapes, self.name, self.tol)
        shapes = [solve_sss(*(side / n for side in shape.sides)) for shape in self.shapes]
        return PHComplex(self.triangles, shapes, f"{self.name}/{n}", self.tol)

    # -- points ---------------------------------------------------------------

    def point(self, t: int, bary: Sequence[float]) -> CPoint:
        if not 0 <= t < len(self.triangles):
            raise GeometryError(f"triangle {t} is not in {self.name}")
        w = [float(x) for x in bary]
        if len(w) != 3 or min(w) < -BARY_TOL or sum(w) <= 0:
            raise GeometryError(f"{bary} are not barycentric weights")
        w = [max(0.0, x) for x in w]
        total = sum(w)
        return CPoint(t, tuple(x / total for x in w))

    def vertex_point(self, v: int) -> CPoint:
        t = self._star[v][0]
        bary = [0.0, 0.0, 0.0]
        bary[self.local_index(t, v)] = 1.0
        return CPoint(t, tuple(bary))

    def carrier(self, p: CPoint) -> Simplex:
        """The simplex containing p in its interior."""
        tri = self.triangles[p.tri]
        return frozenset(tri[i] for i in range(3) if p.bary[i] > BARY_TOL)

    def position(self, p: CPoint, placed: Optional[Sequence[HPoint]] = None) -> HPoint:
        placed = self._placed[p.tri] if placed is None else placed
        return normalize(sum(w * x for w, x in zip(p.bary, placed)))

    def from_position(self, t: int, placed: Sequence[HPoint], x: HPoint, snap: Optional[Simplex] = None) -> CPoint:
        """Barycentric weights of x in triangle t placed at placed; snap restricts the support."""
        w = np.linalg.solve(np.stack(placed, axis=1), x)
        if snap is not None:
            tri = self.triangles[t]
            w = np.array([w[i] if tri[i] in snap else 0.0 for i in range(3)])
        w = np.clip(w, 0.0, None)
        return CPoint(t, tuple(float(v) for v in w / w.sum()))

    def transfer(self, p: CPoint, t: int) -> CPoint:
        """The same point written in another triangle containing its carrier."""
        if t == p.tri:
            return p
        carrier = self.carrier(p)
        tri = self.triangles[t]
        if not carrier <= frozenset(tri):
            raise GeometryError(f"triangle {t} does not contain the carrier {sorted(carrier)}")
        src = self.triangles[p.tri]
        bary = [0.0, 0.0, 0.0]
        for i, v in enumerate(src):
            if v in carrier:
                bary[tri.index(v)] = p.bary[i]
        return CPoint(t, tuple(bary))

    def same_point(self, p: CPoint, q: CPoint, tol: float = 1e-9) -> bool:
        if self.carrier(p) != self.carrier(q):
            return False
        q = self.transfer(q, p.tri)
        return max(abs(a - b) for a, b in zip(p.bary, q.bary)) <= tol

    def random_point(self, rng: np.random.RandomState, t: Optional[int] = None) -> CPoint:
        t = rng.randint(len(self.triangles)) if t is None else t
        return CPoint(t, tuple(float(x) for x in rng.dirichlet([1.0, 1.0, 1.0])))

    # -- documents -------------------------------------------------------------

    def to_document(self) -> str:
        gluings = []
        for key in sorted(self.edges, key=simplex_order):
            sides = self.edges[key]
            t0, i0 = sides[0]
            first = self.triangles[t0][(i0 + 1) % 3]
            for t1, i1 in sides[1:]:
                entry = {"first": [t0, i0], "second": [t1, i1]}
                if self.triangles[t1][(i1 + 1) % 3] == first:
                    entry["aligned"] = True
                gluings.append(entry)
        doc = {
            "name": self.name,
            "triangles": [{"sides": [float(x) for x in shape.sides]} for shape in self.shapes],
            "gluings": gluings,
        }
        return yaml.safe_dump(doc, default_flow_style=None, sort_keys=False)


def from_document(text: str) -> PHComplex:
    """
    Builds a complex from a document of side lengths and edge gluings.

    Expected structure:
        name: two-triangles
        triangles:
        - sides: [a, b, c]
        gluings:
        - {first: [0, 1], second: [1, 2]}           # edge 1 of triangle 0 to edge 2 of triangle 1
        - {first: [1, 0], second: [2, 0], aligned: true}

    By default a gluing reverses the edge: vertex (i+1) of the first triangle meets
    vertex (j+2) of the second.
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise DocumentError(f"complex document is not valid YAML/JSON: {e}") from e
    if not isinstance(data, dict) or not isinstance(data.get("triangles"), list):
        raise DocumentError("complex document needs a 'triangles' list")
    unknown = set(data) - {"name", "triangles", "gluings"}
    if unknown:
        raise DocumentError(f"unknown fields in complex document: {sorted(unknown)}")

    shapes = []
    for k, entry in enumerate(data["triangles"]):
        sides = entry.get("sides") if isinstance(entry, dict) else None
        if not isinstance(sides, list) or len(sides) != 3 or not all(isinstance(x, (int, float)) for x in sides):
            raise DocumentError(f"triangle {k} needs 'sides' with three lengths")
        shapes.append(solve_sss(*(float(x) for x in sides)))

    n = len(shapes)
    corners = UnionFind((t, i) for t in range(n) for i in range(3))
    for entry in data.get("gluings") or []:
        if not isinstance(entry, dict) or not {"first", "second"} <= set(entry) or set(entry) - {"first", "second", "aligned"}:
            raise DocumentError(f"gluing must have 'first', 'second' and optional 'aligned': {entry!r}")
        (t0, i0), (t1, i1) = entry["first"], entry["second"]
        for t, i in ((t0, i0), (t1, i1)):
            if not (isinstance(t, int) and isinstance(i, int) and 0 <= t < n and 0 <= i < 3):
                raise DocumentError(f"gluing {entry!r} names a missing triangle edge")
        if entry.get("aligned", False):
            pairs = (((t0, (i0 + 1) % 3), (t1, (i1 + 1) % 3)), ((t0, (i0 + 2) % 3), (t1, (i1 + 2) % 3)))
        else:
            pairs = (((t0, (i0 + 1) % 3), (t1, (i1 + 2) % 3)), ((t0, (i0 + 2) % 3), (t1, (i1 + 1) % 3)))
        for a, b in pairs:
            corners.union(a, b)

    ids: Dict = {}
    triangles = []
    for t in range(n):
        tri = []
        for i in range(3):
            root = corners[(t, i)]
            ids.setdefault(root, len(ids))
            tri.append(ids[root])
        triangles.append(tri)
    return PHComplex(triangles, shapes, name=str(data.get("name", "complex")))


# -- test complexes --------------------------------------------------------------

def equilateral_side(angle: float) -> float:
    """Side of the equilateral triangle with the given angle: cosh a = cos b / (1 - cos b)."""
    return math.acosh(math.cos(angle) / (1.0 - math.cos(angle)))


def heptagon_star(angle: float = 0.98) -> PHComplex:
    """Seven equilateral triangles around vertex 0; the cone angle there is 7 * angle."""
    shape = equilateral(angle)
    triangles = [(0, 1 + k, 1 + (k + 1) % 7) for k in range(7)]
    return PHComplex(triangles, [shape] * 7, name=f"heptagon-star({angle})")


def two_star(angle: float = 0.98) -> PHComplex:
    """Twelve equilateral triangles around two adjacent interior vertices of degree seven."""
    a, b, c1, c2 = 0, 1, 2, 3
    rim_a = [4, 5, 6, 7]
    rim_b = [8, 9, 10, 11]
    around_a = [b, c1] + rim_a + [c2]
    around_b = [a, c2] + rim_b + [c1]
    triangles = [(a, around_a[k], around_a[(k + 1) % 7]) for k in range(7)]
    triangles += [(b, around_b[k], around_b[(k + 1) % 7]) for k in range(1, 6)]
    shape = equilateral(angle)
    return PHComplex(triangles, [shape] * len(triangles), name=f"two-star({angle})")


def strip(n: int, angle: float = 0.9) -> PHComplex:
    """Zigzag strip of n equilateral triangles (i, i+1, i+2)."""
    if n < 1:
        raise ValueError(f"a strip needs at least one triangle, got {n}")
    shape = equilateral(angle)
    return PHComplex([(i, i + 1, i + 2) for i in range(n)], [shape] * n, name=f"strip({n})")


def book(k: int, angle: float = 0.9) -> PHComplex:
    """k equilateral triangles sharing the edge {0, 1}."""
    if k < 1:
        raise ValueError(f"a book needs at least one page, got {k}")
    shape = equilateral(angle)
    return PHComplex([(0, 1, 2 + j) for j in range(k)], [shape] * k, name=f"book({k})")


def fundamental_complex(p: MetricParams, m: int, coned: bool = True) -> PHComplex:
    """
    The two fundamental triangles (v, v_s, v_st) and (v, v_t, v_st) of label m and,
    when coned, the cone triangles (c, v_s, v_st) and (c', v_t, v_st) over their
    tree edges. Vertex ids: v=0, v_s=1, v_t=2, v_st=3, cones 4 and 5.
    """
    if p.mode != HYPERBOLIC:
        raise GeometryError("fundamental complexes need the hyperbolic metric")
    geo = p.geometry(m)
    triangles = [(0, 1, 3), (0, 2, 3)]
    shapes = [geo.shape, geo.shape]
    if coned:
        cone = right_triangle(1.0, geo.d)
        triangles += [(4, 1, 3), (5, 2, 3)]
        shapes += [cone, cone]
    return PHComplex(triangles, shapes, name=f"fundamental(m={m}{', coned' if coned else ''})")


BUILDERS = {
    "heptagon-star": heptagon_star,
    "two-star": two_star,
    "strip": lambda: strip(6),
    "book": lambda: book(3),
}
