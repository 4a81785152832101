"""
Vertex links of the modified Deligne complex and of its coned-off version,
as angular metric graphs, with girth certification.

Node identifiers are tuples whose first entry is the node kind:
("gen", s) / ("pair", s, t) in links of the base vertex, ("corner", k) /
("pair", s, t) in links of type-{s} vertices, ("coset", side, h) /
("edge", h) in links of type-{s,t} vertices, and ("cone", tree) for cone
directions. Every node carries a printable "label" attribute and every edge
a positive "length".
"""
import logging
import math
from typing import Dict, Hashable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from .core import GeometryError
from .defining_graph import DefiningGraph
from .dihedral import IDENTITY, DihedralGroup
from .metric_synth import HYPERBOLIC, MetricParams

logger = logging.getLogger(__name__)

VERIFIED = "verified"
REFUTED = "refuted"
EXHAUSTIVE = "exhaustive"
EXHAUSTIVE_IN_BALL = "exhaustive-within-ball"

GIRTH_TOL = 1e-9

VertexType = Tuple[str, ...]


class MetricGraph(NamedTuple):
    graph: nx.Graph
    vertex_type: VertexType          # () for the base vertex, (s,) or (s, t)
    radius: Optional[int] = None     # combinatorial radius when the link is a truncated ball
    center: Optional[Hashable] = None
    sources: Optional[Tuple[Hashable, ...]] = None  # nodes every cycle can be translated through
    coned: bool = False
    exponent_bound: Optional[int] = None  # |k| bound on explored edges g u^k of a truncated {s,t} ball

    @property
    def truncated(self) -> bool:
        return self.radius is not None

    def label(self, node: Hashable) -> str:
        return self.graph.nodes[node]["label"]

    def total_length(self) -> float:
        return sum(length for _, _, length in self.graph.edges(data="length"))


class CaseBound(NamedTuple):
    """Analytic lower bound on cycles that leave the computed ball."""
    name: str
    value: float
    threshold: float

    @property
    def slack(self) -> float:
        return self.value - self.threshold

    def to_record(self) -> Dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold, "slack": self.slack}


class GirthCertificate(NamedTuple):
    threshold: float
    status: str
    shortest_cycle: Optional[Tuple[str, ...]]
    length: Optional[float]
    method: str
    analytic_cases: Tuple[CaseBound, ...] = ()
    radius: Optional[int] = None           # ball searched by EXHAUSTIVE_IN_BALL
    exponent_bound: Optional[int] = None

    @property
    def verified(self) -> bool:
        return self.status == VERIFIED

    def to_record(self) -> Dict:
        return {
            "threshold": self.threshold,
            "status": self.status,
            "shortest_cycle": list(self.shortest_cycle) if self.shortest_cycle else None,
            "length": self.length,
            "method": self.method,
            "analytic_cases": [case.to_record() for case in self.analytic_cases],
            "radius": self.radius,
            "exponent_bound": self.exponent_bound,
        }


def _add_edge(graph: nx.Graph, u: Hashable, v: Hashable, length: float):
    if not length > 0:
        raise GeometryError(f"link edge ({u}, {v}) must have positive length, got {length}")
    graph.add_edge(u, v, length=length)


def link_empty_type(g: DefiningGraph, p: MetricParams) -> MetricGraph:
    """Barycentric subdivision of the defining graph; each half of (s,t) has the angle at v of shape(m_st)."""
    graph = nx.Graph()
    for s in g.generators:
        graph.add_node(("gen", s), kind="gen", label=s)
    for s, t in g.finite_pairs():
        m = g.labels[frozenset((s, t))]
        half = p.geometry(m).angle_at_v
        mid = ("pair", s, t)
        graph.add_node(mid, kind="pair", label=f"{s}{t}")
        _add_edge(graph, ("gen", s), mid, half)
        _add_edge(graph, mid, ("gen", t), half)
    return MetricGraph(graph=graph, vertex_type=())


def link_s_type(g: DefiningGraph, p: MetricParams, s: str, radius: int = 2) -> MetricGraph:
    """
    Link of a type-{s} vertex in its local development: complete bipartite between the
    empty-type corners s^k (|k| <= radius) and one {s,t}-corner per neighbor t, every
    edge of length pi/2 + eps.
    """
    g.index(s)
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    graph = nx.Graph()
    corners = [("corner", k) for k in range(-radius, radius + 1)]
    for node in corners:
        graph.add_node(node, kind="corner", label="1" if node[1] == 0 else f"{s}^{node[1]}")
    for t in g.neighbors(s):
        a, b = g.ordered(s, t)
        pair = ("pair", a, b)
        graph.add_node(pair, kind="pair", label=f"{a}{b}", tree=0)
        for node in corners:
            _add_edge(graph, node, pair, math.pi / 2 + p.epsilon)
    return MetricGraph(graph=graph, vertex_type=(s,), radius=radius, center=("corner", 0),
                       sources=(("corner", 0),))


def dihedral_group(g: DefiningGraph, s: str, t: str) -> DihedralGroup:
    m = g.label(s, t)
    if math.isinf(m):
        raise GeometryError(f"pair ({s}, {t}) has no finite label")
    return DihedralGroup(int(m), g.ordered(s, t))


def link_st_type(g: DefiningGraph, p: MetricParams, pair: Sequence[str], radius: Optional[int] = None,
                 exponent_bound: int = 1) -> MetricGraph:
    """
    Ball of the barycentric subdivision of the development D around the coset A_s.

    Args:
        g: Defining graph.
        p: Metric parameters.
        pair: The two generators; m_st must be finite.
        radius: Combinatorial radius in D, defaults to m_st.
        exponent_bound: Explored edges g u^k at a coset g A_u satisfy |k| <= exponent_bound.
    """
    group = dihedral_group(g, *pair)
    m = group.m
    radius = m if radius is None else radius
    half = math.pi / (2 * m) + p.epsilon
    development = group.coset_graph(radius, exponent_bound)
    graph = nx.Graph(m=m)
    for side, rep in development.nodes:
        word = group.to_word(rep)
        graph.add_node(("coset", side, rep), kind="coset", side=side,
                       label=f"{word} A_{side}", tree=group.tree_key(rep, side))
    for (side_a, rep_a), (side_b, rep_b), element in development.edges(data="element"):
        mid = ("edge", element)
        graph.add_node(mid, kind="edge", label=f"[{group.to_word(element)}]")
        _add_edge(graph, ("coset", side_a, rep_a), mid, half)
        _add_edge(graph, mid, ("coset", side_b, rep_b), half)
    s, t = group.generators
    roots = (("coset", s, IDENTITY), ("coset", t, IDENTITY))
    logger.debug(f"Link of type ({s},{t}): {graph.number_of_nodes()} nodes within radius {radius}")
    return MetricGraph(graph=graph, vertex_type=(s, t), radius=radius, center=roots[0], sources=roots,
                       exponent_bound=exponent_bound)


def vertex_link(g: DefiningGraph, p: MetricParams, vertex_type: VertexType,
                radius: Optional[int] = None, exponent_bound: int = 1) -> MetricGraph:
    if len(vertex_type) == 0:
        return link_empty_type(g, p)
    if len(vertex_type) == 1:
        return link_s_type(g, p, vertex_type[0], 2 if radius is None else radius)
    if len(vertex_type) == 2:
        return link_st_type(g, p, vertex_type, radius, exponent_bound)
    raise GeometryError(f"unsupported vertex type {vertex_type}")


def coned_link(base: MetricGraph, p: MetricParams) -> MetricGraph:
    """
    Adds the cone directions of the coned-off complex.

    At a type-{s} vertex a single cone node joins every {s,t}-corner with length pi/2.
    At a type-{s,t} vertex there is one cone node per standard tree, joined to the
    coset nodes of that tree with the cone angle of m_st.
    """
    if p.mode != HYPERBOLIC:
        raise GeometryError("coned links need the hyperbolic metric")
    if base.coned:
        return base
    graph = base.graph.copy()
    if len(base.vertex_type) == 1:
        cone = ("cone", 0)
        graph.add_node(cone, kind="cone", label="cone")
        for node, kind in base.graph.nodes(data="kind"):
            if kind == "pair":
                _add_edge(graph, cone, node, math.pi / 2)
    elif len(base.vertex_type) == 2:
        corners = [n for n, kind in base.graph.nodes(data="kind") if kind == "coset"]
        angle = p.geometry(base.graph.graph["m"]).cone_angle
        for node in corners:
            tree = base.graph.nodes[node]["tree"]
            cone = ("cone", tree)
            if cone not in graph:
                graph.add_node(cone, kind="cone", label=f"cone {len(_cones(graph))}")
            _add_edge(graph, cone, node, angle)
    else:
        raise GeometryError(f"no cone directions at a vertex of type {base.vertex_type}")
    return base._replace(graph=graph, coned=True)


def _cones(graph: nx.Graph) -> List[Hashable]:
    return [n for n, kind in graph.nodes(data="kind") if kind == "cone"]


def coned_case_bounds(p: MetricParams, labels: Iterable[int]) -> Tuple[CaseBound, ...]:
    """Lower bounds on cycles through cone directions, each against 2 pi + eps."""
    eps = p.epsilon
    threshold = 2 * math.pi + eps
    cases = [CaseBound("type-s: two cone edges and two link edges", 2 * (math.pi / 2) + 2 * (math.pi / 2 + eps), threshold)]
    for m in sorted(set(labels)):
        cases.append(CaseBound(f"type-st m={m}: one cone vertex used twice",
                               (2 * math.pi - 4 * eps) + 2 * (math.pi / m + 2 * eps), threshold))
    cases.append(CaseBound("type-st: two distinct cone vertices", 3 * math.pi - 6 * eps, threshold))
    return tuple(cases)


def _incident_edges(graph: nx.Graph, sources: Optional[Iterable[Hashable]]) -> List[Tuple]:
    if sources is None:
        return list(graph.edges(data="length"))
    seen = set()
    edges = []
    for source in sources:
        for u, v, length in graph.edges(source, data="length"):
            key = frozenset((u, v))
            if key not in seen:
                seen.add(key)
                edges.append((u, v, length))
    return edges


def shortest_cycle(graph: nx.Graph, sources: Optional[Iterable[Hashable]] = None
                   ) -> Tuple[Optional[float], Optional[List[Hashable]]]:
    """
    Weighted girth by removing each edge (u, v) and running Dijkstra from u to v.

    Args:
        graph: Graph with positive "length" on every edge.
        sources: When given, only cycles through these nodes are searched.

    Returns:
        (length, node cycle), or (None, None) for a forest.
    """
    best, best_cycle = None, None
    work = graph.copy()
    for u, v, length in _incident_edges(graph, sources):
        work.remove_edge(u, v)
        cutoff = None if best is None else best - length
        try:
            if cutoff is None or cutoff > 0:
                dist, path = nx.single_source_dijkstra(work, u, target=v, cutoff=cutoff, weight="length")
                if best is None or dist + length < best:
                    best, best_cycle = dist + length, path
        except nx.NetworkXNoPath:
            pass
        finally:
            work.add_edge(u, v, length=length)
    return best, best_cycle


def certify_girth(link: MetricGraph, threshold: float, cases: Sequence[CaseBound] = (),
                  tol: float = GIRTH_TOL) -> GirthCertificate:
    """
    Certifies that every cycle of the link is at least threshold long.

    For truncated links the exhaustive part only covers cycles inside the ball; the
    analytic cases cover the rest and must all carry nonnegative slack.
    """
    length, cycle = shortest_cycle(link.graph, link.sources)
    status = VERIFIED
    if length is not None and length < threshold - tol:
        status = REFUTED
    if any(case.slack < -tol for case in cases):
        status = REFUTED
    labels = tuple(link.label(n) for n in cycle) if cycle else None
    cert = GirthCertificate(
        threshold=threshold,
        status=status,
        shortest_cycle=labels,
        length=length,
        method=EXHAUSTIVE_IN_BALL if link.truncated else EXHAUSTIVE,
        analytic_cases=tuple(cases),
        radius=link.radius,
        exponent_bound=link.exponent_bound,
    )
    if status == REFUTED:
        logger.warning(f"Girth of link {link.vertex_type} refuted: {length} < {threshold}")
    else:
        logger.info(f"Girth of link {link.vertex_type} verified: shortest {length} >= {threshold}")
    return cert


def tree_separation(link: MetricGraph) -> Optional[float]:
    """Least link distance between two distinct nodes carrying the same standard tree."""
    groups: Dict[Hashable, List[Hashable]] = {}
    for node, tree in link.graph.nodes(data="tree"):
        if tree is not None:
            groups.setdefault(tree, []).append(node)
    starts = set(link.sources) if link.sources and len(link.vertex_type) == 2 else None
    best = None
    for members in groups.values():
        if len(members) < 2:
            continue
        for node in members:
            if starts is not None and node not in starts:
                continue
            dist = nx.single_source_dijkstra_path_length(link.graph, node, weight="length")
            for other in members:
                if other != node and other in dist:
                    best = dist[other] if best is None else min(best, dist[other])
    return best


def to_dot(link: MetricGraph, name: str = "link") -> str:
    """DOT text with edge lengths as labels, nodes and edges in sorted label order."""
    lines = [f"graph \"{name}\" {{"]
    labels = {n: link.label(n) for n in link.graph.nodes}
    for label in sorted(set(labels.values())):
        lines.append(f"  \"{label}\";")
    edges = sorted(
        tuple(sorted((labels[u], labels[v]))) + (length,)
        for u, v, length in link.graph.edges(data="length")
    )
    for a, b, length in edges:
        lines.append(f"  \"{a}\" -- \"{b}\" [label=\"{length:.6f}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"
