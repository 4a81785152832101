"""
Standard-tree data: the cut graph obtained from K_T by cutting at even-labelled
pair vertices, stabilizer presentations Z x F read off its components, and the
stabilizer dichotomy for coset edges of a dihedral group.
"""
import logging
from collections import deque
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Tuple

import networkx as nx

from .core import DocumentError
from .defining_graph import DefiningGraph
from .dihedral import DihedralGroup, GarsideElement, Word

logger = logging.getLogger(__name__)

TRIVIAL_INTERSECTION = "trivial-intersection"
EQUAL = "equal-with-witness"

VERIFIED = "verified"
TRUSTED = "trusted-by-theorem"
REFUTED = "refuted"


class Vertex(NamedTuple):
    kind: str                    # "gen" for type {s}, "pair" for type {s, t}
    gens: Tuple[str, ...]        # (s,) or (s, t) in generator order
    side: Optional[str] = None   # set on the copies of a cut pair vertex

    def __str__(self) -> str:
        if self.kind == "gen":
            return "{" + self.gens[0] + "}"
        name = "(" + "".join(self.gens) + ")"
        return name if self.side is None else f"{name}/{self.side}"


class CutGraph(NamedTuple):
    graph: nx.Graph
    components: Tuple[FrozenSet[Vertex], ...]

    def component_index(self, r: str) -> int:
        root = Vertex("gen", (r,))
        for i, comp in enumerate(self.components):
            if root in comp:
                return i
        raise DocumentError(f"'{r}' is not a generator")

    def component(self, r: str) -> nx.Graph:
        return self.graph.subgraph(self.components[self.component_index(r)])

    def label(self, tail: Vertex, head: Vertex) -> Word:
        """Label word of the edge read from tail to head (the stored label is gen -> pair)."""
        data = self.graph.edges[tail, head]
        return data["label"] if data["tail"] == tail else data["label"].inverse()


class BasisWord(NamedTuple):
    kind: str            # "loop" or "conjugated-center"
    word: Word
    simplified: Word
    commutation: str     # verified | trusted-by-theorem | refuted

    def to_record(self) -> Dict:
        return {"kind": self.kind, "word": str(self.word), "simplified": str(self.simplified),
                "commutation": self.commutation}


class TreeStabiliserPresentation(NamedTuple):
    center_generator: str
    free_basis: Tuple[BasisWord, ...]
    loop_rank: int
    pair_vertices: int
    bounded: bool

    @property
    def rank(self) -> int:
        return len(self.free_basis)

    def to_record(self) -> Dict:
        return {
            "center_generator": self.center_generator,
            "free_basis": [b.to_record() for b in self.free_basis],
            "rank": self.rank,
            "loop_rank": self.loop_rank,
            "pair_vertices": self.pair_vertices,
            "bounded": self.bounded,
            "bounded_criterion": "derived: trivial loop rank and at most one pair vertex",
        }


class DichotomyResult(NamedTuple):
    kind: str
    witness: Optional[GarsideElement]
    witness_word: Optional[str]

    def to_record(self) -> Dict:
        return {"kind": self.kind, "witness": self.witness_word}


def delta_word(s: str, t: str, m: int) -> Word:
    """The alternating positive word s t s ... with m letters."""
    return Word.from_syllables(((s, t)[i % 2], 1) for i in range(m))


def _vertex_order(g: DefiningGraph, v: Vertex) -> Tuple:
    side = -1 if v.side is None else g.index(v.side)
    return (0 if v.kind == "gen" else 1, tuple(g.index(x) for x in v.gens), side)


def incidence_graph(g: DefiningGraph) -> nx.Graph:
    """K_T before cutting: type-{s} vertices joined to the type-{s,t} vertices with m_st finite."""
    graph = nx.Graph()
    for s in g.generators:
        graph.add_node(Vertex("gen", (s,)))
    for a, b in g.finite_pairs():
        m = g.labels[frozenset((a, b))]
        pair = Vertex("pair", (a, b))
        graph.add_node(pair, m=m)
        for gen in (a, b):
            tail = Vertex("gen", (gen,))
            label = delta_word(a, b, m) if gen == a and m % 2 == 1 else Word()
            graph.add_edge(tail, pair, label=label, tail=tail)
    return graph


def cut(graph: nx.Graph) -> nx.Graph:
    """Splits every even pair vertex of valence > 1 into one copy per incident side."""
    result = graph.copy()
    for v, m in graph.nodes(data="m"):
        if m is None or m % 2 == 1 or graph.degree(v) <= 1:
            continue
        for tail in list(result.neighbors(v)):
            data = result.edges[tail, v]
            copy = v._replace(side=tail.gens[0])
            result.add_node(copy, m=m)
            result.add_edge(tail, copy, **data)
        result.remove_node(v)
    return result


def build_cut_graph(g: DefiningGraph) -> CutGraph:
    graph = cut(incidence_graph(g))
    order = {s: i for i, s in enumerate(g.generators)}
    components = sorted(
        (frozenset(c) for c in nx.connected_components(graph)),
        key=lambda c: min(order[v.gens[0]] for v in c if v.kind == "gen"),
    )
    logger.debug(f"Cut graph: {graph.number_of_nodes()} vertices, {len(components)} components")
    return CutGraph(graph=graph, components=tuple(components))


def _spanning_tree(g: DefiningGraph, cg: CutGraph, root: Vertex) -> Tuple[Dict[Vertex, Word], List[Tuple[Vertex, Vertex]]]:
    """BFS from root, neighbors in generator order; returns path words and non-tree edges."""
    words = {root: Word()}
    tree_edges = set()
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in sorted(cg.graph.neighbors(u), key=lambda x: _vertex_order(g, x)):
            if v not in words:
                words[v] = words[u] * cg.label(u, v)
                tree_edges.add(frozenset((u, v)))
                queue.append(v)
    others = []
    for u, v in cg.graph.subgraph(words).edges:
        if frozenset((u, v)) not in tree_edges:
            tail, head = sorted((u, v), key=lambda x: _vertex_order(g, x))
            others.append((tail, head))
    others.sort(key=lambda e: (_vertex_order(g, e[0]), _vertex_order(g, e[1])))
    return words, others


def simplify_word(g: DefiningGraph, word: Word) -> Word:
    """Free reduction, then dihedral normal form when the word lies in a single parabolic A_st."""
    word = Word.from_syllables(word.syllables)
    gens = word.generators()
    if len(gens) == 2 and g.label(*gens) != float("inf"):
        group = DihedralGroup(int(g.label(*gens)), g.ordered(*gens))
        return group.to_word(group.normal_form(word))
    return word


def _commutation(g: DefiningGraph, word: Word, r: str) -> str:
    others = set(word.generators()) - {r}
    if not others:
        return VERIFIED
    if len(others) == 1:
        t = others.pop()
        if g.label(r, t) != float("inf"):
            group = DihedralGroup(int(g.label(r, t)), g.ordered(r, t))
            return VERIFIED if group.commutes(word, Word(((r, 1),))) else REFUTED
    return TRUSTED


def stabilizer_presentation(g: DefiningGraph, r: str, cg: Optional[CutGraph] = None) -> TreeStabiliserPresentation:
    """
    Stab(T_r) = <r> x F, with F freely generated by the loop words of the non-tree
    edges of the component of {r} and the conjugates w_v z_st w_v^-1 of the centers
    of its pair vertices.
    """
    g.index(r)
    cg = build_cut_graph(g) if cg is None else cg
    root = Vertex("gen", (r,))
    words, others = _spanning_tree(g, cg, root)

    basis: List[BasisWord] = []
    for tail, head in others:
        loop = words[tail] * cg.label(tail, head) * words[head].inverse()
        simplified = simplify_word(g, loop)
        basis.append(BasisWord("loop", loop, simplified, _commutation(g, simplified, r)))

    pairs = sorted((v for v in words if v.kind == "pair"), key=lambda x: _vertex_order(g, x))
    for v in pairs:
        group = DihedralGroup(cg.graph.nodes[v]["m"], v.gens)
        z = group.to_word(group.center_generator())
        conjugate = words[v] * z * words[v].inverse()
        simplified = simplify_word(g, conjugate)
        basis.append(BasisWord("conjugated-center", conjugate, simplified, _commutation(g, simplified, r)))

    loop_rank = len(others)
    presentation = TreeStabiliserPresentation(
        center_generator=r,
        free_basis=tuple(basis),
        loop_rank=loop_rank,
        pair_vertices=len(pairs),
        bounded=loop_rank == 0 and len(pairs) <= 1,
    )
    logger.info(f"Stab(T_{r}) = <{r}> x F_{presentation.rank}, bounded={presentation.bounded}")
    return presentation


def check_stabilizer_dichotomy(group: DihedralGroup, e: Tuple[str, GarsideElement],
                               e2: Tuple[str, GarsideElement]) -> DichotomyResult:
    """
    Decides Stab(e) = Stab(e2) or Stab(e) and Stab(e2) intersect trivially, for coset
    edges e = h A_u and e2 = h' A_v.

    Same side: equal iff h^-1 h' lies in <u, z_st>, witness z^b with h z^b A_u = h' A_u.
    Opposite sides: equal iff m is odd and (h Delta)^-1 h' lies in <v, z_st>, witness
    Delta z^b with h Delta z^b A_v = h' A_v.
    """
    side, h = e
    side2, h2 = e2
    group.letter_index(side)
    group.letter_index(side2)
    period = group.z_period()
    if side == side2:
        base = h
        shift = 0
    elif group.m % 2 == 1:
        base = group.times_delta(h, 1)
        shift = 1
    else:
        return DichotomyResult(TRIVIAL_INTERSECTION, None, None)
    quotient = group.multiply(group.inverse(base), h2)
    decomposition = group.centralizer_decomposition(quotient, side2)
    if decomposition is None:
        return DichotomyResult(TRIVIAL_INTERSECTION, None, None)
    _, b = decomposition
    witness = GarsideElement(shift + b * period, ())
    return DichotomyResult(EQUAL, witness, str(group.to_word(witness)))


def to_dot(cg: CutGraph, name: str = "cut_graph") -> str:
    """DOT text of the cut graph, edges labelled by their words and read gen -> pair."""
    lines = [f"digraph \"{name}\" {{"]
    for i, comp in enumerate(cg.components):
        for v in sorted(comp, key=str):
            lines.append(f"  \"{v}\" [component={i}];")
    edges = sorted((str(data["tail"]), str(v if data["tail"] == u else u), str(data["label"]))
                   for u, v, data in cg.graph.edges(data=True))
    for tail, head, label in edges:
        lines.append(f"  \"{tail}\" -> \"{head}\" [label=\"{label}\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"
