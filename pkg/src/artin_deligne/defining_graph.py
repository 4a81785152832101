import itertools
import logging
import math
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Tuple

import networkx as nx
import yaml

from .core import DocumentError

logger = logging.getLogger(__name__)

Pair = FrozenSet[str]


class DefiningGraph(NamedTuple):
    """Generators of an Artin group with the symmetric labels m_st (absent means infinity)."""
    generators: Tuple[str, ...]  # document order, used as s_1 < s_2 < ...
    labels: Mapping[Pair, int]   # frozenset({s, t}) -> m_st >= 2

    def index(self, s: str) -> int:
        try:
            return self.generators.index(s)
        except ValueError:
            raise DocumentError(f"'{s}' is not a generator") from None

    def label(self, s: str, t: str) -> float:
        """Returns m_st, or math.inf when the pair carries no label."""
        return self.labels.get(frozenset((s, t)), math.inf)

    def ordered(self, s: str, t: str) -> Tuple[str, str]:
        return (s, t) if self.index(s) < self.index(t) else (t, s)

    def finite_pairs(self) -> List[Tuple[str, str]]:
        """Pairs with finite label, each oriented by generator order, sorted by generator order."""
        pairs = [self.ordered(*sorted(p)) for p in self.labels]
        return sorted(pairs, key=lambda st: (self.index(st[0]), self.index(st[1])))

    def neighbors(self, s: str) -> List[str]:
        """Generators t with m_st finite, in generator order."""
        return [t for t in self.generators if t != s and frozenset((s, t)) in self.labels]

    def finite_labels(self) -> List[int]:
        return sorted(set(self.labels.values()))

    def relabel(self, mapping: Mapping[str, str]) -> "DefiningGraph":
        return from_labels(
            [mapping[s] for s in self.generators],
            {tuple(mapping[x] for x in sorted(p)): m for p, m in self.labels.items()},
        )


class Classification(NamedTuple):
    two_dimensional: bool
    hyperbolic_type: bool
    irreducible: bool
    two_dimensional_witness: Optional[Tuple[str, str, str]]
    hyperbolic_witness: Optional[Tuple[str, str, str]]
    irreducible_witness: Optional[Tuple[Tuple[str, ...], Tuple[str, ...]]]
    acylindrically_hyperbolic: Optional[bool]  # None: outside the classes decided here
    free_factors: Tuple[str, ...]  # generators s with no finite label: A_S = A_s * A_{S-s}

    def to_record(self) -> Dict:
        return {
            "two_dimensional": self.two_dimensional,
            "hyperbolic_type": self.hyperbolic_type,
            "irreducible": self.irreducible,
            "witnesses": {
                "two_dimensional": list(self.two_dimensional_witness) if self.two_dimensional_witness else None,
                "hyperbolic_type": list(self.hyperbolic_witness) if self.hyperbolic_witness else None,
                "irreducible": [list(part) for part in self.irreducible_witness] if self.irreducible_witness else None,
            },
            "acylindrically_hyperbolic": self.acylindrically_hyperbolic,
            "free_factors": list(self.free_factors),
        }


def from_labels(generators: Iterable[str], labels: Mapping[Tuple[str, str], int]) -> DefiningGraph:
    """
    Builds a validated DefiningGraph.

    Args:
        generators: Generator names in order.
        labels: Map (s, t) -> m_st. Both orientations may be given if they agree.

    Returns:
        The graph; raises DocumentError on any invariant violation.
    """
    gens = tuple(generators)
    if not gens:
        raise DocumentError("a defining graph needs at least one generator")
    for s in gens:
        if not isinstance(s, str) or not s or not s.isidentifier():
            raise DocumentError(f"invalid generator name {s!r}")
    seen = set()
    for s in gens:
        if s in seen:
            raise DocumentError(f"duplicate generator '{s}'")
        seen.add(s)

    table: Dict[Pair, int] = {}
    for (a, b), m in labels.items():
        if a not in seen or b not in seen:
            raise DocumentError(f"relation ({a}, {b}) names an unknown generator")
        if a == b:
            raise DocumentError(f"self-label on '{a}' is not allowed")
        if isinstance(m, bool) or not isinstance(m, int):
            raise DocumentError(f"label of ({a}, {b}) must be an integer, got {m!r}")
        if m < 2:
            raise DocumentError(f"label of ({a}, {b}) is {m}, labels must be >= 2")
        key = frozenset((a, b))
        if key in table and table[key] != m:
            raise DocumentError(f"asymmetric label on ({a}, {b}): {table[key]} vs {m}")
        table[key] = m
    return DefiningGraph(generators=gens, labels=table)


def parse(text: str) -> DefiningGraph:
    """
    Parses a graph document (YAML, so JSON is accepted as well).

    Expected structure:
        generators: [s, t, r]
        relations:
        - pair: [s, t]
          m: 4
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise DocumentError(f"graph document is not valid YAML/JSON: {e}") from e
    if not isinstance(data, dict):
        raise DocumentError("graph document must be a mapping")
    unknown = set(data) - {"generators", "relations"}
    if unknown:
        raise DocumentError(f"unknown fields in graph document: {sorted(unknown)}")
    generators = data.get("generators")
    if not isinstance(generators, list):
        raise DocumentError("'generators' must be a list of names")
    relations = data.get("relations") or []
    if not isinstance(relations, list):
        raise DocumentError("'relations' must be a list")

    labels: Dict[Tuple[str, str], int] = {}
    for rel in relations:
        if not isinstance(rel, dict) or set(rel) != {"pair", "m"}:
            raise DocumentError(f"relation must have exactly the fields 'pair' and 'm': {rel!r}")
        pair = rel["pair"]
        if not isinstance(pair, list) or len(pair) != 2 or not all(isinstance(x, str) for x in pair):
            raise DocumentError(f"'pair' must list two generators: {pair!r}")
        a, b = pair
        if a == b:
            raise DocumentError(f"self-label on '{a}' is not allowed")
        m = rel["m"]
        if (b, a) in labels and labels[(b, a)] != m:
            raise DocumentError(f"asymmetric label on ({a}, {b}): {labels[(b, a)]} vs {m}")
        if (a, b) in labels and labels[(a, b)] != m:
            raise DocumentError(f"conflicting labels on ({a}, {b})")
        labels[(a, b)] = m
    return from_labels(generators, labels)


def serialize(g: DefiningGraph) -> str:
    """Canonical document: generators in order, relations sorted by generator order."""
    doc = {
        "generators": list(g.generators),
        "relations": [{"pair": [a, b], "m": g.labels[frozenset((a, b))]} for a, b in g.finite_pairs()],
    }
    return yaml.safe_dump(doc, default_flow_style=None, sort_keys=False)


def _inverse(m: float) -> Fraction:
    return Fraction(0) if math.isinf(m) else Fraction(1, int(m))


def triple_sum(g: DefiningGraph, s: str, t: str, r: str) -> Fraction:
    return _inverse(g.label(s, t)) + _inverse(g.label(t, r)) + _inverse(g.label(s, r))


def coxeter_graph(g: DefiningGraph) -> nx.Graph:
    """Graph on S with an edge {t, t'} whenever m_tt' != 2 (including infinity)."""
    graph = nx.Graph()
    graph.add_nodes_from(g.generators)
    for a, b in itertools.combinations(g.generators, 2):
        if g.label(a, b) != 2:
            graph.add_edge(a, b)
    return graph


def _spherical_triangle(g: DefiningGraph) -> bool:
    """Three generators, all labels finite, 1/m sum above 1."""
    if len(g.generators) != 3:
        return False
    s, t, r = g.generators
    finite = all(not math.isinf(g.label(a, b)) for a, b in ((s, t), (t, r), (s, r)))
    return finite and triple_sum(g, s, t, r) > 1


def classify(g: DefiningGraph) -> Classification:
    two_dim_witness = None
    hyp_witness = None
    for s, t, r in itertools.combinations(g.generators, 3):
        total = triple_sum(g, s, t, r)
        if total > 1 and two_dim_witness is None:
            two_dim_witness = (s, t, r)
        if total >= 1 and hyp_witness is None:
            hyp_witness = (s, t, r)

    components = list(nx.connected_components(coxeter_graph(g)))
    irreducible_witness = None
    if len(components) > 1:
        first = next(c for c in components if g.generators[0] in c)
        left = tuple(s for s in g.generators if s in first)
        right = tuple(s for s in g.generators if s not in first)
        irreducible_witness = (left, right)
    irreducible = irreducible_witness is None

    free = tuple(s for s in g.generators if not g.neighbors(s))
    acyl: Optional[bool]
    if len(g.generators) >= 3:
        if not irreducible:
            acyl = False    # a product of two infinite factors
        elif hyp_witness is None:
            acyl = True
        elif _spherical_triangle(g):
            acyl = False    # infinite centre
        else:
            acyl = None
    elif len(g.generators) == 2:
        acyl = math.isinf(g.label(*g.generators))
    else:
        acyl = False

    result = Classification(
        two_dimensional=two_dim_witness is None,
        hyperbolic_type=hyp_witness is None,
        irreducible=irreducible,
        two_dimensional_witness=two_dim_witness,
        hyperbolic_witness=hyp_witness,
        irreducible_witness=irreducible_witness,
        acylindrically_hyperbolic=acyl,
        free_factors=free,
    )
    logger.debug(f"Classified {g.generators}: {result}")
    return result
