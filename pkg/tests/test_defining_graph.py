import logging
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artin_deligne.core import DocumentError
from artin_deligne.defining_graph import classify, from_labels, parse, serialize, triple_sum

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

EXAMPLE = """
generators: [s, t, r]
relations:
- pair: [s, t]
  m: 4
- pair: [t, r]
  m: 2
"""


def triangle(a: int, b: int, c: int):
    """Three generators with labels a on (x, y), b on (y, z) and c on (x, z)."""
    return from_labels(["x", "y", "z"], {("x", "y"): a, ("y", "z"): b, ("x", "z"): c})


def test_parse_example():
    g = parse(EXAMPLE)
    assert g.generators == ("s", "t", "r")
    assert g.label("s", "t") == 4
    assert g.label("t", "s") == 4
    assert g.label("s", "r") == math.inf, "missing relations mean infinity"
    assert g.neighbors("t") == ["s", "r"]
    assert g.finite_pairs() == [("s", "t"), ("t", "r")]


def test_parse_accepts_json():
    g = parse('{"generators": ["a", "b"], "relations": [{"pair": ["a", "b"], "m": 3}]}')
    assert g.label("a", "b") == 3


@pytest.mark.parametrize("text", [
    "generators: [s, s]",
    "generators: [s, t]\nrelations:\n- pair: [s, t]\n  m: 1",
    "generators: [s, t]\nrelations:\n- pair: [s, s]\n  m: 3",
    "generators: [s, t]\nrelations:\n- pair: [s, u]\n  m: 3",
    "generators: [s, t]\nrelations:\n- pair: [s, t]\n  m: 3\n- pair: [t, s]\n  m: 4",
    "generators: [s, t]\nrelations:\n- pair: [s, t]\n  m: 2.5",
    "generators: [s, t]\nextra: 1",
    "generators: []",
    "[1, 2]",
    "generators: [s, t\n",
])
def test_parse_rejects(text):
    with pytest.raises(DocumentError):
        parse(text)


def test_serialize_is_canonical():
    g = parse(EXAMPLE)
    shuffled = parse("generators: [s, t, r]\nrelations:\n- pair: [r, t]\n  m: 2\n- pair: [t, s]\n  m: 4\n")
    assert serialize(g) == serialize(shuffled), "relation order and orientation must not matter"
    assert parse(serialize(g)) == g


def test_triple_sum_exact():
    g = triangle(2, 3, 7)
    total = triple_sum(g, "x", "y", "z")
    assert total == Fraction(41, 42), f"1/2 + 1/3 + 1/7 should be 41/42, got {total}"


@pytest.mark.parametrize("labels, two_dim, hyperbolic", [
    ((2, 3, 7), True, True),
    ((3, 3, 3), True, False),
    ((2, 4, 4), True, False),
    ((2, 3, 6), True, False),
    ((2, 3, 5), False, False),
    ((2, 2, 5), False, False),
    ((4, 4, 4), True, True),
])
def test_classify_triangles(labels, two_dim, hyperbolic):
    c = classify(triangle(*labels))
    logger.info(f"{labels}: {c}")
    assert c.two_dimensional == two_dim
    assert c.hyperbolic_type == hyperbolic
    if not hyperbolic:
        assert c.hyperbolic_witness == ("x", "y", "z")


def test_classify_example():
    c = classify(parse(EXAMPLE))
    assert c.two_dimensional and c.hyperbolic_type
    assert c.irreducible, "s-r carries infinity, so the Coxeter graph links all generators"
    assert c.acylindrically_hyperbolic
    assert c.free_factors == ()


def test_reducible_witness():
    g = from_labels(["a", "b", "c"], {("a", "b"): 2, ("a", "c"): 2})
    c = classify(g)
    assert not c.irreducible
    assert c.irreducible_witness == (("a",), ("b", "c"))
    assert not c.acylindrically_hyperbolic


def test_free_factor_and_two_generators():
    g = from_labels(["a", "b"], {})
    c = classify(g)
    assert c.free_factors == ("a", "b")
    assert c.acylindrically_hyperbolic, "the free group on two generators"
    assert not classify(from_labels(["a", "b"], {("a", "b"): 5})).acylindrically_hyperbolic


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(2, 12), st.integers(2, 12))
def test_classification_invariant_under_relabel(a, b, c):
    g = triangle(a, b, c)
    h = g.relabel({"x": "z", "y": "x", "z": "y"})
    assert classify(g).hyperbolic_type == classify(h).hyperbolic_type
    assert classify(g).two_dimensional == classify(h).two_dimensional
    expected = Fraction(1, a) + Fraction(1, b) + Fraction(1, c) < 1
    assert classify(g).hyperbolic_type == expected


@st.composite
def defining_graphs(draw, max_generators: int = 5):
    """Random defining graphs: each pair gets a label in 2..8 or no relation."""
    n = draw(st.integers(2, max_generators))
    names = [f"g{i}" for i in range(n)]
    labels = {}
    for i in range(n):
        for j in range(i + 1, n):
            m = draw(st.one_of(st.none(), st.integers(2, 8)))
            if m is not None:
                labels[(names[i], names[j])] = m
    return from_labels(names, labels)


@settings(max_examples=60, deadline=None)
@given(defining_graphs())
def test_classification_of_random_graphs(g):
    c = classify(g)
    assert not c.hyperbolic_type or c.two_dimensional, "hyperbolic type implies two-dimensional"
    if c.hyperbolic_witness is not None:
        assert triple_sum(g, *c.hyperbolic_witness) >= 1
    if c.irreducible_witness is not None:
        left, right = c.irreducible_witness
        assert all(g.label(a, b) == 2 for a in left for b in right), "a reducible split commutes across"
    assert set(c.free_factors) == {s for s in g.generators if not g.neighbors(s)}
    assert parse(serialize(g)) == g


@pytest.mark.parametrize("labels, expected", [
    ((3, 3, 2), False),   # spherical B4 type: infinite centre
    ((2, 3, 5), False),   # spherical H3 type
    ((3, 3, 3), None),    # affine: two-dimensional but not of hyperbolic type
    ((2, 3, 7), True),
])
def test_acylindrical_hyperbolicity_only_inside_hyperbolic_type(labels, expected):
    c = classify(triangle(*labels))
    assert c.irreducible
    assert c.acylindrically_hyperbolic is expected, f"{labels}: got {c.acylindrically_hyperbolic}"
    assert c.to_record()["acylindrically_hyperbolic"] is expected
