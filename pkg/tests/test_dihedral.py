import itertools
import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artin_deligne.core import BudgetExceededError, DocumentError
from artin_deligne.dihedral import IDENTITY, DihedralGroup, GarsideElement, Word

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


@st.composite
def words(draw, max_syllables: int = 6):
    """Random words in s and t with exponents in -3..3."""
    pairs = draw(st.lists(st.tuples(st.sampled_from(["s", "t"]), st.integers(-3, 3)), max_size=max_syllables))
    return Word.from_syllables(pairs)


def alternating(m: int, first: str = "s") -> str:
    """The positive alternating word of length m starting with first."""
    other = "t" if first == "s" else "s"
    return " ".join(first if i % 2 == 0 else other for i in range(m))


def test_word_parse_and_print():
    w = Word.parse("s^2 t^-1 s")
    assert w.syllables == (("s", 2), ("t", -1), ("s", 1))
    assert str(w) == "s^2 t^-1 s"
    assert len(w) == 4
    assert str(Word.parse("1")) == "1"
    assert Word.parse("s t t^-1 s^-1") == Word(), "free reduction cancels adjacent syllables"


@pytest.mark.parametrize("text", ["s^0", "s^", "2s", "s^x"])
def test_word_parse_rejects(text):
    with pytest.raises(DocumentError):
        Word.parse(text)


@pytest.mark.parametrize("m", [2, 3, 4, 5, 7])
def test_braid_relation(m):
    group = DihedralGroup(m)
    left = group.element(alternating(m, "s"))
    right = group.element(alternating(m, "t"))
    assert left == right == group.delta(), f"both alternating words of length {m} are Delta"


@pytest.mark.parametrize("m", [3, 4, 5])
def test_center(m):
    group = DihedralGroup(m)
    z = group.center_generator()
    s, t = group.element("s"), group.element("t")
    assert group.commutes_elements(z, s) and group.commutes_elements(z, t)
    delta = group.delta()
    assert group.commutes_elements(delta, s) == (m % 2 == 0), "Delta is central only for m even"


def test_rejects_bad_label():
    with pytest.raises(DocumentError):
        DihedralGroup(1)
    with pytest.raises(DocumentError):
        DihedralGroup(3, ("s", "s"))


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 6), words(), words())
def test_normal_form_is_a_homomorphism(m, wa, wb):
    group = DihedralGroup(m)
    na, nb = group.normal_form(wa), group.normal_form(wb)
    product = group.normal_form(wa * wb)
    assert group.is_normal(na) and group.is_normal(product)
    assert group.multiply(na, nb) == product
    assert group.multiply(na, group.inverse(na)) == IDENTITY
    assert group.length(product) == group.length(na) + group.length(nb)
    assert group.normal_form(group.to_word(product)) == product


def test_negative_letter_normal_form():
    group = DihedralGroup(4)
    inv = group.element("s^-1")
    assert inv.delta_power == -1
    assert group.multiply(inv, group.element("s")) == IDENTITY


@pytest.mark.parametrize("m", [2, 3, 4])
def test_syllable_words_are_nontrivial(m):
    group = DihedralGroup(m)
    for n in range(1, m):
        assert group.syllable_nontriviality_check(n, 2)


def test_syllable_check_cap():
    with pytest.raises(BudgetExceededError):
        DihedralGroup(6).syllable_nontriviality_check(5, 6, cap=1000)
    with pytest.raises(ValueError):
        DihedralGroup(3).syllable_nontriviality_check(3, 1)


def test_centralizer_decomposition():
    group = DihedralGroup(4)
    element = group.times_delta(group.element("s^3"), 2)
    assert group.centralizer_decomposition(element, "s") == (3, 2)
    assert group.centralizer_decomposition(group.element("s^-2"), "s") == (-2, 0)
    assert group.centralizer_decomposition(group.element("t"), "s") is None

    odd = DihedralGroup(3)
    assert odd.centralizer_decomposition(odd.element("t s t t s t"), "s") == (0, 1)
    assert odd.centralizer_decomposition(odd.element("s s t s t s t"), "s") == (1, 1)


def test_coset_keys():
    group = DihedralGroup(3)
    h = group.element("t s")
    assert group.coset_key(h, "s") == group.coset_key(group.element("t"), "s")
    assert group.same_coset(h, group.element("t s^5"), "s")
    assert not group.same_coset(h, group.element("t"), "t")


def test_tree_keys():
    even = DihedralGroup(4)
    h = even.element("t s")
    z = even.center_generator()
    assert even.tree_key(h, "s") == even.tree_key(even.multiply(h, z), "s")
    assert even.tree_key(IDENTITY, "s") != even.tree_key(even.element("t"), "s")

    odd = DihedralGroup(3)
    assert odd.tree_key(IDENTITY, "t") == odd.tree_key(GarsideElement(-1, ()), "s")


@pytest.mark.parametrize("m", [2, 3, 4])
def test_combinatorial_girth(m):
    girth = DihedralGroup(m).combinatorial_girth()
    logger.info(f"m={m}: girth {girth}")
    assert girth == 2 * m, f"the development of A_st has girth 2m={2 * m}, got {girth}"


def test_enumerate_cosets_distinct():
    group = DihedralGroup(3)
    cosets = group.enumerate_cosets("s", 1)
    assert IDENTITY in cosets
    for i, a in enumerate(cosets):
        for b in cosets[i + 1:]:
            assert not group.same_coset(a, b, "s"), f"{a} and {b} represent the same coset"


@pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
def test_delta_squared_is_central(m):
    group = DihedralGroup(m)
    square = group.power(group.delta(), 2)
    for letter in ("s", "t", "s^-1"):
        assert group.commutes_elements(square, group.element(letter))
    assert group.commutes_elements(group.delta(), group.element("s")) == (m % 2 == 0)


def coxeter_image(m: int, word: Word) -> np.ndarray:
    """Image in the dihedral group of order 2m, s and t acting as reflections at angle pi/m."""
    def reflection(phi):
        return np.array([[np.cos(2 * phi), np.sin(2 * phi)], [np.sin(2 * phi), -np.cos(2 * phi)]])

    mats = {"s": reflection(0.0), "t": reflection(np.pi / m)}
    image = np.eye(2)
    for gen, exp in word.syllables:
        image = image @ np.linalg.matrix_power(mats[gen], abs(exp))
    return image


def abelian_image(m: int, word: Word) -> tuple:
    """Exponent sums; s and t are conjugate when m is odd."""
    sums = {"s": 0, "t": 0}
    for gen, exp in word.syllables:
        sums[gen] += exp
    return (sums["s"] + sums["t"],) if m % 2 else (sums["s"], sums["t"])


def all_words(length: int):
    letters = [("s", 1), ("s", -1), ("t", 1), ("t", -1)]
    for n in range(length + 1):
        for letters_n in itertools.product(letters, repeat=n):
            yield Word.from_syllables(letters_n)


def check_normal_forms_against_quotients(m: int, length: int):
    """Words with one normal form must agree in the Coxeter group and in the abelianization."""
    group = DihedralGroup(m)
    seen = {}
    for word in all_words(length):
        nf = group.normal_form(word)
        image, abelian = coxeter_image(m, word), abelian_image(m, word)
        first_image, first_abelian = seen.setdefault(nf, (image, abelian))
        assert np.allclose(first_image, image, atol=1e-9) and first_abelian == abelian, \
            f"m={m}: {word} has the normal form of a word with a different image"
        assert group.normal_form(group.to_word(nf)) == nf
    logger.info(f"m={m}: {len(seen)} distinct elements among words of length <= {length}")
    return seen


@pytest.mark.parametrize("m", [2, 3, 4])
def test_normal_forms_against_quotients(m):
    seen = check_normal_forms_against_quotients(m, 6)
    assert IDENTITY in seen


@pytest.mark.slow
@pytest.mark.parametrize("m", [2, 3, 4])
def test_normal_forms_against_quotients_length_8(m):
    check_normal_forms_against_quotients(m, 8)


# Reduced Burau matrices of the 3-strand braid group as (numerator, k): the image is numerator / q^k.
# Entries are integer coefficient arrays in q, lowest degree first.
BURAU = {
    (1, 1): ([[[0, -1], [1]], [[0], [1]]], 0),
    (1, -1): ([[[-1], [1]], [[0], [0, 1]]], 1),
    (2, 1): ([[[1], [0]], [[0, 1], [0, -1]]], 0),
    (2, -1): ([[[0, 1], [0]], [[0, 1], [-1]]], 1),
}


def _padd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = max(len(a), len(b))
    return np.pad(a, (0, n - len(a))) + np.pad(b, (0, n - len(b)))


def _matmul(a, b):
    return [[_padd(np.convolve(a[i][0], b[0][j]), np.convolve(a[i][1], b[1][j])) for j in range(2)] for i in range(2)]


def burau_image(m: int, word: Word, length: int) -> tuple:
    """Exact Burau image of word under s -> sigma_1 (sigma_1^2 for m = 4), t -> sigma_2, over the denominator q^(2 length)."""
    power = 2 if m == 4 else 1
    image = [[np.array([1]), np.array([0])], [np.array([0]), np.array([1])]]
    k = 0
    for gen, sign in word.letters():
        numerator, shift = BURAU[(1 if gen == "s" else 2, sign)]
        for _ in range(power if gen == "s" else 1):
            image = _matmul(image, [[np.array(e, dtype=np.int64) for e in row] for row in numerator])
            k += shift
    pad = 2 * length - k
    return tuple(tuple(int(c) for c in np.trim_zeros(np.pad(e, (pad, 0)), "b")) for row in image for e in row)


def check_normal_forms_against_burau(m: int, length: int):
    """Two words share a normal form exactly when their images in a faithful representation agree."""
    group = DihedralGroup(m)
    by_form, by_image = {}, {}
    for word in all_words(length):
        nf = group.normal_form(word)
        image = abelian_image(m, word) if m == 2 else burau_image(m, word, length)
        assert by_form.setdefault(nf, image) == image, f"m={m}: {word} shares a normal form with a different element"
        assert by_image.setdefault(image, nf) == nf, f"m={m}: {word} and an equal element have different normal forms"
    logger.info(f"m={m}: {len(by_form)} elements separated among words of length <= {length}")
    return by_form


def test_burau_braid_relations():
    s, t = Word.parse("s"), Word.parse("t")
    assert burau_image(3, s * t * s, 3) == burau_image(3, t * s * t, 3)
    assert burau_image(4, s * t * s * t, 4) == burau_image(4, t * s * t * s, 4)
    assert burau_image(3, s * t, 2) != burau_image(3, t * s, 2)
    assert burau_image(3, Word.parse("s t^-1 t s^-1"), 2) == burau_image(3, Word(), 2)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_normal_forms_separate_elements(m):
    forms = check_normal_forms_against_burau(m, 6)
    assert IDENTITY in forms


@pytest.mark.slow
@pytest.mark.parametrize("m", [2, 3, 4])
def test_normal_forms_separate_elements_length_8(m):
    check_normal_forms_against_burau(m, 8)


@pytest.mark.slow
@pytest.mark.parametrize("m", [3, 4, 5])
def test_syllable_words_are_nontrivial_up_to_m(m):
    group = DihedralGroup(m)
    for n in range(1, m):
        assert group.syllable_nontriviality_check(n, 2), f"m={m}: a {2 * n}-syllable word is trivial"


@pytest.mark.parametrize("m", [5, 6])
def test_combinatorial_girth_larger_labels(m):
    assert DihedralGroup(m).combinatorial_girth() == 2 * m
