"""
Dihedral Artin groups A_st = <s, t | sts... = tst...> (m letters on each side).

Elements are kept in left-greedy Garside normal form Delta^p x_1 ... x_r, where
Delta = sts... (m letters) and each x_i is a proper simple element: an
alternating positive word of length 1..m-1. A simple is stored as
(first letter, length) with letters 0 = s and 1 = t; length 0 is the identity
and length m is Delta.
"""
import itertools
import logging
import re
from collections import deque
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from .core import BudgetExceededError, DocumentError

logger = logging.getLogger(__name__)

Simple = Tuple[int, int]
Syllable = Tuple[str, int]

_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\^(-?\d+))?$")

SYLLABLE_WORD_CAP = 2_000_000


class Word(NamedTuple):
    """Freely reduced word as (generator, nonzero exponent) syllables."""
    syllables: Tuple[Syllable, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Parses the `s^2 t^-1 s` grammar; `1` or the empty string is the identity."""
        syllables: List[Syllable] = []
        for token in text.split():
            if token == "1":
                continue
            match = _TOKEN.match(token)
            if not match:
                raise DocumentError(f"cannot parse syllable '{token}'")
            exponent = int(match.group(2)) if match.group(2) is not None else 1
            if exponent == 0:
                raise DocumentError(f"zero exponent in syllable '{token}'")
            syllables.append((match.group(1), exponent))
        return cls.from_syllables(syllables)

    @classmethod
    def from_syllables(cls, syllables: Iterable[Syllable]) -> "Word":
        reduced: List[Syllable] = []
        for gen, exp in syllables:
            if exp == 0:
                continue
            if reduced and reduced[-1][0] == gen:
                merged = reduced[-1][1] + exp
                reduced.pop()
                if merged:
                    reduced.append((gen, merged))
            else:
                reduced.append((gen, exp))
        return cls(tuple(reduced))

    def __str__(self) -> str:
        if not self.syllables:
            return "1"
        return " ".join(gen if exp == 1 else f"{gen}^{exp}" for gen, exp in self.syllables)

    def __mul__(self, other: "Word") -> "Word":
        return Word.from_syllables(self.syllables + other.syllables)

    def inverse(self) -> "Word":
        return Word(tuple((gen, -exp) for gen, exp in reversed(self.syllables)))

    def letters(self) -> Iterator[Tuple[str, int]]:
        for gen, exp in self.syllables:
            step = 1 if exp > 0 else -1
            for _ in range(abs(exp)):
                yield gen, step

    def generators(self) -> Tuple[str, ...]:
        return tuple(sorted({gen for gen, _ in self.syllables}))

    def __len__(self) -> int:
        return sum(abs(exp) for _, exp in self.syllables)


class GarsideElement(NamedTuple):
    """Left-greedy normal form Delta^delta_power x_1 ... x_r."""
    delta_power: int
    canonical_factors: Tuple[Simple, ...]

    @property
    def canonical_length(self) -> int:
        return len(self.canonical_factors)

    @property
    def inf(self) -> int:
        return self.delta_power

    @property
    def sup(self) -> int:
        return self.delta_power + len(self.canonical_factors)


IDENTITY = GarsideElement(0, ())


class DihedralGroup:
    """
    Garside structure of the dihedral Artin group with label m.

    Args:
        m: The finite label, at least 2.
        generators: Names of the two generators, s first.
    """

    def __init__(self, m: int, generators: Tuple[str, str] = ("s", "t")):
        if isinstance(m, bool) or not isinstance(m, int) or m < 2:
            raise DocumentError(f"dihedral label must be an integer >= 2, got {m!r}")
        if len(generators) != 2 or generators[0] == generators[1]:
            raise DocumentError(f"need two distinct generator names, got {generators}")
        self.m = m
        self.generators = tuple(generators)
        self.delta_simple: Simple = (0, m)
        self.identity_simple: Simple = (0, 0)

    def __repr__(self):
        return f"DihedralGroup(m={self.m}, generators={self.generators})"

    def __eq__(self, other):
        return isinstance(other, DihedralGroup) and (self.m, self.generators) == (other.m, other.generators)

    def __hash__(self):
        return hash((self.m, self.generators))

    # -- simples ----------------------------------------------------------

    def _letter_at(self, first: int, i: int) -> int:
        return first if i % 2 == 0 else 1 - first

    def _canonical(self, first: int, length: int) -> Simple:
        if length == 0:
            return self.identity_simple
        if length == self.m:
            return self.delta_simple
        return (first, length)

    def _last(self, x: Simple) -> int:
        return self._letter_at(x[0], x[1] - 1)

    def _tau(self, x: Simple) -> Simple:
        """Conjugation by Delta: swaps s and t when m is odd."""
        if self.m % 2 == 0 or x[1] in (0, self.m):
            return x
        return (1 - x[0], x[1])

    def _is_delta(self, x: Simple) -> bool:
        return x[1] == self.m

    def _renormalize(self, x: Simple, y: Simple) -> Tuple[Simple, Simple]:
        """Left-weights the pair x·y."""
        if y[1] == 0 or self._is_delta(x):
            return x, y
        if self._is_delta(y):
            return self.delta_simple, self._tau(x)
        if x[1] == 0:
            return y, self.identity_simple
        if self._last(x) == y[0]:
            return x, y
        total = x[1] + y[1]
        if total <= self.m:
            return self._canonical(x[0], total), self.identity_simple
        return self.delta_simple, (self._letter_at(x[0], self.m), total - self.m)

    def _normalize(self, power: int, factors: Sequence[Simple]) -> GarsideElement:
        seq = list(factors)
        changed = True
        while changed:
            changed = False
            for i in range(len(seq) - 1):
                pair = self._renormalize(seq[i], seq[i + 1])
                if pair != (seq[i], seq[i + 1]):
                    seq[i], seq[i + 1] = pair
                    changed = True
        while seq and self._is_delta(seq[0]):
            power += 1
            seq.pop(0)
        while seq and seq[-1][1] == 0:
            seq.pop()
        return GarsideElement(power, tuple(seq))

    def is_normal(self, element: GarsideElement) -> bool:
        """Checks the GarsideElement invariants: proper factors, pairwise left-weighted."""
        factors = element.canonical_factors
        if any(x[1] in (0, self.m) or x[0] not in (0, 1) for x in factors):
            return False
        return all(self._last(x) == y[0] for x, y in zip(factors, factors[1:]))

    # -- group operations -------------------------------------------------

    def letter_index(self, gen: str) -> int:
        try:
            return self.generators.index(gen)
        except ValueError:
            raise DocumentError(f"'{gen}' is not a generator of {self}") from None

    def multiply_letter(self, element: GarsideElement, letter: int, sign: int) -> GarsideElement:
        if sign > 0:
            return self._normalize(element.delta_power, element.canonical_factors + ((letter, 1),))
        # u^-1 = Delta^-1 (Delta u^-1), and Delta u^-1 is the alternating word of length m-1
        # whose continuation by u is Delta
        first = letter if self.m % 2 == 1 else 1 - letter
        twisted = tuple(self._tau(x) for x in element.canonical_factors)
        return self._normalize(element.delta_power - 1, twisted + ((first, self.m - 1),))

    def times_delta(self, element: GarsideElement, k: int) -> GarsideElement:
        factors = element.canonical_factors
        if k % 2 and self.m % 2:
            factors = tuple(self._tau(x) for x in factors)
        return GarsideElement(element.delta_power + k, factors)

    def multiply(self, a: GarsideElement, b: GarsideElement) -> GarsideElement:
        result = self.times_delta(a, b.delta_power)
        for x in b.canonical_factors:
            result = self._normalize(result.delta_power, result.canonical_factors + (x,))
        return result

    def normal_form(self, w: Word) -> GarsideElement:
        element = IDENTITY
        for gen, sign in w.letters():
            element = self.multiply_letter(element, self.letter_index(gen), sign)
        return element

    def element(self, text: str) -> GarsideElement:
        return self.normal_form(Word.parse(text))

    def to_word(self, element: GarsideElement) -> Word:
        """A word representing the element: Delta^p followed by the factor letters."""
        delta_word = [(self.generators[self._letter_at(0, i)], 1) for i in range(self.m)]
        syllables: List[Syllable] = []
        if element.delta_power >= 0:
            syllables.extend(delta_word * element.delta_power)
        else:
            inverse = [(gen, -1) for gen, _ in reversed(delta_word)]
            syllables.extend(inverse * -element.delta_power)
        for first, length in element.canonical_factors:
            syllables.extend((self.generators[self._letter_at(first, i)], 1) for i in range(length))
        return Word.from_syllables(syllables)

    def inverse(self, element: GarsideElement) -> GarsideElement:
        return self.normal_form(self.to_word(element).inverse())

    def power(self, element: GarsideElement, k: int) -> GarsideElement:
        base = element if k >= 0 else self.inverse(element)
        result = IDENTITY
        for _ in range(abs(k)):
            result = self.multiply(result, base)
        return result

    def generator_power(self, letter: int, k: int) -> GarsideElement:
        result = IDENTITY
        for _ in range(abs(k)):
            result = self.multiply_letter(result, letter, 1 if k > 0 else -1)
        return result

    def delta(self) -> GarsideElement:
        return GarsideElement(1, ())

    def length(self, element: GarsideElement) -> int:
        """Image under the length homomorphism A_st -> Z sending s and t to 1."""
        return element.delta_power * self.m + sum(x[1] for x in element.canonical_factors)

    def center_generator(self) -> GarsideElement:
        """z_st: Delta for m even, Delta^2 for m odd."""
        return GarsideElement(1 if self.m % 2 == 0 else 2, ())

    def z_period(self) -> int:
        return self.center_generator().delta_power

    def commutes(self, a: Word, b: Word) -> bool:
        return self.normal_form(a * b) == self.normal_form(b * a)

    def commutes_elements(self, a: GarsideElement, b: GarsideElement) -> bool:
        return self.multiply(a, b) == self.multiply(b, a)

    # -- the syllable lemma -----------------------------------------------

    def syllable_nontriviality_check(self, n: int, exponent_bound: int,
                                     cap: int = SYLLABLE_WORD_CAP) -> bool:
        """
        Exhaustively checks that every word with exactly 2n syllables and exponents
        in [-E, E] \\ {0} is nontrivial.
        """
        if not 1 <= n < self.m:
            raise ValueError(f"syllable check needs 1 <= n < m={self.m}, got n={n}")
        if exponent_bound < 1:
            raise ValueError(f"exponent bound must be >= 1, got {exponent_bound}")
        count = 2 * (2 * exponent_bound) ** (2 * n)
        if count > cap:
            raise BudgetExceededError(f"{count} words exceed the syllable enumeration cap {cap}")
        exponents = [e for e in range(-exponent_bound, exponent_bound + 1) if e]
        powers = {(letter, e): self.generator_power(letter, e) for letter in (0, 1) for e in exponents}

        def extend(element: GarsideElement, letter: int, remaining: int) -> bool:
            for e in exponents:
                nxt = self.multiply(element, powers[(letter, e)])
                if remaining == 1:
                    if nxt == IDENTITY:
                        logger.warning(f"Trivial {2 * n}-syllable word found in {self}")
                        return False
                elif not extend(nxt, 1 - letter, remaining - 1):
                    return False
            return True

        result = extend(IDENTITY, 0, 2 * n) and extend(IDENTITY, 1, 2 * n)
        logger.info(f"Syllable check m={self.m}, n={n}, E={exponent_bound}: {count} words, result={result}")
        return result

    # -- cosets of A_s and A_t ----------------------------------------------

    def _side_letter(self, side: str) -> int:
        return self.letter_index(side)

    def _coset_window(self, h: GarsideElement, letter: int) -> Iterator[GarsideElement]:
        """h u^a for |a| <= 2 r(h): canonical length of h u^a is at least |a| - r(h)."""
        bound = 2 * h.canonical_length
        yield h
        up, down = h, h
        for _ in range(bound):
            up = self.multiply_letter(up, letter, 1)
            down = self.multiply_letter(down, letter, -1)
            yield up
            yield down

    def coset_key(self, h: GarsideElement, side: str) -> GarsideElement:
        """Canonical representative of h A_side: least (canonical length, delta power, factors)."""
        letter = self._side_letter(side)
        return min(self._coset_window(h, letter),
                   key=lambda x: (x.canonical_length, x.delta_power, x.canonical_factors))

    def same_coset(self, h: GarsideElement, h2: GarsideElement, side: str) -> bool:
        """h A_u = h2 A_u iff h^-1 h2 lies in <u>, tested against u^k with k its length."""
        letter = self._side_letter(side)
        quotient = self.multiply(self.inverse(h), h2)
        return quotient == self.generator_power(letter, self.length(quotient))

    def centralizer_decomposition(self, element: GarsideElement, side: str) -> Optional[Tuple[int, int]]:
        """
        Writes element = u^a z^b when it lies in <u, z_st> = the centralizer of u.

        Returns:
            (a, b), or None when the element is not in <u, z_st>.
        """
        letter = self._side_letter(side)
        period = self.z_period()
        r = element.canonical_length
        for a in sorted({r, -r}):
            base = self.generator_power(letter, a)
            shift = element.delta_power - base.delta_power
            if shift % period:
                continue
            b = shift // period
            candidate = self.multiply(base, GarsideElement(b * period, ()))
            if candidate == element:
                return a, b
        return None

    def tree_key(self, h: GarsideElement, side: str) -> Tuple:
        """
        Identifies the standard tree through the coset vertex h A_side.

        Two cosets lie in one tree iff they differ by a power of z_st (same side), or,
        for m odd, h A_t lies in the tree of h Delta^-1 A_s.
        """
        if self.m % 2 == 1 and side == self.generators[1]:
            h = self.times_delta(h, -1)
            side = self.generators[0]
        letter = self._side_letter(side)
        period = self.z_period()
        best = min(self._coset_window(h, letter),
                   key=lambda x: (x.canonical_length, x.delta_power % period, x.canonical_factors))
        return (side, best.delta_power % period, best.canonical_factors)

    def normal_forms(self, length: int) -> Iterator[Tuple[Simple, ...]]:
        """All left-weighted sequences of proper simples of the given length."""
        proper = [(a, k) for a in (0, 1) for k in range(1, self.m)]

        def helper(prefix: Tuple[Simple, ...]) -> Iterator[Tuple[Simple, ...]]:
            if len(prefix) == length:
                yield prefix
                return
            for x in proper:
                if not prefix or self._last(prefix[-1]) == x[0]:
                    yield from helper(prefix + (x,))

        yield from helper(())

    def enumerate_cosets(self, side: str, radius: int) -> List[GarsideElement]:
        """
        Distinct cosets h A_side with h of canonical length <= radius and |delta power| <= radius.

        Returns:
            Canonical representatives, sorted by (canonical length, delta power, factors).
        """
        if radius < 0:
            raise ValueError(f"radius must be >= 0, got {radius}")
        keys = set()
        for length in range(radius + 1):
            for factors in self.normal_forms(length):
                for p in range(-radius, radius + 1):
                    keys.add(self.coset_key(GarsideElement(p, factors), side))
        result = sorted(keys, key=lambda x: (x.canonical_length, x.delta_power, x.canonical_factors))
        logger.debug(f"{len(result)} cosets of A_{side} within radius {radius} in {self}")
        return result

    def coset_graph(self, radius: int, exponent_bound: int = 1) -> nx.Graph:
        """
        Ball of the development D around the coset A_s: vertices are cosets h A_s and h A_t,
        each element h is an edge joining h A_s to h A_t. From a coset vertex g A_u the
        explored edges are g u^k with |k| <= exponent_bound.
        """
        s, t = self.generators
        root = (s, IDENTITY)
        graph = nx.Graph()
        graph.add_node(root, side=s, depth=0)
        queue = deque([root])
        while queue:
            node = queue.popleft()
            side, rep = node
            depth = graph.nodes[node]["depth"]
            if depth >= radius:
                continue
            other = t if side == s else s
            letter = self._side_letter(side)
            for k in range(-exponent_bound, exponent_bound + 1):
                edge_element = self.multiply(rep, self.generator_power(letter, k))
                neighbor = (other, self.coset_key(edge_element, other))
                if neighbor not in graph:
                    graph.add_node(neighbor, side=other, depth=depth + 1)
                    queue.append(neighbor)
                graph.add_edge(node, neighbor, element=edge_element)
        return graph

    def combinatorial_girth(self, radius: Optional[int] = None, exponent_bound: int = 1) -> Optional[int]:
        """
        Shortest cycle of D, searched through the base cosets A_s and A_t
        (A_st acts transitively on the cosets of each type).
        """
        radius = self.m if radius is None else radius
        graph = self.coset_graph(radius, exponent_bound)
        s, t = self.generators
        roots = [(s, IDENTITY), (t, IDENTITY)]
        best = None
        for root in roots:
            for neighbor in list(graph.neighbors(root)):
                data = graph.edges[root, neighbor]
                graph.remove_edge(root, neighbor)
                try:
                    length = nx.shortest_path_length(graph, root, neighbor) + 1
                    best = length if best is None else min(best, length)
                except nx.NetworkXNoPath:
                    pass
                graph.add_edge(root, neighbor, **data)
        return best
