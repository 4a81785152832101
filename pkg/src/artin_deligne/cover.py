"""
The open cover {U_tau} of a CAT(-1) PHComplex, its constants, decompositions of
geodesics along it, and the gallery-stability experiments built on top.

    U_v     = N_{6 eps0}(v)
    U_e     = N_{4 eps}(e minus U_v and U_w)
    U_sigma = N_{eps}(sigma minus the sets of its proper faces)

Membership of U_v and U_e is decided exactly inside the triangles around a point.
Membership of U_sigma is an inner approximation: a point counts when it lies in the
core of sigma or when one of a fixed fan of nearby points within eps does.
"""
import logging
import math
from bisect import bisect_left
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .core import GeometryError
from .geodesics import CHAIN_CAP, Geodesic, LinkPoint, extended_gallery, gallery, geodesic, link_distance, point_at
from .hyp_trig import HPoint, angle_at, distance, orientation, point_along, segment_distance, shoot
from .ph_complex import CPoint, PHComplex, Simplex, faces, simplex_order

logger = logging.getLogger(__name__)

SAFETY = 2.0
EPS0_STEPS = 60
FAN_DIRECTIONS = 12
INSIDE_TOL = 1e-12


class CoverConstants(NamedTuple):
    alpha: float
    epsilon0: float
    epsilon: float
    lipschitz: float                # used bound on the angular Lipschitz constant of pi_v
    lipschitz_sampled: float        # largest sampled difference quotient
    min_angle: float
    min_girth: Optional[float]      # None when no vertex link has a cycle
    min_height: float               # least distance from a vertex to an opposite edge

    @property
    def lipschitz_measured(self) -> bool:
        return self.lipschitz_sampled >= self.lipschitz

    @property
    def verified(self) -> bool:
        girth_ok = self.min_girth is None or self.min_girth >= 2 * math.pi + 4 * self.alpha
        return girth_ok and self.min_angle >= 12 * self.alpha and 0 < self.epsilon <= self.epsilon0

    def to_record(self) -> Dict:
        record = self._asdict()
        record["lipschitz_measured"] = self.lipschitz_measured
        record["verified"] = self.verified
        return record


class PropertyCheck(NamedTuple):
    name: str
    samples: int
    violations: int
    witness: Optional[str]

    @property
    def verified(self) -> bool:
        return self.violations == 0

    def to_record(self) -> Dict:
        return {**self._asdict(), "verified": self.verified}


def _heights(Y: PHComplex) -> float:
    least = math.inf
    for t in range(len(Y.triangles)):
        placed = Y.positions(t)
        for i in range(3):
            least = min(least, segment_distance(placed[i], placed[(i + 1) % 3], placed[(i + 2) % 3]))
    return least


def _sample_lipschitz(Y: PHComplex, epsilon0: float, samples: int, rng: np.random.RandomState) -> float:
    """Largest |angle change at v| / distance over nearby point pairs outside N_eps0(v)."""
    worst = 0.0
    step = epsilon0 * 1e-3
    for _ in range(samples):
        t = rng.randint(len(Y.triangles))
        i = rng.randint(3)
        placed = Y.positions(t)
        v, a = placed[i], placed[(i + 1) % 3]
        x = Y.position(Y.random_point(rng, t))
        if distance(v, x) < epsilon0:
            continue
        y = shoot(x, v, rng.uniform(0, math.pi), step, rng.choice([-1.0, 1.0]))
        d = distance(x, y)
        if d <= 0:
            continue
        worst = max(worst, abs(angle_at(v, a, x) - angle_at(v, a, y)) / d)
    return worst


def cover_constants(Y: PHComplex, samples: int = 2000, seed: int = 0) -> CoverConstants:
    """
    Constants of the cover: alpha from the least angle and link girth, eps0 by bisection on
    the vertex-ball conditions, eps from the Lipschitz bound on the link projection.

    Raises:
        GeometryError: some vertex link has girth <= 2 pi.
    """
    min_angle = Y.min_angle()
    girth = Y.min_link_girth()
    if girth is not None and girth <= 2 * math.pi:
        raise GeometryError(f"{Y.name} is not CAT(-1): a vertex link has girth {girth} <= 2 pi")
    slack = math.inf if girth is None else (girth - 2 * math.pi) / 4
    alpha = min(min_angle / 12, slack) / SAFETY

    height = _heights(Y)
    shortest = min(min(shape.sides) for shape in Y.shapes)

    def fits(e: float) -> bool:
        # N_{4 eps0}(U_v) inside st(v); balls at the ends of an edge disjoint
        return 10 * e < height and 12 * e < shortest

    lo, hi = 0.0, height
    for _ in range(EPS0_STEPS):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if fits(mid) else (lo, mid)
    epsilon0 = lo

    sampled = _sample_lipschitz(Y, epsilon0, samples, np.random.RandomState(seed))
    lipschitz = max(sampled, 1.0 / math.sinh(epsilon0))
    epsilon = min(alpha / (SAFETY * lipschitz), epsilon0)
    constants = CoverConstants(alpha, epsilon0, epsilon, lipschitz, sampled, min_angle, girth, height)
    logger.info(f"Cover constants for {Y.name}: alpha={alpha}, eps0={epsilon0}, eps={epsilon}")
    if constants.lipschitz_measured:
        logger.warning(f"Lipschitz bound {sampled} on {Y.name} is a sampled value")
    return constants


class Decomposition(NamedTuple):
    simplices: Tuple[Simplex, ...]   # Sigma_0 .. Sigma_{k+1}
    positions: Tuple[float, ...]     # arclength of each x_i along the geodesic
    points: Tuple[CPoint, ...]

    @property
    def k(self) -> int:
        return len(self.simplices) - 2

    @property
    def anchored(self) -> bool:
        return all(not (a <= b or b <= a) for a, b in zip(self.simplices, self.simplices[1:]))

    def inner(self) -> Optional["Decomposition"]:
        """Sigma_1 .. Sigma_k, a decomposition of x_1 x_k; None when k < 2."""
        if self.k < 2:
            return None
        return Decomposition(self.simplices[1:-1], self.positions[1:-1], self.points[1:-1])

    def to_record(self) -> Dict:
        inner = self.inner()
        return {
            "k": self.k,
            "simplices": [sorted(s) for s in self.simplices],
            "positions": list(self.positions),
            "anchored": self.anchored,
            "inner_anchored": None if inner is None else inner.anchored,
        }


class StabilityResult(NamedTuple):
    passed: bool
    offending: Tuple[Simplex, ...]
    precondition: bool               # both endpoint moves below eps
    dx: float
    dy: float

    def to_record(self) -> Dict:
        return {
            "passed": self.passed,
            "offending": [sorted(s) for s in self.offending],
            "precondition": self.precondition,
            "dx": self.dx,
            "dy": self.dy,
        }


class FuzzReport(NamedTuple):
    trials: int
    passed: int
    failed: int
    skipped: int
    scale: float
    seed: int
    failures: Tuple[Dict, ...]

    @property
    def verified(self) -> bool:
        return self.failed == 0

    def merge(self, other: "FuzzReport") -> "FuzzReport":
        return FuzzReport(self.trials + other.trials, self.passed + other.passed, self.failed + other.failed,
                          self.skipped + other.skipped, self.scale, self.seed, self.failures + other.failures)

    def to_record(self) -> Dict:
        return {**self._asdict(), "failures": list(self.failures), "verified": self.verified}


class Cover:
    """
    The cover {U_tau} of Y for given constants.

    Args:
        Y: The complex.
        constants: From cover_constants(Y).
    """

    def __init__(self, Y: PHComplex, constants: CoverConstants):
        self.Y = Y
        self.constants = constants
        self.vertex_radius = 6 * constants.epsilon0
        self.edge_radius = 4 * constants.epsilon

    def _triangles_at(self, p: CPoint, tau: Simplex) -> List[int]:
        return [t for t in self.Y.star(self.Y.carrier(p)) if tau <= frozenset(self.Y.triangles[t])]

    def _edge_core(self, placed: Sequence[HPoint], i: int, j: int) -> Optional[Tuple[HPoint, HPoint]]:
        a, b = placed[i], placed[j]
        length = distance(a, b)
        if length <= 2 * self.vertex_radius:
            return None
        return point_along(a, b, self.vertex_radius), point_along(b, a, self.vertex_radius)

    def _vertex_gap(self, placed: Sequence[HPoint], x: HPoint, i: int) -> float:
        return distance(x, placed[i]) - self.vertex_radius

    def _edge_gap(self, placed: Sequence[HPoint], x: HPoint, i: int, j: int) -> float:
        core = self._edge_core(placed, i, j)
        if core is None:
            return math.inf
        return segment_distance(x, *core) - self.edge_radius

    def in_vertex_set(self, p: CPoint, v: int) -> bool:
        for t in self._triangles_at(p, frozenset((v,))):
            placed = self.Y.positions(t)
            x = self.Y.position(self.Y.transfer(p, t))
            if self._vertex_gap(placed, x, self.Y.local_index(t, v)) < 0:
                return True
        return False

    def in_edge_set(self, p: CPoint, e: Simplex) -> bool:
        a, b = sorted(e)
        for t in self._triangles_at(p, e):
            placed = self.Y.positions(t)
            x = self.Y.position(self.Y.transfer(p, t))
            if self._edge_gap(placed, x, self.Y.local_index(t, a), self.Y.local_index(t, b)) < 0:
                return True
        return False

    def _face_gaps(self, placed: Sequence[HPoint], x: HPoint) -> Tuple[float, float]:
        vertex = min(self._vertex_gap(placed, x, i) for i in range(3))
        edge = min(self._edge_gap(placed, x, (i + 1) % 3, (i + 2) % 3) for i in range(3))
        return vertex, edge

    def in_core(self, t: int, x: HPoint) -> bool:
        vertex, edge = self._face_gaps(self.Y.positions(t), x)
        return vertex >= 0 and edge >= 0

    def in_triangle_set(self, p: CPoint, sigma: Simplex) -> bool:
        if not self.Y.carrier(p) <= sigma:
            return False
        t = self.Y.triangle_of(sigma)
        placed = self.Y.positions(t)
        x = self.Y.position(self.Y.transfer(p, t))
        eps = self.constants.epsilon
        vertex, edge = self._face_gaps(placed, x)
        if vertex >= 0 and edge >= 0:
            return True
        if vertex < -eps or edge < -eps:
            return False
        ref = max(placed, key=lambda q: distance(x, q))
        for r in (eps / 2, eps * (1 - 1e-6)):
            for k in range(FAN_DIRECTIONS):
                turn = 2 * math.pi * k / FAN_DIRECTIONS
                side = 1.0 if turn <= math.pi else -1.0
                q = shoot(x, ref, min(turn, 2 * math.pi - turn), r, side)
                if inside(placed, q) and self.in_core(t, q):
                    return True
        return False

    def contains(self, tau: Simplex, p: CPoint) -> bool:
        if len(tau) == 1:
            return self.in_vertex_set(p, next(iter(tau)))
        if len(tau) == 2:
            return self.in_edge_set(p, tau)
        return self.in_triangle_set(p, tau)

    def sets(self, p: CPoint) -> List[Simplex]:
        """Every tau with p in U_tau, among the faces of the triangles around p."""
        candidates = {f for t in self.Y.star(self.Y.carrier(p)) for f in faces(frozenset(self.Y.triangles[t]))}
        return [tau for tau in sorted(candidates, key=simplex_order) if self.contains(tau, p)]

    def star_margin(self, p: CPoint, tau: Simplex) -> float:
        """Distance from p to the faces of its triangles that avoid tau."""
        margin = math.inf
        for t in self.Y.star(self.Y.carrier(p)):
            placed = self.Y.positions(t)
            x = self.Y.position(self.Y.transfer(p, t))
            for i in range(3):
                if not tau <= self.Y.edge_key(t, i):
                    margin = min(margin, segment_distance(x, placed[(i + 1) % 3], placed[(i + 2) % 3]))
        return margin

    def sample_in(self, tau: Simplex, rng: np.random.RandomState, attempts: int = 200) -> Optional[CPoint]:
        """A random point of U_tau inside one triangle containing tau."""
        Y = self.Y
        t = int(rng.choice(Y.star(tau)))
        placed = Y.positions(t)
        tri = Y.triangles[t]
        if len(tau) == 1:
            i = tri.index(next(iter(tau)))
            v, a, b = placed[i], placed[(i + 1) % 3], placed[(i + 2) % 3]
            r = rng.uniform(0, self.vertex_radius * (1 - 1e-6))
            if r <= 0:
                return Y.vertex_point(tri[i])
            q = shoot(v, a, rng.uniform(0, Y.shapes[t].angles[i]), r, math.copysign(1.0, orientation(v, a, b)))
            return Y.from_position(t, placed, q)
        if len(tau) == 2:
            i = next(j for j in range(3) if tri[j] not in tau)
            a, b, c = placed[(i + 1) % 3], placed[(i + 2) % 3], placed[i]
            core = self._edge_core(placed, (i + 1) % 3, (i + 2) % 3)
            if core is None:
                return None
            base = point_along(core[0], core[1], rng.uniform(0, distance(*core)))
            q = shoot(base, b, math.pi / 2, rng.uniform(0, self.edge_radius * (1 - 1e-6)),
                      math.copysign(1.0, orientation(a, b, c)))
            return Y.from_position(t, placed, q) if inside(placed, q) else None
        for _ in range(attempts):
            p = Y.random_point(rng, t)
            if self.in_triangle_set(p, tau):
                return p
        return None


def inside(placed: Sequence[HPoint], x: HPoint) -> bool:
    w = np.linalg.solve(np.stack(placed, axis=1), x)
    return bool(w.min() >= -INSIDE_TOL)


def _sample_points(cover: Cover, samples: int, rng: np.random.RandomState) -> List[CPoint]:
    """Half uniform points, half points drawn from the sets of random simplices."""
    simplices = cover.Y.simplices()
    points = []
    while len(points) < samples:
        if len(points) % 2 == 0:
            points.append(cover.Y.random_point(rng))
        else:
            p = cover.sample_in(simplices[rng.randint(len(simplices))], rng)
            if p is not None:
                points.append(p)
    return points


def check_cover_properties(cover: Cover, samples: int = 1000, seed: int = 0) -> List[PropertyCheck]:
    """
    Sampled checks of the cover:
      covering      every point lies in some U_tau
      intersection  the simplices whose sets contain a point are pairwise nested
      star          p in U_tau implies tau is a face of the carrier of p and N_eps(p) avoids Y - st(tau)
    """
    rng = np.random.RandomState(seed)
    eps = cover.constants.epsilon
    counts = {"covering": [0, None], "intersection": [0, None], "star": [0, None]}
    points = _sample_points(cover, samples, rng)
    for p in points:
        found = cover.sets(p)
        if not found:
            counts["covering"][0] += 1
            counts["covering"][1] = counts["covering"][1] or str(p)
        for i, a in enumerate(found):
            for b in found[i + 1:]:
                if not (a <= b or b <= a):
                    counts["intersection"][0] += 1
                    counts["intersection"][1] = counts["intersection"][1] or f"{p}: {sorted(a)} and {sorted(b)}"
            carrier = cover.Y.carrier(p)
            if not a <= carrier or cover.star_margin(p, a) < eps:
                counts["star"][0] += 1
                counts["star"][1] = counts["star"][1] or f"{p} in U_{sorted(a)}"
    checks = [PropertyCheck(name, len(points), n, witness) for name, (n, witness) in counts.items()]
    for check in checks:
        if not check.verified:
            logger.warning(f"Cover property {check.name} failed {check.violations} times, e.g. {check.witness}")
    return checks


def link_direction(Y: PHComplex, v: int, p: CPoint) -> LinkPoint:
    """pi_v(p) for p in a triangle at v."""
    t = Y.star(Y.carrier(p) | {v})[0]
    i = Y.local_index(t, v)
    placed = Y.positions(t)
    return LinkPoint(t, angle_at(placed[i], placed[(i + 1) % 3], Y.position(Y.transfer(p, t))))


def check_angle_corollary(cover: Cover, samples: int = 1000, seed: int = 0) -> PropertyCheck:
    """
    x in U_tau, y in U_tau' with tau and tau' meeting exactly in a vertex v implies
    that the link distance between pi_v(x) and pi_v(y) is at least 4 alpha.
    """
    Y = cover.Y
    rng = np.random.RandomState(seed)
    bound = 4 * cover.constants.alpha
    pairs = {}
    for v in Y.vertices:
        around = sorted({f for t in Y.vertex_star(v) for f in faces(frozenset(Y.triangles[t])) if v in f and len(f) > 1},
                        key=simplex_order)
        pairs[v] = [(a, b) for i, a in enumerate(around) for b in around[i + 1:] if a & b == {v}]
    usable = [v for v in Y.vertices if pairs[v]]
    if not usable:
        return PropertyCheck("angle-corollary", 0, 0, None)
    violations, witness, done = 0, None, 0
    for _ in range(samples):
        v = usable[rng.randint(len(usable))]
        tau, tau2 = pairs[v][rng.randint(len(pairs[v]))]
        x, y = cover.sample_in(tau, rng), cover.sample_in(tau2, rng)
        if x is None or y is None:
            continue
        done += 1
        angle = link_distance(Y, v, link_direction(Y, v, x), link_direction(Y, v, y))
        if angle < bound - 1e-12:
            violations += 1
            witness = witness or f"v={v}, {sorted(tau)}, {sorted(tau2)}: {angle}"
    return PropertyCheck("angle-corollary", done, violations, witness)


def decompose(cover: Cover, gamma: Geodesic) -> Decomposition:
    """
    Shortest sequence Sigma_0 .. Sigma_{k+1} with points x_i in U_{Sigma_i} in order along gamma,
    x_0 = x, x_{k+1} = y and consecutive simplices intersecting. Candidate points are samples
    of gamma at spacing eps/2.

    Raises:
        GeometryError: some sample lies in no set of the cover.
    """
    Y = cover.Y
    step = cover.constants.epsilon / 2
    n = max(1, math.ceil(gamma.length / step)) + 1 if gamma.length > 0 else 1
    params = [min(i * step, gamma.length) for i in range(n)]
    points = [point_at(Y, gamma, s) for s in params]
    points[0], points[-1] = gamma.x, gamma.y
    sets = [cover.sets(p) for p in points]
    for i, found in enumerate(sets):
        if not found:
            raise GeometryError(f"the cover does not reach {points[i]} at arclength {params[i]}")
    where: Dict[Simplex, List[int]] = {}
    for i, found in enumerate(sets):
        for tau in found:
            where.setdefault(tau, []).append(i)

    layer = {tau: 0 for tau in sets[0]}
    layers: List[Dict[Simplex, Tuple[int, Optional[Simplex]]]] = [{tau: (0, None) for tau in sets[0]}]
    last = set(sets[-1])
    while True:
        nxt: Dict[Simplex, Tuple[int, Simplex]] = {}
        for tau, indices in where.items():
            best = None
            for prev, start in layer.items():
                if prev & tau and (best is None or start < best[0]):
                    best = (start, prev)
            if best is None:
                continue
            j = bisect_left(indices, best[0])
            if j < len(indices):
                nxt[tau] = (indices[j], best[1])
        if not nxt:
            raise GeometryError("no decomposition reaches the end of the geodesic")
        layers.append(nxt)
        finals = sorted((tau for tau in nxt if tau in last), key=simplex_order)
        if finals:
            break
        if {tau: i for tau, (i, _) in nxt.items()} == layer:
            raise GeometryError("decomposition search stalled before the end of the geodesic")
        layer = {tau: i for tau, (i, _) in nxt.items()}

    chain = [finals[0]]
    indices = [n - 1]
    for depth in range(len(layers) - 1, 0, -1):
        prev = layers[depth][chain[-1]][1]
        chain.append(prev)
        indices.append(layers[depth - 1][prev][0])
    chain.reverse()
    indices.reverse()
    result = Decomposition(tuple(chain), tuple(params[i] for i in indices), tuple(points[i] for i in indices))
    logger.debug(f"Decomposition with k={result.k}, anchored={result.anchored}")
    return result


def stability_test(cover: Cover, gamma: Geodesic, gamma_prime: Geodesic, cap: int = CHAIN_CAP) -> StabilityResult:
    """
    Checks Gal(gamma') minus (tau_x' and tau_y') inside Gal*(gamma).

    Raises:
        GeometryError: the complex has a triangle that is not acute.
    """
    Y = cover.Y
    acute, witness = Y.is_acute()
    if not acute:
        raise GeometryError(f"stability tests need an acute complex; triangle {witness} of {Y.name} is not")
    dx = geodesic(Y, gamma.x, gamma_prime.x, cap).length
    dy = geodesic(Y, gamma.y, gamma_prime.y, cap).length
    eps = cover.constants.epsilon
    star = extended_gallery(Y, gamma, cover.constants.alpha).simplices
    ends = (Y.carrier(gamma_prime.x), Y.carrier(gamma_prime.y))
    offending = tuple(sorted(
        (c for c in gallery(Y, gamma_prime).carriers
         if not any(c <= end for end in ends) and c not in star),
        key=simplex_order,
    ))
    return StabilityResult(not offending, offending, dx < eps and dy < eps, dx, dy)


def perturb(Y: PHComplex, p: CPoint, radius: float, rng: np.random.RandomState) -> CPoint:
    """A point of the triangle of p at distance < radius from p."""
    placed = Y.positions(p.tri)
    x = Y.position(p)
    ref = max(placed, key=lambda q: distance(x, q))
    turn = rng.uniform(0, math.pi)
    side = rng.choice([-1.0, 1.0])
    r = radius * rng.uniform(0, 1)
    for _ in range(40):
        q = shoot(x, ref, turn, r, side)
        if inside(placed, q):
            return Y.from_position(p.tri, placed, q)
        r /= 2
    return p


def _anchored_geodesic(cover: Cover, gamma: Geodesic, cap: int) -> Optional[Geodesic]:
    dec = decompose(cover, gamma)
    if dec.anchored:
        return gamma
    inner = dec.inner()
    if inner is None or not inner.anchored:
        return None
    return geodesic(cover.Y, inner.points[0], inner.points[-1], cap)


def stability_fuzz(cover: Cover, trials: int, seed: int = 0, scale: float = 1.0, start: int = 0,
                   progress: bool = False, cap: int = CHAIN_CAP) -> FuzzReport:
    """
    Random geodesics with anchored decompositions and endpoint moves below scale * eps.

    Trial i draws from RandomState([seed, i]) so batches starting at different offsets
    reproduce the same trials.
    """
    Y = cover.Y
    radius = cover.constants.epsilon * scale
    passed = failed = skipped = 0
    failures = []
    for i in tqdm(range(start, start + trials), disable=not progress, desc=f"stability x{scale}"):
        rng = np.random.RandomState([seed, i])
        gamma = geodesic(Y, Y.random_point(rng), Y.random_point(rng), cap)
        gamma = _anchored_geodesic(cover, gamma, cap) if gamma.length > 0 else None
        if gamma is None:
            skipped += 1
            continue
        moved = geodesic(Y, perturb(Y, gamma.x, radius, rng), perturb(Y, gamma.y, radius, rng), cap)
        result = stability_test(cover, gamma, moved, cap)
        if result.passed:
            passed += 1
        else:
            failed += 1
            failures.append({"trial": i, **result.to_record()})
    report = FuzzReport(trials, passed, failed, skipped, scale, seed, tuple(failures))
    logger.info(f"Stability on {Y.name} at scale {scale}: {passed} passed, {failed} failed, {skipped} skipped")
    return report
