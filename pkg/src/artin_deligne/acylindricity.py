"""
Constant arithmetic for the acylindricity argument on a CAT(-1) PHComplex.
"""
import logging
import math
from typing import Dict, NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq

from .core import ConvergenceError
from .cover import PropertyCheck, perturb
from .geodesics import CHAIN_CAP, extended_gallery, geodesic, point_at
from .hyp_trig import boost, from_polar, origin, point_along, segment_distance
from .ph_complex import PHComplex

logger = logging.getLogger(__name__)

FT_METHOD = "brentq on the worst deviation over comparison quadrilaterals in H2"
FT_ANGLES = 8
FT_EXTRA = (0.0, 1.0, 4.0, 16.0)
MAX_LOG10 = 308.0


class GalleryConstant(NamedTuple):
    C: float
    samples: int
    worst_length: float
    min_length: float
    measured: bool = True

    def to_record(self) -> Dict:
        return self._asdict()


class AcylConstants(NamedTuple):
    L: float
    C_prime: float
    N: Optional[int]          # None when N0 * ceil(C')! is beyond double range
    N_log10: float
    overflow: bool
    inputs: Dict

    def to_record(self) -> Dict:
        return {
            "L": self.L,
            "C_prime": self.C_prime,
            "N": None if self.N is None else str(self.N),
            "N_log10": self.N_log10,
            "overflow": self.overflow,
            "inputs": dict(self.inputs),
        }


def star_geodesic_bound(Y: PHComplex) -> float:
    """B: every point of a closed vertex star is within the longest edge of its center."""
    return 2 * Y.max_edge_length()


def gallery_constant(Y: PHComplex, alpha: float, samples: int = 200, seed: int = 0,
                     min_length: float = 1.0, cap: int = CHAIN_CAP) -> GalleryConstant:
    """
    Measured C with #vertices(Gal*(gamma)) <= C * max(|gamma|, min_length) over random geodesics.
    """
    rng = np.random.RandomState(seed)
    worst, worst_length, used = 0.0, 0.0, 0
    for _ in range(samples):
        gamma = geodesic(Y, Y.random_point(rng), Y.random_point(rng), cap)
        if gamma.length <= 0:
            continue
        used += 1
        ratio = extended_gallery(Y, gamma, alpha).vertex_count() / max(gamma.length, min_length)
        if ratio > worst:
            worst, worst_length = ratio, gamma.length
    logger.warning(f"Gallery constant C = {worst} on {Y.name} is measured from {used} geodesics")
    return GalleryConstant(worst, used, worst_length, min_length)


def _quadrilateral_deviation(ell: float, r: float) -> float:
    """
    Worst distance from the points at arclength ell and T - ell of a segment xy in H2 to a
    segment x'y' with d(x, x') = d(y, y') = r, over a grid of offsets and lengths T >= 2 ell.
    """
    worst = 0.0
    x = origin()
    angles = [2 * math.pi * k / FT_ANGLES for k in range(FT_ANGLES)]
    for extra in FT_EXTRA:
        T = 2 * ell + extra
        if T <= 0:
            continue
        y = from_polar(T, 0.0)
        near = [point_along(x, y, ell), point_along(x, y, T - ell)]
        move = boost(T)
        for phi in angles:
            x2 = from_polar(r, phi)
            for psi in angles:
                y2 = move @ from_polar(r, psi)
                for p in near:
                    worst = max(worst, segment_distance(p, x2, y2))
    return worst


def fellow_travel_length(r: float, epsilon: float, max_doublings: int = 60) -> float:
    """
    Smallest l (up to the grid) such that geodesics with endpoints r apart stay within
    epsilon of each other outside their end pieces of length l.

    Raises:
        ValueError: unless r >= epsilon > 0.
        ConvergenceError: no such l up to 2**max_doublings.
    """
    if not (epsilon > 0 and r >= epsilon):
        raise ValueError(f"fellow travelling needs r >= epsilon > 0, got r={r}, epsilon={epsilon}")

    def excess(ell: float) -> float:
        return _quadrilateral_deviation(ell, r) - epsilon

    if excess(0.0) <= 0:
        return 0.0
    hi = 1.0
    for _ in range(max_doublings):
        if excess(hi) < 0:
            break
        hi *= 2
    else:
        raise ConvergenceError(f"no fellow-travel length below {hi} for r={r}, epsilon={epsilon}")
    ell = brentq(excess, 0.0, hi, xtol=1e-10)
    logger.debug(f"l_ft(r={r}, epsilon={epsilon}) = {ell}")
    return float(ell)


def convexity_check(Y: PHComplex, r: float, samples: int = 200, seed: int = 0,
                    cap: int = CHAIN_CAP, tol: float = 1e-9) -> PropertyCheck:
    """Midpoints of geodesics whose endpoints move by less than r stay within r of each other."""
    rng = np.random.RandomState(seed)
    violations, witness, done = 0, None, 0
    for _ in range(samples):
        gamma = geodesic(Y, Y.random_point(rng), Y.random_point(rng), cap)
        x2, y2 = perturb(Y, gamma.x, r, rng), perturb(Y, gamma.y, r, rng)
        other = geodesic(Y, x2, y2, cap)
        bound = max(geodesic(Y, gamma.x, x2, cap).length, geodesic(Y, gamma.y, y2, cap).length)
        mid = geodesic(Y, point_at(Y, gamma, gamma.length / 2), point_at(Y, other, other.length / 2), cap).length
        done += 1
        if mid > bound + tol:
            violations += 1
            witness = witness or f"midpoints {mid} apart, endpoints within {bound}"
    return PropertyCheck("convexity", done, violations, witness)


def acyl_constants(r: float, L0: float, N0: int, l_ft: float, B: float, C: float) -> AcylConstants:
    """
    L = L0 + 4B + 2 l_ft, C' = (L0 + 4B + 2r) C and N = N0 * ceil(C')!.

    Raises:
        ValueError: N0 < 1, B or C not positive, or r, L0, l_ft negative.
    """
    if isinstance(N0, bool) or not isinstance(N0, int) or N0 < 1:
        raise ValueError(f"N0 must be a positive integer, got {N0!r}")
    if not (B > 0 and C > 0):
        raise ValueError(f"B and C must be positive, got B={B}, C={C}")
    if min(r, L0, l_ft) < 0:
        raise ValueError(f"r, L0 and l_ft must be nonnegative, got {r}, {L0}, {l_ft}")
    L = L0 + 4 * B + 2 * l_ft
    C_prime = (L0 + 4 * B + 2 * r) * C
    n = math.ceil(C_prime)
    log10 = math.log10(N0) + math.lgamma(n + 1) / math.log(10)
    overflow = log10 > MAX_LOG10
    N = None if overflow else N0 * math.factorial(n)
    if overflow:
        logger.warning(f"N = {N0} * {n}! has log10 {log10}, reported symbolically")
    return AcylConstants(L, C_prime, N, log10, overflow,
                         {"r": r, "L0": L0, "N0": N0, "l_ft": l_ft, "B": B, "C": C})


def acyl_constants_for(Y: PHComplex, r: float, L0: float, N0: int, alpha: float, epsilon: float,
                       samples: int = 200, seed: int = 0) -> AcylConstants:
    """acyl_constants with B, C and l_ft measured on Y."""
    B = star_geodesic_bound(Y)
    C = gallery_constant(Y, alpha, samples, seed).C
    l_ft = fellow_travel_length(r, epsilon)
    return acyl_constants(r, L0, N0, l_ft, B, C)
