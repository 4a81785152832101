import logging
import math
from typing import Dict, List, NamedTuple, Optional, Tuple

import networkx as nx

from .core import ClassificationError, ConvergenceError, GeometryError
from .defining_graph import DefiningGraph, classify
from .hyp_trig import HypTriangleShape, euclidean_triangle, right_triangle, right_triangle_leg_angle, solve_angle_angle_side

logger = logging.getLogger(__name__)

HYPERBOLIC = "hyperbolic"
MOUSSONG = "moussong"

BISECTION_STEPS = 200
STRICT_SLACK = 1e-12


class Bound(NamedTuple):
    """One closed-form inequality epsilon <= bound."""
    name: str
    source: str
    bound: float
    slack: float


class EpsilonCertificate(NamedTuple):
    epsilon: float
    bounds: Tuple[Bound, ...]
    binding: str

    @property
    def verified(self) -> bool:
        return all(b.slack >= 0 for b in self.bounds)

    def tight_at(self, factor: float = 2.0, tol: float = 1e-15) -> List[str]:
        """Names of the bounds left without positive slack when epsilon is scaled by factor."""
        scaled = factor * self.epsilon
        return [b.name for b in self.bounds if b.bound - scaled <= tol * max(1.0, b.bound)]

    def to_record(self) -> Dict:
        return {
            "epsilon": self.epsilon,
            "binding": self.binding,
            "verified": self.verified,
            "bounds": [b._asdict() for b in self.bounds],
        }


class CycleCheck(NamedTuple):
    """Direct check of sum(theta(m_i, eps) - eps) >= pi + eps over simple cycles."""
    cycles: int
    length_cap: int
    min_slack: Optional[float]
    worst_cycle: Optional[Tuple[str, ...]]

    @property
    def verified(self) -> bool:
        # Moussong cycles can sum to exactly pi + 0
        return self.min_slack is None or self.min_slack >= -STRICT_SLACK

    def to_record(self) -> Dict:
        return {
            "cycles": self.cycles,
            "length_cap": self.length_cap,
            "min_slack": self.min_slack,
            "worst_cycle": list(self.worst_cycle) if self.worst_cycle else None,
            "verified": self.verified,
        }


class LabelGeometry(NamedTuple):
    """Fundamental-triangle data for one finite label m."""
    m: int
    theta: float                 # theta(m, eps) = (m-1) pi / 2m - 2 eps
    shape: HypTriangleShape      # vertices (v, v', v''): angles at v', v'' are pi/2+eps, pi/2m+eps
    d: float                     # |v'v''|
    cone_angle: Optional[float]  # angle at v'' of the right triangle with legs 1 and d
    cone_shape: Optional[HypTriangleShape]  # vertices (c, v', v'')

    @property
    def angle_at_v(self) -> float:
        return self.shape.angles[0]


class MetricParams(NamedTuple):
    mode: str
    epsilon: float
    ell: float
    table: Dict[int, LabelGeometry]
    certificate: Optional[EpsilonCertificate]
    cycle_check: Optional[CycleCheck]

    def geometry(self, m: int) -> LabelGeometry:
        try:
            return self.table[m]
        except KeyError:
            raise GeometryError(f"no fundamental triangle for label {m}") from None

    def to_record(self) -> Dict:
        return {
            "mode": self.mode,
            "epsilon": self.epsilon,
            "ell": self.ell,
            "labels": {
                str(m): {
                    "theta": geo.theta,
                    "angles": list(geo.shape.angles),
                    "sides": list(geo.shape.sides),
                    "area": geo.shape.area,
                    "d": geo.d,
                    "cone_angle": geo.cone_angle,
                    "cone_triangle": None if geo.cone_shape is None else {
                        "angles": list(geo.cone_shape.angles),
                        "sides": list(geo.cone_shape.sides),
                    },
                }
                for m, geo in sorted(self.table.items())
            },
            "certificate": None if self.certificate is None else self.certificate.to_record(),
            "cycle_check": None if self.cycle_check is None else self.cycle_check.to_record(),
        }


def theta(m: int, epsilon: float) -> float:
    return (m - 1) * math.pi / (2 * m) - 2 * epsilon


def closed_form_bounds(labels: List[int]) -> List[Tuple[str, str, float]]:
    """
    Every closed-form upper bound on epsilon, as (name, source, bound).

    Cycles of length 3 are dominated by the (2,3,7), (2,4,5) and (3,3,4) triangle
    groups and need 1/m + 1/m' + 1/m'' <= 1 - 24 eps / pi; length-4 cycles need
    13 eps <= pi/12 and longer cycles 16 eps <= pi/4.
    """
    bounds = []
    for triple in ((2, 3, 7), (2, 4, 5), (3, 3, 4)):
        excess = 1.0 - sum(1.0 / m for m in triple)
        bounds.append((f"triangle{triple}", "three-cycles: sum 1/m <= 1 - 24 eps/pi", math.pi * excess / 24))
    bounds.append(("four-cycles", "(8+4+1) eps <= pi/12", math.pi / 156))
    bounds.append(("long-cycles", "(10+5+1) eps <= pi/4", math.pi / 64))
    bounds.append(("spade", "(pi/2+eps)+(pi/4+eps) <= pi-eps at m=2", math.pi / 12))
    bounds.append(("cone-two-trees", "3 pi - 6 eps >= 2 pi + eps", math.pi / 7))
    for m in labels:
        bounds.append((f"cone-one-tree(m={m})", "(2pi-4eps)+2(pi/m+2eps) >= 2pi+eps", 2 * math.pi / m))
    return bounds


def check_cycle_sums(g: DefiningGraph, epsilon: float, cap: int = 12) -> CycleCheck:
    """Enumerates simple cycles of length <= cap and checks sum(theta - eps) >= pi + eps."""
    graph = nx.Graph()
    graph.add_nodes_from(g.generators)
    for a, b in g.finite_pairs():
        graph.add_edge(a, b, m=g.labels[frozenset((a, b))])
    count, worst, worst_cycle = 0, None, None
    for cycle in nx.simple_cycles(graph, length_bound=cap):
        if len(cycle) < 3:
            continue
        count += 1
        total = sum(
            theta(graph.edges[cycle[i], cycle[(i + 1) % len(cycle)]]["m"], epsilon) - epsilon
            for i in range(len(cycle))
        )
        slack = total - (math.pi + epsilon)
        if worst is None or slack < worst:
            worst, worst_cycle = slack, tuple(cycle)
    logger.debug(f"Checked {count} cycles of length <= {cap}, min slack {worst}")
    return CycleCheck(cycles=count, length_cap=cap, min_slack=worst, worst_cycle=worst_cycle)


def synthesize_epsilon(g: DefiningGraph) -> Tuple[float, EpsilonCertificate]:
    """
    Half of the least closed-form bound on epsilon.

    Returns:
        (epsilon, certificate listing every bound with its slack).
    """
    if not classify(g).hyperbolic_type:
        raise ClassificationError("epsilon synthesis needs a graph of hyperbolic type")
    raw = closed_form_bounds(g.finite_labels())
    least = min(raw, key=lambda b: b[2])
    epsilon = least[2] / 2
    bounds = tuple(Bound(name, source, bound, bound - epsilon) for name, source, bound in raw)
    cert = EpsilonCertificate(epsilon=epsilon, bounds=bounds, binding=least[0])
    logger.info(f"epsilon = {epsilon} (binding bound {least[0]} = {least[2]})")
    return epsilon, cert


def fundamental_shape(m: int, epsilon: float, ell: float) -> HypTriangleShape:
    return solve_angle_angle_side(math.pi / 2 + epsilon, math.pi / (2 * m) + epsilon, ell)


def _feasible(labels: List[int], epsilon: float, ell: float) -> bool:
    for m in labels:
        shape = fundamental_shape(m, epsilon, ell)
        if shape.area > epsilon - STRICT_SLACK:
            return False
        if right_triangle_leg_angle(1.0, shape.sides[0]) < math.pi / 2 - epsilon + STRICT_SLACK:
            return False
    return True


def _round_down(x: float, digits: int = 3) -> float:
    exponent = math.floor(math.log10(x)) - (digits - 1)
    return math.floor(x / 10 ** exponent) * 10 ** exponent


def synthesize_ell(g: DefiningGraph, epsilon: float) -> float:
    """
    Side length l = |vv'| small enough that every fundamental triangle has area <= eps
    and every cone angle is >= pi/2 - eps.

    Starts at l = 1 and halves until feasible, then bisects between the last infeasible
    and first feasible value and rounds down to three significant digits.
    """
    labels = g.finite_labels()
    if not labels:
        return 1.0
    if epsilon <= 0:
        raise GeometryError(f"epsilon must be positive, got {epsilon}")
    ell = 1.0
    steps = 0
    while not _feasible(labels, epsilon, ell):
        ell /= 2
        steps += 1
        if steps > BISECTION_STEPS:
            raise ConvergenceError(f"no feasible l after {BISECTION_STEPS} halvings")
    if steps == 0:
        return ell
    lo, hi = ell, 2 * ell
    while (hi - lo) / lo > 1e-4:
        mid = (lo + hi) / 2
        if _feasible(labels, epsilon, mid):
            lo = mid
        else:
            hi = mid
        steps += 1
        if steps > BISECTION_STEPS:
            raise ConvergenceError(f"l bisection did not converge in {BISECTION_STEPS} steps")
    result = _round_down(lo)
    logger.info(f"l = {result} after {steps} steps")
    return result


def _hyperbolic_table(labels: List[int], epsilon: float, ell: float) -> Dict[int, LabelGeometry]:
    table = {}
    for m in labels:
        shape = fundamental_shape(m, epsilon, ell).validate()
        d = shape.sides[0]
        table[m] = LabelGeometry(
            m=m,
            theta=theta(m, epsilon),
            shape=shape,
            d=d,
            cone_angle=right_triangle_leg_angle(1.0, d),
            cone_shape=right_triangle(1.0, d).validate(),
        )
    return table


def _moussong_table(labels: List[int]) -> Dict[int, LabelGeometry]:
    table = {}
    for m in labels:
        angles = (theta(m, 0.0), math.pi / 2, math.pi / (2 * m))
        shape = euclidean_triangle(angles, 1.0).validate()
        table[m] = LabelGeometry(m=m, theta=theta(m, 0.0), shape=shape, d=shape.sides[0],
                                 cone_angle=None, cone_shape=None)
    return table


def build_params(g: DefiningGraph, mode: str = HYPERBOLIC, cycle_cap: int = 12) -> MetricParams:
    classification = classify(g)
    labels = g.finite_labels()
    if mode == HYPERBOLIC:
        if not classification.hyperbolic_type:
            raise ClassificationError(f"hyperbolic mode needs hyperbolic type, witness {classification.hyperbolic_witness}")
        epsilon, cert = synthesize_epsilon(g)
        ell = synthesize_ell(g, epsilon)
        return MetricParams(mode=mode, epsilon=epsilon, ell=ell, table=_hyperbolic_table(labels, epsilon, ell),
                            certificate=cert, cycle_check=check_cycle_sums(g, epsilon, cycle_cap))
    if mode == MOUSSONG:
        if not classification.two_dimensional:
            raise ClassificationError(f"Moussong mode needs a two-dimensional graph, witness {classification.two_dimensional_witness}")
        return MetricParams(mode=mode, epsilon=0.0, ell=1.0, table=_moussong_table(labels),
                            certificate=None, cycle_check=check_cycle_sums(g, 0.0, cycle_cap))
    raise ValueError(f"unknown metric mode '{mode}'")
