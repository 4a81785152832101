"""
Hyperbolic plane trigonometry on the hyperboloid model.

Points are numpy arrays (t, x, y) with -t^2 + x^2 + y^2 = -1 and t > 0.
Triangle shapes list vertices in a fixed order; side i is opposite angle i.
"""
import logging
import math
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .core import GeometryError

logger = logging.getLogger(__name__)

TOL = 1e-9
ACOSH_CLAMP = 1e-12

HPoint = np.ndarray
Gluing = Tuple[int, ...]  # (edge in previous triangle, edge in next triangle[, aligned])


class HypTriangleShape(NamedTuple):
    """Angles, opposite side lengths and area of a triangle of constant curvature."""
    angles: Tuple[float, float, float]
    sides: Tuple[float, float, float]
    area: float
    curvature: float = -1.0  # -1 hyperbolic, 0 Euclidean (Moussong mode)

    def violations(self, tol: float = TOL) -> List[str]:
        """Lists every broken shape invariant (empty when the shape is consistent)."""
        problems = []
        if not all(0.0 < a < math.pi for a in self.angles):
            problems.append(f"angles {self.angles} not in (0, pi)")
        if not all(s > 0.0 for s in self.sides):
            problems.append(f"sides {self.sides} not positive")
        total = sum(self.angles)
        if self.curvature < 0:
            if total >= math.pi:
                problems.append(f"angle sum {total} >= pi")
            if abs(self.area - (math.pi - total)) > tol:
                problems.append(f"area {self.area} differs from defect {math.pi - total}")
            for i in range(3):
                j, k = (i + 1) % 3, (i + 2) % 3
                A, B, C = self.angles[j], self.angles[k], self.angles[i]
                rhs = -math.cos(A) * math.cos(B) + math.sin(A) * math.sin(B) * math.cosh(self.sides[i])
                if abs(math.cos(C) - rhs) > tol:
                    problems.append(f"law of cosines fails at vertex {i}: {math.cos(C)} vs {rhs}")
        else:
            if abs(total - math.pi) > 1e-12:
                problems.append(f"Euclidean angle sum {total} != pi")
            for i in range(3):
                j = (i + 1) % 3
                if abs(self.sides[i] * math.sin(self.angles[j]) - self.sides[j] * math.sin(self.angles[i])) > tol:
                    problems.append(f"law of sines fails on sides {i}, {j}")
        return problems

    def validate(self, tol: float = TOL) -> "HypTriangleShape":
        problems = self.violations(tol)
        if problems:
            raise GeometryError("; ".join(problems))
        return self

    def rotated(self, k: int) -> "HypTriangleShape":
        """Same triangle with vertex order shifted so that old vertex k comes first."""
        order = [(k + i) % 3 for i in range(3)]
        return self._replace(
            angles=tuple(self.angles[i] for i in order),
            sides=tuple(self.sides[i] for i in order),
        )


def minkowski(x: np.ndarray, y: np.ndarray) -> float:
    return float(-x[0] * y[0] + x[1] * y[1] + x[2] * y[2])


def _acosh(value: float, clamp: float = ACOSH_CLAMP) -> float:
    if value < 1.0:
        if value < 1.0 - clamp:
            raise GeometryError(f"acosh argument {value} below 1 beyond the clamp tolerance")
        value = 1.0
    return math.acosh(value)


def normalize(p: np.ndarray) -> HPoint:
    """Projects a timelike vector with positive time coordinate back onto the sheet."""
    norm = -minkowski(p, p)
    if norm <= 0 or p[0] <= 0:
        raise GeometryError(f"{p} is not a future timelike vector")
    return p / math.sqrt(norm)


def hpoint(t: float, x: float, y: float, tol: float = TOL) -> HPoint:
    p = np.array([t, x, y], dtype=float)
    if p[0] <= 0 or abs(minkowski(p, p) + 1.0) > tol:
        raise GeometryError(f"({t}, {x}, {y}) is not on the hyperboloid sheet")
    return p


def origin() -> HPoint:
    return np.array([1.0, 0.0, 0.0])


def from_polar(r: float, phi: float) -> HPoint:
    """Point at distance r from the origin in direction phi."""
    return np.array([math.cosh(r), math.sinh(r) * math.cos(phi), math.sinh(r) * math.sin(phi)])


def distance(p: HPoint, q: HPoint) -> float:
    return _acosh(-minkowski(p, q))


def direction(p: HPoint) -> float:
    """Polar angle of p seen from the origin (angles at the origin are true hyperbolic angles)."""
    return math.atan2(p[2], p[1])


def klein(p: HPoint) -> Tuple[float, float]:
    return (p[1] / p[0], p[2] / p[0])


def tangent(p: HPoint, q: HPoint) -> np.ndarray:
    """Unit tangent vector at p pointing towards q."""
    u = q + minkowski(p, q) * p
    n = minkowski(u, u)
    if n <= 0:
        raise GeometryError("tangent of coincident points is undefined")
    return u / math.sqrt(n)


def angle_at(a: HPoint, b: HPoint, c: HPoint) -> float:
    """Angle at a between the geodesics towards b and towards c."""
    u, v = tangent(a, b), tangent(a, c)
    return math.acos(max(-1.0, min(1.0, minkowski(u, v))))


def orientation(p: HPoint, q: HPoint, x: HPoint) -> float:
    """Positive when p, q, x are counterclockwise (the sign of the Klein-model determinant)."""
    return float(np.linalg.det(np.stack([p, q, x])))


def normal(p: HPoint, u: np.ndarray) -> np.ndarray:
    """Unit tangent at p orthogonal to the unit tangent u, turned counterclockwise."""
    w = np.cross(p, u)
    w = np.array([-w[0], w[1], w[2]])
    w = w / math.sqrt(minkowski(w, w))
    if np.linalg.det(np.stack([p, u, w])) < 0:
        w = -w
    return w


def shoot(p: HPoint, q: HPoint, angle: float, dist: float, side: float = 1.0) -> HPoint:
    """
    Point at distance dist from p whose direction makes the given angle with the ray pq.

    Args:
        p: Base point.
        q: Point defining the reference ray.
        angle: Angle from the ray, in [0, pi].
        dist: Distance from p.
        side: +1 to turn counterclockwise, -1 clockwise.
    """
    u = tangent(p, q)
    w = normal(p, u)
    d = math.cos(angle) * u + math.copysign(1.0, side) * math.sin(angle) * w
    return normalize(math.cosh(dist) * p + math.sinh(dist) * d)


def point_along(p: HPoint, q: HPoint, dist: float) -> HPoint:
    """Point at distance dist from p on the geodesic towards q."""
    return normalize(math.cosh(dist) * p + math.sinh(dist) * tangent(p, q))


def rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def boost(r: float) -> np.ndarray:
    """Translation by r along the x axis."""
    ch, sh = math.cosh(r), math.sinh(r)
    return np.array([[ch, sh, 0.0], [sh, ch, 0.0], [0.0, 0.0, 1.0]])


def isometry_to_origin(p: HPoint) -> np.ndarray:
    """Orientation-preserving isometry sending p to the origin."""
    r = _acosh(p[0])
    phi = math.atan2(p[2], p[1])
    return boost(-r) @ rotation(-phi)


def segment_distance(p: HPoint, a: HPoint, b: HPoint) -> float:
    """Distance from p to the geodesic segment ab."""
    length = distance(a, b)
    if length < 1e-15:
        return distance(p, a)
    u = tangent(a, b)
    # foot of the perpendicular: p = cosh(h)(cosh(s) a + sinh(s) u) + sinh(h) n
    x, y = -minkowski(p, a), minkowski(p, u)
    s = math.atanh(max(-1.0, min(1.0, y / x))) if x > abs(y) else (length if y > 0 else 0.0)
    s = max(0.0, min(length, s))
    foot = normalize(math.cosh(s) * a + math.sinh(s) * u)
    return distance(p, foot)


def _phase_shift_alpha(beta: float, gamma: float, c: float) -> float:
    A = math.sin(beta) * math.cosh(c)
    B = math.cos(beta)
    R = math.hypot(A, B)
    phi = math.atan2(B, A)
    return phi + math.asin(max(-1.0, min(1.0, math.cos(gamma) / R)))


def _sides_from_angles(alpha: float, beta: float, gamma: float) -> Tuple[float, float, float]:
    def opposite(x, y, z):
        return _acosh((math.cos(x) + math.cos(y) * math.cos(z)) / (math.sin(y) * math.sin(z)))
    return (opposite(alpha, beta, gamma), opposite(beta, gamma, alpha), opposite(gamma, alpha, beta))


def solve_angle_angle_side(beta: float, gamma: float, c: float, tol: float = TOL) -> HypTriangleShape:
    """
    Solves the triangle v v' v'' from the angle beta at v', the angle gamma at v''
    and the length c = |vv'| of the side opposite v''.

    The angle alpha at v solves cos(gamma) = A sin(alpha) - B cos(alpha) with
    A = sin(beta) cosh(c), B = cos(beta).

    Returns:
        Shape with vertex order (v, v', v'').
    """
    if not (0.0 < beta < math.pi and 0.0 < gamma < math.pi):
        raise GeometryError(f"angles must lie in (0, pi), got beta={beta}, gamma={gamma}")
    if beta + gamma >= math.pi:
        raise GeometryError(f"beta + gamma = {beta + gamma} must be < pi")
    if c <= 0:
        raise GeometryError(f"side length must be positive, got {c}")

    alpha = _phase_shift_alpha(beta, gamma, c)
    bound = math.pi - beta - gamma
    if not (0.0 < alpha <= bound + tol):
        raise GeometryError(f"no triangle: alpha={alpha} outside (0, {bound}]")
    alpha = min(alpha, bound)
    a, b, _ = _sides_from_angles(alpha, beta, gamma)
    area = math.pi - alpha - beta - gamma
    # c is carried exactly; the recomputed value differs only by rounding
    return HypTriangleShape(angles=(alpha, beta, gamma), sides=(a, b, c), area=area)


def solve_sss(a: float, b: float, c: float) -> HypTriangleShape:
    """Triangle from its three side lengths."""
    if min(a, b, c) <= 0:
        raise GeometryError(f"side lengths must be positive: {(a, b, c)}")
    if a >= b + c or b >= a + c or c >= a + b:
        raise GeometryError(f"side lengths {(a, b, c)} violate the triangle inequality")

    def angle(opp, s1, s2):
        value = (math.cosh(s1) * math.cosh(s2) - math.cosh(opp)) / (math.sinh(s1) * math.sinh(s2))
        return math.acos(max(-1.0, min(1.0, value)))

    angles = (angle(a, b, c), angle(b, c, a), angle(c, a, b))
    return HypTriangleShape(angles=angles, sides=(a, b, c), area=math.pi - sum(angles))


def solve_aaa(alpha: float, beta: float, gamma: float) -> HypTriangleShape:
    """Triangle from its three angles (hyperbolic triangles are determined by them)."""
    if alpha + beta + gamma >= math.pi or min(alpha, beta, gamma) <= 0:
        raise GeometryError(f"angles {(alpha, beta, gamma)} do not form a hyperbolic triangle")
    sides = _sides_from_angles(alpha, beta, gamma)
    return HypTriangleShape(angles=(alpha, beta, gamma), sides=sides, area=math.pi - alpha - beta - gamma)


def equilateral(angle: float) -> HypTriangleShape:
    return solve_aaa(angle, angle, angle)


def right_triangle_leg_angle(a: float, d: float) -> float:
    """Angle at the end of leg d of the right triangle with legs a and d: tan = tanh(a) / sinh(d)."""
    if a <= 0 or d <= 0:
        raise GeometryError(f"leg lengths must be positive, got a={a}, d={d}")
    return math.atan2(math.tanh(a), math.sinh(d))


def right_triangle(a: float, d: float) -> HypTriangleShape:
    """
    Right triangle (c, v', v'') with the right angle at v', |cv'| = a and |v'v''| = d.
    """
    phi = right_triangle_leg_angle(a, d)
    psi = right_triangle_leg_angle(d, a)
    hyp = _acosh(math.cosh(a) * math.cosh(d))
    return HypTriangleShape(angles=(psi, math.pi / 2, phi), sides=(d, hyp, a), area=math.pi / 2 - phi - psi)


def euclidean_triangle(angles: Sequence[float], side2: float) -> HypTriangleShape:
    """Flat triangle with the given angles (summing to pi) and side opposite vertex 2."""
    scale = side2 / math.sin(angles[2])
    sides = tuple(scale * math.sin(x) for x in angles)
    area = 0.5 * sides[0] * sides[1] * math.sin(angles[2])
    return HypTriangleShape(angles=tuple(angles), sides=sides, area=area, curvature=0.0)


def place_triangle(shape: HypTriangleShape) -> List[HPoint]:
    """Vertex 0 at the origin, vertex 1 on the positive x axis, vertex 2 counterclockwise."""
    p0 = origin()
    p1 = from_polar(shape.sides[2], 0.0)
    p2 = from_polar(shape.sides[1], shape.angles[0])
    return [p0, p1, p2]


def attach(p: HPoint, q: HPoint, far: Optional[HPoint], shape: HypTriangleShape, edge: int,
           tol: float = TOL) -> List[HPoint]:
    """
    Places shape with its vertex (edge+1) at p and (edge+2) at q, on the side of pq away from far.

    Returns:
        The three vertices in the shape's own order.
    """
    i, j = (edge + 1) % 3, (edge + 2) % 3
    measured = distance(p, q)
    if abs(measured - shape.sides[edge]) > tol * max(1.0, measured):
        raise GeometryError(f"glued edge length mismatch: {measured} vs {shape.sides[edge]}")
    side = 1.0 if far is None else -math.copysign(1.0, orientation(p, q, far))
    apex = shoot(p, q, shape.angles[i], shape.sides[j], side)
    placed = [None, None, None]
    placed[i], placed[j], placed[edge] = p, q, apex
    return placed


def develop_chain(shapes: Sequence[HypTriangleShape], gluing: Sequence[Gluing],
                  tol: float = TOL) -> List[List[HPoint]]:
    """
    Develops a chain of triangles into one hyperbolic plane.

    Args:
        shapes: Triangle shapes in chain order.
        gluing: For each consecutive pair, (edge of previous, edge of next[, aligned]).
            Edges are named by the opposite vertex. By default the gluing reverses the
            edge: next vertex (e'+1) sits on previous vertex (e+2). With aligned=True,
            next vertex (e'+1) sits on previous vertex (e+1).

    Returns:
        Per triangle, its three vertices in shape order.
    """
    if len(gluing) != max(0, len(shapes) - 1):
        raise GeometryError(f"{len(shapes)} triangles need {len(shapes) - 1} gluings, got {len(gluing)}")
    if not shapes:
        return []
    placed = [place_triangle(shapes[0])]
    for shape, glue in zip(shapes[1:], gluing):
        prev = placed[-1]
        e, f = glue[0], glue[1]
        aligned = bool(glue[2]) if len(glue) > 2 else False
        a, b = prev[(e + 1) % 3], prev[(e + 2) % 3]
        p, q = (a, b) if aligned else (b, a)
        placed.append(attach(p, q, prev[e], shape, f, tol))
    logger.debug(f"Developed chain of {len(shapes)} triangles")
    return placed
