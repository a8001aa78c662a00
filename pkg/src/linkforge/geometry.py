"""Linkages, planar configurations and their reconstruction from diagonals.

Vertex labels are 1-based in every public name and message (vertex 1 is
``vertices[0]``). Quadrilateral sides are ``a = |p1p2|``, ``b = |p2p3|``,
``c = |p3p4|``, ``d = |p4p1|``; its diagonals are ``x = |p1p3|`` and
``y = |p2p4|``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .errors import (
    Degenerate,
    DegenerateConfig,
    EmptyModuliSpace,
    InvalidLinkage,
    NotOnCurve,
    TriangleViolation,
)

GEOM_RTOL = 1e-9
DEGENERACY_RTOL = 1e-12
ALIGN_ANGLE_TOL = 1e-7

STRICTLY_CONVEX = "strictly_convex"
ALIGNED = "aligned"
NONCONVEX_SIMPLE = "nonconvex_simple"
SELF_INTERSECTING = "self_intersecting"
REGIONS = (STRICTLY_CONVEX, ALIGNED, NONCONVEX_SIMPLE, SELF_INTERSECTING)

PENTAGON_DIAGONALS = ((1, 3), (1, 4), (2, 4), (2, 5), (3, 5))


@dataclass(frozen=True)
class Linkage:
    """Ordered sidelengths of a closed planar bar chain (n = 4 or 5)."""

    sides: Tuple[float, ...]

    def __post_init__(self):
        sides = tuple(float(s) for s in self.sides)
        object.__setattr__(self, "sides", sides)
        if len(sides) not in (4, 5):
            raise InvalidLinkage(f"expected 4 or 5 sides, got {len(sides)}")
        if any(not math.isfinite(s) or s <= 0 for s in sides):
            raise InvalidLinkage(f"sides must be positive and finite: {sides}")
        total = sum(sides)
        longest = max(sides)
        if longest >= total - longest:
            raise EmptyModuliSpace(
                f"longest side {longest} is not shorter than the sum "
                f"of the others {total - longest}"
            )

    @property
    def n(self) -> int:
        return len(self.sides)

    @property
    def scale(self) -> float:
        return max(self.sides)

    @property
    def is_degenerate(self) -> bool:
        """True if some signed sum of the sides vanishes (collinear configuration)."""
        total = sum(self.sides)
        for signs in itertools.product((1.0, -1.0), repeat=self.n - 1):
            value = self.sides[0] + sum(s * l for s, l in zip(signs, self.sides[1:]))
            if abs(value) <= DEGENERACY_RTOL * total:
                return True
        return False

    @property
    def is_equilateral(self) -> bool:
        lo, hi = min(self.sides), max(self.sides)
        return hi - lo <= DEGENERACY_RTOL * hi

    def x_range(self) -> Tuple[float, float]:
        """Admissible interval of the quad diagonal |p1p3|."""
        a, b, c, d = self._quad_sides()
        return max(abs(a - b), abs(c - d)), min(a + b, c + d)

    def y_range(self) -> Tuple[float, float]:
        """Admissible interval of the quad diagonal |p2p4|."""
        a, b, c, d = self._quad_sides()
        return max(abs(b - c), abs(a - d)), min(b + c, a + d)

    def _quad_sides(self):
        if self.n != 4:
            raise InvalidLinkage("operation defined for 4-bar linkages only")
        return self.sides


def _readonly(points) -> np.ndarray:
    arr = np.array(points, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class QuadConfig:
    """A 4-bar configuration in the canonical frame.

    p1 sits at the origin, p2 on the positive first axis and p3 in the
    closed upper half-plane, which quotients out all isometries including
    reflections.
    """

    linkage: Linkage
    vertices: np.ndarray = field(repr=False)
    x: float
    y: float

    @property
    def diagonals(self) -> Tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class PentagonConfig:
    """An equilateral pentagon built on the chart ``(x13, x35)``.

    ``branches`` holds the orientation signs of the triangles (p1,p3,p5),
    (p1,p2,p3) and (p3,p4,p5); +1 everywhere is the convex fold. Lengths are
    in units of ``scale`` times the unit side.
    """

    vertices: np.ndarray = field(repr=False)
    diagonals: Tuple[float, float, float, float, float]
    chart: Tuple[float, float]
    branches: Tuple[int, int, int]
    scale: float = 1.0

    def diagonal(self, i: int, j: int) -> float:
        key = (min(i, j), max(i, j))
        return self.diagonals[PENTAGON_DIAGONALS.index(key)]

    @property
    def is_strictly_convex(self) -> bool:
        return pentagon_is_strictly_convex(self.vertices, self.scale)

    def aligned_vertices(self) -> Tuple[int, ...]:
        """1-based labels of vertices whose angle is pi (turning ~ 0)."""
        turns = turning_angles(self.vertices)
        return tuple(i + 1 for i, th in enumerate(turns) if abs(th) < ALIGN_ANGLE_TOL)


# -- quadrilaterals -----------------------------------------------------------


def _circle_apexes(p, q, rp, rq):
    """Both intersection points of circles |X-p| = rp and |X-q| = rq."""
    base = q - p
    dist = math.hypot(*base)
    e = base / dist
    n = np.array([-e[1], e[0]])
    u = (rp * rp - rq * rq + dist * dist) / (2.0 * dist)
    h2 = rp * rp - u * u
    h = math.sqrt(h2) if h2 > 0 else 0.0
    return p + u * e + h * n, p + u * e - h * n


def _check_triangle(x, r1, r2, what):
    lo, hi = abs(r1 - r2), r1 + r2
    slack = GEOM_RTOL * (r1 + r2)
    if x < lo - slack or x > hi + slack:
        raise TriangleViolation(f"{what}={x} outside [{lo}, {hi}]")


def reconstruct_quad(linkage: Linkage, x: float, y: float, tol: float = 1e-7) -> QuadConfig:
    """Canonical-frame quadrilateral with diagonals ``(x, y)``.

    ``(x, y)`` must lie on the diagonal relation within ``tol`` (relative to
    the magnitude of the cubic's terms).
    """
    from .quad_moduli import relation_residual

    a, b, c, d = linkage._quad_sides()
    _check_triangle(x, a, b, "x")
    _check_triangle(x, c, d, "x")
    if x <= DEGENERACY_RTOL * linkage.scale:
        raise DegenerateConfig("diagonal p1p3 vanishes; p4 is undetermined")
    residual = relation_residual(linkage, x * x, y * y)
    if abs(residual) > tol:
        raise NotOnCurve(f"(x, y)=({x}, {y}) misses the diagonal relation by {residual:.3e}")

    p1 = np.zeros(2)
    p2 = np.array([a, 0.0])
    cos1 = np.clip((a * a + x * x - b * b) / (2.0 * a * x), -1.0, 1.0)
    p3 = x * np.array([cos1, math.sqrt(max(0.0, 1.0 - cos1 * cos1))])
    cand = _circle_apexes(p1, p3, d, c)
    errs = [abs(math.hypot(*(p - p2)) - y) for p in cand]
    if abs(errs[0] - errs[1]) <= DEGENERACY_RTOL * linkage.scale:
        # mirror-symmetric pair (p3 on the axis): keep the upper one
        p4 = cand[0] if cand[0][1] >= cand[1][1] else cand[1]
    else:
        p4 = cand[int(errs[1] < errs[0])]
    verts = _readonly([p1, p2, p3, p4])
    return QuadConfig(linkage, verts, float(math.hypot(*p3)), float(math.hypot(*(p4 - p2))))


def quad_from_vertices(linkage: Linkage, points: Sequence[Sequence[float]]) -> QuadConfig:
    """Move an arbitrary placement of the quad into the canonical frame."""
    pts = np.asarray(points, dtype=float)
    pts = _canonical_frame(pts, 0, 1)
    if pts[2, 1] < 0:
        pts[:, 1] *= -1.0
    sides = [math.hypot(*(pts[(i + 1) % 4] - pts[i])) for i in range(4)]
    for got, want in zip(sides, linkage.sides):
        if abs(got - want) > GEOM_RTOL * want:
            raise DegenerateConfig(f"side {got} does not match linkage side {want}")
    return QuadConfig(
        linkage,
        _readonly(pts),
        float(math.hypot(*(pts[2] - pts[0]))),
        float(math.hypot(*(pts[3] - pts[1]))),
    )


def _canonical_frame(pts: np.ndarray, i: int, j: int) -> np.ndarray:
    """Translate p_i to the origin and rotate p_j onto the positive first axis."""
    pts = pts - pts[i]
    ang = math.atan2(pts[j, 1], pts[j, 0])
    c, s = math.cos(ang), math.sin(ang)
    rot = np.array([[c, s], [-s, c]])
    out = pts @ rot.T
    out[i] = 0.0
    out[j, 1] = 0.0
    return out


def canonicalize(config: QuadConfig) -> QuadConfig:
    return quad_from_vertices(config.linkage, config.vertices)


def diagonals(config):
    """Diagonal lengths recomputed from the vertices.

    Quad: ``(x, y)``. Pentagon: ``(x13, x14, x24, x25, x35)``.
    """
    v = config.vertices
    if isinstance(config, QuadConfig):
        return (float(math.hypot(*(v[2] - v[0]))), float(math.hypot(*(v[3] - v[1]))))
    return tuple(float(math.hypot(*(v[j - 1] - v[i - 1]))) for i, j in PENTAGON_DIAGONALS)


def turning_angles(vertices: np.ndarray) -> np.ndarray:
    """Signed exterior angle at each vertex of the closed polygon."""
    v = np.asarray(vertices, dtype=float)
    incoming = v - np.roll(v, 1, axis=0)
    outgoing = np.roll(v, -1, axis=0) - v
    cross = incoming[:, 0] * outgoing[:, 1] - incoming[:, 1] * outgoing[:, 0]
    dot = np.einsum("ij,ij->i", incoming, outgoing)
    return np.arctan2(cross, dot)


def _segments_cross(p, q, r, s) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(r, s, p), orient(r, s, q)
    d3, d4 = orient(p, q, r), orient(p, q, s)
    return d1 * d2 < 0 and d3 * d4 < 0


def classify_quad(config: QuadConfig) -> str:
    """Region of a configuration: one of :data:`REGIONS`.

    A vertex whose turning angle is within ``ALIGN_ANGLE_TOL`` of 0 makes the
    configuration ``aligned``. A folded vertex (turning angle near pi) has
    overlapping edges and is reported as ``self_intersecting``.
    """
    v = config.vertices
    edges = np.roll(v, -1, axis=0) - v
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    if np.any(lengths <= DEGENERACY_RTOL * config.linkage.scale):
        raise DegenerateConfig("consecutive vertices coincide")
    turns = turning_angles(v)
    if np.any(np.abs(turns) < ALIGN_ANGLE_TOL):
        return ALIGNED
    if np.any(np.abs(turns) > math.pi - ALIGN_ANGLE_TOL):
        return SELF_INTERSECTING
    if np.all(turns > 0) or np.all(turns < 0):
        return STRICTLY_CONVEX
    if _segments_cross(v[0], v[1], v[2], v[3]) or _segments_cross(v[1], v[2], v[3], v[0]):
        return SELF_INTERSECTING
    return NONCONVEX_SIMPLE


def _planar_partner(r1, r2, r3, r4, diag):
    """Other diagonal for the quad split by ``diag`` into triangles (r1, r2) and (r3, r4).

    Only meaningful when one triangle is flat, in which case the answer is
    unique.
    """
    u1 = (r1 * r1 - r2 * r2 + diag * diag) / (2.0 * diag)
    u3 = (r4 * r4 - r3 * r3 + diag * diag) / (2.0 * diag)
    h1 = math.sqrt(max(0.0, r1 * r1 - u1 * u1))
    h3 = math.sqrt(max(0.0, r4 * r4 - u3 * u3))
    return math.hypot(u1 - u3, h1 + h3)


def aligned_configurations(linkage: Linkage):
    """The two convex configurations with a straight angle.

    Returns ``[(config, vertex), (config, vertex)]``: first the one with the
    maximal diagonal x, then the one with the maximal diagonal y.
    """
    if linkage.is_degenerate:
        raise Degenerate(f"linkage {linkage.sides} admits a collinear configuration")
    a, b, c, d = linkage._quad_sides()
    out = []

    x = min(a + b, c + d)
    vertex = 2 if a + b < c + d else 4
    # p1, p3 split into triangles (a, b) and (c, d); one of them is flat
    y = _planar_partner(a, b, c, d, x)
    out.append((reconstruct_quad(linkage, x, y), vertex))

    y = min(b + c, a + d)
    vertex = 3 if b + c < a + d else 1
    # diagonal p2p4 splits into triangles (p2 p3 p4: b, c) and (p2 p1 p4: a, d)
    x = _planar_partner(b, c, d, a, y)
    out.append((reconstruct_quad(linkage, x, y), vertex))
    return out


# -- pentagons ----------------------------------------------------------------


def _pentagon_points(x13, x35, branches):
    sa, sb, sc = branches
    p1 = np.zeros(2)
    p3 = np.array([x13, 0.0])
    u = (1.0 + x13 * x13 - x35 * x35) / (2.0 * x13)
    p5 = np.array([u, sa * math.sqrt(max(0.0, 1.0 - u * u))])
    hb = math.sqrt(max(0.0, 1.0 - 0.25 * x13 * x13))
    # opposite side of the line p1p3 from p5
    side_a = sa if sa != 0 else 1
    p2 = np.array([0.5 * x13, -side_a * sb * hb])
    e = (p5 - p3) / x35
    nrm = np.array([-e[1], e[0]])
    hc = math.sqrt(max(0.0, 1.0 - 0.25 * x35 * x35))
    p4 = 0.5 * (p3 + p5) - side_a * sc * hc * nrm
    return np.array([p1, p2, p3, p4, p5])


def reconstruct_pentagon(x13: float, x35: float, branches=(1, 1, 1), scale: float = 1.0) -> PentagonConfig:
    """Equilateral pentagon from the chart ``(x13, x35)`` (unit side, then scaled)."""
    slack = GEOM_RTOL
    if not (0.0 < x13 <= 2.0 + slack):
        raise TriangleViolation(f"x13={x13} outside (0, 2]")
    if not (0.0 < x35 <= 2.0 + slack):
        raise TriangleViolation(f"x35={x35} outside (0, 2]")
    if abs(x13 - x35) > 1.0 + slack or x13 + x35 < 1.0 - slack:
        raise TriangleViolation(f"(x13, x35)=({x13}, {x35}) violates the triangle with side 1")
    branches = tuple(int(np.sign(b)) or 1 for b in branches)
    pts = _pentagon_points(min(x13, 2.0), min(x35, 2.0), branches) * scale
    verts = _readonly(pts)
    diags = tuple(
        float(math.hypot(*(pts[j - 1] - pts[i - 1]))) for i, j in PENTAGON_DIAGONALS
    )
    return PentagonConfig(verts, diags, (diags[0], diags[4]), branches, float(scale))


def _side_sign(origin, direction_to, point) -> int:
    u = direction_to - origin
    w = point - origin
    cross = u[0] * w[1] - u[1] * w[0]
    tol = DEGENERACY_RTOL * (u @ u + w @ w)
    if abs(cross) <= tol:
        return 0
    return 1 if cross > 0 else -1


def pentagon_from_vertices(points, scale: float | None = None) -> PentagonConfig:
    """Canonical chart representation of an equilateral pentagon placement."""
    pts = np.asarray(points, dtype=float)
    sides = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)
    if scale is None:
        scale = float(sides.mean())
    if np.any(np.abs(sides - scale) > GEOM_RTOL * scale):
        raise DegenerateConfig(f"sides {sides} are not equal to {scale}")
    pts = _canonical_frame(pts, 0, 2)
    p1, p2, p3, p4, p5 = pts
    sa = _side_sign(p1, p3, p5)
    side_a = sa if sa != 0 else 1
    sb = -side_a * _side_sign(p1, p3, p2)
    s1 = _side_sign(p3, p5, p1) or side_a
    sc = -_side_sign(p3, p5, p4) * s1
    branches = tuple(s if s != 0 else 1 for s in (sa, sb, sc))
    diags = tuple(float(math.hypot(*(pts[j - 1] - pts[i - 1]))) for i, j in PENTAGON_DIAGONALS)
    return PentagonConfig(_readonly(pts), diags, (diags[0], diags[4]), branches, float(scale))


def mirror_pentagon(config: PentagonConfig) -> PentagonConfig:
    """Relabel 1<->2, 3<->5 (4 fixed): same polygon, reversed orientation."""
    v = config.vertices
    return pentagon_from_vertices([v[1], v[0], v[4], v[3], v[2]], config.scale)


def rotate_labels(config: PentagonConfig, shift: int) -> PentagonConfig:
    """New labeling where new vertex i is old vertex i + shift (cyclically)."""
    v = np.roll(np.asarray(config.vertices), -shift, axis=0)
    return pentagon_from_vertices(v, config.scale)


def pentagon_is_strictly_convex(vertices, scale: float = 1.0) -> bool:
    v = np.asarray(vertices, dtype=float)
    incoming = v - np.roll(v, 1, axis=0)
    outgoing = np.roll(v, -1, axis=0) - v
    cross = incoming[:, 0] * outgoing[:, 1] - incoming[:, 1] * outgoing[:, 0]
    if np.any(np.abs(cross) <= GEOM_RTOL * scale * scale):
        return False
    return bool(np.all(cross > 0) or np.all(cross < 0))


def pentagon_is_convex(vertices, scale: float = 1.0) -> bool:
    """Convex allowing straight angles (the closed region)."""
    v = np.asarray(vertices, dtype=float)
    turns = turning_angles(v)
    straight = np.abs(turns) < ALIGN_ANGLE_TOL
    rest = turns[~straight]
    return bool(rest.size and (np.all(rest > 0) or np.all(rest < 0)))


def aligned_pentagon(vertex: int, opposite_diagonal: float, scale: float = 1.0) -> PentagonConfig:
    """Convex equilateral pentagon with a straight angle at ``vertex``.

    ``opposite_diagonal`` is the distance between the vertices one and three
    steps after ``vertex``. Built in a rotated labeling where the aligned
    vertex is vertex 2, then relabeled back.
    """
    if vertex not in range(1, 6):
        raise ValueError(f"vertex must be in 1..5, got {vertex}")
    rotated = reconstruct_pentagon(2.0, opposite_diagonal, (1, 1, 1), scale)
    # rotated label j is original label (vertex - 2 + j) mod 5
    shift = (vertex - 2) % 5
    v = np.roll(np.asarray(rotated.vertices), shift, axis=0)
    return pentagon_from_vertices(v, scale)
