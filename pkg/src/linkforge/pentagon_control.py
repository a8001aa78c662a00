"""Charge control of the equilateral pentagon.

Vertex 3 carries t and vertex 5 carries s, the rest +1, so that

    E = 1/x14 + 1/x24 + t/x13 + s/x25 + st/x35.

Near a strictly convex configuration the diagonals (x13, x35) are local
coordinates. Criticality of E in that chart is linear in t and, after
eliminating t, quadratic in s; the unique positive root gives the
stabilizing pair.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from .errors import (
    ChartBoundary,
    NotAligned,
    NotStrictlyConvex,
    NumericalFailure,
    QuadraticDegenerate,
)
from .geometry import (
    PENTAGON_DIAGONALS,
    PentagonConfig,
    mirror_pentagon,
    pentagon_from_vertices,
    pentagon_is_convex,
    reconstruct_pentagon,
)
from .potential import pentagon_energy

logger = logging.getLogger(__name__)

FD_STEP = 1e-5
CHART_MARGIN = 1e-6
# fraction of the chart margin allowed as FD step: the diagonals have
# square-root folds at the chart boundary
STEP_MARGIN_FRACTION = 0.02
CERTIFICATE_TOL = 1e-6
COMPANION_TOL = 1e-10
PROBE_RTOL = 1e-9
PROBE_GRAD_TOL = 1e-6
SAMPLER_MARGIN = 1e-3
BRANCH_COMBOS = tuple(itertools.product((1, -1), repeat=3))


@dataclass(frozen=True)
class PartialSet:
    """Partials of (x14, x24, x25) along x35 (x13 fixed) and along x13 (x35 fixed)."""

    alpha1: float
    beta1: float
    gamma1: float
    alpha2: float
    beta2: float
    gamma2: float

    def as_tuple(self):
        return (self.alpha1, self.beta1, self.gamma1, self.alpha2, self.beta2, self.gamma2)


@dataclass(frozen=True)
class StabilizingPair:
    s: float
    t: float
    A: float
    B: float
    C: float
    s_neg: float
    t_neg: float
    certificate: float


def chart_margin(x13: float, x35: float) -> float:
    """Distance (in unit sides) from the chart to its degenerate triangles."""
    return min(x13, x35, 2.0 - x13, 2.0 - x35, x13 + x35 - 1.0, 1.0 - abs(x13 - x35))


def _unit_chart(config: PentagonConfig):
    x13, x35 = config.chart
    return x13 / config.scale, x35 / config.scale


def _chart_step(x13, x35, base=FD_STEP):
    margin = chart_margin(x13, x35)
    if margin < CHART_MARGIN:
        raise ChartBoundary(f"chart point ({x13}, {x35}) is within {margin:.2e} of a fold")
    return min(base, STEP_MARGIN_FRACTION * margin)


def _central(f, h):
    """Central difference with one Richardson step (error O(h^4))."""
    d_h = (f(h) - f(-h)) / (2.0 * h)
    d_half = (f(0.5 * h) - f(-0.5 * h)) / h
    return (4.0 * d_half - d_h) / 3.0


def _unit_diagonals(x13, x35, branches):
    return np.array(reconstruct_pentagon(x13, x35, branches).diagonals)


def diagonal_partials(config: PentagonConfig) -> PartialSet:
    x13, x35 = _unit_chart(config)
    h = _chart_step(x13, x35)
    br = config.branches
    # diagonals are (x13, x14, x24, x25, x35); keep x14, x24, x25
    d_35 = _central(lambda e: _unit_diagonals(x13, x35 + e, br), h)[1:4]
    d_13 = _central(lambda e: _unit_diagonals(x13 + e, x35, br), h)[1:4]
    return PartialSet(*d_35, *d_13)


def _chart_energy(x13, x35, branches, s, t):
    return pentagon_energy(_unit_diagonals(x13, x35, branches), s, t)


def _chart_gradient(config: PentagonConfig, s: float, t: float) -> float:
    """Scaled finite-difference gradient of E in the configuration's own chart."""
    x13, x35 = _unit_chart(config)
    h = _chart_step(x13, x35)
    br = config.branches
    e0 = _chart_energy(x13, x35, br, s, t)
    g35 = _central(lambda e: _chart_energy(x13, x35 + e, br, s, t), h)
    g13 = _central(lambda e: _chart_energy(x13 + e, x35, br, s, t), h)
    return math.hypot(g35, g13) / abs(e0)


def verify_critical(config: PentagonConfig, s: float, t: float) -> float:
    """Scaled chart gradient of E (units of E per side), a criticality certificate.

    Evaluated in the (x13, x35) chart and in the chart of the mirrored
    labeling (with s and t swapped); the larger of the two is returned, so the
    value does not depend on which of the two labelings is used.
    """
    direct = _chart_gradient(config, s, t)
    mirrored = _chart_gradient(mirror_pentagon(config), t, s)
    return max(direct, mirrored)


def _solve_quadratic(A, B, C):
    disc = B * B - 4.0 * A * C
    if disc < 0:
        raise NumericalFailure(f"quadratic has no real roots (A={A}, B={B}, C={C})")
    q = -0.5 * (B + math.copysign(math.sqrt(disc), B))
    return sorted((q / C, A / q))


def _companion_t(s, p2, gamma2, x13, x25):
    return -x13 * x13 * (p2 + s * gamma2 / (x25 * x25))


def stabilize_pentagon(config: PentagonConfig) -> StabilizingPair:
    """The unique positive (s, t) making a strictly convex pentagon critical."""
    if not config.is_strictly_convex:
        raise NotStrictlyConvex("stabilizing pairs exist only for strictly convex pentagons")
    x13, x14, x24, x25, x35 = (d / config.scale for d in config.diagonals)
    p = diagonal_partials(config)
    A = p.alpha1 / x14**2 + p.beta1 / x24**2
    p2 = p.alpha2 / x14**2 + p.beta2 / x24**2
    B = p.gamma1 / x25**2 - (x13**2 / x35**2) * p2
    C = -(x13**2) * p.gamma2 / (x35**2 * x25**2)
    size = max(abs(A), abs(B), abs(C))
    if abs(C) < 1e-14 * size:
        raise QuadraticDegenerate(f"leading coefficient C={C} vanishes")
    if not A * C < 0:
        raise NumericalFailure(f"AC={A * C} is not negative at a strictly convex pentagon")
    s_neg, s = _solve_quadratic(A, B, C)
    t = _companion_t(s, p2, p.gamma2, x13, x25)
    t_neg = _companion_t(s_neg, p2, p.gamma2, x13, x25)
    if not (s > 0 and t > 0):
        raise NumericalFailure(f"stabilizing pair ({s}, {t}) is not positive")
    cert = _chart_gradient(config, s, t)
    if cert > CERTIFICATE_TOL:
        raise NumericalFailure(f"gradient certificate {cert:.3e} exceeds {CERTIFICATE_TOL}")
    return StabilizingPair(s, t, A, B, C, s_neg, t_neg, cert)


@dataclass(frozen=True)
class MixedSignReport:
    s_neg: float
    t_companion: float
    ac: float
    consistent: bool


def mixed_sign_consistency(config: PentagonConfig) -> MixedSignReport:
    """The negative root s must come with a non-positive companion t."""
    pair = stabilize_pentagon(config)
    ok = pair.s_neg < 0 and pair.t_neg <= COMPANION_TOL and pair.A * pair.C < 0
    return MixedSignReport(pair.s_neg, pair.t_neg, pair.A * pair.C, ok)


# -- boundary -----------------------------------------------------------------


def _relabeled_energy(vertices, shift, s, t):
    """E of a placement given in a labeling rotated by ``shift``."""
    original = np.roll(vertices, shift, axis=0)
    diags = [math.hypot(*(original[j - 1] - original[i - 1])) for i, j in PENTAGON_DIAGONALS]
    return pentagon_energy(diags, s, t)


def pulling_flex(config: PentagonConfig, height: float) -> np.ndarray:
    """Vertices (original labels, unit side) after lifting the aligned vertex by ``height``.

    The aligned vertex rises to apex height ``height`` over its neighbors,
    whose distance shrinks to 2*sqrt(1 - height^2); the opposite diagonal is
    kept, so every other vertex moves at second order only.
    """
    k = _single_aligned(config)
    shift = (k - 2) % 5
    rotated = np.roll(np.asarray(config.vertices) / config.scale, -shift, axis=0)
    x35 = math.hypot(*(rotated[4] - rotated[2]))
    x13 = 2.0 * math.sqrt(1.0 - height * height)
    moved = reconstruct_pentagon(x13, x35, (1, 1, 1)).vertices
    return np.roll(moved, shift, axis=0)


def _single_aligned(config: PentagonConfig) -> int:
    aligned = config.aligned_vertices()
    if len(aligned) != 1:
        raise NotAligned(f"expected exactly one aligned vertex, found {list(aligned)}")
    if not pentagon_is_convex(config.vertices, config.scale):
        raise NotAligned("configuration is not convex")
    return aligned[0]


def boundary_descent_check(config: PentagonConfig, s: float, t: float, step: float = 1e-5) -> float:
    """Derivative of E along the flex that pulls the aligned vertex outward.

    One-sided difference in the apex height with a Richardson step; the
    flex starts exactly at ``config``.
    """
    k = _single_aligned(config)
    shift = (k - 2) % 5

    def energy(h):
        v = pulling_flex(config, h)
        return _relabeled_energy(np.roll(v, -shift, axis=0), shift, s, t)

    base = energy(0.0)
    start = np.asarray(config.vertices) / config.scale
    if not _congruent(pulling_flex(config, 0.0), start):
        raise NotAligned("configuration is not the convex fold of its aligned chart")
    d_h = (energy(step) - base) / step
    d_half = (energy(0.5 * step) - base) / (0.5 * step)
    return (2.0 * d_half - d_h) / config.scale


def _congruent(a, b, tol=1e-9):
    da = np.linalg.norm(a[:, None] - a[None, :], axis=-1)
    db = np.linalg.norm(b[:, None] - b[None, :], axis=-1)
    return bool(np.max(np.abs(da - db)) <= tol)


# -- sampling -----------------------------------------------------------------


def random_convex_pentagon(rng: np.random.Generator, margin: float = SAMPLER_MARGIN,
                           max_tries: int = 100000) -> PentagonConfig:
    """Uniform chart point, rejected until strictly convex and off the folds."""
    for _ in range(max_tries):
        x13, x35 = rng.uniform(margin, 2.0 - margin, size=2)
        if chart_margin(x13, x35) < margin:
            continue
        cfg = reconstruct_pentagon(float(x13), float(x35))
        if cfg.is_strictly_convex:
            return cfg
    raise RuntimeError("no convex pentagon found")


def random_aligned_pentagon(rng: np.random.Generator, vertex: Optional[int] = None,
                            max_tries: int = 10000) -> PentagonConfig:
    from .geometry import aligned_pentagon

    for _ in range(max_tries):
        k = int(rng.integers(1, 6)) if vertex is None else vertex
        cfg = aligned_pentagon(k, float(rng.uniform(1.0, 2.0)))
        if pentagon_is_convex(cfg.vertices) and len(cfg.aligned_vertices()) == 1:
            return cfg
    raise RuntimeError("no aligned convex pentagon found")


# -- exploratory global probe -------------------------------------------------


@dataclass
class ProbeResult:
    verdict: str
    reference_energy: float
    best_energy: float
    witness: Optional[PentagonConfig] = field(default=None, repr=False)
    descents: List[dict] = field(default_factory=list)
    vacuous: bool = False

    @property
    def max_grad_norm(self) -> float:
        norms = [d["grad_norm"] for d in self.descents]
        return max(norms) if norms else 0.0


def _gauge_vertices(vertices) -> np.ndarray:
    """Place p1 at the origin and p2 at (1, 0) (unit side)."""
    v = np.asarray(vertices, dtype=float)
    v = v - v[0]
    ang = math.atan2(v[1, 1], v[1, 0])
    c, s = math.cos(ang), math.sin(ang)
    return v @ np.array([[c, s], [-s, c]]).T


class _VertexProblem:
    """E on the constraint surface of free vertices p3, p4, p5 (p1, p2 pinned)."""

    P1 = np.zeros(2)
    P2 = np.array([1.0, 0.0])

    def __init__(self, s, t):
        self.s, self.t = s, t
        q = np.array([1.0, 1.0, t, 1.0, s])
        self.weights = [q[i - 1] * q[j - 1] for i, j in PENTAGON_DIAGONALS]

    def points(self, v):
        return np.vstack([self.P1, self.P2, v.reshape(3, 2)])

    def energy(self, v):
        p = self.points(v)
        total = 0.0
        for (i, j), w in zip(PENTAGON_DIAGONALS, self.weights):
            d = math.hypot(*(p[j - 1] - p[i - 1]))
            # positive-residue poles act as barriers
            total += w / max(d, 1e-9)
        return total

    def gradient(self, v):
        p = self.points(v)
        grad = np.zeros((5, 2))
        for (i, j), w in zip(PENTAGON_DIAGONALS, self.weights):
            diff = p[j - 1] - p[i - 1]
            d = max(math.hypot(*diff), 1e-9)
            g = -w * diff / d**3
            grad[j - 1] += g
            grad[i - 1] -= g
        return grad[2:].ravel()

    def constraints(self, v):
        p = self.points(v)
        return np.array([
            np.sum((p[2] - p[1]) ** 2) - 1.0,
            np.sum((p[3] - p[2]) ** 2) - 1.0,
            np.sum((p[4] - p[3]) ** 2) - 1.0,
            np.sum((p[4] - p[0]) ** 2) - 1.0,
        ])

    def jacobian(self, v):
        p = self.points(v)
        jac = np.zeros((4, 6))
        jac[0, 0:2] = 2 * (p[2] - p[1])
        jac[1, 0:2] = -2 * (p[3] - p[2])
        jac[1, 2:4] = 2 * (p[3] - p[2])
        jac[2, 2:4] = -2 * (p[4] - p[3])
        jac[2, 4:6] = 2 * (p[4] - p[3])
        jac[3, 4:6] = 2 * (p[4] - p[0])
        return jac

    def tangent_gradient(self, v):
        jac = self.jacobian(v)
        g = self.gradient(v)
        coef, *_ = np.linalg.lstsq(jac.T, g, rcond=None)
        return g - jac.T @ coef


def _random_chart_seed(rng, branches):
    while True:
        x13, x35 = rng.uniform(1e-2, 2.0 - 1e-2, size=2)
        if chart_margin(x13, x35) > 1e-2:
            return reconstruct_pentagon(float(x13), float(x35), branches)


def _descend(problem: _VertexProblem, start: np.ndarray):
    """SLSQP from ``start``; falls back to trust-constr if the tangent gradient stays large."""
    v0 = _gauge_vertices(start)[2:].ravel()
    cons = {"type": "eq", "fun": problem.constraints, "jac": problem.jacobian}
    res = minimize(problem.energy, v0, jac=problem.gradient, constraints=[cons],
                   method="SLSQP", options={"ftol": 1e-15, "maxiter": 3000})
    if _scaled_tangent(problem, res.x) > 1e-8:
        res = minimize(problem.energy, res.x, jac=problem.gradient, constraints=[cons],
                       method="trust-constr", options={"gtol": 1e-12, "xtol": 1e-14, "maxiter": 5000})
    return res.x, res


def _scaled_tangent(problem, v) -> float:
    return float(np.linalg.norm(problem.tangent_gradient(v)) / problem.energy(v))


def global_min_probe(config: PentagonConfig, s: float, t: float, seeds: int = 64,
                     rng: Optional[np.random.Generator] = None) -> ProbeResult:
    """Multi-start local descent of E over the whole pentagon moduli space.

    Heuristic: ``no_lower_found`` is evidence that ``config`` is the global
    minimum, not a proof. Seeds cycle through all eight branch charts.
    """
    rng = rng or np.random.default_rng()
    ref = pentagon_energy([d / config.scale for d in config.diagonals], s, t)
    if seeds <= 0:
        return ProbeResult("no_lower_found", ref, ref, vacuous=True)
    problem = _VertexProblem(s, t)
    best_e, best_v = math.inf, None
    descents = []
    for k in range(seeds):
        branches = BRANCH_COMBOS[k % len(BRANCH_COMBOS)]
        seed = _random_chart_seed(rng, branches)
        try:
            v, res = _descend(problem, np.asarray(seed.vertices))
        except (np.linalg.LinAlgError, ValueError) as exc:
            logger.warning("probe descent %d failed: %s", k, exc)
            continue
        e = problem.energy(v)
        grad = _scaled_tangent(problem, v)
        feas = float(np.max(np.abs(problem.constraints(v))))
        descents.append({"seed": k, "branches": branches, "energy": e, "grad_norm": grad,
                         "feasibility": feas, "success": bool(res.success)})
        if feas < 1e-9 and e < best_e:
            best_e, best_v = e, v
    if best_v is not None and best_e < ref - PROBE_RTOL * abs(ref):
        witness = pentagon_from_vertices(problem.points(best_v))
        return ProbeResult("lower_found", ref, best_e, witness, descents)
    return ProbeResult("no_lower_found", ref, min(best_e, ref), None, descents)
