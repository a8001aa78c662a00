"""Equilibria and charge control of a 4-bar linkage on its moduli circle.

One vertex carries the controlling charge ``t``, the other three carry +1.
Under the ``eq3`` convention ``t`` sits at vertex 1 and E = t/x + 1/y; under
``example1`` it sits at vertex 2 and E = 1/x + t/y.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import BoundaryConfiguration, NotConvex, NumericalFailure, PoleHit
from .geometry import (
    ALIGNED,
    STRICTLY_CONVEX,
    Linkage,
    QuadConfig,
    aligned_configurations,
    classify_quad,
    reconstruct_quad,
)
from .potential import COULOMB, PotentialKind, oval_energy, oval_energy_at, quad_weights
from .quad_moduli import OvalModel, build_oval, oval_point

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DEFAULT_SAMPLES = 4096
CRIT_RTOL = 1e-10
DEGENERATE_RTOL = 1e-8
MORSE_STEP = 1e-5
ROOT_PROBE = 1e-8

MINIMUM, MAXIMUM, DEGENERATE = "minimum", "maximum", "degenerate"


@dataclass(frozen=True)
class CriticalPoint:
    phi: float
    x: float
    y: float
    energy: float
    morse_type: str
    region: str
    signs: Tuple[int, int]
    second_derivative: float
    is_global_min: bool = False
    is_global_max: bool = False

    @property
    def label(self) -> str:
        if self.morse_type == DEGENERATE:
            return DEGENERATE
        if self.morse_type == MINIMUM:
            return "global min" if self.is_global_min else "local min"
        return "global max" if self.is_global_max else "local max"

    def as_dict(self) -> dict:
        return {
            "phi": self.phi,
            "x": self.x,
            "y": self.y,
            "E": self.energy,
            "type": self.morse_type,
            "label": self.label,
            "region": self.region,
            "sgn_Fx": self.signs[0],
            "sgn_Fy": self.signs[1],
        }


def config_at(model: OvalModel, phi: float) -> QuadConfig:
    p = oval_point(model, phi)
    return reconstruct_quad(model.linkage, p.x, p.y)


def _derivative(model, weights, kind):
    def f(phi):
        return oval_energy_at(model, weights, phi, kind)[1]

    return f


def critical_points(
    model: OvalModel,
    t: float,
    kind: PotentialKind = COULOMB,
    convention: str = "eq3",
    samples: int = DEFAULT_SAMPLES,
) -> List[CriticalPoint]:
    """All critical points of E on the moduli circle, sorted by phi.

    Zeros of dE/dphi are bracketed on a uniform grid of ``samples`` angles
    and refined with Brent's method; pairs closer than 2*pi/samples can be
    missed. Sign changes across a pole are discarded.
    """
    weights = quad_weights(t, convention)
    phis = np.linspace(0.0, TWO_PI, samples, endpoint=False)
    _, de, _, _ = oval_energy(model, weights, phis, kind)
    nxt = np.roll(de, -1)
    ok = np.isfinite(de) & np.isfinite(nxt)
    brackets = np.nonzero(ok & (np.sign(de) != np.sign(nxt)) & (de != 0))[0]
    exact = np.nonzero(ok & (de == 0))[0]

    fprime = _derivative(model, weights, kind)
    roots = [float(phis[k]) for k in exact]
    for k in brackets:
        lo = float(phis[k])
        hi = float(phis[k + 1]) if k + 1 < samples else TWO_PI
        if de[(k + 1) % samples] == 0:
            continue
        try:
            root = brentq(fprime, lo, hi, xtol=1e-13, rtol=8.9e-16, maxiter=200)
        except (ValueError, RuntimeError) as exc:
            raise NumericalFailure(f"refinement failed in [{lo}, {hi}]") from exc
        roots.append(root % TWO_PI)

    points = []
    for phi in sorted(roots):
        e, d1, scale = oval_energy_at(model, weights, phi, kind)
        if not (math.isfinite(e) and math.isfinite(d1)):
            continue
        if abs(d1) > CRIT_RTOL * scale and not _simple_zero(model, weights, kind, phi, d1):
            # sign change across a pole
            logger.debug("discarding phi=%r: |dE|=%g scale=%g", phi, abs(d1), scale)
            continue
        points.append(_typed(model, weights, kind, phi, e, scale))
    return _mark_global(points)


def _simple_zero(model, weights, kind, phi, d1) -> bool:
    """Steep but genuine zero: dE flips sign nearby and |dE| is far smaller at phi.

    Near a pinched oval dE/dphi can be so steep that the root residual
    exceeds the relative test; a pole instead has |dE| peaking at phi.
    """
    lo = oval_energy_at(model, weights, phi - ROOT_PROBE, kind)[1]
    hi = oval_energy_at(model, weights, phi + ROOT_PROBE, kind)[1]
    return lo * hi < 0 and abs(d1) <= 1e-2 * min(abs(lo), abs(hi))


def _typed(model, weights, kind, phi, energy, scale) -> CriticalPoint:
    h = MORSE_STEP
    d_plus = oval_energy_at(model, weights, phi + h, kind)[1]
    d_minus = oval_energy_at(model, weights, phi - h, kind)[1]
    d2 = (d_plus - d_minus) / (2.0 * h)
    if abs(d2) <= DEGENERATE_RTOL * max(scale, abs(energy)):
        morse = DEGENERATE
    else:
        morse = MINIMUM if d2 > 0 else MAXIMUM
    p = oval_point(model, phi)
    region = classify_quad(reconstruct_quad(model.linkage, p.x, p.y))
    return CriticalPoint(phi, p.x, p.y, energy, morse, region, p.signs, d2)


def _mark_global(points: List[CriticalPoint]) -> List[CriticalPoint]:
    mins = [p for p in points if p.morse_type == MINIMUM]
    maxs = [p for p in points if p.morse_type == MAXIMUM]
    lo = min(mins, key=lambda p: p.energy) if mins else None
    hi = max(maxs, key=lambda p: p.energy) if maxs else None
    out = []
    for p in points:
        out.append(
            CriticalPoint(
                p.phi, p.x, p.y, p.energy, p.morse_type, p.region, p.signs,
                p.second_derivative, p is lo, p is hi,
            )
        )
    return out


def _stabilizer_parts(x, y, gw, gz, kind, convention):
    """Numerator and denominator of the stabilizing charge.

    At a critical point k'(x) dx * qx + k'(y) dy * qy = 0 with
    dy/dx = (x/y)(-gw/gz), so the controlled weight is a ratio of two
    finite quantities that may vanish at the aligned ends of the convex arc.
    """
    kx, ky = kind.kernel_prime(x), kind.kernel_prime(y)
    dx_term = kx * y * gz
    dy_term = ky * x * (-gw)
    # eq3: t*dx_term + dy_term = 0 ; example1: dx_term + t*dy_term = 0
    if convention == "eq3":
        return -dy_term, dx_term
    return -dx_term, dy_term


def stabilize_quad(
    model: OvalModel,
    target: QuadConfig,
    convention: str = "eq3",
    kind: PotentialKind = COULOMB,
    allow_boundary: bool = False,
) -> float:
    """The unique charge t for which ``target`` is critical (and the global minimum).

    Aligned targets have no finite stabilizer; they raise
    :class:`BoundaryConfiguration` carrying the limit value (0 or inf), or
    return that limit when ``allow_boundary`` is set.
    """
    quad_weights(0.0, convention)
    region = classify_quad(target)
    x, y = target.x, target.y
    gw, gz = model.gradient(x * x, y * y)
    num, den = _stabilizer_parts(x, y, gw, gz, kind, convention)
    if region == ALIGNED:
        size = abs(num) + abs(den)
        limit = 0.0 if abs(num) <= abs(den) else math.inf
        if size > 0 and min(abs(num), abs(den)) > 1e-6 * size:
            raise NotConvex(f"aligned vertex is not on the convex arc (region={region})")
        if allow_boundary:
            return limit
        raise BoundaryConfiguration(f"target is aligned; stabilizer tends to {limit}", limit)
    if region != STRICTLY_CONVEX:
        raise NotConvex(f"target is {region}, not strictly convex")
    t = num / den
    if not t > 0:
        raise NumericalFailure(f"stabilizer {t} is not positive for a convex target")
    return t


def _boundary_minimum(model, t, convention):
    """Minimum point for t in {0, inf}: an aligned end of the convex arc."""
    x_max, y_max = aligned_configurations(model.linkage)
    # eq3 with t=0 leaves E = 1/y; example1 with t=0 leaves E = 1/x
    want_y_max = (t == 0) == (convention == "eq3")
    return (y_max if want_y_max else x_max)[0]


def convex_minimum(
    model: OvalModel,
    t: float,
    kind: PotentialKind = COULOMB,
    convention: str = "eq3",
    samples: int = DEFAULT_SAMPLES,
) -> CriticalPoint:
    """The unique critical point on the convex arc for a positive finite t."""
    pts = critical_points(model, t, kind, convention, samples)
    convex = [p for p in pts if p.region in (STRICTLY_CONVEX, ALIGNED) and p.signs == (1, 1)]
    if len(convex) != 1:
        raise NumericalFailure(f"expected one convex critical point for t={t}, found {len(convex)}")
    return convex[0]


def charge_to_minimum(
    model: OvalModel,
    t: float,
    kind: PotentialKind = COULOMB,
    convention: str = "eq3",
    samples: int = DEFAULT_SAMPLES,
) -> QuadConfig:
    """Global minimum configuration for the charge t in [0, inf]."""
    if t < 0:
        raise ValueError("the charge must be nonnegative")
    if t == 0 or math.isinf(t):
        return _boundary_minimum(model, t, convention)
    p = convex_minimum(model, t, kind, convention, samples)
    return reconstruct_quad(model.linkage, p.x, p.y)


# -- gradient flow ------------------------------------------------------------


@dataclass
class FlowStage:
    t: float
    iterates: List[Tuple[float, float, float, float]]
    converged: bool
    steps: int

    @property
    def final_phi(self) -> float:
        return self.iterates[-1][0]


@dataclass
class FlowTrace:
    stages: List[FlowStage]
    converged: bool
    final: Optional[QuadConfig] = field(default=None, repr=False)


def gradient_flow(
    model: OvalModel,
    t: float,
    start_phi: float,
    step: float = 1e-2,
    tol: float = 1e-10,
    max_iter: int = 5000,
    kind: PotentialKind = COULOMB,
    convention: str = "eq3",
) -> FlowStage:
    """Monotone descent of E(phi) from ``start_phi``.

    Steps are secant (Barzilai-Borwein) estimates clipped to ``step`` radians
    and halved until E does not increase. Stops when |dE/dphi| falls below
    ``tol`` times the derivative scale, or when no representable step
    decreases E any more.
    """
    weights = quad_weights(t, convention)
    phi = float(start_phi) % TWO_PI
    e, g, scale = oval_energy_at(model, weights, phi, kind)
    if not math.isfinite(e):
        raise PoleHit(f"flow starts on a pole at phi={phi}")
    x, y = _xy(model, phi)
    iterates = [(phi, x, y, e)]
    lr = step / max(abs(g), 1e-300)
    prev = None
    for it in range(max_iter):
        if abs(g) <= tol * scale:
            return FlowStage(t, iterates, True, it)
        if prev is not None:
            dphi, dg = phi - prev[0], g - prev[1]
            if dphi * dg > 0:
                lr = dphi / dg
        move = max(-step, min(step, -lr * g))
        while True:
            cand = phi + move
            e_new, g_new, scale_new = oval_energy_at(model, weights, cand, kind)
            if math.isfinite(e_new) and e_new <= e:
                break
            move *= 0.5
            if abs(move) < 1e-15:
                # roundoff floor: no step lowers E
                return FlowStage(t, iterates, abs(g) <= 1e-6 * scale, it)
        prev = (phi, g)
        phi, e, g, scale = cand % TWO_PI, e_new, g_new, scale_new
        x, y = _xy(model, phi)
        iterates.append((phi, x, y, e))
    logger.warning("gradient flow hit max_iter=%d at phi=%r", max_iter, phi)
    return FlowStage(t, iterates, abs(g) <= tol * scale, max_iter)


def _xy(model, phi):
    p = oval_point(model, phi)
    return p.x, p.y


def navigate(
    model: OvalModel,
    start: QuadConfig,
    target: QuadConfig,
    step: float = 1e-2,
    tol: float = 1e-10,
    max_iter: int = 5000,
    kind: PotentialKind = COULOMB,
    convention: str = "eq3",
) -> FlowTrace:
    """Two-stage navigation: flow with t=0, then with the target's stabilizer."""
    t_target = stabilize_quad(model, target, convention, kind)
    phi0 = model.phi_of(start.x, start.y)
    first = gradient_flow(model, 0.0, phi0, step, tol, max_iter, kind, convention)
    second = gradient_flow(model, t_target, first.final_phi, step, tol, max_iter, kind, convention)
    final = config_at(model, second.final_phi)
    return FlowTrace([first, second], first.converged and second.converged, final)


# -- census -------------------------------------------------------------------


def uniform_sides(lo: float = 1.0, hi: float = 10.0) -> Callable[[np.random.Generator], Tuple[float, ...]]:
    def draw(rng):
        return tuple(float(v) for v in rng.uniform(lo, hi, size=4))

    return draw


def uniform_charge(lo: float = 0.0, hi: float = 5.0) -> Callable[[np.random.Generator], float]:
    """Uniform on (lo, hi]."""

    def draw(rng):
        return float(hi - (hi - lo) * rng.random())

    return draw


def fixed(value):
    return lambda rng: value


def random_linkage(rng: np.random.Generator, sampler=None, max_tries: int = 1000) -> Linkage:
    """Draw sides until they form a nondegenerate 4-bar linkage."""
    sampler = sampler or uniform_sides()
    for _ in range(max_tries):
        try:
            link = Linkage(sampler(rng))
        except ValueError:
            continue
        if not link.is_degenerate:
            return link
    raise RuntimeError("side sampler never produced a valid linkage")


@dataclass
class CensusReport:
    trials: List[dict]
    histogram: dict
    max_count: int
    exceedances: List[dict]
    failures: List[dict]
    kind: str
    convention: str

    def summary(self) -> dict:
        return {
            "trials": len(self.trials),
            "failures": len(self.failures),
            "kind": self.kind,
            "convention": self.convention,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "max_count": self.max_count,
            "exceeds_four": len(self.exceedances),
            "exceedances": self.exceedances,
        }


def census(
    linkage_sampler,
    t_sampler,
    trials: int,
    kind: PotentialKind = COULOMB,
    rng: Optional[np.random.Generator] = None,
    convention: str = "eq3",
    samples: int = DEFAULT_SAMPLES,
) -> CensusReport:
    """Count critical points over random linkages and charges.

    Trials above four critical points are collected in ``exceedances``; they
    would contradict the conjectured bound and are not treated as errors.
    """
    rng = rng or np.random.default_rng()
    rows, failures = [], []
    for trial in range(trials):
        link = random_linkage(rng, linkage_sampler)
        t = float(t_sampler(rng))
        try:
            model = build_oval(link)
            pts = critical_points(model, t, kind, convention, samples)
        except Exception as exc:  # noqa: BLE001 - failed trials are logged and skipped
            logger.warning("census trial %d failed: %s", trial, exc)
            failures.append({"trial": trial, "sides": list(link.sides), "t": t, "error": str(exc)})
            continue
        rows.append(
            {
                "trial": trial,
                "sides": list(link.sides),
                "t": t,
                "count": len(pts),
                "types": sorted(p.morse_type for p in pts),
            }
        )
    hist = Counter(r["count"] for r in rows)
    over = [r for r in rows if r["count"] > 4]
    for r in over:
        logger.warning("census trial %d has %d critical points: %s", r["trial"], r["count"], r)
    return CensusReport(
        rows, dict(hist), max(hist) if hist else 0, over, failures, kind.label(), convention
    )
