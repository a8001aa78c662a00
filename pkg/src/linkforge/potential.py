"""Vertex charges and the Coulomb-type potentials of a configuration.

The effective potential sums ``q_i q_j k(x_ij)`` over diagonals only; the
sides are rigid, so the edge terms add a configuration-independent constant.
The kernel ``k`` is ``1/d`` (Coulomb), ``d**-alpha`` (power law) or
``ln d`` (logarithmic limit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import InvalidAlpha, PoleHit
from .geometry import PENTAGON_DIAGONALS, PentagonConfig, QuadConfig
from .quad_moduli import OvalModel, sample_oval, sample_oval_at

POLE_RTOL = 1e-12
CLAMP_RTOL = 1e-9

QUAD_DIAGONALS = ((1, 3), (2, 4))

# which quad vertex carries the controlling charge
CONVENTIONS = {"eq3": 1, "example1": 2}


@dataclass(frozen=True)
class PotentialKind:
    name: str = "coulomb"
    alpha: float = 1.0

    def __post_init__(self):
        if self.name not in ("coulomb", "alpha", "log"):
            raise ValueError(f"unknown potential kind {self.name!r}")
        if self.name == "alpha" and not self.alpha > 0:
            raise InvalidAlpha(f"alpha must be positive, got {self.alpha}")

    def kernel(self, d):
        if self.name == "coulomb":
            return 1.0 / d
        if self.name == "alpha":
            return d ** (-self.alpha)
        return np.log(d)

    def kernel_prime(self, d):
        if self.name == "coulomb":
            return -1.0 / (d * d)
        if self.name == "alpha":
            return -self.alpha * d ** (-self.alpha - 1.0)
        return 1.0 / d

    def label(self) -> str:
        return f"alpha={self.alpha:g}" if self.name == "alpha" else self.name


COULOMB = PotentialKind()
LOG = PotentialKind("log")


def power(alpha: float) -> PotentialKind:
    return PotentialKind("alpha", float(alpha))


@dataclass(frozen=True)
class ChargeSystem:
    """Charges ``q_1..q_n`` and the 1-based labels of the controlled vertices.

    All non-controlled charges are +1 unless ``generic`` is set.
    """

    charges: Tuple[float, ...]
    controlled: Tuple[int, ...] = ()
    generic: bool = False

    def __post_init__(self):
        charges = tuple(float(q) for q in self.charges)
        object.__setattr__(self, "charges", charges)
        n = len(charges)
        if n not in (4, 5):
            raise ValueError(f"expected 4 or 5 charges, got {n}")
        if any(not 1 <= k <= n for k in self.controlled):
            raise ValueError(f"controlled vertices {self.controlled} out of range")
        if n == 5 and len(self.controlled) == 2:
            i, j = self.controlled
            if (i - j) % 5 in (1, 4):
                raise ValueError("pentagon controlling vertices must not be neighbors")
        if not self.generic:
            for k, q in enumerate(charges, start=1):
                if k not in self.controlled and q != 1.0:
                    raise ValueError(f"non-controlled charge at vertex {k} must be +1, got {q}")

    @classmethod
    def quad(cls, t: float, vertex: int = 1) -> "ChargeSystem":
        q = [1.0] * 4
        q[vertex - 1] = float(t)
        return cls(tuple(q), (vertex,))

    @classmethod
    def quad_convention(cls, t: float, convention: str = "eq3") -> "ChargeSystem":
        return cls.quad(t, CONVENTIONS[convention])

    @classmethod
    def pentagon(cls, s: float, t: float) -> "ChargeSystem":
        # placement read off E = 1/x14 + 1/x24 + t/x13 + s/x25 + st/x35
        return cls((1.0, 1.0, float(t), 1.0, float(s)), (3, 5))

    def product(self, i: int, j: int) -> float:
        return self.charges[i - 1] * self.charges[j - 1]

    def quad_weights(self) -> Tuple[float, float]:
        """Charge products on the diagonals (x, y) of a quad."""
        return self.product(1, 3), self.product(2, 4)


def quad_weights(t: float, convention: str = "eq3") -> Tuple[float, float]:
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; use one of {sorted(CONVENTIONS)}")
    return (t, 1.0) if convention == "eq3" else (1.0, t)


def _diagonal_pairs(config):
    return QUAD_DIAGONALS if isinstance(config, QuadConfig) else PENTAGON_DIAGONALS


def _scale(config) -> float:
    if isinstance(config, QuadConfig):
        return config.linkage.scale
    return config.scale


def _distance(config, i, j) -> float:
    v = config.vertices
    return math.hypot(*(v[j - 1] - v[i - 1]))


def _pair_sum(config, charges: ChargeSystem, pairs, kind: PotentialKind) -> float:
    if len(charges.charges) != len(config.vertices):
        raise ValueError("charge count does not match the configuration")
    floor = POLE_RTOL * _scale(config)
    total = 0.0
    for i, j in pairs:
        d = _distance(config, i, j)
        if d <= floor:
            raise PoleHit(f"vertices {i} and {j} coincide")
        total += charges.product(i, j) * float(kind.kernel(d))
    return total


def full_potential(config, charges: ChargeSystem) -> float:
    """Coulomb energy over every unordered vertex pair, sides included."""
    n = len(config.vertices)
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    return _pair_sum(config, charges, pairs, COULOMB)


def edge_constant(linkage_sides, charges: ChargeSystem) -> float:
    """The configuration-independent part of the full potential."""
    n = len(linkage_sides)
    return sum(charges.product(i + 1, (i + 1) % n + 1) / linkage_sides[i] for i in range(n))


def effective_potential(config, charges: ChargeSystem) -> float:
    return _pair_sum(config, charges, _diagonal_pairs(config), COULOMB)


def potential_alpha(config, charges: ChargeSystem, alpha: float) -> float:
    return _pair_sum(config, charges, _diagonal_pairs(config), power(alpha))


def potential_log(config, charges: ChargeSystem) -> float:
    return _pair_sum(config, charges, _diagonal_pairs(config), LOG)


def potential(config, charges: ChargeSystem, kind: PotentialKind = COULOMB) -> float:
    return _pair_sum(config, charges, _diagonal_pairs(config), kind)


def pentagon_energy(diags, s: float, t: float, kind: PotentialKind = COULOMB) -> float:
    """E = k(x14) + k(x24) + t k(x13) + s k(x25) + st k(x35) from diagonals in
    (x13, x14, x24, x25, x35) order."""
    x13, x14, x24, x25, x35 = diags
    k = kind.kernel
    return float(k(x14) + k(x24) + t * k(x13) + s * k(x25) + s * t * k(x35))


# -- along the oval -----------------------------------------------------------


def oval_energy(model: OvalModel, weights, phis, kind: PotentialKind = COULOMB):
    """Vectorized E and dE/dphi along the oval.

    Returns ``(E, dE, scale, sample)`` where ``scale`` is |grad E| times the
    speed of (x, y) along phi, the size dE/dphi would have without
    cancellation. Samples within the pole clamp come back as NaN.
    """
    s = sample_oval(model, phis)
    e, de, scale = _energy_terms(model, weights, s.w, s.z, s.dw, s.dz, kind)
    return e, de, scale, s


def _energy_terms(model, weights, w, z, dw, dz, kind):
    qx, qy = weights
    x = np.sqrt(np.maximum(w, 0.0))
    y = np.sqrt(np.maximum(z, 0.0))
    floor = CLAMP_RTOL * model.linkage.scale
    bad = (x <= floor) | (y <= floor)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = np.where(bad, np.nan, x)
        ys = np.where(bad, np.nan, y)
        e = qx * kind.kernel(xs) + qy * kind.kernel(ys)
        ex = qx * kind.kernel_prime(xs)
        ey = qy * kind.kernel_prime(ys)
        dx = dw / (2.0 * xs)
        dy = dz / (2.0 * ys)
    # |grad E| * |tangent|: stays meaningful where one term vanishes
    scale = np.hypot(ex, ey) * np.hypot(dx, dy)
    return e, ex * dx + ey * dy, scale


def oval_energy_at(model: OvalModel, weights, phi: float, kind: PotentialKind = COULOMB):
    """Scalar (E, dE/dphi, derivative scale) at one oval angle."""
    w, z, dw, dz = sample_oval_at(model, phi)
    e, de, scale = _energy_terms(model, weights, np.float64(w), np.float64(z), dw, dz, kind)
    return float(e), float(de), float(scale)


def quad_potential_derivative(model: OvalModel, charges: ChargeSystem, phi: float,
                              kind: PotentialKind = COULOMB) -> float:
    """dE/dphi along the polar parametrization of the oval."""
    _, de, _ = oval_energy_at(model, charges.quad_weights(), phi, kind)
    if not math.isfinite(de):
        raise PoleHit(f"a diagonal vanishes at phi={phi}")
    return de
