"""Diagonal relation of a 4-bar linkage and the oval model of its moduli space.

Planar configurations are exactly the zeros of the 5x5 Cayley-Menger
determinant ``F(x, y)``. It depends on ``w = x**2`` and ``z = y**2`` only,
through the cubic

    g(w, z) = -2 w^2 z - 2 w z^2 + 2 (a^2 + b^2 + c^2 + d^2) w z
              - 2 (a^2 - d^2)(b^2 - c^2) w + 2 (a^2 - b^2)(c^2 - d^2) z
              - 2 (ac - bd)(ac + bd)(a^2 - b^2 + c^2 - d^2).

Inside the admissible box the zero set of ``g`` is a single convex oval
with ``g > 0`` inside (non-planar tetrahedra) and ``g < 0`` outside. The oval
is parametrized by the polar angle around an interior point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import Degenerate, NumericalFailure, TangentVertical
from .geometry import Linkage

STAR_RAYS = 1024
STAR_SAMPLES = 64
BOX_MARGIN = 1e-8
TANGENT_RTOL = 1e-10

# exponents of the monomials w^i z^j in g, in coefficient order
MONOMIALS = ((2, 1), (1, 2), (1, 1), (1, 0), (0, 1), (0, 0))


def cayley_menger(linkage: Linkage, x: float, y: float) -> float:
    """Determinant of the bordered squared-distance matrix of the quad.

    Zero iff the six distances embed in the plane; equals 288 V^2 for a
    tetrahedron of volume V.
    """
    a, b, c, d = linkage._quad_sides()
    return cayley_menger_distances(a, b, c, d, x, y)


def cayley_menger_distances(a, b, c, d, x, y) -> float:
    """Same determinant from raw distances; inputs need not form a linkage."""
    m = np.array(
        [
            [0.0, 1.0, 1.0, 1.0, 1.0],
            [1.0, 0.0, a * a, x * x, d * d],
            [1.0, a * a, 0.0, b * b, y * y],
            [1.0, x * x, b * b, 0.0, c * c],
            [1.0, d * d, y * y, c * c, 0.0],
        ]
    )
    return float(np.linalg.det(m))


def corrected_cubic(linkage: Linkage) -> Tuple[float, ...]:
    """Coefficients of g(w, z) in :data:`MONOMIALS` order."""
    a, b, c, d = linkage._quad_sides()
    a2, b2, c2, d2 = a * a, b * b, c * c, d * d
    return (
        -2.0,
        -2.0,
        2.0 * (a2 + b2 + c2 + d2),
        -2.0 * (a2 - d2) * (b2 - c2),
        2.0 * (a2 - b2) * (c2 - d2),
        -2.0 * (a * c - b * d) * (a * c + b * d) * (a2 - b2 + c2 - d2),
    )


def printed_expansion(linkage: Linkage, x: float, y: float) -> float:
    """The expansion as it circulates in print, which lacks the ``w z`` term.

    Kept only as a negative control: it does not vanish at planar
    configurations (e.g. -32 at the unit square).
    """
    a, b, c, d = linkage._quad_sides()
    w, z = x * x, y * y
    return (
        -2 * w * w * z
        - 2 * w * z * z
        + 2 * w * (d * d - a * a) * (b * b - c * c)
        + 2 * z * (b * b - a * a) * (d * d - c * c)
        - 2 * (a * c - b * d) * (a * c + b * d) * (a * a - b * b + c * c - d * d)
    )


def eval_cubic(coef, w, z):
    k21, k12, k11, k10, k01, k00 = coef
    return w * (z * (k21 * w + k12 * z + k11) + k10) + k01 * z + k00


def cubic_terms_scale(coef, w, z):
    """Sum of absolute monomial values: the natural size of g near (w, z)."""
    k21, k12, k11, k10, k01, k00 = coef
    return (
        abs(k21 * w * w * z)
        + abs(k12 * w * z * z)
        + abs(k11 * w * z)
        + abs(k10 * w)
        + abs(k01 * z)
        + abs(k00)
    )


def cubic_gradient(coef, w, z):
    k21, k12, k11, k10, k01, _ = coef
    gw = 2.0 * k21 * w * z + k12 * z * z + k11 * z + k10
    gz = k21 * w * w + 2.0 * k12 * w * z + k11 * w + k01
    return gw, gz


def cubic_hessian(coef, w, z):
    k21, k12, k11, _, _, _ = coef
    return 2.0 * k21 * z, 2.0 * k21 * w + 2.0 * k12 * z + k11, 2.0 * k12 * w


def relation_residual(linkage: Linkage, w: float, z: float) -> float:
    """g(w, z) relative to the magnitude of its terms."""
    coef = corrected_cubic(linkage)
    scale = cubic_terms_scale(coef, w, z)
    return eval_cubic(coef, w, z) / scale if scale > 0 else 0.0


@dataclass(frozen=True)
class OvalModel:
    linkage: Linkage
    interior_point: Tuple[float, float]
    coefficients: Tuple[float, ...]
    w_range: Tuple[float, float]
    z_range: Tuple[float, float]

    def g(self, w, z):
        return eval_cubic(self.coefficients, w, z)

    def gradient(self, w, z):
        return cubic_gradient(self.coefficients, w, z)

    def terms_scale(self, w, z):
        return cubic_terms_scale(self.coefficients, w, z)

    def phi_of(self, x: float, y: float) -> float:
        """Polar angle of the configuration with diagonals (x, y)."""
        w0, z0 = self.interior_point
        return math.atan2(y * y - z0, x * x - w0) % (2.0 * math.pi)


@dataclass(frozen=True)
class OvalPoint:
    phi: float
    w: float
    z: float
    x: float
    y: float
    signs: Tuple[int, int]


def _quad_planar_z(linkage: Linkage, x: float):
    a, b, c, d = linkage.sides
    u2 = (a * a - b * b + x * x) / (2.0 * x)
    u4 = (d * d - c * c + x * x) / (2.0 * x)
    h2 = math.sqrt(max(0.0, a * a - u2 * u2))
    h4 = math.sqrt(max(0.0, d * d - u4 * u4))
    return (u2 - u4) ** 2 + (h2 - h4) ** 2, (u2 - u4) ** 2 + (h2 + h4) ** 2


def build_oval(linkage: Linkage) -> OvalModel:
    """Validated polar model of the moduli circle of a nondegenerate quad."""
    if linkage.n != 4:
        raise ValueError("oval model needs a 4-bar linkage")
    if linkage.is_degenerate:
        raise Degenerate(f"linkage {linkage.sides} is degenerate (pinched oval)")
    coef = corrected_cubic(linkage)
    xlo, xhi = linkage.x_range()
    ylo, yhi = linkage.y_range()
    xm = 0.5 * (xlo + xhi)
    zlo, zhi = _quad_planar_z(linkage, xm)
    w0, z0 = xm * xm, 0.5 * (zlo + zhi)
    model = OvalModel(linkage, (w0, z0), coef, (xlo * xlo, xhi * xhi), (ylo * ylo, yhi * yhi))
    if not model.g(w0, z0) > 0:
        raise Degenerate("seed point is not inside the oval")
    _validate_star(model)
    return model


def _ray_exit(model: OvalModel, cos_phi, sin_phi):
    """Distance from the interior point to the slightly enlarged box boundary."""
    w0, z0 = model.interior_point
    (wl, wh), (zl, zh) = model.w_range, model.z_range
    mw = BOX_MARGIN * max(wh, 1.0)
    mz = BOX_MARGIN * max(zh, 1.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        rw = np.where(cos_phi > 0, (wh + mw - w0) / cos_phi, np.where(cos_phi < 0, (wl - mw - w0) / cos_phi, np.inf))
        rz = np.where(sin_phi > 0, (zh + mz - z0) / sin_phi, np.where(sin_phi < 0, (zl - mz - z0) / sin_phi, np.inf))
    return np.minimum(rw, rz)


def _validate_star(model: OvalModel) -> None:
    phis = np.linspace(0.0, 2.0 * np.pi, STAR_RAYS, endpoint=False)
    cs, sn = np.cos(phis), np.sin(phis)
    rmax = _ray_exit(model, cs, sn)
    w0, z0 = model.interior_point
    frac = np.linspace(0.0, 1.0, STAR_SAMPLES + 1)[1:]
    r = rmax[:, None] * frac[None, :]
    vals = model.g(w0 + r * cs[:, None], z0 + r * sn[:, None])
    signs = np.sign(vals)
    if np.any(signs[:, -1] > 0):
        raise Degenerate("oval reaches the box boundary away from its extremal points")
    changes = np.sum(np.abs(np.diff(np.concatenate([np.ones((STAR_RAYS, 1)), signs], axis=1), axis=1)) > 0, axis=1)
    if np.any(changes > 2):
        raise Degenerate("oval is not star-shaped about the interior point")


def oval_radii(model: OvalModel, phis) -> np.ndarray:
    """Radius of the oval along each ray, by vectorized bisection."""
    phis = np.asarray(phis, dtype=float)
    cs, sn = np.cos(phis), np.sin(phis)
    w0, z0 = model.interior_point
    lo = np.zeros_like(phis)
    hi = _ray_exit(model, cs, sn)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        inside = model.g(w0 + mid * cs, z0 + mid * sn) > 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
        if np.all(hi - lo <= 4e-16 * hi):
            break
    return 0.5 * (lo + hi)


def oval_radius(model: OvalModel, phi: float) -> float:
    cs, sn = math.cos(phi), math.sin(phi)
    w0, z0 = model.interior_point
    rmax = float(_ray_exit(model, np.float64(cs), np.float64(sn)))
    coef = model.coefficients

    def f(r):
        return eval_cubic(coef, w0 + r * cs, z0 + r * sn)

    try:
        return brentq(f, 0.0, rmax, xtol=1e-15 * rmax, rtol=8.9e-16, maxiter=200)
    except ValueError as exc:
        raise NumericalFailure(f"ray at phi={phi} does not bracket the oval") from exc


def _signs(gw, gz):
    # orientation by the outward normal -grad g, so the convex arc reads (+, +)
    return (-int(np.sign(gw)), -int(np.sign(gz)))


def oval_point(model: OvalModel, phi: float) -> OvalPoint:
    phi = float(phi) % (2.0 * math.pi)
    r = oval_radius(model, phi)
    w0, z0 = model.interior_point
    w, z = w0 + r * math.cos(phi), z0 + r * math.sin(phi)
    gw, gz = model.gradient(w, z)
    return OvalPoint(phi, w, z, math.sqrt(max(w, 0.0)), math.sqrt(max(z, 0.0)), _signs(gw, gz))


@dataclass
class OvalSample:
    """Vectorized oval samples with tangent (dw/dphi, dz/dphi)."""

    phi: np.ndarray
    w: np.ndarray
    z: np.ndarray
    dw: np.ndarray
    dz: np.ndarray
    gw: np.ndarray
    gz: np.ndarray

    @property
    def x(self):
        return np.sqrt(np.maximum(self.w, 0.0))

    @property
    def y(self):
        return np.sqrt(np.maximum(self.z, 0.0))

    @property
    def sign_fx(self):
        return -np.sign(self.gw).astype(int)

    @property
    def sign_fy(self):
        return -np.sign(self.gz).astype(int)


def _tangent(model, phi, r, w, z):
    cs, sn = np.cos(phi), np.sin(phi)
    gw, gz = model.gradient(w, z)
    radial = gw * cs + gz * sn
    normal = -gw * sn + gz * cs
    dr = -r * normal / radial
    return dr * cs - r * sn, dr * sn + r * cs, gw, gz


def sample_oval(model: OvalModel, phis) -> OvalSample:
    phis = np.asarray(phis, dtype=float)
    r = oval_radii(model, phis)
    w0, z0 = model.interior_point
    w = w0 + r * np.cos(phis)
    z = z0 + r * np.sin(phis)
    dw, dz, gw, gz = _tangent(model, phis, r, w, z)
    return OvalSample(phis, w, z, dw, dz, gw, gz)


def sample_oval_at(model: OvalModel, phi: float):
    """Scalar version of :func:`sample_oval`: (w, z, dw, dz)."""
    r = oval_radius(model, phi)
    w0, z0 = model.interior_point
    w = w0 + r * math.cos(phi)
    z = z0 + r * math.sin(phi)
    dw, dz, _, _ = _tangent(model, phi, r, w, z)
    return w, z, dw, dz


def branch_second_derivative(model: OvalModel, point: OvalPoint) -> float:
    """y''(x) along the local branch y(x) of the oval through ``point``.

    Implicit differentiation of g(w, z) = 0 with w = x^2, z = y^2. Negative
    on the convex arc.
    """
    w, z = point.w, point.z
    gw, gz = model.gradient(w, z)
    gww, gwz, gzz = cubic_hessian(model.coefficients, w, z)
    size = model.terms_scale(w, z)
    if abs(gz) * max(z, 1e-300) <= TANGENT_RTOL * size:
        raise TangentVertical(f"branch y(x) has a vertical tangent at phi={point.phi}")
    zw = -gw / gz
    zww = -(gww * gz * gz - 2.0 * gwz * gw * gz + gzz * gw * gw) / gz**3
    x, y = point.x, point.y
    return zw / y + 2.0 * x * x * zww / y - x * x * zw * zw / y**3


def branch_slope(model: OvalModel, x: float, y: float) -> float:
    """y'(x) along the oval branch through (x, y)."""
    gw, gz = model.gradient(x * x, y * y)
    return (x / y) * (-gw / gz)
