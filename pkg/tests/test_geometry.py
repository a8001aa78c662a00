import math

import numpy as np
import pytest

from conftest import GOLDEN, REF_CRITICAL_T_ON_X, REF_SIDES
from linkforge.errors import (
    Degenerate,
    EmptyModuliSpace,
    InvalidLinkage,
    NotOnCurve,
    TriangleViolation,
)
from linkforge.geometry import (
    ALIGNED,
    SELF_INTERSECTING,
    STRICTLY_CONVEX,
    Linkage,
    aligned_configurations,
    aligned_pentagon,
    canonicalize,
    classify_quad,
    diagonals,
    mirror_pentagon,
    pentagon_from_vertices,
    reconstruct_pentagon,
    reconstruct_quad,
    rotate_labels,
)


def _side_lengths(v):
    v = np.asarray(v)
    return np.hypot(*(np.roll(v, -1, axis=0) - v).T)


def _segments_cross(p, q, r, s):
    # independent orientation test
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    return orient(p, q, r) * orient(p, q, s) < 0 and orient(r, s, p) * orient(r, s, q) < 0


class TestLinkage:
    def test_rejects_bad_sides(self):
        with pytest.raises(InvalidLinkage):
            Linkage((1.0, 2.0, 3.0))
        with pytest.raises(InvalidLinkage):
            Linkage((1.0, -1.0, 1.0, 1.0))

    def test_empty_moduli_space(self):
        with pytest.raises(EmptyModuliSpace):
            Linkage((10, 1, 1, 1))

    def test_flags(self):
        assert Linkage((1, 1, 1, 1)).is_degenerate
        assert not Linkage(REF_SIDES).is_degenerate
        assert Linkage((1, 1, 1, 1, 1)).is_equilateral
        assert not Linkage((1, 1, 1, 1, 1.1)).is_equilateral


class TestReconstructQuad:
    def test_unit_square(self):
        link = Linkage((1, 1, 1, 1))
        cfg = reconstruct_quad(link, math.sqrt(2), math.sqrt(2))
        np.testing.assert_allclose(cfg.vertices, [[0, 0], [1, 0], [1, 1], [0, 1]], atol=1e-12)

    def test_reference_minimum_is_convex(self, ref_linkage):
        x, y = REF_CRITICAL_T_ON_X[3][:2]
        cfg = reconstruct_quad(ref_linkage, x, y)
        assert classify_quad(cfg) == STRICTLY_CONVEX
        np.testing.assert_allclose(_side_lengths(cfg.vertices), REF_SIDES, rtol=1e-9)
        np.testing.assert_allclose(diagonals(cfg), (x, y), rtol=1e-9)
        assert (round(cfg.x, 2), round(cfg.y, 2)) == (9.59, 7.61)

    def test_triangle_violation(self):
        with pytest.raises(TriangleViolation):
            reconstruct_quad(Linkage((3, 4, 5, 6)), 12.0, 5.0)

    def test_off_curve(self, ref_linkage):
        with pytest.raises(NotOnCurve):
            reconstruct_quad(ref_linkage, 9.0, 9.0)

    def test_canonical_frame(self, ref_model):
        from linkforge.quad_control import config_at

        for phi in np.linspace(0, 2 * np.pi, 17)[:-1]:
            cfg = config_at(ref_model, phi)
            v = cfg.vertices
            assert np.all(v[0] == 0) and v[1][1] == 0 and v[1][0] > 0 and v[2][1] >= 0
            again = canonicalize(cfg)
            np.testing.assert_allclose(again.vertices, v, atol=1e-12)


class TestDiagonals:
    def test_square(self):
        cfg = reconstruct_quad(Linkage((1, 1, 1, 1)), math.sqrt(2), math.sqrt(2))
        np.testing.assert_allclose(diagonals(cfg), (math.sqrt(2), math.sqrt(2)), rtol=1e-12)

    def test_regular_pentagon(self):
        cfg = reconstruct_pentagon(GOLDEN, GOLDEN)
        np.testing.assert_allclose(diagonals(cfg), [GOLDEN] * 5, rtol=1e-12)


class TestClassify:
    def test_square(self):
        cfg = reconstruct_quad(Linkage((1, 1, 1, 1)), math.sqrt(2), math.sqrt(2))
        assert classify_quad(cfg) == STRICTLY_CONVEX

    def test_self_intersecting_critical_point(self, ref_linkage):
        x, y = REF_CRITICAL_T_ON_X[2][:2]
        cfg = reconstruct_quad(ref_linkage, x, y)
        v = cfg.vertices
        crossing = _segments_cross(v[0], v[1], v[2], v[3]) or _segments_cross(v[1], v[2], v[3], v[0])
        assert crossing
        assert classify_quad(cfg) == SELF_INTERSECTING


class TestAlignedConfigurations:
    def test_diagonal_equals_adjacent_sum(self):
        (cx, vx), _ = aligned_configurations(Linkage((2, 1, 2, 2)))
        assert cx.x == pytest.approx(3.0, rel=1e-12)
        assert vx == 2
        assert classify_quad(cx) == ALIGNED

    def test_reference(self, ref_linkage):
        (cx, vx), (cy, vy) = aligned_configurations(ref_linkage)
        a, b, c, d = REF_SIDES
        # x = c + d: p4 lies on the segment p1p3; y by the cosine rule in p1p2p3
        x = c + d
        cos1 = (a * a + x * x - b * b) / (2 * a * x)
        p4 = d * np.array([cos1, math.sqrt(1 - cos1 * cos1)])
        y_oracle = math.hypot(*(p4 - [a, 0]))
        assert (cx.x, vx) == (pytest.approx(12.0), 4)
        assert cx.y == pytest.approx(y_oracle, rel=1e-9)
        # y = b + c: p3 on segment p2p4
        assert cy.y == pytest.approx(min(b + c, a + d), rel=1e-12) and vy == 1
        assert classify_quad(cx) == classify_quad(cy) == ALIGNED

    def test_dense_sweep_extrema(self, ref_model):
        from linkforge.quad_moduli import sample_oval

        s = sample_oval(ref_model, np.linspace(0, 2 * np.pi, 200000, endpoint=False))
        (cx, _), (cy, _) = aligned_configurations(ref_model.linkage)
        assert s.x.max() == pytest.approx(cx.x, rel=1e-8)
        assert s.y.max() == pytest.approx(cy.y, rel=1e-8)

    def test_degenerate(self):
        with pytest.raises(Degenerate):
            aligned_configurations(Linkage((1, 1, 1, 1)))


class TestPentagon:
    def test_regular(self):
        cfg = reconstruct_pentagon(GOLDEN, GOLDEN)
        np.testing.assert_allclose(_side_lengths(cfg.vertices), 1.0, rtol=1e-12)
        assert cfg.is_strictly_convex

    def test_chart_point(self):
        cfg = reconstruct_pentagon(1.5, 1.7)
        np.testing.assert_allclose(_side_lengths(cfg.vertices), 1.0, atol=1e-12)
        v = cfg.vertices
        recomputed = [math.hypot(*(v[j] - v[i])) for i, j in ((0, 2), (0, 3), (1, 3), (1, 4), (2, 4))]
        np.testing.assert_allclose(cfg.diagonals, recomputed, rtol=1e-12)
        assert cfg.chart == pytest.approx((1.5, 1.7), rel=1e-12)
        assert cfg.is_strictly_convex

    def test_infeasible_chart(self):
        with pytest.raises(TriangleViolation):
            reconstruct_pentagon(2.5, 1.5)
        with pytest.raises(TriangleViolation):
            reconstruct_pentagon(0.2, 1.5)

    @pytest.mark.parametrize("branches", [(1, 1, 1), (1, -1, 1), (-1, 1, -1), (1, 1, -1)])
    def test_vertices_round_trip(self, branches):
        cfg = reconstruct_pentagon(1.3, 1.1, branches)
        back = pentagon_from_vertices(cfg.vertices)
        assert back.branches == cfg.branches
        np.testing.assert_allclose(back.diagonals, cfg.diagonals, rtol=1e-12)

    def test_scale(self):
        cfg = reconstruct_pentagon(1.5, 1.7, scale=3.0)
        np.testing.assert_allclose(_side_lengths(cfg.vertices), 3.0, rtol=1e-12)
        assert cfg.is_strictly_convex

    def test_mirror_and_rotation_preserve_shape(self):
        cfg = reconstruct_pentagon(1.5, 1.7)
        m = mirror_pentagon(cfg)
        # mirror swaps x14 <-> x24 and x13 <-> x25
        assert m.diagonal(1, 4) == pytest.approx(cfg.diagonal(2, 4))
        assert m.diagonal(1, 3) == pytest.approx(cfg.diagonal(2, 5))
        assert m.is_strictly_convex
        r = rotate_labels(cfg, 1)
        assert r.diagonal(1, 3) == pytest.approx(cfg.diagonal(2, 4))

    @pytest.mark.parametrize("vertex", [1, 2, 3, 4, 5])
    def test_aligned(self, vertex):
        cfg = aligned_pentagon(vertex, 1.5)
        assert cfg.aligned_vertices() == (vertex,)
        assert not cfg.is_strictly_convex

    def test_continuity(self):
        base = reconstruct_pentagon(1.4, 1.6)
        for dx, dy in ((1e-6, 0), (0, 1e-6), (-1e-6, 1e-6)):
            near = reconstruct_pentagon(1.4 + dx, 1.6 + dy)
            assert np.max(np.abs(near.vertices - base.vertices)) < 1e-5
