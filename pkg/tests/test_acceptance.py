"""The ten acceptance criteria, each at its stated tolerance.

Every test prints one ``AC<n> PASS|FAIL`` line (also repeated in the pytest
terminal summary) before asserting.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from linkforge.cli import EXAMPLE1_SIDES, EXAMPLE1_T, EXAMPLE1_TABLE
from linkforge.geometry import (
    NONCONVEX_SIMPLE,
    SELF_INTERSECTING,
    STRICTLY_CONVEX,
    Linkage,
    classify_quad,
    mirror_pentagon,
    reconstruct_pentagon,
)
from linkforge.pentagon_control import (
    boundary_descent_check,
    diagonal_partials,
    global_min_probe,
    mixed_sign_consistency,
    random_aligned_pentagon,
    random_convex_pentagon,
    stabilize_pentagon,
)
from linkforge.potential import COULOMB, power, quad_weights
from linkforge.quad_control import (
    MAXIMUM,
    MINIMUM,
    census,
    charge_to_minimum,
    config_at,
    critical_points,
    gradient_flow,
    navigate,
    random_linkage,
    stabilize_quad,
    uniform_charge,
    uniform_sides,
)
from linkforge.quad_moduli import (
    build_oval,
    cayley_menger,
    cayley_menger_distances,
    corrected_cubic,
    cubic_terms_scale,
    eval_cubic,
    printed_expansion,
    sample_oval,
)

TWO_PI = 2 * math.pi


def verdict(capsys, n, ok, detail):
    line = f"AC{n} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES[n] = line
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


def angle_gap(a, b):
    return abs((a - b + math.pi) % TWO_PI - math.pi)


def models(rng, n):
    return [build_oval(random_linkage(rng)) for _ in range(n)]


def convex_target(model, rng):
    """A random strictly convex configuration of the linkage."""
    phis = np.linspace(0, TWO_PI, 2048, endpoint=False)
    s = sample_oval(model, phis)
    idx = np.nonzero((s.sign_fx == 1) & (s.sign_fy == 1))[0]
    while True:
        cfg = config_at(model, float(phis[rng.choice(idx)] + rng.uniform(0, TWO_PI / 2048)))
        if classify_quad(cfg) == STRICTLY_CONVEX:
            return cfg


# -- 1 ------------------------------------------------------------------------


def test_ac1_example1_regression(capsys):
    start = time.perf_counter()
    model = build_oval(Linkage(EXAMPLE1_SIDES))
    pts = critical_points(model, EXAMPLE1_T, convention="example1")
    elapsed = time.perf_counter() - start
    problems = []
    if len(pts) != 4:
        problems.append(f"{len(pts)} critical points, expected 4")
    used = set()
    for x0, y0, e0, label in EXAMPLE1_TABLE:
        near = [i for i, p in enumerate(pts) if abs(p.x - x0) <= 0.01 and abs(p.y - y0) <= 0.01]
        if not near:
            problems.append(f"no point near ({x0}, {y0})")
            continue
        p = pts[near[0]]
        used.add(near[0])
        if abs(p.energy - e0) > 0.03:
            problems.append(f"E {p.energy:.3f} vs {e0} at ({x0}, {y0})")
        if p.label != label:
            problems.append(f"type {p.label} vs {label} at ({x0}, {y0})")
    if elapsed >= 1.0:
        problems.append(f"runtime {elapsed:.2f} s")
    found = ", ".join(f"({p.x:.3f}, {p.y:.3f}, E={p.energy:.3f}, {p.label})" for p in pts)
    detail = "table reproduced" if not problems else "; ".join(problems) + f" | found {found}"
    verdict(capsys, 1, not problems, detail)


# -- 2 ------------------------------------------------------------------------


def _y_extremal_phis(model):
    """Angles of the two y-extrema from the folded-triangle construction."""
    a, b, c, d = model.linkage.sides
    out = []
    for y in (max(abs(b - c), abs(a - d)), min(b + c, a + d)):
        # p2 at 0, p4 at y on the axis; one of the two triangles is flat
        u3, u1 = (b * b - c * c + y * y) / (2 * y), (a * a - d * d + y * y) / (2 * y)
        h3 = math.sqrt(max(0.0, b * b - u3 * u3))
        h1 = math.sqrt(max(0.0, a * a - u1 * u1))
        out.append(model.phi_of(math.hypot(u3 - u1, h3 + h1), y))
    return out


def test_ac2_zero_charge_lemma(capsys):
    rng = np.random.default_rng(2)
    worst, bad = 0.0, []
    for k, model in enumerate(models(rng, 100)):
        pts = critical_points(model, 0.0)
        if sorted(p.morse_type for p in pts) != [MAXIMUM, MINIMUM]:
            bad.append(k)
            continue
        y_lo, y_hi = _y_extremal_phis(model)
        by_type = {p.morse_type: p.phi for p in pts}
        # E = 1/y: minimum at max y
        gap = max(angle_gap(by_type[MINIMUM], y_hi), angle_gap(by_type[MAXIMUM], y_lo))
        worst = max(worst, gap)
    ok = not bad and worst < 1e-6
    verdict(capsys, 2, ok, f"100 quads, wrong count/types in {len(bad)}, max |dphi| {worst:.2e}")


# -- 3 ------------------------------------------------------------------------

SWEEP = 10**5
KINDS = (COULOMB, power(0.5), power(2.0))


def _sweep_argmin(phis, e):
    """Sweep argmin refined by the parabola through it and its two neighbors."""
    k = int(np.nanargmin(e))
    n = len(phis)
    lo, mid, hi = e[(k - 1) % n], e[k], e[(k + 1) % n]
    h = TWO_PI / n
    return (phis[k] + 0.5 * h * (lo - hi) / (lo - 2 * mid + hi)) % TWO_PI


@pytest.mark.slow
def test_ac3_convex_uniqueness(capsys):
    rng = np.random.default_rng(3)
    phis = np.linspace(0, TWO_PI, SWEEP, endpoint=False)
    counts = {kind.label(): [0, 0, 0, 0] for kind in KINDS}  # cases, convex!=1, nonconvex, no self-int
    worst = 0.0
    for model in models(rng, 100):
        s = sample_oval(model, phis)
        x, y = s.x, s.y
        for kind in KINDS:
            for t in (0.3, 1.0, 3.0):
                c = counts[kind.label()]
                c[0] += 1
                pts = critical_points(model, t, kind)
                regions = [p.region for p in pts]
                convex = [p for p in pts if p.region == STRICTLY_CONVEX]
                c[1] += len(convex) != 1
                c[2] += NONCONVEX_SIMPLE in regions
                c[3] += SELF_INTERSECTING not in regions
                if len(convex) == 1:
                    qx, qy = quad_weights(t)
                    e = qx * kind.kernel(x) + qy * kind.kernel(y)
                    phi_min = _sweep_argmin(phis, e)
                    worst = max(worst, angle_gap(phi_min, convex[0].phi))
    ok = worst <= 1e-6 and all(c[1] == c[2] == c[3] == 0 for c in counts.values())
    parts = ", ".join(f"{k}: {c[0]} cases, {c[1]}/{c[2]}/{c[3]}" for k, c in counts.items())
    verdict(capsys, 3, ok, f"[bad convex/nonconvex/no-self-int] {parts}; max |dphi| to sweep argmin {worst:.2e}")


# -- 4 ------------------------------------------------------------------------


def test_ac4_round_trips(capsys):
    rng = np.random.default_rng(4)
    worst_t, worst_p = 0.0, 0.0
    for model in models(rng, 100):
        t = float(np.exp(rng.uniform(math.log(0.05), math.log(20.0))))
        worst_t = max(worst_t, abs(stabilize_quad(model, charge_to_minimum(model, t)) - t) / t)
        target = convex_target(model, rng)
        back = charge_to_minimum(model, stabilize_quad(model, target))
        err = math.hypot(back.x - target.x, back.y - target.y) / model.linkage.scale
        worst_p = max(worst_p, err)
    ok = worst_t <= 1e-8 and worst_p <= 1e-6
    verdict(capsys, 4, ok, f"100 cases, max rel t error {worst_t:.2e}, max position error {worst_p:.2e}")


# -- 5 ------------------------------------------------------------------------


def test_ac5_cayley_menger(capsys):
    rng = np.random.default_rng(5)
    worst_rel, worst_planar = 0.0, 0.0
    links = [random_linkage(rng) for _ in range(100)]
    for link in links:
        coef = corrected_cubic(link)
        for x, y in rng.uniform(0.05, 2.2, size=(100, 2)) * link.scale:
            det = cayley_menger(link, x, y)
            ref = max(abs(det), cubic_terms_scale(coef, x * x, y * y))
            worst_rel = max(worst_rel, abs(eval_cubic(coef, x * x, y * y) - det) / ref)
    ovals = [build_oval(link) for link in links]
    for k in range(1000):
        model = ovals[k % 100]
        cfg = config_at(model, float(rng.uniform(0, TWO_PI)))
        v = cfg.vertices
        dist = lambda i, j: float(np.hypot(*(v[j] - v[i])))
        det = cayley_menger_distances(dist(0, 1), dist(1, 2), dist(2, 3), dist(3, 0), dist(0, 2), dist(1, 3))
        # the determinant is homogeneous of degree 6 in length
        worst_planar = max(worst_planar, abs(det) / cfg.linkage.scale**6)
    square = printed_expansion(Linkage((1, 1, 1, 1)), math.sqrt(2), math.sqrt(2))
    square_det = cayley_menger(Linkage((1, 1, 1, 1)), math.sqrt(2), math.sqrt(2))
    ok = worst_rel <= 1e-9 and worst_planar <= 1e-9 and abs(square) > 1 and abs(square_det) <= 1e-12
    verdict(capsys, 5, ok, f"cubic vs det max rel {worst_rel:.2e}; planar |det|/scale^6 max {worst_planar:.2e}; "
                           f"printed expansion at unit square {square:g} (negative control)")



# -- 6 ------------------------------------------------------------------------


def test_ac6_navigation(capsys):
    rng = np.random.default_rng(6)
    worst, failed = 0.0, 0
    for model in models(rng, 100):
        target = convex_target(model, rng)
        start = config_at(model, float(rng.uniform(0, TWO_PI)))
        trace = navigate(model, start, target)
        err = math.hypot(trace.final.x - target.x, trace.final.y - target.y) / model.linkage.scale
        worst = max(worst, err)
        failed += not trace.converged
    # trap: start in the self-intersecting local-minimum basin of the worked example
    model = build_oval(Linkage(EXAMPLE1_SIDES))
    trap = [p for p in critical_points(model, EXAMPLE1_T) if p.morse_type == MINIMUM and not p.is_global_min][0]
    goal = charge_to_minimum(model, EXAMPLE1_T)
    direct = gradient_flow(model, EXAMPLE1_T, trap.phi + 0.02)
    stuck = angle_gap(direct.final_phi, trap.phi) < 1e-6
    rescued = navigate(model, config_at(model, trap.phi + 0.02), goal).final
    escapes = math.hypot(rescued.x - goal.x, rescued.y - goal.y) <= 1e-6 * model.linkage.scale
    ok = worst <= 1e-6 and not failed and stuck and escapes
    verdict(capsys, 6, ok, f"100 navigations, {failed} unconverged, max error {worst:.2e}; "
                           f"single-stage flow stranded at ({trap.x:.4f}, {trap.y:.4f}): {stuck}; "
                           f"two-stage reaches target: {escapes}")


# -- 7 ------------------------------------------------------------------------


def test_ac7_pentagon_stabilizer(capsys):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    tally = dict(signs=0, ac=0, roots=0, cert=0, mirror=0, companion=0)
    names = ("alpha1", "beta1", "gamma1", "alpha2", "beta2", "gamma2")
    nonneg = dict.fromkeys(names, 0)
    worst_cert = worst_mirror = 0.0
    for _ in range(200):
        cfg = random_convex_pentagon(rng)
        partials = diagonal_partials(cfg).as_tuple()
        tally["signs"] += any(v >= 0 for v in partials)
        for name, v in zip(names, partials):
            nonneg[name] += v >= 0
        pair = stabilize_pentagon(cfg)
        tally["ac"] += not pair.A * pair.C < 0
        tally["roots"] += not (pair.s > 0 and pair.t > 0 and pair.s_neg < 0)
        worst_cert = max(worst_cert, pair.certificate)
        tally["cert"] += not pair.certificate <= 1e-6
        m = stabilize_pentagon(mirror_pentagon(cfg))
        dev = max(abs(m.s - pair.t) / pair.t, abs(m.t - pair.s) / pair.s)
        worst_mirror = max(worst_mirror, dev)
        tally["mirror"] += not dev <= 1e-8
        tally["companion"] += not mixed_sign_consistency(cfg).consistent
    golden = (1 + math.sqrt(5)) / 2
    reg = stabilize_pentagon(reconstruct_pentagon(golden, golden))
    reg_ok = abs(reg.s - 1) <= 1e-8 and abs(reg.t - 1) <= 1e-8
    elapsed = time.perf_counter() - start
    ok = not any(tally.values()) and reg_ok and elapsed < 10
    bad = ", ".join(f"{k} {v}/200" for k, v in tally.items() if v) or "none"
    if tally["signs"]:
        bad += " (non-negative: " + ", ".join(f"{k} {v}/200" for k, v in nonneg.items() if v) + ")"
    verdict(capsys, 7, ok, f"failures: {bad}; max certificate {worst_cert:.1e}, max mirror dev "
                           f"{worst_mirror:.1e}, regular ({reg.s:.12f}, {reg.t:.12f}), {elapsed:.1f} s")


# -- 8 ------------------------------------------------------------------------


def test_ac8_boundary_lemma(capsys):
    rng = np.random.default_rng(8)
    worst, bad = -math.inf, 0
    for _ in range(20):
        cfg = random_aligned_pentagon(rng)
        for s, t in np.exp(rng.uniform(math.log(0.05), math.log(20.0), size=(10, 2))):
            d = boundary_descent_check(cfg, float(s), float(t))
            worst = max(worst, d)
            bad += not d < 0
    verdict(capsys, 8, bad == 0, f"200 cases, {bad} non-negative, largest derivative {worst:.3e}")


# -- 9 ------------------------------------------------------------------------


def test_ac9_census(capsys):
    rep = census(uniform_sides(), uniform_charge(), 1000, rng=np.random.default_rng(9))
    summary = rep.summary()
    note = (f"!!! {summary['exceeds_four']} trials exceed 4 critical points !!!"
            if summary["exceeds_four"] else "max <= 4 as expected")
    ok = summary["trials"] + summary["failures"] == 1000
    verdict(capsys, 9, ok, f"histogram {summary['histogram']}, failures {summary['failures']}; {note}")


# -- 10 -----------------------------------------------------------------------


@pytest.mark.slow
def test_ac10_probe(capsys):
    rng = np.random.default_rng(10)
    lower, worst, vacuous = 0, 0.0, 0
    for _ in range(50):
        cfg = random_convex_pentagon(rng)
        pair = stabilize_pentagon(cfg)
        res = global_min_probe(cfg, pair.s, pair.t, 64, rng)
        lower += res.verdict != "no_lower_found"
        vacuous += res.vacuous
        worst = max(worst, res.max_grad_norm)
    ok = lower == 0 and vacuous == 0 and worst <= 1e-6
    verdict(capsys, 10, ok, f"50 certified triples x 64 seeds, {lower} lower found, max descent gradient {worst:.1e}")
