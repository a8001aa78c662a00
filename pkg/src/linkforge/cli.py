"""Command-line front end.

Every report embeds the tool version, the RNG seed and the fully resolved
run spec. Exit codes: 0 success, 1 mismatch, 2 invalid input, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import __version__
from .errors import BoundaryConfiguration, NumericalFailure
from .geometry import (
    Linkage,
    aligned_configurations,
    classify_quad,
    pentagon_from_vertices,
    reconstruct_pentagon,
    reconstruct_quad,
)
from .pentagon_control import global_min_probe, stabilize_pentagon, verify_critical
from .potential import CONVENTIONS, PotentialKind, power
from .quad_control import (
    census,
    charge_to_minimum,
    config_at,
    critical_points,
    navigate,
    stabilize_quad,
    uniform_charge,
    uniform_sides,
)
from .quad_moduli import build_oval, oval_point, sample_oval

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
SEED_ENV = "LINKFORGE_SEED"
SNAP_RTOL = 1e-3
CERTIFICATE_TOL = 1e-6

EXAMPLE1_SIDES = (6.0, 6.5, 6.2, 5.8)
EXAMPLE1_T = 2.0
# (x, y, E, type) as tabulated for the worked example
EXAMPLE1_TABLE = (
    (0.50, 3.24, 2.61, "local min"),
    (4.11, 0.30, 6.90, "global max"),
    (1.24, 0.58, 4.24, "local max"),
    (9.59, 7.60, 0.36, "global min"),
)
EXAMPLE1_XY_TOL = 0.01
EXAMPLE1_E_TOL = 0.03

DEFAULTS = {
    "sides": None,
    "t": None,
    "convention": "eq3",
    "kind": "coulomb",
    "alpha": None,
    "samples": 4096,
    "target": None,
    "target_phi": None,
    "start": None,
    "step": 1e-2,
    "tol": 1e-10,
    "max_iter": 5000,
    "chart": None,
    "branches": "1,1,1",
    "vertices": None,
    "regular": False,
    "s": None,
    "probe_seeds": 64,
    "trials": 1000,
    "t_range": "0,5",
    "side_range": "1,10",
    "format": "json",
    "out": None,
    "seed": None,
}

# options each command reads, in report order
COMMAND_KEYS = {
    "quad critical": ("sides", "t", "convention", "kind", "alpha", "samples"),
    "quad stabilize": ("sides", "target", "target_phi", "convention", "kind", "alpha"),
    "quad navigate": ("sides", "start", "target", "target_phi", "convention", "kind", "alpha", "step", "tol",
                      "max_iter", "samples"),
    "oval trace": ("sides", "samples"),
    "pentagon stabilize": ("chart", "branches", "vertices", "regular"),
    "pentagon verify": ("chart", "branches", "vertices", "regular", "s", "t"),
    "pentagon probe": ("chart", "branches", "vertices", "regular", "s", "t", "probe_seeds"),
    "reproduce-example1": ("convention", "samples"),
    "census": ("trials", "t_range", "side_range", "convention", "kind", "alpha", "samples"),
}
COMMAND_DEFAULTS = {
    "oval trace": {"samples": 512},
    "reproduce-example1": {"convention": "example1"},
}


class InputError(ValueError):
    pass


# -- parsing ------------------------------------------------------------------


def _floats(value, name, count=None):
    if value is None:
        raise InputError(f"--{name.replace('_', '-')} is required")
    if isinstance(value, str):
        parts = [p for p in value.replace(";", ",").split(",") if p.strip()]
    elif isinstance(value, (int, float)):
        parts = [value]
    else:
        parts = list(value)
    try:
        out = tuple(float(p) for p in parts)
    except (TypeError, ValueError) as exc:
        raise InputError(f"--{name}: cannot parse {value!r} as numbers") from exc
    if count is not None and len(out) not in ((count,) if isinstance(count, int) else count):
        raise InputError(f"--{name}: expected {count} values, got {len(out)}")
    if not all(math.isfinite(v) for v in out):
        raise InputError(f"--{name}: values must be finite")
    return out


def _float(value, name):
    return _floats(value, name, 1)[0]


def _kind(spec) -> PotentialKind:
    name = spec.get("kind") or "coulomb"
    alpha = spec.get("alpha")
    if alpha is not None and name == "coulomb":
        name = "alpha"
    if name == "alpha":
        return power(_float(alpha if alpha is not None else 1.0, "alpha"))
    return PotentialKind(name)


def _linkage(spec, n=4) -> Linkage:
    return Linkage(_floats(spec.get("sides"), "sides", n))


def _resolve_seed(cli_seed, file_seed) -> int:
    for source, value in (("--seed", cli_seed), ("spec file", file_seed),
                          (SEED_ENV, os.environ.get(SEED_ENV))):
        if value is None or value == "":
            continue
        try:
            seed = int(value)
        except (TypeError, ValueError) as exc:
            raise InputError(f"{source}: seed must be an integer, got {value!r}") from exc
        if seed < 0:
            raise InputError(f"{source}: seed must be nonnegative")
        return seed
    return int(np.random.SeedSequence().entropy % (2**63))


def resolve_spec(command: str, args: argparse.Namespace) -> dict:
    """Merge built-in defaults, the --spec file and explicit flags (in that order)."""
    file_spec = {}
    if args.spec:
        try:
            file_spec = json.loads(Path(args.spec).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read spec file {args.spec}: {exc}") from exc
        if not isinstance(file_spec, dict):
            raise InputError("spec file must hold a JSON object")
        file_spec = {k.replace("-", "_"): v for k, v in file_spec.items()}
        unknown = set(file_spec) - set(DEFAULTS) - {"command"}
        if unknown:
            raise InputError(f"unknown spec keys: {sorted(unknown)}")
    defaults = {**DEFAULTS, **COMMAND_DEFAULTS.get(command, {})}
    resolved = {}
    for key in COMMAND_KEYS[command] + ("format", "out"):
        flag = getattr(args, key, None)
        if flag is not None and flag is not False:
            resolved[key] = flag
        elif key in file_spec:
            resolved[key] = file_spec[key]
        else:
            resolved[key] = defaults[key]
    resolved["seed"] = _resolve_seed(args.seed, file_spec.get("seed"))
    if resolved["format"] not in ("json", "csv"):
        raise InputError(f"unknown format {resolved['format']!r}")
    if "convention" in resolved and resolved["convention"] not in CONVENTIONS:
        raise InputError(f"unknown convention {resolved['convention']!r}")
    return resolved


# -- output -------------------------------------------------------------------


def _plain(value):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    return value


def _header(command, spec):
    return {"tool": "linkforge", "version": __version__, "command": command,
            "seed": spec["seed"], "spec": _plain(spec)}


def render_json(command, spec, payload) -> str:
    doc = {**_header(command, spec), "result": _plain(payload)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def render_csv(command, spec, columns, rows) -> str:
    buf = io.StringIO()
    head = _header(command, spec)
    buf.write(f"# linkforge {head['version']} {command}\n")
    buf.write(f"# seed={head['seed']}\n")
    buf.write(f"# spec={json.dumps(head['spec'], sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row[c]) for c in columns])
    return buf.getvalue()


def _csv_cell(value):
    value = _plain(value)
    if isinstance(value, list):
        return ";".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return value


def emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


class Report:
    """Structured payload plus an optional tabular view for CSV."""

    def __init__(self, payload, columns=None, rows=None, code=EXIT_OK):
        self.payload, self.columns, self.rows, self.code = payload, columns, rows, code


# -- quad commands ------------------------------------------------------------


CRIT_COLUMNS = ("phi", "x", "y", "E", "type", "label", "region", "sgn_Fx", "sgn_Fy")


def cmd_quad_critical(spec, rng) -> Report:
    link = _linkage(spec)
    t = _float(spec["t"], "t")
    samples = int(spec["samples"])
    if samples < 8:
        raise InputError("--samples must be at least 8")
    model = build_oval(link)
    pts = critical_points(model, t, _kind(spec), spec["convention"], samples)
    rows = [p.as_dict() for p in pts]
    return Report({"count": len(rows), "critical_points": rows}, CRIT_COLUMNS, rows)


def _snap(model, value, name):
    """The oval point on the polar ray through a user-given (x, y)."""
    x, y = _floats(value, name, 2)
    if x <= 0 or y <= 0:
        raise InputError(f"--{name}: diagonals must be positive")
    phi = model.phi_of(x, y)
    p = oval_point(model, phi)
    dist = math.hypot(p.x - x, p.y - y)
    if dist > SNAP_RTOL * model.linkage.scale:
        raise InputError(f"--{name}: ({x}, {y}) is {dist:.3g} away from the moduli curve")
    return phi, dist


def _target(model, spec):
    """Target configuration from --target-phi, --target x,y or --target xmax|ymax."""
    if spec.get("target_phi") is not None:
        phi = _float(spec["target_phi"], "target_phi") % (2 * math.pi)
        return config_at(model, phi), phi, 0.0
    target = spec.get("target")
    if target in ("xmax", "ymax"):
        x_max, y_max = aligned_configurations(model.linkage)
        cfg = (x_max if target == "xmax" else y_max)[0]
        return cfg, model.phi_of(cfg.x, cfg.y), 0.0
    phi, dist = _snap(model, target, "target")
    return config_at(model, phi), phi, dist


def cmd_quad_stabilize(spec, rng) -> Report:
    link = _linkage(spec)
    model = build_oval(link)
    target, phi, dist = _target(model, spec)
    region = classify_quad(target)
    try:
        t = stabilize_quad(model, target, spec["convention"], _kind(spec))
        boundary = False
    except BoundaryConfiguration as exc:
        t, boundary = exc.limit, True
    payload = {"t": t, "boundary": boundary, "region": region, "phi": phi,
               "x": target.x, "y": target.y, "snap_distance": dist}
    return Report(payload, ("t", "boundary", "region", "phi", "x", "y"), [payload])


def cmd_quad_navigate(spec, rng) -> Report:
    link = _linkage(spec)
    model = build_oval(link)
    kind, conv = _kind(spec), spec["convention"]
    if spec.get("start") is not None:
        start_phi, _ = _snap(model, spec["start"], "start")
    else:
        start_phi = float(rng.uniform(0.0, 2 * math.pi))
    if spec.get("target") is not None or spec.get("target_phi") is not None:
        target = _target(model, spec)[0]
    else:
        t_goal = float(rng.uniform(0.1, 10.0))
        target = charge_to_minimum(model, t_goal, kind, conv, int(spec["samples"]))
    start = config_at(model, start_phi)
    trace = navigate(model, start, target, float(spec["step"]), float(spec["tol"]),
                     int(spec["max_iter"]), kind, conv)
    err = math.hypot(trace.final.x - target.x, trace.final.y - target.y) / link.scale
    rows = []
    for k, stage in enumerate(trace.stages, start=1):
        for i, (phi, x, y, e) in enumerate(stage.iterates):
            rows.append({"stage": k, "t": stage.t, "iter": i, "phi": phi, "x": x, "y": y, "E": e})
    payload = {
        "converged": trace.converged,
        "start": {"x": start.x, "y": start.y},
        "target": {"x": target.x, "y": target.y},
        "final": {"x": trace.final.x, "y": trace.final.y},
        "relative_error": err,
        "stages": [{"t": s.t, "converged": s.converged, "steps": s.steps,
                    "final_phi": s.final_phi} for s in trace.stages],
        "iterates": rows,
    }
    code = EXIT_OK if trace.converged else EXIT_NUMERIC
    return Report(payload, ("stage", "t", "iter", "phi", "x", "y", "E"), rows, code)


TRACE_COLUMNS = ("phi", "w", "z", "x", "y", "sgn_Fx", "sgn_Fy", "region", "g_residual")


def cmd_oval_trace(spec, rng) -> Report:
    link = _linkage(spec)
    n = int(spec["samples"])
    if n < 4:
        raise InputError("--samples must be at least 4")
    model = build_oval(link)
    phis = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    s = sample_oval(model, phis)
    resid = np.abs(model.g(s.w, s.z)) / model.terms_scale(s.w, s.z)
    rows = []
    for i in range(n):
        x, y = float(s.x[i]), float(s.y[i])
        region = classify_quad(reconstruct_quad(link, x, y))
        rows.append({"phi": float(phis[i]), "w": float(s.w[i]), "z": float(s.z[i]), "x": x, "y": y,
                     "sgn_Fx": int(s.sign_fx[i]), "sgn_Fy": int(s.sign_fy[i]), "region": region,
                     "g_residual": float(resid[i])})
    payload = {"box": {"x": link.x_range(), "y": link.y_range()},
               "max_g_residual": float(resid.max()), "rows": rows}
    return Report(payload, TRACE_COLUMNS, rows)


# -- pentagon commands --------------------------------------------------------


def _pentagon(spec):
    if spec.get("regular"):
        phi = (1 + math.sqrt(5.0)) / 2
        return reconstruct_pentagon(phi, phi)
    if spec.get("vertices") is not None:
        raw = spec["vertices"]
        try:
            pts = np.asarray(json.loads(raw) if isinstance(raw, str) else raw, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InputError(f"--vertices: cannot parse {raw!r}") from exc
        if pts.shape != (5, 2):
            raise InputError("--vertices: expected five (x, y) points")
        sides = np.linalg.norm(pts - np.roll(pts, -1, axis=0), axis=1)
        if np.ptp(sides) > 1e-9 * sides.max():
            raise InputError("--vertices: pentagon is not equilateral")
        return pentagon_from_vertices(pts)
    if spec.get("chart") is None:
        raise InputError("give --chart x13,x35, --vertices or --regular")
    x13, x35 = _floats(spec["chart"], "chart", 2)
    branches = tuple(int(b) for b in _floats(spec["branches"], "branches", 3))
    if any(b not in (1, -1) for b in branches):
        raise InputError("--branches: entries must be +1 or -1")
    return reconstruct_pentagon(x13, x35, branches)


def _pentagon_summary(cfg):
    return {"chart": cfg.chart, "branches": cfg.branches, "diagonals": cfg.diagonals,
            "vertices": np.asarray(cfg.vertices).tolist()}


def cmd_pentagon_stabilize(spec, rng) -> Report:
    cfg = _pentagon(spec)
    pair = stabilize_pentagon(cfg)
    payload = {"s": pair.s, "t": pair.t, "A": pair.A, "B": pair.B, "C": pair.C,
               "s_neg": pair.s_neg, "t_neg": pair.t_neg, "certificate": pair.certificate,
               "config": _pentagon_summary(cfg)}
    cols = ("s", "t", "A", "B", "C", "s_neg", "t_neg", "certificate")
    return Report(payload, cols, [payload])


def cmd_pentagon_verify(spec, rng) -> Report:
    cfg = _pentagon(spec)
    s, t = _float(spec["s"], "s"), _float(spec["t"], "t")
    norm = verify_critical(cfg, s, t)
    payload = {"s": s, "t": t, "gradient_norm": norm, "critical": norm <= CERTIFICATE_TOL,
               "config": _pentagon_summary(cfg)}
    code = EXIT_OK if payload["critical"] else EXIT_MISMATCH
    return Report(payload, ("s", "t", "gradient_norm", "critical"), [payload], code)


def cmd_pentagon_probe(spec, rng) -> Report:
    cfg = _pentagon(spec)
    if spec.get("s") is None and spec.get("t") is None:
        pair = stabilize_pentagon(cfg)
        s, t = pair.s, pair.t
    else:
        s, t = _float(spec["s"], "s"), _float(spec["t"], "t")
    seeds = int(spec["probe_seeds"])
    if seeds < 0:
        raise InputError("--probe-seeds must be nonnegative")
    res = global_min_probe(cfg, s, t, seeds, rng)
    payload = {"verdict": res.verdict, "vacuous": res.vacuous, "s": s, "t": t,
               "reference_energy": res.reference_energy, "best_energy": res.best_energy,
               "max_grad_norm": res.max_grad_norm, "descents": res.descents,
               "witness": _pentagon_summary(res.witness) if res.witness else None}
    cols = ("seed", "branches", "energy", "grad_norm", "feasibility", "success")
    return Report(payload, cols, res.descents)


# -- example and census -------------------------------------------------------


def example1_comparison(convention="example1", samples=4096):
    """Critical points of the worked example matched against the tabulated values."""
    model = build_oval(Linkage(EXAMPLE1_SIDES))
    pts = critical_points(model, EXAMPLE1_T, convention=convention, samples=samples)
    rows, ok = [], len(pts) == len(EXAMPLE1_TABLE)
    pairing = {}
    if pts:
        cost = np.array([[math.hypot(p.x - r[0], p.y - r[1]) for p in pts] for r in EXAMPLE1_TABLE])
        pairing = dict(zip(*linear_sum_assignment(cost)))
    for i, (x0, y0, e0, label) in enumerate(EXAMPLE1_TABLE):
        ref = {"x_ref": x0, "y_ref": y0, "E_ref": e0, "type_ref": label}
        if i not in pairing:
            rows.append({**ref, "match": False})
            ok = False
            continue
        p = pts[pairing[i]]
        dx, dy, de = p.x - x0, p.y - y0, p.energy - e0
        match = (abs(dx) <= EXAMPLE1_XY_TOL and abs(dy) <= EXAMPLE1_XY_TOL
                 and abs(de) <= EXAMPLE1_E_TOL and p.label == label)
        ok &= match
        rows.append({**ref, "x": p.x, "y": p.y, "E": p.energy, "type": p.label,
                     "dx": dx, "dy": dy, "dE": de, "match": match})
    return ok, pts, rows


def cmd_reproduce_example1(spec, rng) -> Report:
    ok, pts, rows = example1_comparison(spec["convention"], int(spec["samples"]))
    payload = {"match": ok, "count": len(pts), "expected_count": len(EXAMPLE1_TABLE),
               "rows": rows, "critical_points": [p.as_dict() for p in pts]}
    cols = ("x_ref", "y_ref", "E_ref", "type_ref", "x", "y", "E", "type", "dx", "dy", "dE", "match")
    full = [{c: r.get(c, "") for c in cols} for r in rows]
    return Report(payload, cols, full, EXIT_OK if ok else EXIT_MISMATCH)


CENSUS_COLUMNS = ("trial", "sides", "t", "count", "types")


def cmd_census(spec, rng) -> Report:
    trials = int(spec["trials"])
    if trials < 0:
        raise InputError("--trials must be nonnegative")
    t_lo, t_hi = _floats(spec["t_range"], "t_range", 2)
    s_lo, s_hi = _floats(spec["side_range"], "side_range", 2)
    if not (0 < s_lo < s_hi) or not t_lo < t_hi:
        raise InputError("ranges must be increasing (and sides positive)")
    rep = census(uniform_sides(s_lo, s_hi), uniform_charge(t_lo, t_hi), trials, _kind(spec),
                 rng, spec["convention"], int(spec["samples"]))
    summary = rep.summary()
    if rep.exceedances:
        sys.stderr.write(f"WARNING: {len(rep.exceedances)} trial(s) exceed four critical points\n")
    return Report({"summary": summary, "trials": rep.trials, "failures": rep.failures},
                  CENSUS_COLUMNS, rep.trials)


COMMANDS = {
    "quad critical": cmd_quad_critical,
    "quad stabilize": cmd_quad_stabilize,
    "quad navigate": cmd_quad_navigate,
    "oval trace": cmd_oval_trace,
    "pentagon stabilize": cmd_pentagon_stabilize,
    "pentagon verify": cmd_pentagon_verify,
    "pentagon probe": cmd_pentagon_probe,
    "reproduce-example1": cmd_reproduce_example1,
    "census": cmd_census,
}


# -- argparse -----------------------------------------------------------------


def _common(p):
    p.add_argument("--spec", help="JSON file with run options (flags override it)")
    p.add_argument("--seed", help=f"RNG seed (falls back to ${SEED_ENV})")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out", help="output path (default stdout)")


def _quad_opts(p, t=True):
    p.add_argument("--sides", help="four side lengths a,b,c,d")
    if t:
        p.add_argument("--t", type=float, help="controlling charge")
    p.add_argument("--convention", choices=sorted(CONVENTIONS),
                   help="eq3: t at vertex 1 (E = t/x + 1/y); example1: t at vertex 2")
    p.add_argument("--kind", choices=("coulomb", "alpha", "log"))
    p.add_argument("--alpha", type=float, help="exponent of the power-law kernel")
    p.add_argument("--samples", type=int, help="bracketing grid size")


def _pentagon_opts(p, charges):
    p.add_argument("--chart", help="diagonals x13,x35 (unit sides)")
    p.add_argument("--branches", help="branch signs of the chart, e.g. 1,1,1")
    p.add_argument("--vertices", help="JSON list of five points")
    p.add_argument("--regular", action="store_true", help="use the regular pentagon")
    if charges:
        p.add_argument("--s", type=float, help="charge at vertex 5")
        p.add_argument("--t", type=float, help="charge at vertex 3")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linkforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"linkforge {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    top = parser.add_subparsers(dest="group", required=True)

    quad = top.add_parser("quad", help="4-bar linkage solvers").add_subparsers(dest="action", required=True)
    p = quad.add_parser("critical", help="list critical points of E")
    _quad_opts(p)
    _common(p)
    p = quad.add_parser("stabilize", help="charge making a convex target the minimum")
    _quad_opts(p, t=False)
    p.add_argument("--target", help="target diagonals x,y (snapped to the curve), or xmax|ymax")
    p.add_argument("--target-phi", type=float, help="target as an oval angle")
    _common(p)
    p = quad.add_parser("navigate", help="two-stage flow from start to a convex target")
    _quad_opts(p, t=False)
    p.add_argument("--start", help="start diagonals x,y (random if omitted)")
    p.add_argument("--target", help="target diagonals x,y (random convex if omitted)")
    p.add_argument("--target-phi", type=float, help="target as an oval angle")
    p.add_argument("--step", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    _common(p)

    oval = top.add_parser("oval", help="moduli curve data").add_subparsers(dest="action", required=True)
    p = oval.add_parser("trace", help="sample the oval as plot-ready rows")
    p.add_argument("--sides")
    p.add_argument("--samples", type=int)
    _common(p)

    pent = top.add_parser("pentagon", help="equilateral pentagon control").add_subparsers(
        dest="action", required=True)
    p = pent.add_parser("stabilize", help="the unique positive (s, t)")
    _pentagon_opts(p, charges=False)
    _common(p)
    p = pent.add_parser("verify", help="gradient certificate for given (s, t)")
    _pentagon_opts(p, charges=True)
    _common(p)
    p = pent.add_parser("probe", help="multi-start search for lower minima")
    _pentagon_opts(p, charges=True)
    p.add_argument("--probe-seeds", type=int)
    _common(p)

    p = top.add_parser("reproduce-example1", help="regression against the worked 4-bar example")
    p.add_argument("--convention", choices=sorted(CONVENTIONS))
    p.add_argument("--samples", type=int)
    _common(p)

    p = top.add_parser("census", help="count critical points over random quads")
    p.add_argument("--trials", type=int)
    p.add_argument("--t-range", help="charge range lo,hi")
    p.add_argument("--side-range", help="side range lo,hi")
    p.add_argument("--convention", choices=sorted(CONVENTIONS))
    p.add_argument("--kind", choices=("coulomb", "alpha", "log"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--samples", type=int)
    _common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    action = getattr(args, "action", None)
    command = args.group if action is None else f"{args.group} {action}"
    try:
        spec = resolve_spec(command, args)
        rng = np.random.default_rng(spec["seed"])
        report = COMMANDS[command](spec, rng)
        if spec["format"] == "csv":
            text = render_csv(command, spec, report.columns, report.rows)
        else:
            text = render_json(command, spec, report.payload)
        emit(text, spec["out"])
        if command == "census" and spec["format"] == "csv":
            summary = render_json(command, spec, report.payload["summary"])
            if spec["out"]:
                Path(f"{spec['out']}.summary.json").write_text(summary)
            else:
                sys.stderr.write(summary)
        return report.code
    except BrokenPipeError:
        return EXIT_OK
    except NumericalFailure as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INPUT
    except RuntimeError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
