"""Command line experiments: triangle holonomy, subdivision audit, theorem check.

Exit codes: 0 success, 2 invalid input, 3 acceptance failure.
"""

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import curves, disks, hyperbolic, lift, lorentz, subdivision
from .errors import HolonomyLabError

EXIT_OK, EXIT_INVALID, EXIT_FAIL = 0, 2, 3

DEFAULTS = {
    "dim": 2,
    "depth": 3,
    "disk": "geodesic-disk",
    "radius": 0.8,
    "amplitude": 0.2,
    "frequency": 2.0,
    "tilt": 0.6,
    "step": 1e-3,
    "tol": 1e-6,
    "out": None,
    "seed": 0,
    "orientation": 1,
    "vertices": "0,0.5;0.7,0",
    "random": False,
    "corrupt": False,
}
TYPES = {"dim": int, "depth": int, "radius": float, "amplitude": float, "frequency": float,
         "tilt": float, "step": float, "tol": float, "seed": int, "orientation": int,
         "disk": str, "out": str, "vertices": str, "random": bool, "corrupt": bool}


class ValidationError(Exception):
    pass


def read_config(path: str) -> dict:
    """key = value lines; '#' starts a comment; [sections] are ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in TYPES:
            raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
        val = val.strip("\"'")
        try:
            if TYPES[key] is bool:
                out[key] = val.lower() in ("1", "true", "yes", "on")
            else:
                out[key] = TYPES[key](val)
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: bad value for {key}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags take precedence")
    common.add_argument("--dim", type=int, help="n of H^n (2..4)")
    common.add_argument("--depth", type=int, help="subdivision depth (0..4)")
    common.add_argument("--disk", choices=disks.FAMILIES)
    common.add_argument("--radius", type=float)
    common.add_argument("--amplitude", type=float)
    common.add_argument("--frequency", type=float)
    common.add_argument("--tilt", type=float)
    common.add_argument("--step", type=float, help="lift step in arc length")
    common.add_argument("--tol", type=float)
    common.add_argument("--out", help="directory for report files")
    common.add_argument("--seed", type=int)
    common.add_argument("--orientation", type=int, choices=(1, -1))

    p = argparse.ArgumentParser(prog="holonomy-lab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    t = sub.add_parser("triangle-holonomy", parents=[common],
                       help="holonomy of a geodesic triangle vs the angle-defect formula")
    t.add_argument("--vertices", help="'x1,x2;y1,y2': slice coordinates of the 2nd and 3rd "
                                      "vertex, the 1st being e-bar")
    t.add_argument("--random", action="store_true", default=None,
                   help="draw the triangle from --seed instead")
    a = sub.add_parser("subdivision-audit", parents=[common], help="check Properties 1-4")
    a.add_argument("--corrupt", action="store_true", default=None,
                   help="swap two entries of the deepest level (fault injection)")
    sub.add_parser("theorem", parents=[common], help="length/area and endpoint/holonomy table")
    return p


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        cfg.update(read_config(args.config))
    for k in TYPES:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    cfg["command"] = args.command
    if not 2 <= cfg["dim"] <= 4:
        raise ValidationError("dim must be in 2..4")
    if not 0 <= cfg["depth"] <= subdivision.MAX_DEPTH:
        raise ValidationError(f"depth must be in 0..{subdivision.MAX_DEPTH}")
    for key in ("step", "tol", "radius"):
        if not cfg[key] > 0:
            raise ValidationError(f"{key} must be positive")
    if cfg["step"] > 0.1:
        raise ValidationError("step must not exceed 0.1")
    if cfg["orientation"] not in (1, -1):
        raise ValidationError("orientation must be 1 or -1")
    if cfg["disk"] not in disks.FAMILIES:
        raise ValidationError(f"unknown disk {cfg['disk']!r}")
    threads = os.environ.get("HOLONOMY_LAB_THREADS", "1")
    try:
        cfg["threads"] = int(threads)
    except ValueError as exc:
        raise ValidationError("HOLONOMY_LAB_THREADS must be a positive integer") from exc
    if cfg["threads"] < 1:
        raise ValidationError("HOLONOMY_LAB_THREADS must be a positive integer")
    return cfg


def _slice_point(xy, n):
    w = np.zeros(n)
    w[:2] = xy
    return hyperbolic.lift_spatial(w)


def _triangle_vertices(cfg) -> np.ndarray:
    n = cfg["dim"]
    if cfg["random"]:
        rng = np.random.default_rng(cfg["seed"])
        pts = [hyperbolic.basepoint(n)]
        for _ in range(2):
            r, th = rng.uniform(0.2, 2.0), rng.uniform(0, 2 * np.pi)
            pts.append(_slice_point(np.sinh(r) * np.array([np.cos(th), np.sin(th)]), n))
        return np.array(pts)
    try:
        pairs = [[float(c) for c in part.split(",")] for part in cfg["vertices"].split(";")]
    except ValueError as exc:
        raise ValidationError("vertices must look like 'x1,x2;y1,y2'") from exc
    if len(pairs) != 2 or any(len(p) != 2 for p in pairs):
        raise ValidationError("vertices must give two points with two coordinates each")
    return np.array([hyperbolic.basepoint(n)] + [_slice_point(p, n) for p in pairs])


def cmd_triangle_holonomy(cfg) -> tuple[dict, int]:
    a, b, c = _triangle_vertices(cfg)
    if cfg["orientation"] == -1:
        b, c = c, b
    tri = hyperbolic.totally_geodesic_triangle(a, b, c)
    angles = hyperbolic.vertex_angles(tri)
    area = hyperbolic.triangle_area(tri)
    delta = int(np.sign(angles[0]))
    loop = lift.PiecewisePath.geodesic_polygon([a, b, c, a])
    k = lift.holonomy(loop, np.eye(cfg["dim"] + 1), step=cfg["step"])
    closed = lorentz.psi(delta * area, cfg["dim"])
    dist = float(np.max(np.abs(k - closed)))
    report = {
        "angles": [float(x) for x in angles],
        "area": area,
        "delta": delta,
        "holonomy": k.tolist(),
        "closed_form": closed.tolist(),
        "distance_inf": dist,
        "pass": dist < cfg["tol"],
    }
    return report, EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_subdivision_audit(cfg) -> tuple[dict, int]:
    depth, orient = cfg["depth"], cfg["orientation"]
    levels = [subdivision.build_level(n, orient) for n in range(depth + 1)]
    if cfg["corrupt"]:
        # the first two triangles: the only one leaving the basepoint moves
        if len(levels[-1]) > 1:
            levels[-1] = levels[-1].with_swapped(0, 1)

    def audit(n):
        return subdivision.verify_properties(levels[n], levels[n - 1] if n else None)

    with ThreadPoolExecutor(max_workers=cfg["threads"]) as pool:
        reports = list(pool.map(audit, range(depth + 1)))
    rows = []
    for n, rep in enumerate(reports):
        expected = subdivision.grid_interval_count(n)
        rows.append({"n": n, "count": rep["count"], "expected_count": expected,
                     "ok": rep["ok"] and rep["count"] == expected,
                     "violations": rep["violations"]})
    report = {"levels": rows, "pass": all(r["ok"] for r in rows),
              "triangles": levels[-1].to_records()}
    if cfg["out"]:
        out = Path(cfg["out"])
        for lev in levels:
            (out / f"level_{lev.n}.json").write_text(lev.to_json(indent=1))
    return report, EXIT_OK if report["pass"] else EXIT_FAIL


def _convergence_csv(rows) -> str:
    keys = ["n", "triangles", "pleated_area", "length", "length_residual", "area_gap",
            "relative_area_gap", "holonomy_distance", "cauchy", "direction_angle"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for r in rows:
        w.writerow(["" if r.get(k) is None else repr(r[k]) for k in keys])
    return buf.getvalue()


def theorem_verdict(report: dict, benchmark_tol: float = 1e-3) -> dict:
    rows = report["rows"]
    last = rows[-1]
    checks = {"length_residual": all(r["length_residual"] < 1e-9 for r in rows)}
    hd = [r["holonomy_distance"] for r in rows]
    checks["holonomy_distance_decreasing"] = all(b < a for a, b in zip(hd, hd[1:]))
    cauchy = [r["cauchy"] for r in rows if r["cauchy"] is not None]
    checks["cauchy_decreasing"] = all(b < a for a, b in zip(cauchy, cauchy[1:]))
    if last["n"] >= 3:
        checks["relative_area_gap_below_2pct"] = last["relative_area_gap"] < 0.02
        checks["holonomy_distance_below_1e-2"] = last["holonomy_distance"] < 1e-2
        if report["disk"] == "geodesic-disk":
            r = report["params"]["radius"]
            target = lorentz.psi(report["orientation"] * 2 * np.pi * (np.cosh(r) - 1),
                                 report["dim"])
            d = curves.group_dist(np.array(last["endpoint"]), target)
            report["benchmark_distance"] = d
            checks["endpoint_matches_disk_area"] = d < benchmark_tol
    return checks


def cmd_theorem(cfg) -> tuple[dict, int]:
    disk = disks.make_disk(cfg["disk"], cfg["dim"], cfg["radius"], cfg["amplitude"],
                           cfg["tilt"], cfg["frequency"])
    report = curves.theorem_check(disk, cfg["depth"], cfg["orientation"], cfg["step"])
    checks = theorem_verdict(report)
    report["checks"] = checks
    report["pass"] = all(checks.values())
    if cfg["out"]:
        out = Path(cfg["out"])
        (out / "convergence.csv").write_text(_convergence_csv(report["rows"]))
        depth = report["rows"][-1]["n"]
        fiber = curves.build_fiber_curve(depth, subdivision.build_level(depth, cfg["orientation"]),
                                         disk)
        (out / "fiber.json").write_text(fiber.to_json(indent=1, sort_keys=True))
        (out / "f_samples.csv").write_text(fiber.samples_csv())
    return report, EXIT_OK if report["pass"] else EXIT_FAIL


COMMANDS = {"triangle-holonomy": cmd_triangle_holonomy,
            "subdivision-audit": cmd_subdivision_audit,
            "theorem": cmd_theorem}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        cfg = resolve(args)
        if cfg["out"]:
            Path(cfg["out"]).mkdir(parents=True, exist_ok=True)
        report, code = COMMANDS[cfg["command"]](cfg)
    except (ValidationError, HolonomyLabError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_INVALID
    doc = {"command": cfg["command"],
           "config": {k: cfg[k] for k in sorted(cfg) if k != "command"},
           "report": report,
           "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    text = json.dumps(_clean(doc), indent=1, sort_keys=True)
    if cfg["out"]:
        (Path(cfg["out"]) / "report.json").write_text(text + "\n")
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
