"""Acceptance suite: one PASS/FAIL line per criterion, thresholds fixed below."""

import time

import numpy as np
import pytest

from holonomy_lab import curves as cv
from holonomy_lab import hyperbolic as hy
from holonomy_lab import lift
from holonomy_lab import lorentz as lz
from holonomy_lab import subdivision as sd
from holonomy_lab.disks import bumped_disk, geodesic_disk
from holonomy_lab.paths import PiecewisePath

from oracles import klein_area, polar_point

SEED = 7
LEMMA_TOL, LEMMA_STEP, LEMMA_SECONDS = 1e-6, 1e-3, 10.0
AREA_REL = 1e-5
GEO_TOL, BRACKET_TOL, AD_TOL = 1e-8, 1e-12, 1e-12
RHO_SLACK, LINEAR_SLACK = 1e-9, 1.1
AUDIT_SECONDS = 30.0
FIBER_TOL = 1e-5
LENGTH_TOL, AREA_GAP, HOLONOMY_TOL, BENCH_TOL = 1e-9, 0.02, 1e-2, 1e-3
ANGLE_REPORT = 0.2
RADIUS = 0.8


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok
    return emit


@pytest.fixture(scope="module")
def theorem():
    return cv.theorem_check(geodesic_disk(RADIUS), 3)


def _triangle_in_slice(rng, n):
    while True:
        pts = [polar_point(rng.uniform(0.05, 1.0), rng.uniform(0, 2 * np.pi), n) for _ in range(3)]
        if hy.robust_area(*pts) > 1e-3:
            return pts


def test_1_triangle_lemma(report):
    rng = np.random.default_rng(SEED)
    t0, worst, deltas = time.perf_counter(), 0.0, set()
    for i in range(50):
        n = 2 if i % 2 == 0 else 3
        a, b, c = _triangle_in_slice(rng, n)
        assert max(hy.distance(a, b), hy.distance(b, c), hy.distance(c, a)) <= 2.0
        tri = hy.totally_geodesic_triangle(a, b, c)
        delta = int(np.sign(hy.vertex_angles(tri)[0]))
        deltas.add(delta)
        loop = PiecewisePath.geodesic_polygon([a, b, c, a])
        k = lift.holonomy(loop, lift.cartan_section(a), step=LEMMA_STEP)
        worst = max(worst, float(np.max(np.abs(k - lz.psi(delta * hy.triangle_area(tri), n)))))
    elapsed = time.perf_counter() - t0
    ok = worst < LEMMA_TOL and elapsed < LEMMA_SECONDS and deltas == {1, -1}
    report("criterion 1 (triangle holonomy lemma)", ok,
           f"max |k - Psi|_inf = {worst:.2e} < {LEMMA_TOL:g}, {elapsed:.2f} s < {LEMMA_SECONDS:g} s")
    assert ok


def test_2_area_angle_defect(report):
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(20):
        pts = _triangle_in_slice(rng, 2)
        got = hy.triangle_area(hy.totally_geodesic_triangle(*pts))
        want = klein_area(*pts)
        worst = max(worst, abs(got - want) / want)
    ok = worst < AREA_REL
    report("criterion 2 (area = angle defect)", ok, f"max relative error {worst:.2e} < {AREA_REL:g}")
    assert ok


def test_3_lie_identities(report):
    rng = np.random.default_rng(SEED + 2)
    f1 = f2 = f2c = f4 = 0.0
    for i in range(100):
        n = 2 + i % 3
        ebar = hy.basepoint(n)
        u = rng.standard_normal(n)
        x = lz.boost(u / np.linalg.norm(u))
        t = rng.uniform(0.1, 2.0)
        curve = PiecewisePath.geodesic_polygon([ebar, lz.exp_map(t * x) @ ebar])
        res = lift.horizontal_lift(curve, np.eye(n + 1), refine=False)
        s = np.linspace(0, 1, 5)
        want = np.array([lz.exp_map(v * t * x) for v in s])
        f1 = max(f1, float(np.max(np.abs(res(s) - want))))

        y = lz.boost(rng.standard_normal(n))
        f2 = max(f2, lz.algebra_norm(lz.horizontal_part(lz.bracket(x, y))))
        f2c = max(f2c, max(lz.so12_subalgebra(x, y).residual(lz.bracket(a, b))
                           for a in lz.so12_subalgebra(x, y) for b in lz.so12_subalgebra(x, y)))

        w = lz.vertical_part(rng.standard_normal((n + 1, n + 1)))
        k = lz.exp_map(w - w.T)
        a = lz.boost(rng.standard_normal(n)) + lz.vertical_part(rng.standard_normal((n + 1, n + 1)))
        a = 0.5 * (a - lz.minkowski(n) @ a.T @ lz.minkowski(n))
        f4 = max(f4, abs(lz.algebra_norm(lz.adjoint(k, a)) - lz.algebra_norm(a)))
    ok = f1 < GEO_TOL and f2 < BRACKET_TOL and f2c < BRACKET_TOL and f4 < AD_TOL
    report("criterion 3 (lift of exp geodesics, bracket closure, Ad isometry)", ok,
           f"geodesic lift {f1:.1e} < {GEO_TOL:g}; bracket horizontal part {f2:.1e}, "
           f"closure {f2c:.1e} < {BRACKET_TOL:g}; Ad isometry {f4:.1e} < {AD_TOL:g}")
    assert ok


def _random_loop(rng, n=3):
    pts = [hy.lift_spatial(0.8 * rng.standard_normal(n)) for _ in range(3)]
    return PiecewisePath.geodesic_polygon(pts + [pts[0]])


def test_4_contraction_and_continuity(report):
    rng = np.random.default_rng(SEED + 3)
    worst_margin, worst_ratio = -np.inf, 0.0
    for _ in range(30):
        loop = _random_loop(rng)
        xi = rng.standard_normal(3)
        pert = lift.perturbed_curve(loop, rng.uniform(0.01, 0.3), xi / np.linalg.norm(xi))
        base = lift._as_function_path(loop)
        nodes = lift._nodes(loop, 1e-3)
        g0 = lift.cartan_section(loop.start)
        wh = lift.horizontal_lift(base, g0, nodes=nodes).fiber_clock
        wg = lift.horizontal_lift(pert, g0, nodes=nodes).fiber_clock
        r_in = lift.rho_distance(lift.section_path(base), lift.section_path(pert))
        r_out = lift.rho_distance(wh, wg)
        worst_margin = max(worst_margin, r_out - r_in)
        worst_ratio = max(worst_ratio, r_out / r_in)
    contraction = worst_margin <= RHO_SLACK

    loop = _random_loop(np.random.default_rng(SEED + 4))
    scales = [0.08, 0.04, 0.02, 0.01]
    probes = [lift.endpoint_continuity_probe(loop, s, seed=SEED) for s in scales]
    linear = all(d1 / d0 <= LINEAR_SLACK * r1 / r0
                 for (r0, d0), (r1, d1) in zip(probes, probes[1:]))
    ok = contraction and linear
    report("criterion 4 (contraction, continuity probe)", ok,
           f"max rho(w_h,w_g) - rho(h,g) = {worst_margin:.2e} <= {RHO_SLACK:g} "
           f"(max ratio {worst_ratio:.3f}); output/input ratios "
           + ", ".join(f"{d / r:.4f}" for r, d in probes))
    assert ok


def test_5_subdivision_audit(report):
    t0 = time.perf_counter()
    rows, prev = [], None
    for n in range(4):
        lev = sd.build_level(n)
        rep = sd.verify_properties(lev, prev)
        rows.append((rep["ok"], len(lev), sd.grid_interval_count(n), cv.grid_size(n) - 1))
        prev = lev
    elapsed = time.perf_counter() - t0
    counts = [r[1] for r in rows]
    ok = (all(r[0] and r[1] == r[2] == r[3] for r in rows) and counts[1:3] == [12, 84]
          and elapsed < AUDIT_SECONDS)
    report("criterion 5 (subdivision audit)", ok,
           f"depths 0-3 pass, counts {counts} = |D_n| - 1, {elapsed:.2f} s < {AUDIT_SECONDS:g} s")
    assert ok


def test_6_fiber_identity(report):
    disk = geodesic_disk(RADIUS)
    rng = np.random.default_rng(SEED + 5)
    worst, checked = 0.0, 0
    for n in (1, 2, 3):
        lev = sd.build_level(n)
        walks = cv.build_walks(lev)
        fiber = cv.build_fiber_curve(n, lev, disk, walks=walks)
        js = np.arange(1, len(fiber.grid))
        if n == 3:
            js = np.sort(rng.choice(js, 20, replace=False))
        for j in js:
            end = cv.lift_endpoint(walks[j - 1], disk, refine=False)
            worst = max(worst, cv.group_dist(fiber.values[j], end))
            checked += 1
    ok = worst < FIBER_TOL
    report("criterion 6 (fiber-curve identity)", ok,
           f"{checked} grid points, max distance {worst:.2e} < {FIBER_TOL:g}")
    assert ok


def test_7a_length_equals_pleated_area(theorem, report):
    res = max(r["length_residual"] for r in theorem["rows"])
    ok = res < LENGTH_TOL
    report("criterion 7(a) (length = pleated area)", ok, f"max residual {res:.2e} < {LENGTH_TOL:g}")
    assert ok


def test_7b_pleated_area_close_to_disk_area(theorem, report):
    gap = theorem["rows"][-1]["relative_area_gap"]
    ok = gap < AREA_GAP
    report("criterion 7(b) (pleated area vs disk area)", ok,
           f"relative gap at depth 3 {gap:.4f} < {AREA_GAP:g}")
    assert ok


def test_7c_endpoint_vs_boundary_holonomy(theorem, report):
    d = [r["holonomy_distance"] for r in theorem["rows"]]
    decreasing = all(b < a for a, b in zip(d, d[1:]))
    ok = decreasing and d[-1] < HOLONOMY_TOL
    report("criterion 7(c) (endpoint vs boundary holonomy)", ok,
           "distances " + ", ".join(f"{x:.4f}" for x in d)
           + f" (decreasing: {decreasing}); depth 3 needs < {HOLONOMY_TOL:g}")
    assert ok


def test_7d_endpoint_vs_closed_form(theorem, report):
    target = lz.psi(2 * np.pi * (np.cosh(RADIUS) - 1))
    d = cv.group_dist(np.array(theorem["rows"][-1]["endpoint"]), target)
    ok = d < BENCH_TOL
    report("criterion 7(d) (endpoint vs Psi(2 pi (cosh r - 1)))", ok,
           f"distance at depth 3 {d:.4f}, needs < {BENCH_TOL:g}")
    assert ok


def test_8_direction_field(theorem, report):
    a2, a3 = (r["direction_angle"] for r in theorem["rows"][1:])
    shrinking = a3 < a2 or max(a2, a3) < 1e-10
    ok = a3 < ANGLE_REPORT and shrinking
    bumped = bumped_disk(RADIUS, 0.3, 2.0)
    extra = [cv.direction_agreement(cv.build_fiber_curve(n, sd.build_level(n), bumped), 2)
             for n in (2, 3)]
    report("criterion 8 (direction-field agreement, report only)", ok,
           f"benchmark max angle {a2:.1e} (n=2), {a3:.1e} (n=3) < {ANGLE_REPORT:g}; "
           f"bumped disk for comparison {extra[0]:.3f}, {extra[1]:.3f}")
    assert ok
