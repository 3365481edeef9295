"""Time grids, holonomy curves on the subdivided disk, and the fiber curve.

Curves on the disk are kept as walks on the vertex graph of a subdivision
level (lists of vertex ids).  This makes backtrack cancellation exact; time
parametrizations are attached only when a curve is turned into a path, in
the disk (straight edges), on S (Phi of straight edges, marked ~) or on the
pleated surface (geodesic sides between Phi-images of vertices, marked ^).
"""

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DependentInputs, GridDomainError, UnsupportedDepth
from .hyperbolic import DiskEmbedding, disk_area, totally_geodesic_triangle, triangle_area, unit_tangent
from .lift import cartan_section, horizontal_lift, lift_geodesic_path
from .lorentz import (
    algebra_norm,
    boost,
    bracket,
    exp_map,
    expm_skew_batch,
    group_inverse,
    log_map,
    reproject,
    standard_basis,
)
from .paths import PiecewisePath
from .subdivision import MAX_DEPTH, SubdivisionLevel, build_level

# -- time grid -----------------------------------------------------------


@dataclass(frozen=True)
class TimeGrid:
    """D_n: 6^n equal steps on [0, 1/2], then block k = 1..n of
    2^(k-1) 6^(n-k+1) equal steps on [sum_{i<=k} 2^-i, sum_{i<=k+1} 2^-i]."""

    n: int
    exact: tuple

    @property
    def points(self) -> np.ndarray:
        return np.array([float(x) for x in self.exact])

    def __len__(self) -> int:
        return len(self.exact)

    @property
    def last(self) -> float:
        return float(self.exact[-1])

    def _locate(self, t) -> int:
        pts = self.points
        i = int(np.searchsorted(pts, float(t) - 1e-12))
        if i >= len(pts) or abs(pts[i] - float(t)) > 1e-12:
            raise GridDomainError(f"{t} is not a point of D_{self.n}")
        return i

    def j(self, t) -> int:
        """Position of t in D_n (0 for t = 0)."""
        return self._locate(t)

    def t1(self, t) -> float:
        """Predecessor of t in D_n, with t1(1) = last element."""
        if float(t) == 1.0 and self.last < 1.0:
            return self.last
        i = self._locate(t)
        if i == 0:
            raise GridDomainError("t1 is undefined at 0")
        return float(self.exact[i - 1])

    def t2(self, t) -> float:
        """Successor of t in D_n; undefined at the last element."""
        i = self._locate(t)
        if i == len(self.exact) - 1:
            raise GridDomainError("t2 is undefined at the last element")
        return float(self.exact[i + 1])

    def interval_count(self) -> int:
        return len(self.exact) - 1


def build_grid(n: int) -> TimeGrid:
    if not 0 <= n <= MAX_DEPTH:
        raise UnsupportedDepth(f"grid depth must be in 0..{MAX_DEPTH}")
    pts = [Fraction(j, 2 * 6 ** n) for j in range(6 ** n + 1)]
    for k in range(1, n + 1):
        left = sum(Fraction(1, 2 ** i) for i in range(1, k + 1))
        m = 2 ** (k - 1) * 6 ** (n - k + 1)
        pts += [left + Fraction(1, 2 ** (k + 1)) * Fraction(j, m) for j in range(1, m + 1)]
    return TimeGrid(n, tuple(pts))


def grid_size(n: int) -> int:
    return 6 ** n + sum(2 ** (k - 1) * 6 ** (n - k + 1) for k in range(1, n + 1)) + 1


# -- walks ---------------------------------------------------------------

def free_reduce(walk) -> list:
    """Drop repeated vertices and cancel backtracks a, b, a -> a."""
    out: list = []
    for v in walk:
        if out and out[-1] == v:
            continue
        if len(out) >= 2 and out[-2] == v:
            out.pop()
            continue
        out.append(v)
    return out


def join(*walks) -> list:
    out = list(walks[0])
    for w in walks[1:]:
        if out[-1] != w[0]:
            raise ValueError("walks do not meet")
        out.extend(w[1:])
    return out


def _prefix_to(walk, target) -> list:
    try:
        i = walk.index(target)
    except ValueError as exc:
        raise DependentInputs(f"vertex {target} not on the holonomy curve") from exc
    return walk[: i + 1]


def _attach(gamma: list, start: int, phi: list) -> tuple[list, list]:
    """c and the reduced gamma * c * phi * c-bar for the next triangle.

    c follows gamma backwards from the basepoint to ``start``.  When the
    start is the basepoint itself, both the constant path and the full
    backwards loop qualify; the one whose reduction stays on the boundary
    of the grown region (the shorter) is used.
    """
    back = gamma[::-1]
    if start == gamma[0]:
        options = [[start], back]
    else:
        options = [_prefix_to(back, start)]
    best = None
    for c in options:
        g = free_reduce(join(gamma, c, phi, c[::-1]))
        if best is None or len(g) < len(best[1]):
            best = (c, g)
    return best


def _to_end(gamma: list, c: list, end: int) -> list:
    """1c: backwards along gamma from the basepoint to ``end``.

    For end = basepoint the constant path and the full backwards loop both
    qualify; the one giving the shorter reduction of c-bar * 1c is used.
    """
    back = gamma[::-1]
    if end != gamma[0]:
        return _prefix_to(back, end)
    return min(([end], back), key=lambda w: len(free_reduce(join(c[::-1], w))))


def walk_edges(walk) -> set:
    return {frozenset(e) for e in zip(walk, walk[1:]) if e[0] != e[1]}


def simplify(curve: PiecewisePath, tol: float = 1e-10) -> PiecewisePath:
    """Cancel backtracking along a polygonal path, then reparametrize by arc length."""
    verts = curve.vertices
    if verts is None:
        raise ValueError("simplify needs a polyline or geodesic polygon")
    ids, reps = [], []
    for v in verts:
        for i, r in enumerate(reps):
            if np.max(np.abs(r - v)) < tol:
                ids.append(i)
                break
        else:
            ids.append(len(reps))
            reps.append(v)
    red = free_reduce(ids)
    pts = [reps[i] for i in red]
    if curve.space == "hyperbolic":
        return PiecewisePath.geodesic_polygon(pts)
    return PiecewisePath.polyline(pts)


def classify_on_triangle(walk, tri) -> str:
    """'point', 'one side', 'two sides' or 'boundary' for a reduced walk on a triangle."""
    edges = walk_edges(walk)
    if not set(walk) <= set(tri.ids) or not edges <= set(tri.edges()):
        return "other"
    return {0: "point", 1: "one side", 2: "two sides", 3: "boundary"}[len(edges)]


@dataclass
class CurveBundle:
    """Walks gamma, c, phi, psi and 1c for the j-th triangle (1-based)."""

    j: int
    gamma: list
    c: list
    phi: list
    psi: list
    c1: list
    level: SubdivisionLevel = field(repr=False)

    @property
    def c_bar(self) -> list:
        return self.c[::-1]

    @property
    def c1_bar(self) -> list:
        return self.c1[::-1]

    def walk(self, name: str) -> list:
        names = {"gamma": self.gamma, "c": self.c, "c_bar": self.c_bar, "phi": self.phi,
                 "psi": self.psi, "1c": self.c1, "1c_bar": self.c1_bar}
        return names[name]

    def path(self, name: str, kind: str = "disk", disk: Optional[DiskEmbedding] = None) -> PiecewisePath:
        """Constant-speed path for a walk: 'disk', 'tilde' (on S) or 'hat' (pleated)."""
        pts = np.array([self.level.table[i] for i in self.walk(name)])
        if kind == "disk":
            return PiecewisePath.polyline(pts)
        if disk is None:
            raise ValueError("a disk embedding is needed off the disk")
        if kind == "hat":
            return PiecewisePath.geodesic_polygon(disk.point(pts))
        if kind == "tilde":
            flat = PiecewisePath.polyline(pts)

            def fn(t):
                return disk.point(flat(t))

            def dfn(t):
                xy, v = flat(t), flat.velocity(t)
                dx, dy = disk.jacobian(xy[..., 0], xy[..., 1])
                return dx * v[..., 0:1] + dy * v[..., 1:2]

            return PiecewisePath.from_function(fn, dfn, "hyperbolic", breakpoints=flat.breakpoints)
        raise ValueError(f"unknown kind {kind!r}")


def build_walks(level: SubdivisionLevel) -> list:
    """CurveBundles for every triangle of the level, in order."""
    base = level.basepoint
    out = []
    gamma = [base]
    for j, (_, tri) in enumerate(level.entries, start=1):
        phi = tri.loop_from(tri.start)
        if j == 1:
            c, gamma = [base], phi
        else:
            c, gamma = _attach(gamma, tri.start, phi)
        c1 = _to_end(gamma, c, tri.end)
        psi = tri.loop_from(tri.end)
        out.append(CurveBundle(j, gamma, c, phi, psi, c1, level))
    return out


def build_curve_bundle(n: int, t0: float, level: Optional[SubdivisionLevel] = None,
                       grid: Optional[TimeGrid] = None) -> CurveBundle:
    """Curves attached to grid time t0 > 0 of D_n."""
    level = level or build_level(n)
    grid = grid or build_grid(n)
    j = grid.j(t0)
    if j == 0:
        raise GridDomainError("curves are defined for t0 > 0 only")
    return build_walks(level)[j - 1]


def prefix_boundary(level: SubdivisionLevel, j: int) -> set:
    """Boundary edges of the union of the first j triangles."""
    count: dict = {}
    for _, t in level.entries[:j]:
        for e in t.edges():
            count[e] = count.get(e, 0) + 1
    return {e for e, c in count.items() if c == 1}


# -- fiber curve ---------------------------------------------------------

def _rotation_coordinates(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1] - 1
    basis = standard_basis(n)
    return basis.coordinates(a)[n:]


@dataclass
class FiberCurve:
    """f_n on [0, 1]: one one-parameter segment in K per triangle."""

    n: int
    grid: TimeGrid
    addresses: list
    areas: np.ndarray
    directions: np.ndarray       # unit [X, Y] per triangle
    lifted_starts: np.ndarray    # lift of c^ at the start point of each triangle
    start_points: np.ndarray     # Phi of the start vertices
    values: np.ndarray           # f_n at the grid points
    orientation: int = 1

    @property
    def times(self) -> np.ndarray:
        return self.grid.points

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        pts = self.times
        i = np.clip(np.searchsorted(pts, flat, side="right") - 1, 0, len(pts) - 1)
        out = np.empty((len(flat),) + self.values.shape[1:])
        tail = i >= len(pts) - 1
        out[tail] = self.values[-1]
        k = i[~tail]
        s = (flat[~tail] - pts[k]) / (pts[k + 1] - pts[k])
        gen = (s * self.areas[k])[:, None, None] * self.directions[k]
        out[~tail] = self.values[k] @ expm_skew_batch(gen)
        return out.reshape(t.shape + out.shape[1:])

    @property
    def endpoint(self) -> np.ndarray:
        return self.values[-1]

    @property
    def total_area(self) -> float:
        return float(np.sum(self.areas))

    def segment_lengths(self) -> np.ndarray:
        """|log(f(t_{j-1})^{-1} f(t_j))| per segment."""
        return np.array([algebra_norm(log_map(group_inverse(a) @ b))
                         for a, b in zip(self.values, self.values[1:])])

    def length(self) -> float:
        return float(np.sum(self.segment_lengths()))

    def area_clock(self) -> tuple[np.ndarray, float]:
        """s_n on D_n minus 0 (prefix sums of areas) and the total."""
        s = np.cumsum(self.areas)
        return s, float(s[-1])

    def reparametrized(self):
        """(f_n, F_n) as callables on [0, total area]; f_n has unit speed."""
        s, total = self.area_clock()
        knots = np.concatenate([[0.0], s])

        def locate(x):
            x = np.asarray(x, dtype=float)
            flat = np.atleast_1d(x).ravel()
            if np.any((flat < -1e-12) | (flat > total + 1e-12)):
                raise GridDomainError("time outside [0, total area]")
            i = np.clip(np.searchsorted(knots, flat, side="right") - 1, 0, len(self.areas) - 1)
            return x, flat, i

        def f(x):
            x, flat, i = locate(x)
            gen = (flat - knots[i])[:, None, None] * self.directions[i]
            out = self.values[i] @ expm_skew_batch(gen)
            return out.reshape(x.shape + out.shape[1:])

        def F(x):
            x, flat, i = locate(x)
            return self.directions[i].reshape(x.shape + self.directions.shape[1:])

        return f, F

    def canonical_directions(self) -> np.ndarray:
        """Ad_kappa U_j with kappa = s(p)^{-1} g mapping the lifted start to e-bar."""
        kap = group_inverse(cartan_section(self.start_points)) @ self.lifted_starts
        return kap @ self.directions @ np.swapaxes(kap, -1, -2)

    def to_record(self) -> dict:
        cum = np.cumsum(self.segment_lengths())
        return {
            "n": self.n,
            "grid": [float(x) for x in self.times],
            "triangles": [
                {"address": str(a),
                 "area": float(ar),
                 "bracket_direction": [float(v) for v in _rotation_coordinates(d)],
                 "cumulative_length": float(c),
                 "endpoint": [[float(v) for v in row] for row in f]}
                for a, ar, d, c, f in zip(self.addresses, self.areas, self.directions,
                                          cum, self.values[1:])],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_record(), **kw)

    def samples_csv(self, count: int = 200) -> str:
        """f_n sampled at equal steps of the area clock."""
        f, F = self.reparametrized()
        x = np.linspace(0.0, self.total_area, count)
        vals, dirs = f(x), F(x)
        d = vals.shape[-1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s"] + [f"f{i}{j}" for i in range(d) for j in range(d)]
                   + [f"F{i}" for i in range(len(_rotation_coordinates(dirs[0])))])
        for xi, v, di in zip(x, vals, dirs):
            w.writerow([repr(float(xi))] + [repr(float(c)) for c in v.ravel()]
                       + [repr(float(c)) for c in _rotation_coordinates(di)])
        return buf.getvalue()


def pleated_points(level: SubdivisionLevel, disk: DiskEmbedding) -> np.ndarray:
    """Phi at every vertex of the level, indexed by vertex id."""
    return disk.point(level.table.array())


def build_fiber_curve(n: int, level: Optional[SubdivisionLevel] = None,
                      disk: Optional[DiskEmbedding] = None, orientation: int = 1,
                      walks: Optional[list] = None) -> FiberCurve:
    """f_n from the pleated triangles of step n.

    On the j-th grid interval f_n runs along exp(t area_j U_j) from its value
    at the left end, where U_j = [X, Y]/|[X, Y]| and X, Y are the horizontal
    lifts, at the lift of c^_j, of the unit tangents towards the second and
    the last vertex of the triangle loop.
    """
    if disk is None:
        raise ValueError("a disk embedding is required")
    level = level or build_level(n, orientation)
    walks = walks or build_walks(level)
    grid = build_grid(level.n)
    pts = pleated_points(level, disk)
    dim = disk.dim
    f = np.eye(dim + 1)
    values, dirs, areas, starts, spts, addrs = [f], [], [], [], [], []
    for j, ((addr, tri), wb) in enumerate(zip(level.entries, walks), start=1):
        g = lift_geodesic_path(pts[wb.c], f)[-1] if len(wb.c) > 1 else f
        s, a, b = wb.phi[:3]
        ps = pts[s]
        gi = group_inverse(g)
        x = boost((gi @ unit_tangent(ps, pts[a]))[1:])
        y = boost((gi @ unit_tangent(ps, pts[b]))[1:])
        z = bracket(x, y)
        nz = algebra_norm(z)
        if nz < 1e-14:
            raise DependentInputs(f"{addr}: degenerate tangent plane, [X, Y] = 0")
        u = z / nz
        area = triangle_area(totally_geodesic_triangle(ps, pts[a], pts[b]))
        f = f @ exp_map(area * u)
        if j % 64 == 0:
            f = reproject(f)
        values.append(f)
        dirs.append(u)
        areas.append(area)
        starts.append(g)
        spts.append(ps)
        addrs.append(addr)
    return FiberCurve(level.n, grid, addrs, np.array(areas), np.array(dirs),
                      np.array(starts), np.array(spts), np.array(values), level.orientation)


def boundary_loop(disk: DiskEmbedding, orientation: int = 1) -> PiecewisePath:
    """Phi of the unit circle from (0, -1), at constant angular speed."""
    sign = float(orientation)

    def theta(t):
        return -np.pi / 2 + sign * 2 * np.pi * t

    def fn(t):
        th = theta(np.asarray(t, dtype=float))
        return disk(np.cos(th), np.sin(th))

    def dfn(t):
        th = theta(np.asarray(t, dtype=float))
        dx, dy = disk.jacobian(np.cos(th), np.sin(th))
        w = sign * 2 * np.pi
        return (-np.sin(th) * w)[..., None] * dx + (np.cos(th) * w)[..., None] * dy

    return PiecewisePath.from_function(fn, dfn, "hyperbolic",
                                       breakpoints=np.linspace(0.0, 1.0, 9))


def boundary_holonomy(disk: DiskEmbedding, orientation: int = 1, step: float = 1e-3) -> np.ndarray:
    loop = boundary_loop(disk, orientation)
    return horizontal_lift(loop, np.eye(disk.dim + 1), step=step).endpoint_holonomy


def lift_endpoint(bundle: CurveBundle, disk: DiskEmbedding, step: float = 1e-3,
                  refine: bool = True) -> np.ndarray:
    """Endpoint of the numerical horizontal lift of gamma^ from e."""
    path = bundle.path("gamma", "hat", disk)
    return horizontal_lift(path, np.eye(disk.dim + 1), step=step, refine=refine).endpoint


def group_dist(a: np.ndarray, b: np.ndarray) -> float:
    return algebra_norm(log_map(group_inverse(a) @ b))


def _unit_angle(u: np.ndarray, v: np.ndarray) -> float:
    d = algebra_norm(u - v)
    return float(2.0 * np.arcsin(min(1.0, 0.5 * d)))


def direction_agreement(fiber: FiberCurve, coarse: int = 2) -> float:
    """Largest angle between the canonical directions of the two segments
    meeting at an interior point of D_coarse."""
    if fiber.n < coarse:
        raise GridDomainError("fiber curve is coarser than the comparison grid")
    dirs = fiber.canonical_directions()
    cg = build_grid(coarse)
    worst = 0.0
    for t in cg.points[1:-1]:
        j = fiber.grid.j(t)
        worst = max(worst, _unit_angle(dirs[j - 1], dirs[j]))
    return worst


def theorem_check(disk: DiskEmbedding, n_max: int, orientation: int = 1,
                  step: float = 1e-3, resolution: int = 128) -> dict:
    """Finite-step surrogates of the length/area and endpoint/holonomy claims."""
    if not 0 <= n_max <= MAX_DEPTH:
        raise UnsupportedDepth(f"depth must be in 0..{MAX_DEPTH}")
    area = disk_area(disk, resolution)
    hol = boundary_holonomy(disk, orientation, step)
    rows, prev = [], None
    for n in range(0 if n_max == 0 else 1, n_max + 1):
        fiber = build_fiber_curve(n, build_level(n, orientation), disk)
        length = fiber.length()
        end = fiber.endpoint
        row = {
            "n": n,
            "triangles": len(fiber.areas),
            "pleated_area": fiber.total_area,
            "length": length,
            "length_residual": abs(length - fiber.total_area),
            "area_gap": abs(fiber.total_area - area),
            "relative_area_gap": abs(fiber.total_area - area) / area,
            "holonomy_distance": group_dist(end, hol),
            "cauchy": None if prev is None else group_dist(prev, end),
            "endpoint": end.tolist(),
        }
        if n >= 2:
            row["direction_angle"] = direction_agreement(fiber, 2)
        rows.append(row)
        prev = end
    return {"disk": disk.name, "params": dict(disk.params), "dim": disk.dim,
            "orientation": orientation, "disk_area": area,
            "boundary_holonomy": hol.tolist(), "rows": rows}
