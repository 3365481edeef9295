"""Connection of G -> H^n: horizontal lifts, holonomy and the rho distance.

Horizontal directions at g are g k-perp (left-invariant metric).  A curve c
in H^n is first lifted by the Cartan section s(p) = exp(X_p), X_p in k-perp,
and then corrected by a fiber clock a(t) in K solving

    a' = -V(t) a,    V = vertical part of s(c)^{-1} s(c)',   a(0) = I,

so that s(c(t)) a(t) k0 is horizontal.  V depends on t only, which lets all
Runge-Kutta-Munthe-Kaas stages be evaluated in one vectorized pass.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT
from .errors import DomainMismatch, NonFiniteCurve, NotALoop, StartMismatch
from .hyperbolic import distance, project, unit_tangent
from .lorentz import (
    algebra_norm,
    boost,
    exp_boost,
    expm_skew_batch,
    group_inverse,
    log_map,
    minkowski,
    reproject,
    vertical_part,
)
from .paths import GeodesicSegment, PiecewisePath


def _bt(m):
    return np.swapaxes(m, -1, -2)


def cartan_section(p: np.ndarray) -> np.ndarray:
    """s(p) = exp(boost) with s(p) e-bar = p; batched over leading axes."""
    p = np.asarray(p, dtype=float)
    w = p[..., 1:]
    n = w.shape[-1]
    s = np.empty(p.shape[:-1] + (n + 1, n + 1))
    s[..., 0, 0] = p[..., 0]
    s[..., 0, 1:] = w
    s[..., 1:, 0] = w
    s[..., 1:, 1:] = np.eye(n) + w[..., :, None] * w[..., None, :] / (1.0 + p[..., 0])[..., None, None]
    return s


def section_derivative(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    """d/dt s(c(t)) given c = p and c' = dp."""
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    w, dw = p[..., 1:], dp[..., 1:]
    n = w.shape[-1]
    den = (1.0 + p[..., 0])[..., None, None]
    outer = w[..., :, None] * w[..., None, :]
    dout = dw[..., :, None] * w[..., None, :] + w[..., :, None] * dw[..., None, :]
    d = np.empty(p.shape[:-1] + (n + 1, n + 1))
    d[..., 0, 0] = dp[..., 0]
    d[..., 0, 1:] = dw
    d[..., 1:, 0] = dw
    d[..., 1:, 1:] = dout / den - outer * dp[..., 0][..., None, None] / den ** 2
    return d


def section_inverse(p: np.ndarray) -> np.ndarray:
    s = minkowski(np.shape(p)[-1] - 1)
    return s @ _bt(cartan_section(p)) @ s


def left_velocity(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    """s(c)^{-1} s(c)' for the section curve."""
    return section_inverse(p) @ section_derivative(p, dp)


def connection_form(g: np.ndarray, v: np.ndarray) -> np.ndarray:
    """omega_g(g v) = vertical part of the left-translated tangent ``v``."""
    del g  # the metric is left-invariant, so omega does not depend on g
    return vertical_part(v)


def _vertical_field(curve: PiecewisePath, t: np.ndarray) -> np.ndarray:
    p, dp = curve(t), curve.velocity(t)
    v = vertical_part(left_velocity(p, dp))
    if not np.all(np.isfinite(v)):
        raise NonFiniteCurve("non-finite derivative along the curve")
    return v


def _dexpinv(y: np.ndarray, a: np.ndarray) -> np.ndarray:
    ya = y @ a - a @ y
    return a - 0.5 * ya + (y @ ya - ya @ y) / 12.0


def _nodes(curve: PiecewisePath, step: float) -> np.ndarray:
    pieces = []
    for seg in curve.segments:
        m = max(1, int(np.ceil(seg.length() / step - 1e-9)))
        pieces.append(np.linspace(seg.t0, seg.t1, m + 1)[:-1])
    pieces.append([curve.segments[-1].t1])
    return np.concatenate(pieces)


def _integrate(curve: PiecewisePath, nodes: np.ndarray):
    """RKMK4 for a' = -V a on the given nodes; returns node values and steps."""
    t0, t1 = nodes[:-1], nodes[1:]
    dt = (t1 - t0)[:, None, None]
    # right limits at t0 and left limits at t1 so breakpoints are segment-exact
    eps = 1e-13 * np.maximum(1.0, np.abs(t1))
    a0 = -_vertical_field(curve, t0)
    am = -_vertical_field(curve, 0.5 * (t0 + t1))
    a1 = -_vertical_field(curve, np.maximum(t1 - eps, t0))
    k1 = dt * a0
    k2 = dt * _dexpinv(0.5 * k1, am)
    k3 = dt * _dexpinv(0.5 * k2, am)
    k4 = dt * _dexpinv(k3, a1)
    omega = (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    steps = expm_skew_batch(omega)
    n1 = steps.shape[-1]
    values = np.empty((len(nodes), n1, n1))
    values[0] = np.eye(n1)
    a = values[0]
    for i, e in enumerate(steps, start=1):
        a = e @ a
        if i % DEFAULT.reproject_every == 0:
            a = reproject(a)
        values[i] = a
    return values, omega


@dataclass
class LiftResult:
    """Horizontal lift h(t) = s(c(t)) a(t) k0 of a base curve.

    ``fiber_clock`` is the curve a(t) in K; ``endpoint_holonomy`` is the
    element k with lift(1) = start k, set only when the base curve is a loop.
    """

    base: PiecewisePath
    start: np.ndarray
    k0: np.ndarray
    nodes: np.ndarray
    clock_values: np.ndarray
    clock_steps: np.ndarray
    step: float
    endpoint_holonomy: Optional[np.ndarray] = None

    def clock(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        i = np.clip(np.searchsorted(self.nodes, flat, side="right") - 1, 0, len(self.nodes) - 2)
        s = (flat - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i])
        # a(t) = exp(s Omega_i) a_i, exact at both nodes
        out = expm_skew_batch(s[:, None, None] * self.clock_steps[i]) @ self.clock_values[i]
        return out.reshape(t.shape + out.shape[-2:])

    def clock_velocity(self, t) -> np.ndarray:
        """a' = -V(t) a(t), the exact field evaluated on the interpolant."""
        t = np.asarray(t, dtype=float)
        return -_vertical_field(self.base, t) @ self.clock(t)

    @property
    def fiber_clock(self) -> PiecewisePath:
        return PiecewisePath.from_function(self.clock, self.clock_velocity, "group",
                                           breakpoints=self.base.breakpoints)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return cartan_section(self.base(t)) @ self.clock(t) @ self.k0

    def velocity(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        p, dp = self.base(t), self.base.velocity(t)
        a = self.clock(t)
        s = cartan_section(p)
        v = vertical_part(left_velocity(p, dp))
        return (section_derivative(p, dp) @ a - s @ v @ a) @ self.k0

    @property
    def lifted(self) -> PiecewisePath:
        return PiecewisePath.from_function(self, self.velocity, "group",
                                           breakpoints=self.base.breakpoints)

    @property
    def endpoint(self) -> np.ndarray:
        return cartan_section(self.base.end) @ self.clock_values[-1] @ self.k0

    def verticality_residual(self, t=None) -> float:
        """max |vertical part of lift^{-1} lift'| over the given times."""
        t = self.nodes if t is None else np.asarray(t, dtype=float)
        h = self(t)
        dh = self.velocity(t)
        v = vertical_part(group_inverse(h) @ dh)
        return float(np.max(np.sqrt(0.5 * np.sum(v * v, axis=(-1, -2)))))


def horizontal_lift(curve: PiecewisePath, start: np.ndarray,
                    step: float = DEFAULT.lift_step, refine: bool = True,
                    refine_tol: float = DEFAULT.lift_refine, max_halvings: int = 6,
                    nodes: Optional[np.ndarray] = None) -> LiftResult:
    """Horizontal lift of a curve in H^n starting at ``start``.

    ``step`` is measured in arc length per segment.  With ``refine`` the
    step is halved until the endpoint moves by less than ``refine_tol``.
    """
    if curve.space != "hyperbolic":
        raise DomainMismatch("horizontal_lift expects a curve in H^n")
    start = np.asarray(start, dtype=float)
    c0 = curve.start
    if distance(project(start), c0) > 1e-9:
        raise StartMismatch("start does not lie over curve(0)")
    k0 = section_inverse(c0) @ start
    if nodes is not None:
        values, steps = _integrate(curve, np.asarray(nodes, dtype=float))
        used = float("nan")
    else:
        nodes = _nodes(curve, step)
        values, steps = _integrate(curve, nodes)
        used = step
        for _ in range(max_halvings if refine else 0):
            fine = _nodes(curve, used / 2)
            fv, fs = _integrate(curve, fine)
            change = np.max(np.abs(fv[-1] - values[-1]))
            nodes, values, steps, used = fine, fv, fs, used / 2
            if change < refine_tol:
                break
    res = LiftResult(curve, start, k0, nodes, values, steps, used)
    if curve.is_loop(DEFAULT.loop_closure):
        res.endpoint_holonomy = group_inverse(start) @ res.endpoint
    return res


def lift_geodesic_path(points: np.ndarray, start: np.ndarray) -> np.ndarray:
    """Exact horizontal lift through geodesic polygon vertices.

    Each side from p to q at fiber point g lifts to g exp(d B(u)) where u is
    g^{-1} applied to the unit tangent at p.  Returns the lift at every vertex.
    """
    pts = np.asarray(points, dtype=float)
    g = np.asarray(start, dtype=float)
    if distance(project(g), pts[0]) > 1e-9:
        raise StartMismatch("start does not lie over the first vertex")
    out = [g]
    for i, (p, q) in enumerate(zip(pts, pts[1:]), start=1):
        d = float(distance(p, q))
        if d > 0:
            u = group_inverse(g) @ unit_tangent(p, q)
            g = g @ exp_boost(d * u[1:])
            if i % DEFAULT.reproject_every == 0:
                g = reproject(g)
        out.append(g)
    return np.array(out)


def geodesic_lift_path(curve: PiecewisePath, start: np.ndarray) -> PiecewisePath:
    """The exact lift of a geodesic polygon as a one-parameter group path."""
    if not all(isinstance(s, GeodesicSegment) for s in curve.segments):
        raise DomainMismatch("curve is not a geodesic polygon")
    gs = lift_geodesic_path(curve.vertices, start)
    omegas = [boost(s.d * (group_inverse(g) @ s.u)[1:]) for g, s in zip(gs, curve.segments)]
    return PiecewisePath.group_one_parameter(gs[0], omegas, times=curve.breakpoints)


def holonomy(loop: PiecewisePath, basefiber: np.ndarray, step: float = DEFAULT.lift_step,
             method: str = "ode", refine: bool = True) -> np.ndarray:
    """Element k of K with lift(1) = basefiber k for the lift from basefiber."""
    if not loop.is_loop(DEFAULT.loop_closure):
        raise NotALoop("curve does not close up")
    basefiber = np.asarray(basefiber, dtype=float)
    if method == "exact":
        verts = loop.vertices
        if verts is None or loop.space != "hyperbolic":
            raise DomainMismatch("exact holonomy needs a geodesic polygon")
        end = lift_geodesic_path(verts, basefiber)[-1]
    else:
        end = horizontal_lift(loop, basefiber, step=step, refine=refine).endpoint
    return group_inverse(basefiber) @ end


# -- the rho distance ----------------------------------------------------

def section_path(curve: PiecewisePath) -> PiecewisePath:
    """The group curve s(c(t)) over a base curve."""
    return PiecewisePath.from_function(
        lambda t: cartan_section(curve(t)),
        lambda t: section_derivative(curve(t), curve.velocity(t)),
        "group", breakpoints=curve.breakpoints)


def _trivialized(path: PiecewisePath, t: np.ndarray, side: str) -> np.ndarray:
    g, dg = path(t), path.velocity(t)
    if side == "left":
        return group_inverse(g) @ dg
    return dg @ group_inverse(g)


def rho_distance(h: PiecewisePath, g: PiecewisePath, trivialization: str = "right",
                 panels: int = 16, order: int = 8) -> float:
    """rho(h, g) = int_0^1 |h' h^{-1} - g' g^{-1}| dt (or left-trivialized).

    Composite Gauss-Legendre over the union of both breakpoint sets.
    """
    if h.space != "group" or g.space != "group":
        raise DomainMismatch("rho is defined for curves in G")
    if np.shape(h.start) != np.shape(g.start):
        raise DomainMismatch("curves live in different groups")
    if trivialization not in ("left", "right"):
        raise ValueError("trivialization must be 'left' or 'right'")
    cuts = np.union1d(h.breakpoints, g.breakpoints)
    edges = np.concatenate([np.linspace(a, b, panels + 1)[:-1] for a, b in zip(cuts, cuts[1:])]
                           + [[cuts[-1]]])
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    t = (edges[:-1, None] + half[:, None] * (x + 1.0)).ravel()
    wt = (half[:, None] * w).ravel()
    d = _trivialized(h, t, trivialization) - _trivialized(g, t, trivialization)
    norms = np.sqrt(0.5 * np.sum(d * d, axis=(-1, -2)))
    return float(np.sum(wt * norms))


def perturbed_curve(curve: PiecewisePath, scale: float, xi: np.ndarray) -> PiecewisePath:
    """c_eps(t) = exp(eps sin(pi t) B(xi)) c(t); endpoints are unchanged."""
    xi = np.asarray(xi, dtype=float)
    bx = boost(xi)

    def fn(t):
        e = exp_boost((scale * np.sin(np.pi * t))[..., None] * xi)
        return np.einsum("...ij,...j->...i", e, curve(t))

    def dfn(t):
        e = exp_boost((scale * np.sin(np.pi * t))[..., None] * xi)
        rate = (scale * np.pi * np.cos(np.pi * t))[..., None]
        c, dc = curve(t), curve.velocity(t)
        ec = np.einsum("...ij,...j->...i", e, c)
        return rate * (ec @ bx.T) + np.einsum("...ij,...j->...i", e, dc)

    return PiecewisePath.from_function(fn, dfn, "hyperbolic", breakpoints=curve.breakpoints)


def _as_function_path(curve: PiecewisePath) -> PiecewisePath:
    return PiecewisePath.from_function(curve, curve.velocity, curve.space,
                                       breakpoints=curve.breakpoints)


def endpoint_continuity_probe(curve: PiecewisePath, perturbation_scale: float,
                              seed: int = 0, step: float = DEFAULT.lift_step,
                              trivialization: str = "right") -> tuple[float, float]:
    """(rho(s c, s c_eps), |log(a(1)^{-1} b(1))|) for a seeded perturbation.

    Both fiber clocks are integrated on the same nodes so that the output
    distance reflects the perturbation, not discretization noise.
    """
    n = np.shape(curve.start)[-1] - 1
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(n)
    xi /= np.linalg.norm(xi)
    base = _as_function_path(curve)
    pert = perturbed_curve(curve, perturbation_scale, xi)
    nodes = _nodes(curve, step)
    g0 = cartan_section(curve.start)
    la = horizontal_lift(base, g0, nodes=nodes)
    lb = horizontal_lift(pert, g0, nodes=nodes)
    rho_in = rho_distance(section_path(base), section_path(pert), trivialization)
    dist_out = algebra_norm(log_map(group_inverse(la.clock_values[-1]) @ lb.clock_values[-1]))
    return rho_in, dist_out
