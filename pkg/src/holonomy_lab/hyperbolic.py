"""Hyperboloid model of H^n: points, geodesics, triangles and disk areas."""

import csv
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import DEFAULT
from .errors import (
    CoincidentPoints,
    DegenerateTriangle,
    DimensionMismatch,
    NotOnHyperboloid,
    RankDeficient,
)


def mink(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minkowski product <x, y>_S along the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sum(x[..., 1:] * y[..., 1:], axis=-1) - x[..., 0] * y[..., 0]


def basepoint(n: int) -> np.ndarray:
    """The point e-bar = (1, 0, ..., 0) fixed by K."""
    e = np.zeros(n + 1)
    e[0] = 1.0
    return e


def hyperboloid_residual(x: np.ndarray) -> np.ndarray:
    return np.abs(mink(x, x) + 1.0)


def check_point(x: np.ndarray, tol: float = DEFAULT.hyperboloid) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 3:
        raise DimensionMismatch("points need at least 3 coordinates")
    if np.any(hyperboloid_residual(x) > tol * np.maximum(1.0, x[..., 0] ** 2)) \
            or np.any(x[..., 0] < 1.0 - tol):
        raise NotOnHyperboloid("point is not on the upper sheet of the hyperboloid")
    return x


def normalize(x: np.ndarray) -> np.ndarray:
    """Rescale a future-pointing time-like vector onto the hyperboloid."""
    x = np.asarray(x, dtype=float)
    return x / np.sqrt(-mink(x, x))[..., None]


def lift_spatial(w: np.ndarray) -> np.ndarray:
    """The point with spatial part ``w``."""
    w = np.asarray(w, dtype=float)
    x0 = np.sqrt(1.0 + np.sum(w * w, axis=-1))
    return np.concatenate([x0[..., None], w], axis=-1)


def project(g: np.ndarray) -> np.ndarray:
    """pi(g) = g e-bar, the first column."""
    return np.array(np.asarray(g)[..., :, 0], dtype=float)


def distance(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hyperbolic distance; 2 asinh(|p - q|_S / 2) is stable for close points."""
    d = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    chord2 = np.maximum(mink(d, d), 0.0)
    return 2.0 * np.arcsinh(0.5 * np.sqrt(chord2))


def unit_tangent(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Unit tangent at ``p`` of the geodesic towards ``q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    w = q + mink(p, q)[..., None] * p
    nw = np.sqrt(np.maximum(mink(w, w), 0.0))
    if np.any(nw == 0.0):
        raise CoincidentPoints("tangent direction undefined for equal points")
    return w / nw[..., None]


def exp_point(p: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Riemannian exponential at ``p`` of the tangent vector ``v``."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    r = np.sqrt(np.maximum(mink(v, v), 0.0))[..., None]
    sh = np.where(r > 0, np.sinh(r) / np.where(r > 0, r, 1.0), 1.0)
    return np.cosh(r) * p + sh * v


def geodesic(p: np.ndarray, q: np.ndarray, t) -> np.ndarray:
    """Constant-speed geodesic from ``p`` (t=0) to ``q`` (t=1).

    Endpoints are returned exactly; ``t`` may be an array.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    t = np.asarray(t, dtype=float)
    d = float(distance(p, q))
    if d == 0.0:
        return np.broadcast_to(p, t.shape + p.shape).copy()
    u = unit_tangent(p, q)
    s = t[..., None] * d
    out = np.cosh(s) * p + np.sinh(s) * u
    out = np.where((t == 0.0)[..., None], p, out)
    out = np.where((t == 1.0)[..., None], q, out)
    return out


def midpoint(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return normalize(np.asarray(p, dtype=float) + np.asarray(q, dtype=float))


# -- triangles -----------------------------------------------------------

def _gram_det(p, q, r) -> float:
    pts = np.array([p, q, r], dtype=float)
    gram = np.array([[mink(a, b) for b in pts] for a in pts])
    return float(np.linalg.det(gram))


def robust_area(p, q, r) -> float:
    """Area from tan(A/2) = sqrt(-det Gram) / (1 - <p,q> - <q,r> - <r,p>).

    Accurate for thin triangles, where the angle defect cancels badly.
    """
    num = np.sqrt(max(-_gram_det(p, q, r), 0.0))
    den = 1.0 - mink(p, q) - mink(q, r) - mink(r, p)
    return float(2.0 * np.arctan2(num, den))


def slice_orientation(p, q, r) -> int:
    """+1 if (p, q, r) runs positively in the standard H^2 slice.

    Positive means the pair (d/dx2, d/dx1) at e-bar, i.e. det[p, q, r] < 0
    on the first three coordinates.  Returns 0 for points off the slice.
    """
    pts = np.array([p, q, r], dtype=float)
    if pts.shape[1] > 3 and np.max(np.abs(pts[:, 3:])) > 1e-12:
        return 0
    d = np.linalg.det(pts[:, :3])
    return -1 if d > 0 else 1


@dataclass(frozen=True)
class GeodesicTriangle:
    """Ordered geodesic triangle; the loop runs p -> q -> r -> p."""

    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    orientation: int = 1

    @property
    def vertices(self) -> np.ndarray:
        return np.array([self.p, self.q, self.r])

    def reversed(self) -> "GeodesicTriangle":
        return GeodesicTriangle(self.p, self.r, self.q, -self.orientation)

    def side(self, i: int, t) -> np.ndarray:
        v = self.vertices
        return geodesic(v[i], v[(i + 1) % 3], t)


def totally_geodesic_triangle(a, b, c, orientation: Optional[int] = None,
                              tol: float = 1e-12) -> GeodesicTriangle:
    """Triangle with the given vertices; it lies in span{a, b, c}.

    In the standard H^2 slice the orientation is read off the vertex order,
    elsewhere the loop a -> b -> c defines the positive sense unless given.
    """
    a, b, c = (check_point(x) for x in (a, b, c))
    if not (a.shape == b.shape == c.shape):
        raise DimensionMismatch("vertices have different dimensions")
    for x, y in ((a, b), (b, c), (c, a)):
        if distance(x, y) < tol:
            raise CoincidentPoints("triangle vertices must be distinct")
    if orientation is None:
        orientation = slice_orientation(a, b, c) or 1
    return GeodesicTriangle(a, b, c, int(orientation))


def _frame_at(p: np.ndarray) -> np.ndarray:
    """Inverse of the Cartan section at p; maps p to e-bar."""
    p = np.asarray(p, dtype=float)
    w = p[1:]
    n = w.shape[0]
    s = np.eye(n + 1)
    s[0, 0] = p[0]
    s[0, 1:] = -w
    s[1:, 0] = -w
    s[1:, 1:] += np.outer(w, w) / (1.0 + p[0])
    return s


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    dot = float(u @ v)
    minors = np.outer(u, v) - np.outer(v, u)
    wedge = np.sqrt(0.5 * np.sum(minors * minors))
    return float(np.arctan2(wedge, dot))


def interior_angles(tri: GeodesicTriangle) -> np.ndarray:
    v = tri.vertices
    out = np.empty(3)
    for i in range(3):
        m = _frame_at(v[i])
        u = (m @ v[(i + 1) % 3])[1:]
        w = (m @ v[(i + 2) % 3])[1:]
        out[i] = _angle(u, w)
    return out


def is_degenerate(tri: GeodesicTriangle, tol: float = 1e-12) -> bool:
    return robust_area(tri.p, tri.q, tri.r) < tol


def vertex_angles(tri: GeodesicTriangle) -> np.ndarray:
    """Signed interior angles (alpha, beta, gamma) at p, q, r.

    The sign is the triangle's orientation, so all three share it.
    """
    if is_degenerate(tri):
        raise DegenerateTriangle("vertices are collinear")
    return tri.orientation * interior_angles(tri)


def triangle_area(tri: GeodesicTriangle) -> float:
    """Angle defect pi - |alpha + beta + gamma|; 0 (with a warning) if degenerate."""
    if is_degenerate(tri):
        warnings.warn("degenerate triangle, area set to 0", RuntimeWarning, stacklevel=2)
        return 0.0
    return float(np.pi - abs(np.sum(vertex_angles(tri))))


# -- embedded disks ------------------------------------------------------

@dataclass
class DiskEmbedding:
    """A map Phi from the closed unit disk into H^n.

    ``fn`` takes arrays ``x, y`` of equal shape and returns points of shape
    ``x.shape + (n+1,)``.  It must be defined slightly beyond the unit
    circle so that centred difference stencils stay valid there.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dim: int
    name: str = "disk"
    params: dict = field(default_factory=dict)
    smoothness: str = "C-infinity"
    basepoint_on_boundary: bool = True
    fd_step: float = 1e-3

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.fn(x, y)

    def point(self, xy) -> np.ndarray:
        xy = np.asarray(xy, dtype=float)
        return self(xy[..., 0], xy[..., 1])

    def jacobian(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """Partial derivatives by fourth-order centred differences."""
        h = self.fd_step
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)

        def d(fx, fy):
            return (-self(x + 2 * h * fx, y + 2 * h * fy)
                    + 8 * self(x + h * fx, y + h * fy)
                    - 8 * self(x - h * fx, y - h * fy)
                    + self(x - 2 * h * fx, y - 2 * h * fy)) / (12 * h)

        return d(1.0, 0.0), d(0.0, 1.0)

    def boundary(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return self(np.cos(theta), np.sin(theta))

    def check_basepoint(self, tol: float = 1e-9) -> bool:
        b = self(np.array(0.0), np.array(-1.0))
        return bool(np.max(np.abs(b - basepoint(self.dim))) < tol)


def area_density(disk: DiskEmbedding, x, y) -> np.ndarray:
    """sqrt(det G) of the induced metric in Cartesian disk coordinates."""
    dx, dy = disk.jacobian(x, y)
    gxx, gxy, gyy = mink(dx, dx), mink(dx, dy), mink(dy, dy)
    det = gxx * gyy - gxy * gxy
    scale = np.maximum(gxx * gyy, 1e-300)
    if np.any(det <= 1e-14 * scale) or not np.all(np.isfinite(det)):
        raise RankDeficient("Jacobian of the disk map is rank deficient")
    return np.sqrt(det)


def disk_area(disk: DiskEmbedding, resolution: int = 128) -> float:
    """Area of Phi(D^2) by a Gauss-Legendre tensor grid in polar coordinates."""
    r, wr = np.polynomial.legendre.leggauss(resolution)
    r = 0.5 * (r + 1.0)
    wr = 0.5 * wr
    th, wt = np.polynomial.legendre.leggauss(resolution)
    th = np.pi * (th + 1.0)
    wt = np.pi * wt
    rr, tt = np.meshgrid(r, th, indexing="ij")
    dens = area_density(disk, rr * np.cos(tt), rr * np.sin(tt))
    return float(np.einsum("i,j,ij->", wr * r, wt, dens))


def load_tabulated_disk(path: str, name: Optional[str] = None) -> DiskEmbedding:
    """Disk from a CSV of rows ``u, v, x0, ..., xn``.

    Samples are interpolated with a thin-plate RBF (which extends smoothly
    past the sampled region) and renormalized onto the hyperboloid.
    """
    from scipy.interpolate import RBFInterpolator

    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    try:
        data = np.array([[float(c) for c in r] for r in rows])
    except ValueError:
        data = np.array([[float(c) for c in r] for r in rows[1:]])
    if data.ndim != 2 or data.shape[1] < 5:
        raise DimensionMismatch("expected columns u, v, x0, ..., xn with n >= 2")
    uv, pts = data[:, :2], data[:, 2:]
    check_point(pts, tol=1e-6)
    n = pts.shape[1] - 1
    neighbors = None if len(uv) <= 400 else 64
    interp = RBFInterpolator(uv, pts[:, 1:], kernel="thin_plate_spline",
                             neighbors=neighbors)

    def fn(x, y):
        q = np.stack([np.ravel(x), np.ravel(y)], axis=-1)
        w = interp(q).reshape(np.shape(x) + (n,))
        return lift_spatial(w)

    return DiskEmbedding(fn, n, name=name or f"table:{path}",
                         params={"path": str(path)}, smoothness="interpolated")
