"""Built-in disk families, all passing through e-bar at the boundary point (0, -1)."""

import numpy as np

from .errors import DimensionMismatch, RankDeficient
from .hyperbolic import DiskEmbedding, area_density
from .lorentz import exp_map, rotation_generator

FAMILIES = ("geodesic-disk", "tilted-geodesic-disk", "bumped-disk")


def _sinhc(x: np.ndarray) -> np.ndarray:
    """sinh(x) / x, smooth through 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 6.0, np.sinh(safe) / safe)


def _polar_geodesic(r: float, n: int):
    """Geodesic polar coordinates of radius r around q = exp(r E_{01}) e-bar."""
    q = np.zeros(n + 1)
    q[0], q[1] = np.cosh(r), np.sinh(r)
    f2 = np.zeros(n + 1)
    f2[0], f2[1] = np.sinh(r), np.cosh(r)
    f1 = np.zeros(n + 1)
    f1[2] = 1.0

    def fn(x, y):
        rho = np.hypot(x, y)
        a = (np.cosh(r * rho))[..., None] * q
        b = (r * _sinhc(r * rho))[..., None] * (x[..., None] * f1 + y[..., None] * f2)
        return a + b

    return fn


def geodesic_disk(r: float = 0.8, n: int = 2) -> DiskEmbedding:
    """Round disk of hyperbolic radius r in the standard H^2 slice.

    The counterclockwise boundary of D^2 runs in the positive sense, and the
    area is 2 pi (cosh r - 1).
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    if n < 2:
        raise DimensionMismatch("n must be at least 2")
    return DiskEmbedding(_polar_geodesic(r, n), n, name="geodesic-disk", params={"radius": r})


def tilted_geodesic_disk(r: float = 0.8, tilt: float = 0.6, n: int = 3) -> DiskEmbedding:
    """The geodesic disk moved by a rotation in K fixing e-bar.

    In H^n with n >= 3 the rotation turns axis 2 towards axis 3, so the disk
    leaves the standard slice; for n = 2 it is a rotation of the slice.
    """
    k = exp_map(tilt * (rotation_generator(n, 2, 3) if n >= 3 else rotation_generator(n, 1, 2)))
    base = _polar_geodesic(r, n)

    def fn(x, y):
        return base(x, y) @ k.T

    return DiskEmbedding(fn, n, name="tilted-geodesic-disk", params={"radius": r, "tilt": tilt})


def bumped_disk(r: float = 0.8, amplitude: float = 0.2, frequency: float = 2.0,
                n: int = 3) -> DiskEmbedding:
    """Geodesic disk pushed along the normal e3 by A (1 + y)/2 cos(f x).

    The bump vanishes at the basepoint.  Needs n >= 3; large amplitudes are
    rejected when the Jacobian degenerates.
    """
    if n < 3:
        raise DimensionMismatch("bumped-disk needs n >= 3")
    base = _polar_geodesic(r, n)
    e3 = np.zeros(n + 1)
    e3[3] = 1.0

    def fn(x, y):
        beta = amplitude * 0.5 * (1.0 + y) * np.cos(frequency * x)
        return np.cosh(beta)[..., None] * base(x, y) + np.sinh(beta)[..., None] * e3

    disk = DiskEmbedding(fn, n, name="bumped-disk",
                         params={"radius": r, "amplitude": amplitude, "frequency": frequency})
    g = np.linspace(-0.99, 0.99, 25)
    xx, yy = np.meshgrid(g, g)
    inside = xx ** 2 + yy ** 2 < 1.0
    area_density(disk, xx[inside], yy[inside])  # raises RankDeficient when folded
    return disk


def make_disk(name: str, n: int, radius: float = 0.8, amplitude: float = 0.2,
              tilt: float = 0.6, frequency: float = 2.0) -> DiskEmbedding:
    if name == "geodesic-disk":
        return geodesic_disk(radius, n)
    if name == "tilted-geodesic-disk":
        return tilted_geodesic_disk(radius, tilt, n)
    if name == "bumped-disk":
        return bumped_disk(radius, amplitude, frequency, n)
    raise ValueError(f"unknown disk family {name!r}; choose from {', '.join(FAMILIES)}")


__all__ = ["FAMILIES", "geodesic_disk", "tilted_geodesic_disk", "bumped_disk",
           "make_disk", "RankDeficient"]
