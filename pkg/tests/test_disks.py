import numpy as np
import pytest

from holonomy_lab import disks
from holonomy_lab.errors import DimensionMismatch, RankDeficient
from holonomy_lab.hyperbolic import area_density, disk_area, hyperboloid_residual


@pytest.mark.parametrize("name,n", [("geodesic-disk", 2), ("geodesic-disk", 4),
                                    ("tilted-geodesic-disk", 3), ("tilted-geodesic-disk", 2),
                                    ("bumped-disk", 3)])
def test_family_basics(name, n):
    d = disks.make_disk(name, n)
    assert d.check_basepoint()
    g = np.linspace(-1, 1, 9)
    xx, yy = np.meshgrid(g, g)
    assert np.max(np.abs(hyperboloid_residual(d(xx, yy)))) < 1e-12
    assert np.all(area_density(d, xx, yy) > 0)


def test_tilted_disk_is_isometric_copy():
    a = disk_area(disks.tilted_geodesic_disk(0.8, 0.6, 3))
    assert abs(a - 2 * np.pi * (np.cosh(0.8) - 1)) < 1e-10
    p = disks.tilted_geodesic_disk(0.8, 0.6, 3)(0.3, 0.2)
    assert abs(p[3]) > 1e-3


def test_bumped_disk_leaves_slice_and_grows():
    d = disks.bumped_disk(0.8, 0.3, 2.0)
    assert abs(d(0.0, 0.5)[3]) > 1e-3
    assert disk_area(d) > 2 * np.pi * (np.cosh(0.8) - 1)


def test_bad_parameters():
    with pytest.raises(DimensionMismatch):
        disks.bumped_disk(n=2)
    with pytest.raises(ValueError):
        disks.make_disk("saddle", 3)
    # a normal graph over a geodesic disk is always immersed; large bumps still pass
    disks.bumped_disk(0.8, amplitude=3.0, frequency=9.0)


def test_rank_check_catches_folded_map():
    from holonomy_lab.hyperbolic import DiskEmbedding, lift_spatial

    def fn(x, y):
        w = np.stack([0.5 * x, 0.5 * x], -1)
        return lift_spatial(w)

    with pytest.raises(RankDeficient):
        area_density(DiskEmbedding(fn, 2), np.array([0.1]), np.array([0.2]))
