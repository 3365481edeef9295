import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holonomy_lab import lorentz as lz
from holonomy_lab.errors import DomainMismatch
from holonomy_lab.hyperbolic import basepoint, distance
from holonomy_lab.paths import PiecewisePath, compose_group_path

from oracles import slice_point

SQUARE = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float)


def test_polyline_constant_speed_and_breakpoints():
    p = PiecewisePath.polyline(SQUARE)
    assert np.allclose(p.breakpoints, [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(p(0.25), [1, 0])
    # outgoing derivative at a breakpoint
    assert np.allclose(p.velocity(0.25), [0, 4])
    assert p.is_loop() and abs(p.length() - 4) < 1e-14


def test_reverse_and_concat():
    p = PiecewisePath.polyline(SQUARE[:3])
    r = p.reversed()
    t = np.linspace(0, 1, 11)
    assert np.allclose(r(t), p(1 - t))
    q = p.concat(r)
    assert q.is_loop() and np.allclose(q(0.5), [1, 1])


def test_domain_checks():
    p = PiecewisePath.polyline(SQUARE)
    with pytest.raises(DomainMismatch):
        p(1.5)
    with pytest.raises(DomainMismatch):
        p.concat(PiecewisePath.geodesic_polygon([basepoint(2), slice_point(1, 0)]))


@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2)), min_size=2, max_size=6,
                unique=True))
def test_geodesic_polygon_hits_vertices(xy):
    pts = np.array([slice_point(x, y) for x, y in xy])
    keep = [0] + [i for i in range(1, len(pts)) if distance(pts[i - 1], pts[i]) > 1e-6]
    pts = pts[keep]
    if len(pts) < 2:
        return
    path = PiecewisePath.geodesic_polygon(pts)
    assert np.allclose(path(path.breakpoints), pts, atol=1e-10)
    assert abs(path.length() - sum(distance(a, b) for a, b in zip(pts, pts[1:]))) < 1e-9


def test_group_path_endpoint():
    E1, E2, E3 = lz.so12_generators(2)
    omegas = [0.3 * E1, 0.2 * E3, -0.1 * E2]
    path = PiecewisePath.group_one_parameter(np.eye(3), omegas)
    want = lz.exp_map(0.3 * E1) @ lz.exp_map(0.2 * E3) @ lz.exp_map(-0.1 * E2)
    assert np.allclose(compose_group_path(path), want, atol=1e-13)
    assert np.allclose(path.end, want, atol=1e-13)


def test_function_path_length_by_quadrature():
    p = PiecewisePath.from_function(lambda t: np.stack([np.cos(t), np.sin(t)], -1),
                                    lambda t: np.stack([-np.sin(t), np.cos(t)], -1), "disk")
    assert abs(p.length() - 1.0) < 1e-12
