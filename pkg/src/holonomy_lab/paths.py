"""Time-parametrized piecewise curves in the disk, in H^n and in G.

A path is a list of segments on consecutive subintervals of [0, 1].  Every
segment evaluates its point and velocity in global time, so consumers (the
lift integrator, the rho distance) never need to know the segment kind.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainMismatch, NonFiniteCurve
from .hyperbolic import distance, mink, unit_tangent
from .lorentz import compose, exp_map, group_inverse, log_map

SPACES = ("disk", "hyperbolic", "group")


class Segment:
    t0: float
    t1: float

    def point(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def velocity(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def length(self) -> float:
        raise NotImplementedError

    def rescaled(self, t0: float, t1: float) -> "Segment":
        raise NotImplementedError

    def reversed(self, t0: float, t1: float) -> "Segment":
        raise NotImplementedError

    def _s(self, t):
        return (np.asarray(t, dtype=float) - self.t0) / (self.t1 - self.t0)


@dataclass
class LinearSegment(Segment):
    """Straight segment in the plane."""

    a: np.ndarray
    b: np.ndarray
    t0: float
    t1: float

    def point(self, t):
        s = self._s(t)[..., None]
        return (1.0 - s) * self.a + s * self.b

    def velocity(self, t):
        v = (self.b - self.a) / (self.t1 - self.t0)
        return np.broadcast_to(v, np.shape(t) + v.shape).copy()

    def length(self):
        return float(np.linalg.norm(self.b - self.a))

    def rescaled(self, t0, t1):
        return LinearSegment(self.a, self.b, t0, t1)

    def reversed(self, t0, t1):
        return LinearSegment(self.b, self.a, t0, t1)


@dataclass
class GeodesicSegment(Segment):
    """Constant-speed hyperbolic geodesic from ``a`` to ``b``."""

    a: np.ndarray
    b: np.ndarray
    t0: float
    t1: float

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.d = float(distance(self.a, self.b))
        self.u = unit_tangent(self.a, self.b) if self.d > 0 else np.zeros_like(self.a)

    def point(self, t):
        s = self._s(t)[..., None] * self.d
        out = np.cosh(s) * self.a + np.sinh(s) * self.u
        t = np.asarray(t)
        out = np.where((t == self.t0)[..., None], self.a, out)
        return np.where((t == self.t1)[..., None], self.b, out)

    def velocity(self, t):
        s = self._s(t)[..., None] * self.d
        rate = self.d / (self.t1 - self.t0)
        return rate * (np.sinh(s) * self.a + np.cosh(s) * self.u)

    def length(self):
        return self.d

    def rescaled(self, t0, t1):
        return GeodesicSegment(self.a, self.b, t0, t1)

    def reversed(self, t0, t1):
        return GeodesicSegment(self.b, self.a, t0, t1)


@dataclass
class GroupSegment(Segment):
    """One-parameter segment g exp(s Omega), s in [0, 1]."""

    g: np.ndarray
    omega: np.ndarray
    t0: float
    t1: float

    def point(self, t):
        s = np.atleast_1d(self._s(t))
        out = np.array([self.g @ exp_map(si * self.omega) for si in s])
        return out.reshape(np.shape(t) + self.g.shape)

    def velocity(self, t):
        return self.point(t) @ (self.omega / (self.t1 - self.t0))

    def left_velocity(self, t):
        """g^{-1} g' which is constant on the segment."""
        v = self.omega / (self.t1 - self.t0)
        return np.broadcast_to(v, np.shape(t) + v.shape).copy()

    def length(self):
        return float(np.sqrt(0.5 * np.sum(self.omega ** 2)))

    def rescaled(self, t0, t1):
        return GroupSegment(self.g, self.omega, t0, t1)

    def reversed(self, t0, t1):
        end = self.g @ exp_map(self.omega)
        return GroupSegment(end, -self.omega, t0, t1)


@dataclass
class FunctionSegment(Segment):
    """Curve given by callables in global time."""

    fn: Callable
    dfn: Callable
    t0: float
    t1: float
    metric: str = "euclid"

    def point(self, t):
        return np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=float)

    def velocity(self, t):
        return np.asarray(self.dfn(np.asarray(t, dtype=float)), dtype=float)

    def length(self, nodes: int = 64):
        x, w = np.polynomial.legendre.leggauss(nodes)
        h = 0.5 * (self.t1 - self.t0)
        t = self.t0 + h * (x + 1.0)
        v = self.velocity(t)
        if self.metric == "mink":
            speed = np.sqrt(np.maximum(mink(v, v), 0.0))
        elif self.metric == "algebra":
            left = group_inverse(self.point(t)) @ v
            speed = np.sqrt(0.5 * np.sum(left * left, axis=(-1, -2)))
        else:
            speed = np.linalg.norm(v.reshape(len(t), -1), axis=-1)
        return float(h * np.sum(w * speed))

    def rescaled(self, t0, t1):
        a, b = self.t0, self.t1
        k = (b - a) / (t1 - t0)
        return FunctionSegment(lambda t: self.fn(a + (t - t0) * k),
                               lambda t: k * self.dfn(a + (t - t0) * k),
                               t0, t1, self.metric)

    def reversed(self, t0, t1):
        a, b = self.t0, self.t1
        k = (b - a) / (t1 - t0)
        return FunctionSegment(lambda t: self.fn(b - (t - t0) * k),
                               lambda t: -k * self.dfn(b - (t - t0) * k),
                               t0, t1, self.metric)


class PiecewisePath:
    """Continuous curve on [0, 1] made of segments on consecutive intervals."""

    def __init__(self, segments: Sequence[Segment], space: str,
                 constant_speed: bool = False, tol: float = 1e-10,
                 validate: bool = True):
        if space not in SPACES:
            raise ValueError(f"unknown space {space!r}")
        if not segments:
            raise DomainMismatch("a path needs at least one segment")
        self.segments = list(segments)
        self.space = space
        self.constant_speed = constant_speed
        if abs(self.segments[0].t0) > 1e-15 or abs(self.segments[-1].t1 - 1.0) > 1e-12:
            raise DomainMismatch("path must be parametrized on [0, 1]")
        for s, nxt in zip(self.segments, self.segments[1:]):
            if abs(s.t1 - nxt.t0) > 1e-15:
                raise DomainMismatch("segments are not consecutive")
            if not validate:
                continue
            gap = np.max(np.abs(s.point(np.array(s.t1)) - nxt.point(np.array(nxt.t0))))
            if gap > tol * max(1.0, float(np.max(np.abs(s.point(np.array(s.t1)))))):
                raise DomainMismatch(f"path is discontinuous at t={s.t1} (gap {gap:.2e})")

    # -- construction ---------------------------------------------------

    @staticmethod
    def _times(lengths, constant_speed, times):
        m = len(lengths)
        if times is not None:
            times = np.asarray(times, dtype=float)
            if times.shape != (m + 1,) or np.any(np.diff(times) <= 0):
                raise DomainMismatch("times must increase and match the vertex count")
            return times
        total = float(np.sum(lengths))
        if constant_speed and total > 0 and np.all(np.asarray(lengths) > 0):
            t = np.concatenate([[0.0], np.cumsum(lengths) / total])
        else:
            t = np.linspace(0.0, 1.0, m + 1)
        t[-1] = 1.0
        return t

    @classmethod
    def geodesic_polygon(cls, points, times=None, constant_speed: bool = True):
        """Piecewise geodesic through points on the hyperboloid."""
        pts = np.asarray(points, dtype=float)
        if len(pts) == 1:
            pts = np.array([pts[0], pts[0]])
        lengths = [float(distance(a, b)) for a, b in zip(pts, pts[1:])]
        t = cls._times(lengths, constant_speed, times)
        segs = [GeodesicSegment(a, b, t0, t1)
                for a, b, t0, t1 in zip(pts, pts[1:], t, t[1:])]
        return cls(segs, "hyperbolic", constant_speed and times is None)

    @classmethod
    def polyline(cls, points, times=None, constant_speed: bool = True):
        """Piecewise linear path in the plane."""
        pts = np.asarray(points, dtype=float)
        if len(pts) == 1:
            pts = np.array([pts[0], pts[0]])
        lengths = [float(np.linalg.norm(b - a)) for a, b in zip(pts, pts[1:])]
        t = cls._times(lengths, constant_speed, times)
        segs = [LinearSegment(a, b, t0, t1)
                for a, b, t0, t1 in zip(pts, pts[1:], t, t[1:])]
        return cls(segs, "disk", constant_speed and times is None)

    @classmethod
    def group_samples(cls, elements, times=None):
        """Group path joining consecutive samples by one-parameter segments."""
        gs = np.asarray(elements, dtype=float)
        omegas = [log_map(group_inverse(a) @ b) for a, b in zip(gs, gs[1:])]
        t = cls._times([1.0] * len(omegas), False, times)
        segs = [GroupSegment(g, om, t0, t1)
                for g, om, t0, t1 in zip(gs, omegas, t, t[1:])]
        return cls(segs, "group", tol=1e-8)

    @classmethod
    def group_one_parameter(cls, start, omegas, times=None, validate: bool = False):
        """Group path start * exp(O_1) * exp(O_2) ... with given increments."""
        t = cls._times([1.0] * len(omegas), False, times)
        g = np.asarray(start, dtype=float)
        elems = [g]
        for om in omegas[:-1]:
            elems.append(elems[-1] @ exp_map(om))
        segs = [GroupSegment(a, om, t0, t1)
                for a, om, t0, t1 in zip(elems, omegas, t, t[1:])]
        return cls(segs, "group", tol=1e-8, validate=validate)

    @classmethod
    def from_function(cls, fn, dfn, space: str, breakpoints=(0.0, 1.0)):
        """Path given by callables; ``breakpoints`` mark non-smooth times."""
        metric = {"hyperbolic": "mink", "group": "algebra"}.get(space, "euclid")
        b = list(breakpoints)
        segs = [FunctionSegment(fn, dfn, t0, t1, metric) for t0, t1 in zip(b, b[1:])]
        return cls(segs, space)

    # -- evaluation -----------------------------------------------------

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([s.t0 for s in self.segments] + [self.segments[-1].t1])

    def _index(self, t: np.ndarray) -> np.ndarray:
        ends = np.array([s.t1 for s in self.segments[:-1]])
        return np.searchsorted(ends, t, side="right")

    def _eval(self, t, method: str) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any((t < -1e-12) | (t > 1 + 1e-12)):
            raise DomainMismatch("time outside [0, 1]")
        flat = np.clip(np.atleast_1d(t).ravel(), 0.0, 1.0)
        idx = self._index(flat)
        out = None
        for i in np.unique(idx):
            sel = idx == i
            vals = getattr(self.segments[i], method)(flat[sel])
            if out is None:
                out = np.empty((flat.size,) + vals.shape[1:])
            out[sel] = vals
        if not np.all(np.isfinite(out)):
            raise NonFiniteCurve("path produced non-finite values")
        return out.reshape(t.shape + out.shape[1:])

    def __call__(self, t) -> np.ndarray:
        return self._eval(t, "point")

    def velocity(self, t) -> np.ndarray:
        """Velocity; at a breakpoint the outgoing (right) derivative."""
        return self._eval(t, "velocity")

    @property
    def start(self) -> np.ndarray:
        return self.segments[0].point(np.array(0.0))

    @property
    def end(self) -> np.ndarray:
        return self.segments[-1].point(np.array(1.0))

    def length(self) -> float:
        return float(sum(s.length() for s in self.segments))

    def segment_lengths(self) -> np.ndarray:
        return np.array([s.length() for s in self.segments])

    def is_loop(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.start - self.end)) < tol)

    @property
    def vertices(self) -> Optional[np.ndarray]:
        """Breakpoint images, for geodesic and linear paths."""
        if not all(isinstance(s, (GeodesicSegment, LinearSegment)) for s in self.segments):
            return None
        return np.array([s.a for s in self.segments] + [self.segments[-1].b])

    # -- operations -----------------------------------------------------

    def reversed(self) -> "PiecewisePath":
        segs = [s.reversed(1.0 - s.t1, 1.0 - s.t0) for s in reversed(self.segments)]
        segs[0].t0, segs[-1].t1 = 0.0, 1.0
        return PiecewisePath(segs, self.space, self.constant_speed)

    def reparametrized(self, constant_speed: bool = True) -> "PiecewisePath":
        """Same image and segments with segment durations proportional to length."""
        lengths = self.segment_lengths()
        t = self._times(lengths, constant_speed, None)
        segs = [s.rescaled(t0, t1) for s, t0, t1 in zip(self.segments, t, t[1:])]
        return PiecewisePath(segs, self.space, constant_speed)

    def concat(self, other: "PiecewisePath", constant_speed: bool = True) -> "PiecewisePath":
        """Concatenation, retimed proportionally to length (or uniformly)."""
        if other.space != self.space:
            raise DomainMismatch("cannot concatenate paths in different spaces")
        segs = self.segments + other.segments
        t = self._times([s.length() for s in segs], constant_speed, None)
        return PiecewisePath([s.rescaled(a, b) for s, a, b in zip(segs, t, t[1:])],
                             self.space, constant_speed)


def compose_group_path(path: PiecewisePath) -> np.ndarray:
    """Endpoint of a one-parameter group path, accumulated with drift control."""
    return compose([path.segments[0].g] + [exp_map(s.omega) for s in path.segments])
