"""Ordered barycentric subdivision of the disk.

Step n consists of interior triangles T_{0 a1..an}, obtained by subdividing
an inscribed equilateral triangle T0 n times, and exterior triangles
S^{b0..bk}_{0 c1..cm} (k >= 1, k + m = n) that fill the circular caps
between T0 and the unit circle, each subdivided m times.  The union at step
n is the inscribed regular 3 * 2^n-gon.

Every triangle has a start and an end vertex.  Children of a triangle with
start s, end e and initial side (s, w) are, going around the barycenter B,

    p0 = (s, m_sw, B)  p1 = (m_sw, w, B)  p2 = (w, m_wx, B)
    p3 = (m_wx, x, B)  p4 = (x, m_xs, B)  p5 = (m_xs, s, B)

and they are numbered 1..6 in the order p0..p5 when s = e, and
p0, p1, p2, p5, p4, p3 otherwise (then x = e).  The first subdivision of
S^{b}_0 with k + b_k even uses p0, p1, p2, p5, p3, p4 instead.
"""

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AddressError, UnsupportedDepth

MAX_DEPTH = 4


# -- addresses -----------------------------------------------------------

@dataclass(frozen=True, order=False)
class TriangleAddress:
    """Interior T_{lower} or exterior S^{upper}_{lower}; ``lower`` starts with 0."""

    kind: str
    lower: tuple
    upper: tuple = ()

    def __post_init__(self):
        lower, upper = tuple(self.lower), tuple(self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.kind not in ("T", "S"):
            raise AddressError(f"unknown kind {self.kind!r}")
        if not lower or lower[0] != 0 or any(not 1 <= c <= 6 for c in lower[1:]):
            raise AddressError(f"bad lower word {lower}")
        if self.kind == "T":
            if upper:
                raise AddressError("interior addresses have no upper word")
        else:
            if len(upper) < 2 or not 1 <= upper[0] <= 3 or any(b not in (1, 2) for b in upper[1:]):
                raise AddressError(f"bad upper word {upper}")

    @property
    def k(self) -> int:
        return len(self.upper) - 1 if self.kind == "S" else 0

    @property
    def m(self) -> int:
        return len(self.lower) - 1

    @property
    def step(self) -> int:
        return self.k + self.m

    @property
    def parent(self) -> Optional["TriangleAddress"]:
        if self.m == 0:
            return None
        return TriangleAddress(self.kind, self.lower[:-1], self.upper)

    def child(self, digit: int) -> "TriangleAddress":
        return TriangleAddress(self.kind, self.lower + (digit,), self.upper)

    def sort_key(self) -> tuple:
        if self.kind == "T":
            return (0, 0, (), self.lower)
        sign = -1 if self.k % 2 else 1
        return (1, self.k, tuple(sign * b for b in self.upper), self.lower)

    def __str__(self) -> str:
        low = "".join(map(str, self.lower))
        if self.kind == "T":
            return "T" + low
        return "S^" + "".join(map(str, self.upper)) + "_" + low

    @classmethod
    def parse(cls, text: str) -> "TriangleAddress":
        text = text.strip()
        try:
            if text.startswith("T"):
                return cls("T", tuple(int(c) for c in text[1:]))
            if text.startswith("S^") and "_" in text:
                up, low = text[2:].split("_", 1)
                return cls("S", tuple(int(c) for c in low), tuple(int(c) for c in up))
        except ValueError as exc:
            raise AddressError(f"cannot parse address {text!r}") from exc
        raise AddressError(f"cannot parse address {text!r}")


def order_compare(a: TriangleAddress, b: TriangleAddress) -> int:
    """-1, 0 or 1: interior before exterior, dictionary order on interiors,
    exteriors by k, then upper word (reversed when k is odd), then lower word."""
    if a.step != b.step:
        raise AddressError("addresses belong to different steps")
    ka, kb = a.sort_key(), b.sort_key()
    return (ka > kb) - (ka < kb)


# -- geometry ------------------------------------------------------------

class VertexTable:
    """Planar vertices identified up to rounding; ids are insertion order."""

    def __init__(self, resolution: float = 1e-10):
        self.res = resolution
        self.coords: list = []
        self._ids: dict = {}

    def _key(self, p):
        return (int(round(p[0] / self.res)), int(round(p[1] / self.res)))

    def add(self, p) -> int:
        p = np.asarray(p, dtype=float)
        kx, ky = self._key(p)
        for dx in (0, -1, 1):
            for dy in (0, -1, 1):
                i = self._ids.get((kx + dx, ky + dy))
                if i is not None and np.max(np.abs(self.coords[i] - p)) < 1e-9:
                    return i
        i = len(self.coords)
        self.coords.append(p)
        self._ids[(kx, ky)] = i
        return i

    def __getitem__(self, i) -> np.ndarray:
        return self.coords[i]

    def mirror(self) -> None:
        """Reflect every vertex in the vertical axis, keeping ids."""
        self.coords = [np.array([-c[0], c[1]]) for c in self.coords]
        self._ids = {self._key(c): i for i, c in enumerate(self.coords)}

    def array(self) -> np.ndarray:
        return np.array(self.coords)


@dataclass
class PlanarTriangle:
    """Triangle in the disk with designated start, end and initial-side vertex."""

    ids: tuple
    start: int
    end: int
    initial: int
    table: VertexTable = field(repr=False)
    orientation: int = 1

    @property
    def vertices(self) -> np.ndarray:
        return np.array([self.table[i] for i in self.ids])

    @property
    def start_point(self) -> np.ndarray:
        return self.table[self.start]

    @property
    def end_point(self) -> np.ndarray:
        return self.table[self.end]

    @property
    def barycenter(self) -> np.ndarray:
        v = self.vertices
        return (v[0] + v[1] + v[2]) / 3.0

    def signed_area(self) -> float:
        a, b, c = self.vertices
        return 0.5 * float((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    def loop_from(self, v: int) -> list:
        """Vertex ids v, ., ., v running around the triangle in the positive sense."""
        i = self.ids.index(v)
        cyc = [self.ids[(i + j) % 3] for j in range(3)]
        if np.sign(self.signed_area()) != self.orientation:
            cyc = [cyc[0], cyc[2], cyc[1]]
        return cyc + [v]

    def edges(self) -> list:
        a, b, c = self.ids
        return [frozenset(e) for e in ((a, b), (b, c), (c, a))]


def _children(tri: PlanarTriangle, swap: bool) -> list:
    tab = tri.table
    s, e, w = tri.start, tri.end, tri.initial
    x = next(v for v in tri.ids if v not in (s, w))
    ps, pw, px = tab[s], tab[w], tab[x]
    b = tab.add((ps + pw + px) / 3.0)
    msw = tab.add(0.5 * (ps + pw))
    mwx = tab.add(0.5 * (pw + px))
    mxs = tab.add(0.5 * (px + ps))
    pieces = [(s, msw, b), (msw, w, b), (w, mwx, b), (mwx, x, b), (x, mxs, b), (mxs, s, b)]
    if s == e:
        order = [0, 1, 2, 3, 4, 5]
    elif swap:
        order = [0, 1, 2, 5, 3, 4]
    else:
        order = [0, 1, 2, 5, 4, 3]
    out = []
    visited: list = []
    for digit, idx in enumerate(order, start=1):
        ids = pieces[idx]
        cs = s if digit == 1 else b
        ce = e if digit == 6 else b
        if cs != ce:
            init = next(v for v in ids if v not in (cs, ce))
        else:
            shared = [v for v in ids if v != b
                      for prev in reversed(visited) if {v, b} <= set(prev)]
            if not shared:
                raise AddressError("middle child shares no side with its siblings")
            init = shared[0]
        out.append((digit, PlanarTriangle(ids, cs, ce, init, tab, tri.orientation)))
        visited.append(ids)
    return out


def _subdivide(addr, tri, depth, first_swap=False):
    if depth == 0:
        return [(addr, tri)]
    out = []
    for digit, child in _children(tri, first_swap):
        out.extend(_subdivide(addr.child(digit), child, depth - 1))
    return out


def _circle(theta: float) -> np.ndarray:
    return np.array([np.cos(theta), np.sin(theta)])


def _exterior(table, upper, p, q, tp, tq, n, orientation):
    """S-triangles over the cap cut off by the directed chord p -> q."""
    out = []
    mc = table.add(0.5 * (table[p] + table[q]))
    tm = 0.5 * (tp + tq)
    ma = table.add(_circle(tm))
    for b, ids, (fp, fq, fa, fb) in ((1, (p, mc, ma), (p, ma, tp, tm)),
                                     (2, (mc, q, ma), (ma, q, tm, tq))):
        word = upper + (b,)
        k = len(word) - 1
        start, end = (fq, fp) if k % 2 else (fp, fq)
        init = next(v for v in ids if v not in (start, end))
        tri = PlanarTriangle(ids, start, end, init, table, orientation)
        addr = TriangleAddress("S", (0,), word)
        swap = (k + b) % 2 == 0
        out.extend(_subdivide(addr, tri, n - k, first_swap=swap))
        if k < n:
            out.extend(_exterior(table, word, fp, fq, fa, fb, n, orientation))
    return out


@dataclass
class SubdivisionLevel:
    """All triangles of one step, sorted by ``order_compare``."""

    n: int
    orientation: int
    entries: list
    table: VertexTable = field(repr=False)
    basepoint: int = 0

    def __post_init__(self):
        self.index = {addr: i for i, (addr, _) in enumerate(self.entries)}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def addresses(self) -> list:
        return [a for a, _ in self.entries]

    @property
    def triangles(self) -> list:
        return [t for _, t in self.entries]

    def triangle(self, addr) -> PlanarTriangle:
        if isinstance(addr, str):
            addr = TriangleAddress.parse(addr)
        if addr not in self.index:
            raise AddressError(f"{addr} is not a triangle of step {self.n}")
        return self.entries[self.index[addr]][1]

    def with_swapped(self, i: int, j: int) -> "SubdivisionLevel":
        """Copy with two entries exchanged (fault injection for audits)."""
        entries = list(self.entries)
        entries[i], entries[j] = entries[j], entries[i]
        return SubdivisionLevel(self.n, self.orientation, entries, self.table, self.basepoint)

    def to_records(self) -> list:
        return [{"address": str(a),
                 "vertices": [[float(c) for c in v] for v in t.vertices],
                 "start": [float(c) for c in t.start_point],
                 "end": [float(c) for c in t.end_point],
                 "order_index": i}
                for i, (a, t) in enumerate(self.entries)]

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_records(), **kw)


def build_level(n: int, orientation: int = 1) -> SubdivisionLevel:
    """Step-n subdivision of the unit disk, basepoint at angle -pi/2."""
    if not isinstance(n, (int, np.integer)) or not 0 <= n <= MAX_DEPTH:
        raise UnsupportedDepth(f"depth must be an integer in 0..{MAX_DEPTH}, got {n}")
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    table = VertexTable()
    angles = [-np.pi / 2, np.pi / 6, 5 * np.pi / 6]
    base, v1, v2 = (table.add(_circle(a)) for a in angles)
    t0 = PlanarTriangle((base, v1, v2), base, base, v1, table, 1)
    entries = _subdivide(TriangleAddress("T", (0,)), t0, n)
    sides = [(base, v1, angles[0], angles[1]), (v1, v2, angles[1], angles[2]),
             (v2, base, angles[2], angles[0] + 2 * np.pi)]
    for b0, (p, q, tp, tq) in enumerate(sides, start=1):
        if n >= 1:
            entries.extend(_exterior(table, (b0,), p, q, tp, tq, n, 1))
    if orientation == -1:
        # mirror image in the vertical axis: a clockwise copy with the same combinatorics
        table.mirror()
        for _, t in entries:
            t.orientation = -1
    entries.sort(key=lambda e: e[0].sort_key())
    return SubdivisionLevel(n, orientation, entries, table, base)


def start_point(level: SubdivisionLevel, addr) -> np.ndarray:
    return level.triangle(addr).start_point


def end_point(level: SubdivisionLevel, addr) -> np.ndarray:
    return level.triangle(addr).end_point


def grid_interval_count(n: int) -> int:
    """|D_n| - 1 = 6^n + sum_k 2^(k-1) 6^(n-k+1)."""
    return 6 ** n + sum(2 ** (k - 1) * 6 ** (n - k + 1) for k in range(1, n + 1))


# -- audit ---------------------------------------------------------------

def _boundary_is_cycle(boundary: set) -> bool:
    if not boundary:
        return False
    adj: dict = {}
    for e in boundary:
        a, b = tuple(e)
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    if any(len(v) != 2 for v in adj.values()):
        return False
    first = next(iter(adj))
    seen, prev, cur = {first}, None, first
    while True:
        nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        if nxt == first:
            break
        if nxt in seen:
            return False
        seen.add(nxt)
        prev, cur = cur, nxt
    return len(seen) == len(adj)


def _close(p, q, tol=1e-12) -> bool:
    return bool(np.max(np.abs(np.asarray(p) - np.asarray(q))) < tol)


def verify_properties(level: SubdivisionLevel, parent: Optional[SubdivisionLevel] = None) -> dict:
    """Check Properties 1-4 and the tiling; returns a report of violations.

    P1  every triangle after the first meets the earlier union in a full
        side, namely its initial side (which its children 1 and 2 split);
    P2  every prefix union is a disk: edge-connected, V - E + F = 1 and a
        boundary that is one simple cycle;
    P3  child 1 starts where its parent starts, child 6 ends where it ends,
        all other roles sit at the parent's barycenter;
    P4  consecutive triangles chain end -> start, from and to the basepoint.
    """
    viol = {"P1": [], "P2": [], "P3": [], "P4": [], "tiling": []}
    tris = level.triangles
    addrs = level.addresses
    if level.n > 0 and parent is None:
        parent = build_level(level.n - 1, level.orientation)

    # P4
    if tris[0].start != level.basepoint:
        viol["P4"].append(f"{addrs[0]} does not start at the basepoint")
    if tris[-1].end != level.basepoint:
        viol["P4"].append(f"{addrs[-1]} does not end at the basepoint")
    for (a, t), (b, u) in zip(level.entries, level.entries[1:]):
        if t.end != u.start:
            viol["P4"].append(f"end of {a} != start of {b}")

    # P1, P2 incrementally
    count: dict = {}
    boundary: set = set()
    verts: set = set()
    for i, (a, t) in enumerate(level.entries):
        if t.start not in t.ids or t.end not in t.ids or t.initial not in t.ids:
            viol["tiling"].append(f"{a}: role vertex is not a vertex")
        if i > 0:
            side = frozenset((t.start, t.initial))
            if side not in boundary:
                viol["P1"].append(f"{a}: initial side not on the boundary of its predecessors")
            if not any(e in boundary for e in t.edges()):
                viol["P2"].append(f"{a}: not edge-connected to its predecessors")
        for e in t.edges():
            count[e] = count.get(e, 0) + 1
            if count[e] == 1:
                boundary.add(e)
            elif count[e] == 2:
                boundary.discard(e)
            else:
                viol["tiling"].append(f"{a}: edge used more than twice")
        verts.update(t.ids)
        euler = len(verts) - len(count) + (i + 1)
        if euler != 1 or not _boundary_is_cycle(boundary):
            viol["P2"].append(f"prefix ending at {a} is not a disk")

    # coherent orientation: each directed edge occurs at most once
    directed: set = set()
    for a, t in level.entries:
        cyc = t.loop_from(t.ids[0])
        for e in zip(cyc, cyc[1:]):
            if e in directed:
                viol["tiling"].append(f"{a}: orientation clash on edge {e}")
            directed.add(e)
    areas = np.array([t.signed_area() for t in tris])
    m = 3 * 2 ** level.n
    polygon = 0.5 * m * np.sin(2 * np.pi / m)
    if abs(np.sum(np.abs(areas)) - polygon) > 1e-12:
        viol["tiling"].append("areas do not add up to the inscribed polygon")

    # P3 against the previous step
    if parent is not None:
        for a, t in level.entries:
            pa = a.parent
            if pa is None:
                continue
            try:
                pt = parent.triangle(pa)
            except AddressError:
                viol["P3"].append(f"{a}: parent {pa} missing from step {parent.n}")
                continue
            bc = pt.barycenter
            d = a.lower[-1]
            want_s = pt.start_point if d == 1 else bc
            want_e = pt.end_point if d == 6 else bc
            if not (_close(t.start_point, want_s) and _close(t.end_point, want_e)):
                viol["P3"].append(f"{a}: start/end disagree with parent {pa}")
            if d in (1, 2):
                ps, pw = pt.start_point, pt.table[pt.initial]
                on_side = sum(_near_segment(v, ps, pw) for v in t.vertices)
                if on_side < 2:
                    viol["P1"].append(f"{a}: does not lie along the initial side of {pa}")
    ok = not any(viol.values())
    return {"n": level.n, "count": len(level), "ok": ok, "violations": viol}


def _near_segment(v, a, b, tol=1e-12) -> bool:
    ab = b - a
    t = float(np.dot(v - a, ab) / np.dot(ab, ab))
    return -tol <= t <= 1 + tol and float(np.linalg.norm(a + t * ab - v)) < tol
