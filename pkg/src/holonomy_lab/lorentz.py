"""Lie theory of G = SO_0(1, n), K = SO(n) and their Lie algebras.

Group and algebra elements are plain ``(n+1, n+1)`` float arrays.  Index 0
is the time-like coordinate, so K sits in the lower-right ``n x n`` block,
the vertical subalgebra k = so(n) has zero first row and column, and the
horizontal complement is spanned by the symmetric boosts supported on the
first row and column.
"""

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
import scipy.linalg

from .config import DEFAULT
from .errors import (
    DependentInputs,
    DimensionMismatch,
    LogDomainError,
    NotInAlgebra,
    NotInGroup,
)


def minkowski(n: int) -> np.ndarray:
    """The form S = diag(-1, 1, ..., 1) on R^(n+1)."""
    s = np.eye(n + 1)
    s[0, 0] = -1.0
    return s


def dim_of(m: np.ndarray) -> int:
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2] or m.shape[-1] < 3:
        raise DimensionMismatch(f"expected a square matrix of size >= 3, got {m.shape}")
    return m.shape[-1] - 1


def _same_dim(a: np.ndarray, b: np.ndarray) -> int:
    if np.shape(a)[-2:] != np.shape(b)[-2:]:
        raise DimensionMismatch(f"shapes {np.shape(a)} and {np.shape(b)} differ")
    return dim_of(a)


# -- membership ----------------------------------------------------------

def group_residual(g: np.ndarray) -> float:
    n = dim_of(g)
    s = minkowski(n)
    return float(np.max(np.abs(g.T @ s @ g - s)))


def is_group_element(g: np.ndarray, tol: float = DEFAULT.group) -> bool:
    g = np.asarray(g, dtype=float)
    return (group_residual(g) < tol
            and abs(np.linalg.det(g) - 1.0) < tol * 10
            and g[0, 0] >= 1.0 - tol)


def check_group(g: np.ndarray, tol: float = DEFAULT.group) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if not is_group_element(g, tol):
        raise NotInGroup(f"matrix is not in SO_0(1,{dim_of(g)}): "
                         f"residual {group_residual(g):.3e}")
    return g


def in_fiber_group(k: np.ndarray, tol: float = DEFAULT.group) -> bool:
    """True when ``k`` lies in the embedded K = SO(n)."""
    k = np.asarray(k, dtype=float)
    off = max(np.max(np.abs(k[0, 1:])), np.max(np.abs(k[1:, 0])))
    return off < tol and abs(k[0, 0] - 1.0) < tol and is_group_element(k, tol)


def algebra_residual(a: np.ndarray) -> float:
    s = minkowski(dim_of(a))
    return float(np.max(np.abs(a.T @ s + s @ a)))


def check_algebra(a: np.ndarray, tol: float = DEFAULT.algebra) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a))))
    if algebra_residual(a) > tol * scale:
        raise NotInAlgebra(f"matrix violates X^T S + S X = 0 "
                           f"(residual {algebra_residual(a):.3e})")
    return a


# -- bases ---------------------------------------------------------------

def boost(v: Sequence[float]) -> np.ndarray:
    """Horizontal element with first column (0, v)."""
    v = np.asarray(v, dtype=float)
    n = v.shape[-1]
    out = np.zeros(v.shape[:-1] + (n + 1, n + 1))
    out[..., 0, 1:] = v
    out[..., 1:, 0] = v
    return out


def boost_vector(a: np.ndarray) -> np.ndarray:
    return np.asarray(a)[..., 1:, 0].copy()


def boost_generator(n: int, i: int) -> np.ndarray:
    """E_{0i}: unit boost along spatial axis ``i`` (1-based)."""
    e = np.zeros((n + 1, n + 1))
    e[0, i] = e[i, 0] = 1.0
    return e


def rotation_generator(n: int, i: int, j: int) -> np.ndarray:
    """E_{ij}: unit rotation taking axis ``i`` towards axis ``j``."""
    e = np.zeros((n + 1, n + 1))
    e[i, j] = -1.0
    e[j, i] = 1.0
    return e


def so12_generators(n: int = 2) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The ordered basis (E1, E2, E3) of so(1,2), embedded in so(1,n).

    E1 boosts along axis 2, E2 along axis 1 and E3 = [E1, E2] rotates
    axis 1 towards axis 2.
    """
    return boost_generator(n, 2), boost_generator(n, 1), rotation_generator(n, 1, 2)


def psi(t: float, n: int = 2) -> np.ndarray:
    """exp(t E3): rotation by ``t`` in the (x1, x2) plane."""
    g = np.eye(n + 1)
    c, s = np.cos(t), np.sin(t)
    g[1, 1], g[1, 2], g[2, 1], g[2, 2] = c, -s, s, c
    return g


@dataclass(frozen=True)
class FrameBasis:
    """Ordered orthonormal family in so(1,n) under the trace inner product."""

    elements: tuple

    def __post_init__(self):
        mats = tuple(np.asarray(e, dtype=float) for e in self.elements)
        object.__setattr__(self, "elements", mats)
        if mats:
            gram = self.gram()
            if np.max(np.abs(gram - np.eye(len(mats)))) > 1e-9:
                raise DependentInputs("frame is not orthonormal")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def gram(self) -> np.ndarray:
        return np.array([[algebra_inner(a, b) for b in self.elements]
                         for a in self.elements])

    def coordinates(self, a: np.ndarray) -> np.ndarray:
        return np.array([algebra_inner(e, a) for e in self.elements])

    def residual(self, a: np.ndarray) -> float:
        """Norm of the part of ``a`` orthogonal to the span."""
        proj = sum(c * e for c, e in zip(self.coordinates(a), self.elements))
        return algebra_norm(a - proj)


def standard_basis(n: int) -> FrameBasis:
    """Boosts E_{01..0n} followed by rotations E_{ij}, i < j."""
    elems = [boost_generator(n, i) for i in range(1, n + 1)]
    elems += [rotation_generator(n, i, j)
              for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    return FrameBasis(tuple(elems))


# -- algebra operations --------------------------------------------------

def algebra_inner(a: np.ndarray, b: np.ndarray) -> float:
    """<A, B> = trace(A^T B) / 2."""
    _same_dim(a, b)
    return 0.5 * float(np.sum(np.asarray(a) * np.asarray(b)))


def algebra_norm(a: np.ndarray) -> float:
    return float(np.sqrt(max(algebra_inner(a, a), 0.0)))


def bracket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _same_dim(a, b)
    return a @ b - b @ a


def vertical_part(a: np.ndarray) -> np.ndarray:
    v = np.array(a, dtype=float)
    v[..., 0, :] = 0.0
    v[..., :, 0] = 0.0
    return v


def horizontal_part(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=float) - vertical_part(a)


def split_vertical_horizontal(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Decompose into the k and k-perp components."""
    v = vertical_part(a)
    return v, np.asarray(a, dtype=float) - v


def killing_form(a: np.ndarray, b: np.ndarray) -> float:
    """trace(ad_a ad_b) on so(1,n), with ad written in the standard basis."""
    _same_dim(a, b)
    basis = standard_basis(dim_of(a))
    ad_a = np.array([basis.coordinates(bracket(a, e)) for e in basis]).T
    ad_b = np.array([basis.coordinates(bracket(b, e)) for e in basis]).T
    return float(np.trace(ad_a @ ad_b))


# -- group operations ----------------------------------------------------

def group_inverse(g: np.ndarray) -> np.ndarray:
    """g^{-1} = S g^T S for g in O(1,n)."""
    s = minkowski(dim_of(g))
    return s @ np.swapaxes(g, -1, -2) @ s


def exp_map(a: np.ndarray) -> np.ndarray:
    return scipy.linalg.expm(np.asarray(a, dtype=float))


def exp_boost(v: Sequence[float]) -> np.ndarray:
    """exp(boost(v)) in closed form; ``v`` may carry leading batch axes."""
    v = np.asarray(v, dtype=float)
    n = v.shape[-1]
    r = np.linalg.norm(v, axis=-1)
    safe = np.where(r > 0, r, 1.0)
    u = v / safe[..., None]
    ch, sh = np.cosh(r), np.sinh(r)
    g = np.zeros(v.shape[:-1] + (n + 1, n + 1))
    g[..., 0, 0] = ch
    g[..., 0, 1:] = sh[..., None] * u
    g[..., 1:, 0] = sh[..., None] * u
    g[..., 1:, 1:] = np.eye(n) + (ch - 1.0)[..., None, None] * u[..., :, None] * u[..., None, :]
    return g


def expm_skew_batch(w: np.ndarray) -> np.ndarray:
    """Exponentials of a stack of elements of k (shape (..., n+1, n+1))."""
    w = np.asarray(w, dtype=float)
    n = w.shape[-1] - 1
    if n == 2:
        th = w[..., 2, 1]
        c, s = np.cos(th), np.sin(th)
        out = np.zeros(w.shape)
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = c
        out[..., 2, 2] = c
        out[..., 1, 2] = -s
        out[..., 2, 1] = s
        return out
    if n == 3:
        blk = w[..., 1:, 1:]
        th = np.sqrt(0.5 * np.sum(blk * blk, axis=(-1, -2)))
        small = th < 1e-8
        ths = np.where(small, 1.0, th)
        a = np.where(small, 1.0 - th**2 / 6.0, np.sin(ths) / ths)
        b = np.where(small, 0.5 - th**2 / 24.0, (1.0 - np.cos(ths)) / ths**2)
        sq = blk @ blk
        rot = np.eye(3) + a[..., None, None] * blk + b[..., None, None] * sq
        out = np.zeros(w.shape)
        out[..., 0, 0] = 1.0
        out[..., 1:, 1:] = rot
        return out
    return scipy.linalg.expm(w)


def log_map(g: np.ndarray, tol=DEFAULT) -> np.ndarray:
    """Principal logarithm, restricted to a safe neighbourhood of the branch.

    Raises LogDomainError when a rotation angle reaches pi - margin, a real
    eigenvalue is non-positive, or the boost part exceeds the configured
    bound.
    """
    g = np.asarray(g, dtype=float)
    check_group(g, tol.group * 1e3)
    eig = np.linalg.eigvals(g)
    angles = np.abs(np.angle(eig))
    if np.any(angles >= np.pi - tol.log_angle_margin):
        raise LogDomainError("rotation angle too close to pi for the principal log")
    real = eig[np.abs(eig.imag) < 1e-12].real
    if np.any(real <= 0):
        raise LogDomainError("negative real eigenvalue")
    if real.size and np.max(np.abs(np.log(real))) > tol.log_max_boost:
        raise LogDomainError("boost component exceeds the supported bound")
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        a = scipy.linalg.logm(g)  # its norm estimator divides by zero near the identity
    a = np.real_if_close(a, tol=1e6)
    if np.iscomplexobj(a):
        raise LogDomainError("logarithm is not real")
    a = np.asarray(a, dtype=float)
    # symmetrize onto so(1,n)
    s = minkowski(dim_of(g))
    a = 0.5 * (a - s @ a.T @ s)
    return a


def group_distance(g: np.ndarray, h: np.ndarray) -> float:
    """Left-invariant distance ||log(g^{-1} h)|| for nearby elements."""
    return algebra_norm(log_map(group_inverse(g) @ h))


def adjoint(k: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Ad_k(a) = k a k^{-1}."""
    _same_dim(k, a)
    return k @ a @ group_inverse(k)


def so12_subalgebra(x: np.ndarray, y: np.ndarray,
                    tol: float = 1e-10) -> FrameBasis:
    """Orthonormal basis of span{x, y, [x, y]} for horizontal x, y.

    The span is a copy of so(1,2); bracket closure is verified before
    returning.
    """
    _same_dim(x, y)
    for z in (x, y):
        if algebra_norm(vertical_part(z)) > tol * max(1.0, algebra_norm(z)):
            raise NotInAlgebra("inputs must be horizontal")
    nx = algebra_norm(x)
    if nx < tol:
        raise DependentInputs("x vanishes")
    e1 = x / nx
    y_perp = y - algebra_inner(e1, y) * e1
    ny = algebra_norm(y_perp)
    if ny < tol * max(1.0, algebra_norm(y)):
        raise DependentInputs("x and y are linearly dependent")
    e2 = y_perp / ny
    z = bracket(e1, e2)
    e3 = z / algebra_norm(z)
    frame = FrameBasis((e1, e2, e3))
    for a in frame:
        for b in frame:
            if frame.residual(bracket(a, b)) > tol:
                raise DependentInputs("span is not closed under the bracket")
    return frame


def reproject(g: np.ndarray, iterations: int = 3) -> np.ndarray:
    """Pull a drifted matrix back onto O(1,n) by Newton-Schulz steps."""
    g = np.array(g, dtype=float)
    s = minkowski(dim_of(g))
    eye = np.eye(g.shape[-1])
    for _ in range(iterations):
        m = s @ np.swapaxes(g, -1, -2) @ s @ g
        g = g @ (1.5 * eye - 0.5 * m)
    return g


def compose(elements: Sequence[np.ndarray],
            every: int = DEFAULT.reproject_every) -> np.ndarray:
    """Ordered product with periodic drift correction."""
    it = iter(elements)
    out = np.array(next(it), dtype=float)
    for i, g in enumerate(it, start=1):
        out = out @ g
        if i % every == 0:
            out = reproject(out)
    return out
