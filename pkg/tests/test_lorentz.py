import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from holonomy_lab import lorentz as lz
from holonomy_lab.errors import DependentInputs, LogDomainError, NotInGroup

E1, E2, E3 = lz.so12_generators(2)
finite = st.floats(-1.5, 1.5, allow_nan=False)


def random_algebra(rng, n, scale=1.0):
    b = lz.standard_basis(n)
    c = rng.standard_normal(len(b.elements)) * scale
    return np.einsum("i,ijk->jk", c, np.array(b.elements))


@st.composite
def algebra_elements(draw, n=3, scale=1.0):
    b = lz.standard_basis(n)
    c = draw(arrays(float, len(b.elements), elements=finite))
    return scale * np.einsum("i,ijk->jk", c, np.array(b.elements))


def test_generators_match_hand_written_matrices():
    assert np.array_equal(E1, [[0, 0, 1], [0, 0, 0], [1, 0, 0]])
    assert np.array_equal(E2, [[0, 1, 0], [1, 0, 0], [0, 0, 0]])
    assert np.array_equal(E3, [[0, 0, 0], [0, 0, -1], [0, 1, 0]])


def test_inner_product_table():
    assert lz.algebra_inner(E1, E1) == 1.0
    assert lz.algebra_inner(E1, E2) == 0.0
    assert lz.algebra_inner(E3, E3) == 1.0


def test_brackets():
    assert np.allclose(lz.bracket(E1, E2), E3)
    assert np.allclose(lz.bracket(E1, E1), 0)
    # direct multiply: E1 E3 - E3 E1
    assert np.allclose(lz.bracket(E1, E3), E1 @ E3 - E3 @ E1)
    assert np.allclose(lz.bracket(E1, E3), E2)
    assert np.allclose(lz.bracket(E2, E3), -E1)


def test_exp_and_psi():
    assert np.array_equal(lz.exp_map(np.zeros((3, 3))), np.eye(3))
    t = 0.37
    want = np.array([[1, 0, 0], [0, np.cos(t), -np.sin(t)], [0, np.sin(t), np.cos(t)]])
    assert np.allclose(lz.exp_map(t * E3), want, atol=1e-15)
    assert np.allclose(lz.psi(t), want, atol=1e-15)


def test_log_inverts_exp_small():
    x = 0.1 * E1 + 0.05 * E2
    assert np.max(np.abs(lz.log_map(lz.exp_map(x)) - x)) < 1e-12


def test_log_domain_errors():
    with pytest.raises(LogDomainError):
        lz.log_map(lz.psi(np.pi))
    with pytest.raises(NotInGroup):
        lz.log_map(np.diag([1.0, 2.0, 1.0]))


def test_split_examples():
    v, h = lz.split_vertical_horizontal(E3)
    assert np.allclose(v, E3) and np.allclose(h, 0)
    v, h = lz.split_vertical_horizontal(E1)
    assert np.allclose(v, 0) and np.allclose(h, E1)
    v, h = lz.split_vertical_horizontal(E1 + E3)
    assert np.allclose(v, E3) and np.allclose(h, E1)


def test_adjoint_examples():
    assert np.allclose(lz.adjoint(np.eye(3), E1), E1)
    assert abs(lz.algebra_norm(lz.adjoint(lz.psi(0.7), E1)) - 1) < 1e-15
    r = lz.adjoint(lz.psi(np.pi / 2), E1)
    assert np.allclose(r, E2) or np.allclose(r, -E2)


def test_so12_subalgebra_examples(rng):
    frame = lz.so12_subalgebra(E1, E2)
    for e in (E1, E2, E3):
        assert frame.residual(e) < 1e-14
    with pytest.raises(DependentInputs):
        lz.so12_subalgebra(E1, 2 * E1)
    x, y = (lz.boost(rng.standard_normal(3)) for _ in range(2))
    frame = lz.so12_subalgebra(x, y)
    assert np.allclose(frame.gram(), np.eye(3), atol=1e-12)


def test_killing_form_against_trace_formula(rng):
    for n in (2, 3, 4):
        a, b = random_algebra(rng, n), random_algebra(rng, n)
        # so(1,n) is a real form of so(n+1): B(a, b) = (n - 1) tr(ab)
        assert abs(lz.killing_form(a, b) - (n - 1) * np.trace(a @ b)) < 1e-9
        # on boosts it is 2(n - 1) times the trace inner product
        x, y = lz.horizontal_part(a), lz.horizontal_part(b)
        assert abs(lz.killing_form(x, y) - 2 * (n - 1) * lz.algebra_inner(x, y)) < 1e-9


def test_exp_boost_matches_expm(rng):
    for n in (2, 3, 5):
        v = rng.standard_normal(n)
        assert np.allclose(lz.exp_boost(v), scipy.linalg.expm(lz.boost(v)), atol=1e-12)


def test_expm_skew_batch_matches_expm(rng):
    for n in (2, 3, 4):
        ws = np.array([lz.vertical_part(random_algebra(rng, n, 2.0)) for _ in range(5)])
        got = lz.expm_skew_batch(ws)
        for w, g in zip(ws, got):
            assert np.allclose(g, scipy.linalg.expm(w), atol=1e-12)


@given(algebra_elements())
def test_exp_lands_in_group(a):
    g = lz.exp_map(a)
    assert lz.group_residual(g) < 1e-8 * max(1.0, np.max(np.abs(g)) ** 2)
    assert g[0, 0] >= 1 - 1e-12
    assert abs(np.linalg.det(g) - 1) < 1e-8 * max(1.0, np.max(np.abs(g)) ** 2)


@given(algebra_elements(scale=0.5))
def test_log_round_trip(a):
    assert np.max(np.abs(lz.log_map(lz.exp_map(a)) - a)) < 1e-9


@given(algebra_elements(), algebra_elements())
def test_bracket_antisymmetric_and_in_algebra(a, b):
    c = lz.bracket(a, b)
    assert np.allclose(c, -lz.bracket(b, a))
    assert lz.algebra_residual(c) < 1e-12


@given(algebra_elements())
def test_split_is_orthogonal(a):
    v, h = lz.split_vertical_horizontal(a)
    assert np.allclose(v + h, a)
    assert abs(lz.algebra_inner(v, h)) < 1e-12
    assert np.all(v[0] == 0) and np.all(v[:, 0] == 0)


@given(algebra_elements(), st.floats(-3, 3), st.floats(-3, 3))
def test_adjoint_by_rotation_is_isometry(a, s, t):
    k = lz.exp_map(s * lz.rotation_generator(3, 1, 2) + t * lz.rotation_generator(3, 2, 3))
    assert abs(lz.algebra_norm(lz.adjoint(k, a)) - lz.algebra_norm(a)) < 1e-12


def test_reproject_removes_drift(rng):
    g = lz.exp_map(random_algebra(rng, 3))
    noisy = g + 1e-7 * rng.standard_normal(g.shape)
    assert lz.group_residual(lz.reproject(noisy)) < 1e-12
