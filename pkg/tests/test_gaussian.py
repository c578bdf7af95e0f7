import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from quadsum.gaussian import GaussianError, GaussianFunction, Term, sqrt_det
from quadsum.poly import Poly


def random_function(rng, n, nterms=2, degree=2, phase=True):
    g = GaussianFunction(n, [])
    for _ in range(nterms):
        R = rng.normal(size=(n, n))
        A = R @ R.T + 0.5 * np.eye(n)
        if phase:
            S = rng.normal(size=(n, n))
            A = A + 0.3j * (S + S.T)
        b = 0.3 * rng.normal(size=n) + (0.2j * rng.normal(size=n) if phase else 0)
        coeffs = {}
        for _ in range(3):
            e = tuple(rng.integers(0, degree + 1, size=n))
            if sum(e) <= degree:
                coeffs[e] = complex(rng.normal(), rng.normal())
        coeffs[(0,) * n] = 1.0
        g = GaussianFunction(n, g.terms + GaussianFunction.gaussian(A, b, Poly(n, coeffs)).terms)
    return g


def quad_fourier_1d(g, u, sign=1):
    re = integrate.quad(lambda x: (g(np.array([x])) * np.exp(sign * 2j * np.pi * u * x)).real, -12, 12, limit=200)[0]
    im = integrate.quad(lambda x: (g(np.array([x])) * np.exp(sign * 2j * np.pi * u * x)).imag, -12, 12, limit=200)[0]
    return re + 1j * im


# -- evaluation ----------------------------------------------------------------

def test_standard_values():
    g = GaussianFunction.standard(3)
    assert g(np.zeros(3)) == pytest.approx(1.0)
    x = np.array([0.6, 0.0, 0.8])
    assert g(x) == pytest.approx(np.exp(-np.pi))


def test_dimension_mismatch_rejected():
    with pytest.raises(GaussianError):
        GaussianFunction.standard(2)(np.zeros(3))


def test_evaluation_against_mpmath():
    import mpmath as mp

    rng = np.random.default_rng(11)
    g = random_function(rng, 3, nterms=1)
    t = g.terms[0]
    x = rng.normal(size=3)
    mp.mp.dps = 40
    X = [mp.mpf(float(v)) for v in x]
    quad = sum(mp.mpc(t.A[i, j]) * X[i] * X[j] for i in range(3) for j in range(3))
    lin = sum(mp.mpc(t.b[i]) * X[i] for i in range(3))
    poly = sum(mp.mpc(c) * mp.fprod(X[j] ** e[j] for j in range(3)) for e, c in t.poly.coeffs.items())
    ref = mp.mpc(t.c) * poly * mp.exp(-mp.pi * quad + 2j * mp.pi * lin)
    assert abs(g(x) - complex(ref)) < 1e-13 * max(1.0, abs(complex(ref)))


# -- Fourier transform ---------------------------------------------------------

def test_standard_gaussian_is_self_dual():
    g = GaussianFunction.standard(4)
    rng = np.random.default_rng(0)
    X = rng.normal(size=(10, 4))
    np.testing.assert_allclose(g.fourier()(X), g(X), atol=1e-14)


def test_linear_times_gaussian_transform_matches_quadrature():
    # frozen oracle: quadrature says the transform is +i u e^{-pi u^2}
    g = GaussianFunction.gaussian([[1.0]], poly=Poly.linear([1.0]))
    G = g.fourier()
    for u in np.linspace(-1.8, 2.1, 10):
        ref = quad_fourier_1d(g, u)
        assert abs(G(np.array([u])) - ref) < 1e-10
        assert abs(G(np.array([u])) - 1j * u * np.exp(-np.pi * u * u)) < 1e-12


def test_partial_transform_matches_quadrature():
    rng = np.random.default_rng(3)
    g = random_function(rng, 2, nterms=1, degree=2)
    G = g.fourier([1])
    for _ in range(4):
        x0, u = rng.normal(size=2)
        h = lambda x: g(np.array([x0, x]))
        re = integrate.quad(lambda x: (h(x) * np.exp(2j * np.pi * u * x)).real, -12, 12, limit=200)[0]
        im = integrate.quad(lambda x: (h(x) * np.exp(2j * np.pi * u * x)).imag, -12, 12, limit=200)[0]
        assert abs(G(np.array([x0, u])) - (re + 1j * im)) < 1e-9


@pytest.mark.parametrize("coords", [[0], [1, 2], [0, 1, 2]])
def test_double_transform_is_reflection(coords):
    rng = np.random.default_rng(5)
    g = random_function(rng, 3)
    X = rng.normal(size=(8, 3))
    np.testing.assert_allclose(g.fourier(coords).fourier(coords)(X), g.reflect(coords)(X), atol=1e-11)
    np.testing.assert_allclose(g.fourier(coords).fourier(coords, sign=-1)(X), g(X), atol=1e-11)


def test_plancherel_on_grid():
    rng = np.random.default_rng(8)
    g = random_function(rng, 2, degree=1)
    G = g.fourier()
    t = np.linspace(-7, 7, 281)
    X = np.array(np.meshgrid(t, t, indexing="ij")).reshape(2, -1).T
    h = (t[1] - t[0]) ** 2
    lhs = np.sum(np.abs(g(X)) ** 2) * h
    rhs = np.sum(np.abs(G(X)) ** 2) * h
    assert abs(lhs - rhs) < 1e-9 * max(1.0, lhs)


def test_translation_becomes_modulation():
    rng = np.random.default_rng(9)
    g = random_function(rng, 3)
    v = rng.normal(size=3)
    X = rng.normal(size=(10, 3))
    lhs = g.translate(v).fourier()(X)
    rhs = np.exp(2j * np.pi * X @ v) * g.fourier()(X)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_singular_block_reported():
    A = np.diag([1.0, 1e-14])
    bad = Term(Poly.const(2), A.astype(complex), np.zeros(2, complex), 1.0)
    g = GaussianFunction(2, GaussianFunction.standard(2).terms + [bad])
    with pytest.raises(GaussianError, match="term 1"):
        g.fourier([0, 1])


def test_sqrt_det_principal_branch():
    A = np.array([[1.0, 0.0], [0.0, 1.0]]) - 1j * np.array([[3.0, 0.0], [0.0, 3.0]])
    assert sqrt_det(A) == pytest.approx(1 - 3j)


# -- other operators -----------------------------------------------------------

def test_quadratic_phase_pointwise():
    rng = np.random.default_rng(1)
    g = random_function(rng, 3)
    J = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 2.0]])
    t = 0.7
    X = rng.normal(size=(20, 3))
    Q = np.einsum("mi,ij,mj->m", X, J, X) / 2
    np.testing.assert_allclose(g.mul_quadratic_phase(t, J)(X), np.exp(2j * np.pi * t * Q) * g(X), atol=1e-12)
    np.testing.assert_allclose(g.mul_quadratic_phase(t, J).mul_quadratic_phase(-t, J)(X), g(X), atol=1e-12)
    np.testing.assert_allclose(g.mul_quadratic_phase(0.0, J)(X), g(X), atol=0)


def test_linear_sub_composition():
    rng = np.random.default_rng(2)
    g = random_function(rng, 2)
    M1, M2 = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
    X = rng.normal(size=(10, 2))
    # (g o M1) o M2 = g o (M1 M2)
    np.testing.assert_allclose(g.linear_sub(M1).linear_sub(M2)(X), g.linear_sub(M1 @ M2)(X), atol=1e-11)
    std = GaussianFunction.standard(2).linear_sub(2 * np.eye(2), scale=3.0)
    np.testing.assert_allclose(std(X), 3 * np.exp(-4 * np.pi * np.sum(X**2, axis=1)), atol=1e-14)
    with pytest.raises(GaussianError):
        g.linear_sub(np.zeros((2, 2)))


def test_restrict_zero():
    g = GaussianFunction.standard(3).restrict_zero([2])
    assert g.n == 2
    X = np.random.default_rng(0).normal(size=(5, 2))
    np.testing.assert_allclose(g(X), GaussianFunction.standard(2)(X))
    rng = np.random.default_rng(4)
    h = random_function(rng, 3)
    Y = rng.normal(size=(6, 2))
    full = np.column_stack([Y[:, 0], np.zeros(6), Y[:, 1]])
    np.testing.assert_allclose(h.restrict_zero([1])(Y), h(full), atol=1e-13)
    z = h.restrict_zero([0, 1, 2])
    assert z.n == 0 and z.value_at_zero() == pytest.approx(h(np.zeros(3)))


def test_json_roundtrip():
    rng = np.random.default_rng(6)
    g = random_function(rng, 3)
    h = GaussianFunction.from_json(json.loads(json.dumps(g.to_json())))
    X = rng.normal(size=(5, 3))
    np.testing.assert_allclose(h(X), g(X), atol=0)


# -- properties ----------------------------------------------------------------

OPS = ["fourier", "partial", "phase", "sub", "translate", "modulate", "inverse"]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), ops=st.lists(st.sampled_from(OPS), min_size=10, max_size=10))
def test_closure_keeps_real_part_positive(seed, ops):
    rng = np.random.default_rng(seed)
    n = 3
    g = random_function(rng, n, degree=1)
    J = np.diag([1.0, -1.0, 2.0])
    for op in ops:
        if op == "fourier":
            g = g.fourier()
        elif op == "partial":
            g = g.fourier([int(rng.integers(n))])
        elif op == "inverse":
            g = g.fourier([0, 2], sign=-1)
        elif op == "phase":
            g = g.mul_quadratic_phase(float(rng.normal()), J)
        elif op == "sub":
            M = rng.normal(size=(n, n)) + 2 * np.eye(n)
            g = g.linear_sub(M / np.abs(np.linalg.det(M)) ** (1 / n))
        elif op == "translate":
            g = g.translate(0.3 * rng.normal(size=n))
        else:
            g = g.mul_linear_phase(0.3 * rng.normal(size=n))
        assert g.min_real_eig() > 0


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_operations_distribute_over_terms(seed):
    rng = np.random.default_rng(seed)
    a, b = random_function(rng, 2, 1), random_function(rng, 2, 1)
    s = GaussianFunction(2, a.terms + b.terms)
    X = rng.normal(size=(6, 2))
    M = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    J = np.array([[0, 1.0], [1.0, 0]])
    for op in (lambda g: g.fourier(), lambda g: g.fourier([1]), lambda g: g.linear_sub(M),
               lambda g: g.mul_quadratic_phase(0.4, J), lambda g: g.restrict_zero([0]).tensor(GaussianFunction.standard(1))):
        np.testing.assert_allclose(op(s)(X), op(a)(X) + op(b)(X), atol=1e-11)
