import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadsum.quadspace import (
    FamilyError,
    GOElement,
    QuadFamily,
    build_family,
    chi_by_hilbert,
    chi_eval,
    hilbert_symbol,
    kronecker,
    signature,
    unipotent_matrix,
    weil_index_arch,
)

SPLIT = np.zeros((0, 0), dtype=int)
FAMILIES = [
    (SPLIT, 3),
    (2 * np.eye(2, dtype=int), 1),
    (-2 * np.eye(2, dtype=int), 2),
    (np.array([[2, 1], [1, 2]]), 2),
    (np.array([[2, 0], [0, -6]]), 1),
]


def test_split_senary_tower():
    fam = build_family(SPLIT, 3)
    assert fam.dim(3) == 6
    J = fam.J(3)
    for k in range(3):
        np.testing.assert_array_equal(J[2 * k:2 * k + 2, 2 * k:2 * k + 2], [[0, 1], [1, 0]])
    assert fam.disc == 1 and fam.chi_trivial
    assert weil_index_arch(fam) == pytest.approx(1)


def test_sum_of_two_squares_character():
    fam = build_family(2 * np.eye(2, dtype=int), 1)
    assert fam.dim(1) == 4
    assert fam.disc == -4 and fam.conductor == 4
    assert chi_eval(fam, 3) == chi_by_hilbert(-4, 3) == -1
    assert chi_eval(fam, 5) == chi_by_hilbert(-4, 5) == 1
    assert chi_eval(fam, 2) == 0
    assert weil_index_arch(fam) == pytest.approx(1j)


def test_negative_definite_core_flips_weil_index():
    fam = build_family(-2 * np.eye(2, dtype=int), 1)
    assert weil_index_arch(fam) == pytest.approx(-1j)


@pytest.mark.parametrize(
    "J0, ell, code",
    [
        (np.array([[2]]), 1, "E_ODD_DIM"),
        (np.zeros((2, 2), dtype=int), 1, "E_SINGULAR"),
        (SPLIT, 1, "E_DEGENERATE_ELL"),
        (np.array([[0, 1], [1, 0]]), 1, "E_ISOTROPIC"),
        (np.array([[2, 0], [0, -2]]), 2, "E_ISOTROPIC"),
        (np.array([[1, 2], [3, 1]]), 1, "E_NOT_SYMMETRIC"),
        (2 * np.eye(2, dtype=int), 0, "E_ELL"),
    ],
)
def test_rejected_inputs_have_distinct_codes(J0, ell, code):
    with pytest.raises(FamilyError) as err:
        build_family(J0, ell)
    assert err.value.code == code


def test_chi_rejects_zero():
    with pytest.raises(ValueError):
        chi_eval(build_family(SPLIT, 2), 0)


@pytest.mark.parametrize("J0, ell", FAMILIES)
def test_character_and_index_stable_along_tower(J0, ell):
    fam = build_family(J0, ell)
    from quadsum.quadspace import fundamental_discriminant

    for i in range(ell + 1):
        d = fam.dim(i)
        if d == 0:
            continue
        raw = (-1) ** (d // 2) * round(np.linalg.det(fam.J(i)))
        assert fundamental_discriminant(raw) == fam.disc
        p, q = signature(fam.J(i))
        assert (p - q) % 8 == (signature(fam.J(ell))[0] - signature(fam.J(ell))[1]) % 8
    gamma = fam.gamma
    assert abs(gamma**8 - 1) < 1e-12
    # gamma^2 is the archimedean value of chi at -1
    assert gamma**2 == pytest.approx(fam.chi_sign)


@pytest.mark.parametrize("J0, ell", FAMILIES)
def test_json_roundtrip(J0, ell):
    fam = build_family(J0, ell)
    back = QuadFamily.from_json(fam.to_json())
    assert back.disc == fam.disc and back.ell == fam.ell
    np.testing.assert_array_equal(back.J(ell), fam.J(ell))


@pytest.mark.parametrize("J0, ell", FAMILIES)
def test_pairing_and_polarisation(J0, ell):
    fam = build_family(J0, ell)
    rng = np.random.default_rng(0)
    for i in range(ell + 1):
        d = fam.dim(i)
        if d == 0:
            continue
        for _ in range(20):
            v, w = rng.integers(-9, 10, size=(2, d))
            assert fam.pairing(i, v, w) == fam.pairing(i, w, v)
            assert fam.Q(i, v + w) - fam.Q(i, v) - fam.Q(i, w) == fam.pairing(i, v, w)
            assert fam.Q(i, v) == fam.pairing(i, v, v) / 2


@pytest.mark.parametrize("J0, ell", FAMILIES)
def test_unipotent_radical(J0, ell):
    fam = build_family(J0, ell)
    rng = np.random.default_rng(1)
    for i in range(ell):
        J, J1 = fam.J(i), fam.J(i + 1)
        d = J.shape[0]
        if d == 0:
            continue
        for _ in range(20):
            x, y = rng.integers(-6, 7, size=(2, d))
            v = rng.integers(-9, 10, size=d + 2)
            np.testing.assert_array_equal(unipotent_matrix(J, x) @ unipotent_matrix(J, y), unipotent_matrix(J, x + y))
            w = unipotent_matrix(J, x) @ v
            assert w @ J1 @ w == v @ J1 @ v


def test_unipotent_matches_printed_shape_on_split_levels():
    J = build_family(SPLIT, 3).J(2)
    x = np.array([1, -2, 3, 4])
    M = unipotent_matrix(J, x)
    np.testing.assert_array_equal(M[:4, 4], J @ x)
    np.testing.assert_array_equal(M[5, :4], -x)
    assert M[5, 4] == -(x @ J @ x) // 2


def test_go_elements_scale_the_form():
    fam = build_family(2 * np.eye(2, dtype=int), 2)
    J = fam.J(1)
    J1 = fam.J(2)
    rng = np.random.default_rng(2)
    c, s = np.cos(0.7), np.sin(0.7)
    h = np.eye(4)
    h[:2, :2] = 3 * np.array([[c, -s], [s, c]])
    h[2:, 2:] = np.diag([9.0, 1.0])
    g = GOElement.similitude(h, J)
    assert g.lam == pytest.approx(9.0)
    for el in [g, GOElement("torus", 2.5), GOElement("unipotent", np.array([1, 0, 2, -1])), GOElement("weyl")]:
        M = el.matrix(J)
        for _ in range(5):
            v = rng.normal(size=6)
            assert (M @ v) @ J1 @ (M @ v) == pytest.approx(el.similitude_norm() * (v @ J1 @ v))
    with pytest.raises(ValueError):
        GOElement.similitude(np.diag([1.0, 2.0, 1.0, 1.0]), J)


def test_kronecker_agrees_with_hilbert_product():
    for D in [-4, 5, 8, -3, 12, -7, 13, -8, -15, 24, -20, -24, 40, 1]:
        for n in range(-200, 200):
            if n and math.gcd(n, D) == 1:
                assert kronecker(D, n) == chi_by_hilbert(D, n), (D, n)


def test_hilbert_symbol_small_table():
    assert hilbert_symbol(-1, -1, 2) == -1
    assert hilbert_symbol(-1, -1, "inf") == -1
    assert hilbert_symbol(-1, -1, 3) == 1
    assert hilbert_symbol(2, 3, 3) == -1
    assert hilbert_symbol(5, 7, 2) == 1


@settings(max_examples=100, deadline=None)
@given(m=st.integers(1, 10**5), n=st.integers(1, 10**5), disc=st.sampled_from([-4, -3, 5, 8, -8, 12, -7, 1]))
def test_chi_multiplicative(m, n, disc):
    if math.gcd(m * n, disc) != 1:
        return
    assert kronecker(disc, m * n) == kronecker(disc, m) * kronecker(disc, n)
    assert kronecker(disc, m) ** 2 == 1
    # periodic with period |disc|
    assert kronecker(disc, m) == kronecker(disc, m + abs(disc))
