import csv
import math
from fractions import Fraction
from itertools import product

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadsum.local_arith import (
    DirichletL,
    L_value,
    PoleError,
    basic_function_spot_check,
    basic_weight,
    completed_L,
    content,
    density_count_by_blocks,
    density_table,
    divisors,
    local_density,
    local_density_count,
    singular_series,
    write_density_csv,
)
from quadsum.quadspace import build_family

SPLIT6 = build_family(np.zeros((0, 0), dtype=int), 3)
SPLIT4 = build_family(np.zeros((0, 0), dtype=int), 2)


def divisor_sum(fam, c, level):
    e = fam.dim(level) / 2 - 2
    return sum(fam.chi(n) * n**e for n in range(1, c + 1) if c % n == 0)


# -- basic weights ------------------------------------------------------------------

def test_basic_weight_examples():
    assert basic_weight(SPLIT6, [1, 0, 0, 0, 0, 0]) == 1
    assert basic_weight(SPLIT6, [2, 0, 0, 0, 0, 0]) == 3
    assert basic_weight(SPLIT6, [6, 0, 0, 0, 0, 0]) == 12
    with pytest.raises(ValueError):
        basic_weight(SPLIT6, [0] * 6)
    with pytest.raises(ValueError):
        basic_weight(SPLIT6, [1, 1, 0, 0, 0, 0])


def random_quadric_point(rng, fam, level):
    """A random integral zero of Q built from a hyperbolic pair."""
    d = fam.dim(level)
    while True:
        v = rng.integers(-6, 7, size=d)
        # solve for the last coordinate using the last hyperbolic pair
        v[-1] = 0
        q2 = v @ fam.J(level) @ v
        a = v[-2]
        if a != 0 and (q2 // 2) % a == 0:
            v[-1] = -(q2 // 2) // a
            if np.any(v):
                return v * int(rng.integers(1, 7))


@pytest.mark.parametrize("fam", [SPLIT6, build_family(2 * np.eye(2, dtype=int), 2)])
def test_basic_weight_matches_divisor_sum(fam):
    rng = np.random.default_rng(0)
    for _ in range(100):
        xi = random_quadric_point(rng, fam, fam.ell)
        assert xi @ fam.J(fam.ell) @ xi == 0
        c = content(xi)
        assert basic_weight(fam, xi) == pytest.approx(divisor_sum(fam, c, fam.ell), rel=1e-12)
        p = int(rng.choice([2, 3, 5, 7]))
        assert basic_weight(fam, p * xi) == pytest.approx(divisor_sum(fam, p * c, fam.ell), rel=1e-12)


def test_divisors():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert divisors(1) == [1]


# -- local densities ------------------------------------------------------------------

def brute_force(J, q):
    d = J.shape[0]
    return sum(1 for x in product(range(q), repeat=d) if (np.array(x) @ J @ np.array(x) // 2) % q == 0)


def test_density_split_senary_mod3():
    assert local_density_count(SPLIT6, 3, 1) == 261 == brute_force(SPLIT6.J(3), 3)
    assert 3**5 + 3**3 - 3**2 == 261


def test_density_binary():
    fam = build_family(np.zeros((0, 0), dtype=int), 2)
    # level 1 is the plane Q = xy
    assert local_density_count(fam, 5, 1, level=1) == 9 == brute_force(fam.J(1), 5)


def test_density_guard():
    with pytest.raises(ValueError):
        local_density_count(SPLIT6, 7, 2)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_split_normalised_density_mod_p(p):
    n = local_density_count(SPLIT6, p, 1) if p < 7 else density_count_by_blocks(SPLIT6, p, 1)
    assert Fraction(n, p**5) == 1 + Fraction(1, p**2) - Fraction(1, p**3)


@pytest.mark.parametrize("J0, p, k", [(2 * np.eye(2, dtype=int), 2, 2), (np.array([[2, 1], [1, 2]]), 3, 2), (None, 2, 3)])
def test_block_count_matches_enumeration(J0, p, k):
    fam = SPLIT6 if J0 is None else build_family(J0, 1)
    assert density_count_by_blocks(fam, p, k) == local_density_count(fam, p, k)


def test_singular_series_split():
    assert singular_series(SPLIT6) == pytest.approx(float(mp.zeta(2) / mp.zeta(3)), rel=1e-13)
    # unimodular primes follow the closed form
    assert local_density(SPLIT6, 3) == pytest.approx((1 - 3**-3) / (1 - 3**-2))


def test_ramified_density_is_a_limit():
    fam = build_family(2 * np.eye(2, dtype=int), 2)
    exact = float(local_density(fam, 2))
    seq = [density_count_by_blocks(fam, 2, k) / 2 ** (5 * k) for k in range(6, 9)]
    assert abs(seq[-1] - exact) < 1e-3


def test_density_csv(tmp_path):
    rows = density_table(SPLIT6, [3], 1)
    path = tmp_path / "d.csv"
    write_density_csv(rows, path)
    with open(path) as fh:
        data = list(csv.reader(fh))
    assert data[0] == ["p", "k", "count", "normalized_density"]
    assert data[1] == ["3", "1", "261", "29/27"]


def test_basic_function_spot_check():
    for p in (2, 3, 5):
        assert basic_function_spot_check(SPLIT4, p, 1)
    assert basic_function_spot_check(SPLIT4, 2, 2)


# -- L-values ------------------------------------------------------------------------

def test_zeta_values():
    L = DirichletL(1)
    assert abs(L_value(L, 2) - math.pi**2 / 6) < 1e-10
    assert abs(L_value(L, -1) + 1 / 12) < 1e-10
    with pytest.raises(PoleError):
        L_value(L, 1)


def test_catalan():
    L = DirichletL(-4)
    series = np.sum(L.coefficients(10**6) / np.arange(1, 10**6 + 1) ** 2.0)
    assert abs(L_value(L, 2) - series) < 1e-10
    assert abs(L_value(L, 2) - float(mp.catalan)) < 1e-10


@pytest.mark.parametrize("disc, chi", [(1, None), (-4, [0, 1, 0, -1]), (5, [0, 1, -1, -1, 1]), (-3, [0, 1, -1])])
def test_against_mpmath(disc, chi):
    mp.mp.dps = 30
    L = DirichletL(disc)
    for s in [0.5 + 20j, -2 + 20j, 3 - 20j, -1.5 - 5j, 0.0, 1.5, 1.0 + 3j]:
        ref = complex(mp.zeta(s)) if chi is None else complex(mp.dirichlet(s, chi))
        assert abs(L_value(L, s) - ref) < 1e-10 * max(1.0, abs(ref))
    mp.mp.dps = 15


def test_euler_product():
    for disc in (1, -4, 5, -3, 8):
        L = DirichletL(disc)
        assert abs(L_value(L, 3) - L.euler_product(3)) < 1e-10


def test_nontrivial_character_regular_at_one():
    L = DirichletL(-4)
    assert abs(L_value(L, 1) - math.pi / 4) < 1e-12


@pytest.mark.parametrize("disc", [1, -4, 5, -3, 8, 12])
def test_functional_equation(disc):
    L = DirichletL(disc)
    rng = np.random.default_rng(disc % 97)
    for _ in range(10):
        s = complex(rng.uniform(-2, 3), rng.uniform(-5, 5))
        if abs(s) < 1e-3 or abs(s - 1) < 1e-3:
            continue
        a, b = completed_L(L, s), completed_L(L, 1 - s)
        assert abs(a - b) < 1e-8 * max(1.0, abs(a))


def test_periodic_and_multiplicative():
    L = DirichletL(-20)
    c = L.coefficients(200)
    assert np.array_equal(c[:20], c[20:40])
    for m in range(1, 30):
        for n in range(1, 30):
            assert L.chi(m * n) == L.chi(m) * L.chi(n)


@settings(max_examples=60, deadline=None)
@given(c=st.integers(1, 3000))
def test_weight_is_divisor_sum(c):
    xi = np.array([c, 0, 0, 0, 0, 0])
    assert basic_weight(SPLIT6, xi) == pytest.approx(sum(divisors(c)), rel=1e-12)
