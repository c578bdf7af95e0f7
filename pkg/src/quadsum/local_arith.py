"""Finite-place arithmetic: basic weights, local densities and Dirichlet L-values."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Dict, Iterable, List, Sequence

import numpy as np
from scipy.special import bernoulli, factorial

from .quadspace import QuadFamily, kronecker, prime_factors

DENSITY_BRUTE_FORCE_LIMIT = 10**7
EM_TERMS = 12
EM_SHIFT = 15.0

_B2 = bernoulli(2 * EM_TERMS)[2::2]  # B_2, B_4, ..., B_24
_EM_COEF = np.array([_B2[j] / factorial(2 * j + 2, exact=False) for j in range(EM_TERMS)])


class PoleError(ArithmeticError):
    """Evaluation requested at the pole s = 1 of the Riemann zeta function."""

    def __init__(self, s, residue=1.0):
        super().__init__(f"pole at s = {s}")
        self.s = s
        self.residue = residue


def _power_over_log(y: float, s: complex) -> complex:
    """(y^{1-s} - 1) / (s - 1), continuous through s = 1."""
    z = (1 - s) * math.log(y)
    if abs(z) < 1e-8:
        return -math.log(y) * (1 + z / 2)
    return -math.log(y) * np.expm1(z) / z


def hurwitz_zeta(s: complex, x: float, regularised: bool = False) -> complex:
    """zeta(s, x) for 0 < x <= 1 by Euler-Maclaurin summation.

    With ``regularised`` the pole term (N+x)^{1-s}/(s-1) is replaced by
    ((N+x)^{1-s} - 1)/(s-1). Characters with zero mean sum these versions
    to the same L-value, and the replacement stays finite at s = 1.
    """
    s = complex(s)
    if not regularised and s == 1:
        raise PoleError(s)
    N = int(math.ceil(EM_SHIFT + abs(s)))
    n = np.arange(N) + x
    head = np.sum(np.exp(-s * np.log(n)))
    y = N + x
    if regularised:
        tail = _power_over_log(y, s)
    else:
        tail = y ** (1 - s) / (s - 1)
    tail += 0.5 * y ** (-s)
    # sum_j B_{2j}/(2j)! s(s+1)...(s+2j-2) y^{-s-2j+1}
    rising = s
    yp = y ** (-s - 1)
    for j in range(EM_TERMS):
        tail += _EM_COEF[j] * rising * yp
        rising *= (s + 2 * j + 1) * (s + 2 * j + 2)
        yp /= y * y
    return complex(head + tail)


@dataclass
class DirichletL:
    """L(s, chi_disc) for a fundamental discriminant (1 gives the Riemann zeta function)."""

    disc: int
    _cache: Dict[complex, complex] = field(default_factory=dict, repr=False)

    @property
    def conductor(self) -> int:
        return abs(self.disc)

    @property
    def trivial(self) -> bool:
        return self.disc == 1

    @property
    def parity(self) -> int:
        """0 for even characters, 1 for odd ones."""
        return 1 if self.disc < 0 else 0

    def chi(self, n: int) -> int:
        return kronecker(self.disc, int(n))

    def coefficients(self, N: int) -> np.ndarray:
        """chi(1), ..., chi(N)."""
        q = self.conductor
        period = np.array([self.chi(a) for a in range(1, q + 1)], dtype=float)
        return np.resize(period, N)

    def gauss_sum(self) -> complex:
        q = self.conductor
        a = np.arange(1, q + 1)
        chis = np.array([self.chi(int(k)) for k in a])
        return complex(np.sum(chis * np.exp(2j * np.pi * a / q)))

    def euler_product(self, s: complex, primes_up_to: int = 10**5) -> complex:
        sieve = np.ones(primes_up_to + 1, dtype=bool)
        sieve[:2] = False
        for p in range(2, int(primes_up_to**0.5) + 1):
            if sieve[p]:
                sieve[p * p::p] = False
        out = 1.0 + 0j
        for p in np.flatnonzero(sieve):
            out /= 1 - self.chi(int(p)) * float(p) ** (-s)
        return out


def L_value(L: DirichletL, s: complex) -> complex:
    """L(s, chi) = q^{-s} sum_a chi(a) zeta(s, a/q), valid for every complex s."""
    s = complex(s)
    if s in L._cache:
        return L._cache[s]
    if L.trivial:
        if s == 1:
            raise PoleError(s)
        val = hurwitz_zeta(s, 1.0)
    else:
        q = L.conductor
        val = 0j
        for a in range(1, q):
            c = L.chi(a)
            if c:
                val += c * hurwitz_zeta(s, a / q, regularised=True)
        val *= q ** (-s)
    L._cache[s] = val
    return val


def L_derivative(L: DirichletL, s: complex, h: float = 1e-3) -> complex:
    """d/ds L(s, chi) by a 5-point central stencil."""
    f = lambda t: L_value(L, s + t)
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


def completed_L(L: DirichletL, s: complex) -> complex:
    """(q/pi)^{(s+a)/2} Gamma((s+a)/2) L(s, chi); invariant under s -> 1 - s for real chi."""
    from scipy.special import gamma

    a = L.parity
    q = L.conductor
    z = (s + a) / 2
    return (q / math.pi) ** z * gamma(z) * L_value(L, s)


# -- basic weights -----------------------------------------------------------------

def content(xi: Sequence[int]) -> int:
    return reduce(math.gcd, (abs(int(v)) for v in xi), 0)


def divisors(n: int) -> List[int]:
    small, large = [], []
    k = 1
    while k * k <= n:
        if n % k == 0:
            small.append(k)
            if k * k != n:
                large.append(n // k)
        k += 1
    return small + large[::-1]


def weight_from_content(fam: QuadFamily, c: int, level: int) -> float:
    """sum over n | c of chi(n) n^{d/2 - 2}, computed as an Euler product over p | c."""
    e = fam.dim(level) / 2 - 2
    out = 1.0
    for p in prime_factors(c):
        k = 0
        cc = c
        while cc % p == 0:
            cc //= p
            k += 1
        x = fam.chi(p) * float(p) ** e
        out *= sum(x**j for j in range(k + 1))
    return out


def basic_weight(fam: QuadFamily, xi, level: int | None = None) -> float:
    """Finite-adelic factor of I(f)(xi) for basic finite data at every prime."""
    level = fam.ell if level is None else level
    xi = np.asarray(xi, dtype=np.int64)
    if not np.any(xi):
        raise ValueError("xi must be nonzero")
    if xi @ fam.J(level) @ xi != 0:
        raise ValueError("xi is not on the quadric")
    return weight_from_content(fam, content(xi), level)


# -- local densities ---------------------------------------------------------------

def local_density_count(fam: QuadFamily, p: int, k: int, level: int | None = None,
                        limit: int = DENSITY_BRUTE_FORCE_LIMIT) -> int:
    """#{x in (Z/p^k)^d : Q(x) = 0 mod p^k} by direct enumeration.

    The leading coordinate is fixed in an outer loop and the remaining ones are
    enumerated as one array, so memory stays at p^{k(d-1)} vectors.
    """
    level = fam.ell if level is None else level
    J = fam.J(level)
    d = J.shape[0]
    q = p**k
    if q**d > limit:
        raise ValueError(f"(Z/{q})^{d} has {q**d} elements, above the limit {limit}")
    if np.any(np.diag(J) % 2):
        raise ValueError("Q is not integral on Z^d (odd diagonal entry)")
    mod2 = 2 * q
    r = np.arange(q, dtype=np.int64)
    rest = np.array(np.meshgrid(*([r] * (d - 1)), indexing="ij")).reshape(d - 1, -1).T if d > 1 else np.zeros((1, 0), np.int64)
    Jr = J[1:, 1:]
    base = np.einsum("mi,ij,mj->m", rest, Jr, rest) % mod2 if d > 1 else np.zeros(1, np.int64)
    cross = (rest @ J[1:, 0]) % mod2 if d > 1 else np.zeros(1, np.int64)
    total = 0
    for x0 in range(q):
        val = (base + 2 * x0 * cross + J[0, 0] * x0 * x0) % mod2
        total += int(np.count_nonzero(val == 0))
    return total


def _block_histogram(J: np.ndarray, q: int) -> np.ndarray:
    """Counts of Q(x) mod q over x in (Z/q)^m."""
    m = J.shape[0]
    r = np.arange(q, dtype=np.int64)
    X = np.array(np.meshgrid(*([r] * m), indexing="ij")).reshape(m, -1).T
    vals = (np.einsum("mi,ij,mj->m", X, J, X) // 2) % q
    return np.bincount(vals, minlength=q).astype(object)


def _cyclic_convolve(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    out = np.zeros(q, dtype=object)
    nz = np.flatnonzero(a)
    for i in nz:
        out += a[i] * np.roll(b, i)
    return out


def density_count_by_blocks(fam: QuadFamily, p: int, k: int, level: int | None = None) -> int:
    """Same count as :func:`local_density_count`, from value histograms of the orthogonal blocks."""
    level = fam.ell if level is None else level
    q = p**k
    hist = np.zeros(q, dtype=object)
    hist[0] = 1
    if fam.dim0:
        hist = _cyclic_convolve(hist, _block_histogram(fam.J0, q), q)
    H = _block_histogram(np.array([[0, 1], [1, 0]]), q)
    for _ in range(level):
        hist = _cyclic_convolve(hist, H, q)
    return int(hist[0])


def is_unramified(fam: QuadFamily, p: int, level: int | None = None) -> bool:
    """True when the even lattice with Gram matrix J is unimodular at p."""
    level = fam.ell if level is None else level
    det = int(round(np.linalg.det(fam.J(level)))) if fam.dim(level) else 1
    return det % p != 0


def local_density(fam: QuadFamily, p: int, level: int | None = None, kmax: int = 10) -> Fraction | float:
    """delta_p = lim_k N(p^k) / p^{k(d-1)}.

    Unimodular primes use the closed form (1 - chi(p) p^{-m}) / (1 - chi(p) p^{1-m})
    with d = 2m. Otherwise the solutions divisible by p are peeled off:
    N(p^k) = N*(p^k) + p^d N(p^{k-2}), the primitive density N*(p^k)/p^{k(d-1)}
    is eventually constant by Hensel's lemma, and delta_p = A / (1 - p^{2-d}).
    """
    level = fam.ell if level is None else level
    d = fam.dim(level)
    m = d // 2
    if is_unramified(fam, p, level):
        c = fam.chi(p)
        return (1 - c * float(p) ** (-m)) / (1 - c * float(p) ** (1 - m))
    counts = {0: 1}
    prim = []
    for k in range(1, kmax + 1):
        counts[k] = density_count_by_blocks(fam, p, k, level)
        below = p**d * counts[k - 2] if k >= 2 else 1
        prim.append(Fraction(counts[k] - below, p ** (k * (d - 1))))
        if len(prim) >= 3 and prim[-1] == prim[-2] == prim[-3]:
            return prim[-1] / (1 - Fraction(1, p ** (d - 2)))
    raise ArithmeticError(f"primitive density at p = {p} did not stabilise by k = {kmax}")


def singular_series(fam: QuadFamily, level: int | None = None) -> float:
    """prod_p delta_p = L(m-1, chi) / L(m, chi) times correction factors at non-unimodular primes."""
    level = fam.ell if level is None else level
    d = fam.dim(level)
    m = d // 2
    if m < 3:
        raise ValueError("the singular series converges only for d >= 6")
    L = DirichletL(fam.disc)
    val = (L_value(L, m - 1) / L_value(L, m)).real
    det = abs(int(round(np.linalg.det(fam.J(level)))))
    for p in prime_factors(det):
        c = fam.chi(p)
        val *= float(local_density(fam, p, level))
        val *= (1 - c * float(p) ** (1 - m)) / (1 - c * float(p) ** (-m))
    return val


@dataclass
class DensityRow:
    p: int
    k: int
    count: int
    d: int

    @property
    def normalized(self) -> Fraction:
        return Fraction(self.count, self.p ** (self.k * (self.d - 1)))


def density_table(fam: QuadFamily, primes: Iterable[int], kmax: int, level: int | None = None) -> List[DensityRow]:
    level = fam.ell if level is None else level
    d = fam.dim(level)
    rows = []
    for p in primes:
        for k in range(1, kmax + 1):
            if (p**k) ** d <= DENSITY_BRUTE_FORCE_LIMIT:
                n = local_density_count(fam, p, k, level)
            else:
                n = density_count_by_blocks(fam, p, k, level)
            rows.append(DensityRow(p, k, n, d))
    return rows


def write_density_csv(rows: Sequence[DensityRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "k", "count", "normalized_density"])
        for r in rows:
            w.writerow([r.p, r.k, r.count, str(r.normalized)])


# -- the basic function under the finite Weil action ---------------------------------

def basic_function_spot_check(fam: QuadFamily, p: int, k: int, level: int | None = None) -> bool:
    """Finite model check that n(t), t in Z_p, and diag(u), u in Z_p^x, fix the lattice indicator.

    On (Z/p^k)^d: psi_p(t Q(x)) = 1 for integral t because Q is integral on the
    lattice, and x -> u x permutes residues for units u. Both are verified by
    enumeration.
    """
    level = fam.ell if level is None else level
    J = fam.J(level)
    d = J.shape[0]
    q = p**k
    if q**d > DENSITY_BRUTE_FORCE_LIMIT:
        raise ValueError("model too large")
    r = np.arange(q, dtype=np.int64)
    X = np.array(np.meshgrid(*([r] * d), indexing="ij")).reshape(d, -1).T
    two_q = np.einsum("mi,ij,mj->m", X, J, X)
    for t in range(1, min(q, 8)):
        # sum of psi(t Q(x)) = e^{pi i t x^T J x} over the model
        phase_sum = np.sum(np.exp(1j * np.pi * t * (two_q % 2)))
        if abs(phase_sum - q**d) > 1e-6:
            return False
    codes = X @ (q ** np.arange(d))
    for u in range(1, q):
        if math.gcd(u, p) != 1:
            continue
        Y = (u * X) % q
        if not np.array_equal(np.sort(Y @ (q ** np.arange(d))), np.sort(codes)):
            return False
    return True


__all__ = [
    "PoleError",
    "DirichletL",
    "L_value",
    "L_derivative",
    "completed_L",
    "hurwitz_zeta",
    "basic_weight",
    "weight_from_content",
    "content",
    "divisors",
    "local_density_count",
    "density_count_by_blocks",
    "local_density",
    "singular_series",
    "density_table",
    "write_density_csv",
    "basic_function_spot_check",
]
