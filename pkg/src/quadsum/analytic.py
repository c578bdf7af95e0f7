"""Archimedean integrals, Tate zeta continuation and the boundary constants.

Measures: d^x a = da/|a| on R^x, dk = d theta / 2 pi on SO(2), and on
SL2(R) the pushforward of dt d^x a / a^2 dk from N x R^x x K. The finite
part of every test function is the basic function, so the finite places
contribute the Dirichlet series of the family character.

The K-average over SO(2) uses the periodic trapezoid rule, which converges
geometrically for the real-analytic integrands met here.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple

import mpmath as mp
import numpy as np
from scipy import integrate
from scipy.special import exp1, kve, loggamma

from .gaussian import GaussianFunction, Term, sum_functions
from .local_arith import DirichletL, L_derivative, L_value, PoleError
from .quadspace import QuadFamily
from .weil import F2_inverse, SL2Element, r_action, rho

log = logging.getLogger(__name__)

THETA_ORDER = 64
N_SUM_RTOL = 1e-16
RICHARDSON_STEP = 0.02
EULER_GAMMA = 0.5772156649015329
K_TOL = 1e-12
K_MAX_ORDER = 4096


class QuadratureError(RuntimeError):
    pass


# -- K-averages ------------------------------------------------------------------

def k_nodes(order: int = THETA_ORDER, offset: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    thetas = 2 * np.pi * (np.arange(order) + offset) / order
    return thetas, np.full(order, 1.0 / order)


def _k_images(fam, i, f, thetas, action, threads):
    if action == "r":
        act = lambda th: r_action(fam, i, SL2Element.k(th), f)
    elif action == "rho":
        act = lambda th: rho(fam, i + 1, SL2Element.k(th), f)
    else:
        raise ValueError(f"unknown action {action!r}")
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(act, thetas))
    return [act(th) for th in thetas]


def k_average(fam: QuadFamily, i: int, f: GaussianFunction, order: int | None = None,
              action: str = "r", threads: int = 1,
              tol: float = K_TOL, max_order: int = K_MAX_ORDER) -> GaussianFunction:
    """sum_j w_j A(k(theta_j)) f with A = r_i (default) or rho_{i+1}, terms merged.

    A fixed ``order`` uses exactly that many nodes. With ``order=None`` the
    node set starts at THETA_ORDER and is doubled (reusing the old nodes) until two
    successive averages agree to ``tol`` relative on a fixed set of probe points
    (relative to the larger of the average and the input there);
    strongly sheared functions need several hundred nodes.
    """
    adaptive = order is None
    order = THETA_ORDER if adaptive else order
    thetas, weights = k_nodes(order)
    avg = sum_functions(g.scaled(w) for g, w in zip(_k_images(fam, i, f, thetas, action, threads), weights))
    if not adaptive:
        return avg
    probes = np.vstack([np.zeros(f.n), np.random.default_rng(0).normal(scale=0.7, size=(12, f.n))])
    # an average that cancels (odd character, even input) is judged against the input's size
    floor = np.max(np.abs(f(probes)))
    while True:
        thetas, weights = k_nodes(order, offset=0.5)
        extra = sum_functions(g.scaled(w) for g, w in zip(_k_images(fam, i, f, thetas, action, threads), weights))
        finer = sum_functions([avg.scaled(0.5), extra.scaled(0.5)])
        old, new = avg(probes), finer(probes)
        order *= 2
        if np.max(np.abs(old - new)) <= tol * max(np.max(np.abs(new)), floor, 1e-300):
            log.info("K-average level %d (%s): %d trapezoid nodes", i, action, order)
            return finer
        if order >= max_order:
            raise QuadratureError(f"K-average not converged at {order} nodes")
        avg = finer


# -- the operator I at the real place -------------------------------------------

def _split_poly(poly, d: int) -> List[Tuple[Tuple[int, ...], int, complex]]:
    """Monomials y^alpha a^beta of a polynomial in (y, a) as (alpha, beta, coef)."""
    return [(e[:d], e[d], c) for e, c in poly.coeffs.items()]


@dataclass
class ArchIntegrator:
    """Evaluates xi -> int_{R^x} int_K r_i(k) f(xi/a, 0, a) chi(a) |a|^{2-d/2} dk d^x a.

    ``avg`` is the K-average of f with the first auxiliary coordinate pinned
    to zero, a function of (y, a) in d + 1 variables.
    """

    d: int
    chi_sign: int
    avg: GaussianFunction
    radial: np.ndarray | None = field(init=False, default=None)

    def __post_init__(self):
        self.radial = self._radial_form()

    def _radial_form(self) -> np.ndarray | None:
        """A matrix P with I(xi) a function of xi^T P xi alone, when the terms allow one.

        That holds when every term has no linear part, no polynomial
        dependence on xi, and a xi-block proportional to a common P
        (the majorant presets, whose V-factor is a K-eigenfunction).
        """
        d = self.d
        P = None
        for t in self.avg.terms:
            Ayy = t.A[:d, :d]
            if np.any(np.abs(t.b) > 0) or np.any(np.abs(t.A[:d, d]) > 1e-14 * np.abs(Ayy).max()):
                return None
            if any(any(alpha) for alpha, _, _ in _split_poly(t.poly, d)):
                return None
            if P is None:
                P = Ayy
                continue
            lam = np.vdot(P.ravel(), Ayy.ravel()) / np.vdot(P.ravel(), P.ravel())
            if np.abs(Ayy - lam * P).max() > 1e-12 * np.abs(Ayy).max():
                return None
        return None if P is None else P

    def __call__(self, XI) -> np.ndarray | complex:
        XI = np.asarray(XI, dtype=float)
        single = XI.ndim == 1
        X = np.atleast_2d(XI)
        if X.shape[1] != self.d:
            raise ValueError(f"expected points of dimension {self.d}")
        if np.any(np.all(X == 0, axis=1)):
            raise ValueError("xi = 0 is not in the domain of I; use the constant term instead")
        if self.radial is not None and len(X) > 1:
            # evaluate once per distinct value of the invariant form
            keys = np.einsum("mi,ij,mj->m", X, self.radial, X)
            _, first, inv = np.unique(keys, return_index=True, return_inverse=True)
            out = self._evaluate(X[first])[inv]
        else:
            out = self._evaluate(X)
        return complex(out[0]) if single else out

    def _evaluate(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros(X.shape[0], dtype=complex)
        for t in self.avg.terms:
            if np.any(np.abs(t.b) > 0):
                out += np.array([self._quad_term(t, x) for x in X])
            else:
                out += self._bessel_term(t, X)
        return out

    def _bessel_term(self, t: Term, X: np.ndarray) -> np.ndarray:
        d = self.d
        Ayy, Aya, c = t.A[:d, :d], t.A[:d, d], t.A[d, d]
        q = np.einsum("mi,ij,mj->m", X, Ayy, X)
        cross = X @ Aya
        root = np.sqrt(q) * np.sqrt(c)
        base = np.exp(-2 * np.pi * cross - 2 * np.pi * root)
        out = np.zeros(X.shape[0], dtype=complex)
        for alpha, beta, coef in _split_poly(t.poly, d):
            k = beta - sum(alpha)
            parity = 1 + self.chi_sign * (-1) ** (k % 2)
            if parity == 0:
                continue
            nu = 2 - d / 2 + k
            mono = np.prod(X ** np.array(alpha), axis=1) if any(alpha) else 1.0
            bess = kve(nu / 2, 2 * np.pi * root)
            out += parity * t.c * coef * mono * (q / c) ** (nu / 4) * bess * base
        return out

    def _quad_term(self, t: Term, x: np.ndarray) -> complex:
        single = GaussianFunction(self.d + 1, [t])
        e = 2 - self.d / 2

        def integrand(u, sign, part):
            a = sign * math.exp(u)
            z = np.concatenate([x / a, [a]])
            val = single(z) * abs(a) ** e * (self.chi_sign if sign < 0 else 1)
            return val.real if part == 0 else val.imag

        total = 0j
        for sign in (1.0, -1.0):
            re = integrate.quad(integrand, -30, 30, args=(sign, 0), limit=400, epsabs=1e-14)[0]
            im = integrate.quad(integrand, -30, 30, args=(sign, 1), limit=400, epsabs=1e-14)[0]
            total += re + 1j * im
        return total


def prepare_I(fam: QuadFamily, i: int, f: GaussianFunction, order: int | None = None,
              threads: int = 1) -> ArchIntegrator:
    d = fam.dim(i)
    if f.n != d + 2:
        raise ValueError("test function has the wrong number of variables")
    avg = k_average(fam, i, f, order, threads=threads).restrict_zero([d])
    return ArchIntegrator(d, fam.chi_sign, avg)


def I_arch(fam: QuadFamily, i: int, f: GaussianFunction, xi, order: int | None = None) -> complex:
    return prepare_I(fam, i, f, order)(np.asarray(xi, dtype=float))


# -- profiles and the Tate zeta integral ---------------------------------------

@dataclass
class ZetaProfile:
    psi_arch: GaussianFunction
    psi_arch_hat: GaussianFunction
    L: DirichletL
    chi_sign: int
    vol1: float = 1.0

    @classmethod
    def from_function(cls, psi: GaussianFunction, L: DirichletL, chi_sign: int) -> "ZetaProfile":
        return cls(psi, psi.fourier(sign=-1), L, chi_sign, unit_idele_volume())

    def swapped(self) -> "ZetaProfile":
        """Profile of the transform; its transform is x -> psi(-x)."""
        return ZetaProfile(self.psi_arch_hat, self.psi_arch.reflect([0]), self.L, self.chi_sign, self.vol1)


def unit_idele_volume(primes: Sequence[int] = (2, 3, 5, 7, 11, 13)) -> float:
    """Volume of the norm-one ideles modulo Q^x, i.e. of prod_p Z_p^x.

    With d^x x = zeta_p(1) |x|^{-1} dx each unit group gets
    (1 - 1/p)^{-1} (1 - 1/p) = 1, computed exactly.
    """
    vol = Fraction(1)
    for p in primes:
        vol *= Fraction(p, p - 1) * (1 - Fraction(1, p))
    return float(vol)


def psi_profile(fam: QuadFamily, i: int, f: GaussianFunction, order: int | None = None,
                threads: int = 1) -> ZetaProfile:
    d = fam.dim(i)
    if f.n != d + 2:
        raise ValueError("test function has the wrong number of variables")
    psi = k_average(fam, i, f, order, threads=threads).restrict_zero(range(d + 1))
    return ZetaProfile.from_function(psi, DirichletL(fam.disc), fam.chi_sign)


def rho_profile(fam: QuadFamily, i: int, f: GaussianFunction, order: int | None = None) -> ZetaProfile:
    """K-average of rho_{i+1}(k) f at (0, 0, x), the profile of the rho-side zeta integral."""
    d = fam.dim(i)
    psi = k_average(fam, i, f, order, action="rho").restrict_zero(range(d + 1))
    return ZetaProfile.from_function(psi, DirichletL(fam.disc), fam.chi_sign)


def _one_var_terms(phi: GaussianFunction):
    for t in phi.terms:
        yield {e[0]: c * t.c for e, c in t.poly.coeffs.items()}, complex(t.A[0, 0]), complex(t.b[0])


def upper_gamma(a: complex, z) -> np.ndarray:
    """Gamma(a, z) for one complex a and an array of z with Re z > 0.

    Series with the stable bracket Gamma(a) - z^a / a for |z| < 3, the Lentz
    continued fraction beyond. Orders within 1e-3 of a negative integer go
    to mpmath, where the series has a removable singularity that costs digits.
    """
    a = complex(a)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty_like(z)
    near_pole = round(a.real) <= -1 and abs(a - round(a.real)) < 1e-3
    if near_pole:
        return np.array([complex(mp.gammainc(a, complex(v))) for v in z])
    small = np.abs(z) < 3.0
    if np.any(small):
        zs = z[small]
        logz = np.log(zs)
        if abs(a) < 1e-12:
            out[small] = exp1(zs)
        else:
            # Gamma(a) - z^a / a = (Gamma(a + 1) - 1) / a - (z^a - 1) / a
            head = np.expm1(loggamma(a + 1)) / a - np.expm1(a * logz) / a
            term = np.ones_like(zs)
            acc = np.zeros_like(zs)
            for k in range(1, 80):
                term = term * (-zs) / k
                acc += term / (a + k)
            out[small] = head - np.exp(a * logz) * acc
    big = ~small
    if np.any(big):
        zb = z[big]
        tiny = 1e-300
        b = zb + 1 - a
        c = np.full_like(zb, 1 / tiny)
        d = 1 / b
        h = d.copy()
        for i in range(1, 2000):
            an = -i * (i - a)
            b = b + 2
            d = an * d + b
            d = np.where(np.abs(d) < tiny, tiny, d)
            c = b + an / c
            c = np.where(np.abs(c) < tiny, tiny, c)
            d = 1 / d
            delta = d * c
            h = h * delta
            if np.max(np.abs(delta - 1)) < 4e-16:
                break
        else:
            raise QuadratureError("incomplete gamma continued fraction did not converge")
        out[big] = np.exp(-zb + a * np.log(zb)) * h
    return out


def _tail_integral(phi: GaussianFunction, s: complex, c: float, L: DirichletL, chi_sign: int) -> complex:
    """sum_{n>=1} chi(n) int_c^infty [phi(n t) + chi(-1) phi(-n t)] t^s d^x t."""
    total = 0j
    by_order: Dict[int, List[Tuple[complex, complex]]] = {}
    for coeffs, A, b in _one_var_terms(phi):
        if b != 0:
            total += _tail_integral_quad(coeffs, A, b, s, c, L, chi_sign)
            continue
        for m, coef in coeffs.items():
            if 1 + chi_sign * (-1) ** m != 0:
                by_order.setdefault(m, []).append((coef, A))
    if not by_order:
        return total
    min_re = min(A.real for group in by_order.values() for _, A in group)
    # beyond n_max every term is below e^{-40} times the n = 1 term
    n_max = max(1, int(math.ceil(math.sqrt(1 + 40.0 / (np.pi * min_re * c * c)))))
    n = np.arange(1, n_max + 1)
    chi = np.array([L.chi(int(k)) for k in n], dtype=float)
    for m, group in sorted(by_order.items()):
        coef = np.array([g[0] for g in group])[:, None]
        A = np.array([g[1] for g in group])[:, None]
        x = np.pi * A * n * n
        a = (m + s) / 2
        g = upper_gamma(a, (x * c * c).ravel()).reshape(x.shape)
        vals = coef * n**m * x ** (-a) * g
        total += np.sum(vals * chi)
    return total


def _tail_integral_quad(coeffs, A, b, s, c, L, chi_sign) -> complex:
    def phi(x):
        return sum(coef * x**m for m, coef in coeffs.items()) * np.exp(-np.pi * A * x * x + 2j * np.pi * b * x)

    total = 0j
    n = 1
    while True:
        def integrand(u, part):
            t = math.exp(u)
            v = (phi(n * t) + chi_sign * phi(-n * t)) * t**s
            return v.real if part == 0 else v.imag

        hi = math.log(c) + 8.0
        lo = math.log(c)
        val = integrate.quad(integrand, lo, hi, args=(0,), limit=200)[0] + 1j * integrate.quad(
            integrand, lo, hi, args=(1,), limit=200)[0]
        total += L.chi(n) * val
        if n > 1 and abs(val) <= 1e-15 * max(abs(total), 1e-300):
            return total
        n += 1


def epsilon_factor(L: DirichletL, s: complex) -> complex:
    """tau(chi) q^{-s}; identically 1 for the trivial character."""
    if L.trivial:
        return 1.0
    return L.gauss_sum() * L.conductor ** (-s)


def tate_zeta(zp: ZetaProfile, s: complex) -> complex:
    """Z(Psi, chi |.|^s) = L(s, chi) int Psi chi |a|^s d^x a, continued to all s.

    The line |a| = q^{-1/2} splits the integral; the inner part is turned
    into an outer integral of the transform by twisted Poisson summation.
    """
    s = complex(s)
    L = zp.L
    if L.trivial and (abs(s) < 1e-14 or abs(s - 1) < 1e-14):
        res = -zp.vol1 * zp.psi_arch.value_at_zero() if abs(s) < 1e-14 else zp.vol1 * zp.psi_arch_hat.value_at_zero()
        raise PoleError(s, res)
    c = L.conductor ** -0.5
    out = _tail_integral(zp.psi_arch, s, c, L, zp.chi_sign)
    out += epsilon_factor(L, s) * _tail_integral(zp.psi_arch_hat, 1 - s, c, L, zp.chi_sign)
    if L.trivial:
        out -= zp.vol1 * zp.psi_arch.value_at_zero() / s
        out -= zp.vol1 * zp.psi_arch_hat.value_at_zero() / (1 - s)
    return out


def residue_by_circle(zp: ZetaProfile, s0: float, radius: float = 1e-3, nodes: int = 16) -> complex:
    """(1 / 2 pi i) oint Z ds on a small circle, by the trapezoid rule."""
    ang = 2 * np.pi * np.arange(nodes) / nodes
    vals = [tate_zeta(zp, s0 + radius * np.exp(1j * a)) * radius * np.exp(1j * a) for a in ang]
    return complex(np.mean(vals))


# -- boundary constants -------------------------------------------------------------

@dataclass
class CValue:
    s0: float
    branch: str
    value: complex
    pole_residue: complex = 0j
    stencil_error: float = 0.0

    def to_json(self) -> dict:
        return {"s0": self.s0, "branch": self.branch, "value": [self.value.real, self.value.imag],
                "pole_residue": [self.pole_residue.real, self.pole_residue.imag],
                "stencil_error": self.stencil_error}


def _five_point(F: Callable[[float], complex], h: float) -> complex:
    return (-F(2 * h) + 8 * F(h) - 8 * F(-h) + F(-2 * h)) / (12 * h)


def c_extract(zp: ZetaProfile, d_i: int, step: float = RICHARDSON_STEP, tol: float = 1e-9) -> CValue:
    """c_i: the value of Z at 2 - d_i/2, or the derivative of s Z(s + s0) at 0 on a pole."""
    if d_i % 2 or d_i < 2:
        raise ValueError("d_i must be a positive even integer")
    s0 = 2 - d_i / 2
    if not (zp.L.trivial and s0 in (0.0, 1.0)):
        return CValue(s0, "holomorphic-value", tate_zeta(zp, s0))
    F = lambda h: h * tate_zeta(zp, s0 + h)
    d1, d2, d3 = (_five_point(F, step / 2**j) for j in range(3))
    r1 = (16 * d2 - d1) / 15
    r2 = (16 * d3 - d2) / 15
    err = abs(r2 - r1)
    if err > tol * max(1.0, abs(r2)):
        raise QuadratureError(f"Richardson stencil did not settle (change {err:.2e})")
    residue = -zp.vol1 * zp.psi_arch.value_at_zero() if s0 == 0 else zp.vol1 * zp.psi_arch_hat.value_at_zero()
    return CValue(s0, "pole-derivative", complex(r2), complex(residue), err)


def c_of(fam: QuadFamily, i: int, f: GaussianFunction, order: int | None = None) -> CValue:
    return c_extract(psi_profile(fam, i, f, order), fam.dim(i))


# -- the product route: Dirichlet L times the archimedean Mellin transform ------------

def _even_taylor(phi: GaussianFunction, chi_sign: int, J: int) -> np.ndarray:
    """Taylor coefficients of phi(x) + chi(-1) phi(-x) at 0 up to x^{J-1}."""
    t = np.zeros(J, dtype=complex)
    for coeffs, A, b in _one_var_terms(phi):
        if b != 0:
            raise NotImplementedError("Taylor route needs profiles without linear phases")
        for m, coef in coeffs.items():
            if 1 + chi_sign * (-1) ** m == 0:
                continue
            l = 0
            while m + 2 * l < J:
                t[m + 2 * l] += 2 * coef * (-np.pi * A) ** l / math.factorial(l)
                l += 1
    return t


def _cquad(g, lo, hi) -> complex:
    # the requested tolerance sits at the roundoff floor; quad warns but returns its best value
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.quad(lambda a: g(a).real, lo, hi, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
        im = integrate.quad(lambda a: g(a).imag, lo, hi, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
    return re + 1j * im


def mellin_laurent(phi: GaussianFunction, chi_sign: int, s0: float) -> Tuple[complex, complex, complex]:
    """(residue, constant, derivative of the regular part) of int_{R^x} phi chi |a|^s d^x a at s0.

    Continued by subtracting Taylor polynomials on (0, 1); the integrals are
    done by adaptive quadrature, independently of the closed-form path.
    """
    J = max(0, int(math.ceil(-s0))) + 3
    tay = _even_taylor(phi, chi_sign, J)

    def even(a):
        return complex(phi(np.array([a])) + chi_sign * phi(np.array([-a])))

    def head(a, log_power):
        poly = sum(tay[j] * a**j for j in range(J))
        return (even(a) - poly) * a ** (s0 - 1) * math.log(a) ** log_power

    def tail(a, log_power):
        return even(a) * a ** (s0 - 1) * math.log(a) ** log_power

    residue = 0j
    const = _cquad(lambda a: head(a, 0), 0, 1) + _cquad(lambda a: tail(a, 0), 1, np.inf)
    deriv = _cquad(lambda a: head(a, 1), 0, 1) + _cquad(lambda a: tail(a, 1), 1, np.inf)
    for j in range(J):
        if abs(s0 + j) < 1e-12:
            residue = tay[j]
        else:
            const += tay[j] / (s0 + j)
            deriv -= tay[j] / (s0 + j) ** 2
    return complex(residue), complex(const), complex(deriv)


def product_route_laurent(zp: ZetaProfile, s0: float) -> Tuple[complex, complex]:
    """(residue, constant term) of L(s, chi) Z_inf(s) at s0."""
    R, C, D = mellin_laurent(zp.psi_arch, zp.chi_sign, s0)
    L = zp.L
    if L.trivial and s0 == 1.0:
        # zeta(1 + e) = 1/e + gamma_E + ...; the archimedean factor is regular here
        return C, EULER_GAMMA * C + D
    L0, L1 = L_value(L, s0), L_derivative(L, s0)
    return L0 * R, L0 * C + L1 * R


def c_product_route(zp: ZetaProfile, d_i: int) -> complex:
    return product_route_laurent(zp, 2 - d_i / 2)[1]


def closed_form_mellin(phi: GaussianFunction, chi_sign: int, s: complex) -> complex:
    """int_{R^x} phi chi |a|^s d^x a for Re s > 0 via Gamma functions."""
    out = 0j
    for coeffs, A, b in _one_var_terms(phi):
        if b != 0:
            raise NotImplementedError
        for m, coef in coeffs.items():
            if 1 + chi_sign * (-1) ** m == 0:
                continue
            a = (m + s) / 2
            out += 2 * coef * 0.5 * complex((np.pi * A) ** (-a)) * complex(mp.gamma(a))
    return out


# -- the functional equation ----------------------------------------------------------

@dataclass
class FEReport:
    points: List[complex]
    lhs: List[complex]
    rhs: List[complex]

    @property
    def max_deviation(self) -> float:
        return max(abs(a - b) / max(1.0, abs(a)) for a, b in zip(self.lhs, self.rhs))


DEFAULT_FE_POINTS = (0.5, 0.3 + 2.0j, -0.7 + 0.5j, 1.6 - 1.0j, 2.5)


def fe_check(fam: QuadFamily, i: int, f: GaussianFunction, points: Sequence[complex] = DEFAULT_FE_POINTS,
             order: int | None = None) -> FEReport:
    """Z_{r_i}(f, s) against Z_{rho_{i+1}}(F_2^{-1} f, 1 - s), profiles built independently.

    For a ramified character the finite places contribute the factor
    tau(chi) q^{-s} between the two sides.
    """
    zr = psi_profile(fam, i, f, order)
    zrho = rho_profile(fam, i, F2_inverse(f), order)
    lhs = [tate_zeta(zr, s) for s in points]
    rhs = [epsilon_factor(zr.L, s) * tate_zeta(zrho, 1 - s) for s in points]
    return FEReport(list(points), lhs, rhs)


# -- pole scan ---------------------------------------------------------------------------

def pole_scan(zp: ZetaProfile, lo: float = -2.0, hi: float = 2.0, step: float = 0.25,
              eps: Tuple[float, float] = (1e-5, 1e-6), tol: float = 1e-8) -> List[float]:
    """Grid points where eps * Z(s + eps) tends to a nonzero limit."""
    found = []
    for s in np.arange(lo, hi + step / 2, step):
        try:
            r = [e * tate_zeta(zp, s + e) for e in eps]
        except PoleError:
            found.append(float(s))
            continue
        if abs(r[1]) > tol and abs(r[0] - r[1]) < 0.01 * abs(r[1]):
            found.append(float(s))
    return found


# -- the volume of SL2(Q) \ SL2(A) -------------------------------------------------------

def kappa() -> float:
    """Measure of the standard fundamental domain {g : g i in F} for the Iwasawa measure.

    The finite part SL2(Z_p) has volume 1 at every p. At the real place
    restricting to a > 0 gives dx dy / (2 y^2) dk on H x K with y = a^2, and
    the parametrisation by a in R^x covers every element twice. The domain
    is taken with all of K; -I in SL2(Z) is not divided out. This is the
    normalisation under which the summation identity balances.
    """
    area = integrate.dblquad(lambda y, x: 1.0 / (2 * y * y), -0.5, 0.5,
                             lambda x: math.sqrt(1 - x * x), lambda x: np.inf)[0]
    return 2.0 * area


__all__ = [
    "ArchIntegrator",
    "CValue",
    "FEReport",
    "QuadratureError",
    "THETA_ORDER",
    "ZetaProfile",
    "I_arch",
    "c_extract",
    "c_of",
    "c_product_route",
    "closed_form_mellin",
    "upper_gamma",
    "epsilon_factor",
    "fe_check",
    "k_average",
    "kappa",
    "mellin_laurent",
    "pole_scan",
    "prepare_I",
    "product_route_laurent",
    "psi_profile",
    "residue_by_circle",
    "rho_profile",
    "tate_zeta",
    "unit_idele_volume",
]
