"""Closed-form algebra of polynomial-times-complex-Gaussian functions.

A :class:`GaussianFunction` on R^n is a finite sum of terms

    c * P(x) * exp(-pi x^T A x + 2 pi i b^T x)

with ``A`` complex symmetric, ``Re A`` positive definite, ``b`` a complex
vector and ``P`` a polynomial. The set is closed under partial Fourier
transforms, real linear substitutions, quadratic phases and restriction of
coordinates to zero, and all of these are implemented exactly.

Fourier transforms use the kernel ``e^{2 pi i <u, x>}`` with Lebesgue
measure (self-dual for ``psi(x) = e^{2 pi i x}``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .poly import Poly

MAX_DEGREE = 8
MERGE_TOL = 1e-14
COND_LIMIT = 1e12


class GaussianError(ValueError):
    """Raised when a term leaves the Schwartz class or a transform is singular."""


def sqrt_det(A: np.ndarray) -> complex:
    """Square root of det(A) continued from the real positive-definite cone.

    For complex symmetric A with Re A positive definite every eigenvalue has
    positive real part, so the product of principal roots is the continuous
    branch.
    """
    if A.shape[0] == 0:
        return 1.0 + 0j
    lam = np.linalg.eigvals(A)
    if np.any(lam.real <= 0):
        raise GaussianError("eigenvalue left the right half-plane")
    return complex(np.prod(np.sqrt(lam)))


def _sym(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


@dataclass
class Term:
    poly: Poly
    A: np.ndarray
    b: np.ndarray
    c: complex = 1.0

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def check(self) -> None:
        if self.n == 0:
            return
        if np.linalg.eigvalsh(_sym(self.A.real)).min() <= 0:
            raise GaussianError("Re(A) is not positive definite")

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        quad = np.einsum("mi,ij,mj->m", X, self.A, X)
        expo = -np.pi * quad + 2j * np.pi * (X @ self.b)
        return self.c * self.poly.evaluate(X) * np.exp(expo)


@dataclass
class GaussianFunction:
    n: int
    terms: List[Term] = field(default_factory=list)

    # construction -----------------------------------------------------------
    @classmethod
    def gaussian(cls, A, b=None, poly: Poly | None = None, c: complex = 1.0) -> "GaussianFunction":
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        n = A.shape[0]
        b = np.zeros(n, dtype=complex) if b is None else np.asarray(b, dtype=complex)
        t = Term(poly if poly is not None else Poly.const(n), _sym(A), b, complex(c))
        t.check()
        return cls(n, [t])

    @classmethod
    def standard(cls, n: int) -> "GaussianFunction":
        """exp(-pi |x|^2), the self-dual Gaussian."""
        return cls.gaussian(np.eye(n))

    @classmethod
    def constant(cls, c: complex = 1.0) -> "GaussianFunction":
        """The 0-dimensional function with value c."""
        return cls(0, [Term(Poly.const(0), np.zeros((0, 0), complex), np.zeros(0, complex), complex(c))])

    # basic algebra ------------------------------------------------------------
    def __add__(self, other: "GaussianFunction") -> "GaussianFunction":
        if other.n != self.n:
            raise GaussianError("dimension mismatch")
        return GaussianFunction(self.n, self.terms + other.terms).merged()

    def __sub__(self, other: "GaussianFunction") -> "GaussianFunction":
        return self + other.scaled(-1.0)

    def scaled(self, s: complex) -> "GaussianFunction":
        return GaussianFunction(self.n, [Term(t.poly, t.A, t.b, t.c * s) for t in self.terms])

    def times_poly(self, p: Poly) -> "GaussianFunction":
        out = GaussianFunction(self.n, [Term(t.poly * p, t.A, t.b, t.c) for t in self.terms])
        out._check_degree()
        return out

    def tensor(self, other: "GaussianFunction") -> "GaussianFunction":
        """(x, y) -> self(x) * other(y)."""
        n, m = self.n, other.n
        terms = []
        for s in self.terms:
            for t in other.terms:
                A = np.zeros((n + m, n + m), complex)
                A[:n, :n] = s.A
                A[n:, n:] = t.A
                b = np.concatenate([s.b, t.b])
                p = s.poly.embed(n + m, range(n)) * t.poly.embed(n + m, range(n, n + m))
                terms.append(Term(p, A, b, s.c * t.c))
        return GaussianFunction(n + m, terms)

    def merged(self, tol: float = MERGE_TOL) -> "GaussianFunction":
        """Combine terms sharing (A, b); exact, never drops a nonzero term."""
        groups: List[Term] = []
        keys = np.zeros((0, self.n * self.n + self.n), dtype=complex)
        for t in self.terms:
            p = t.poly.scale(t.c)
            key = np.concatenate([t.A.ravel(), t.b])
            hit = np.flatnonzero(np.max(np.abs(keys - key), axis=1, initial=0.0) <= tol) if len(keys) else []
            if len(hit):
                g = groups[hit[0]]
                g.poly = g.poly + p
            else:
                groups.append(Term(p, t.A.copy(), t.b.copy(), 1.0))
                keys = np.vstack([keys, key])
        return GaussianFunction(self.n, [g for g in groups if not g.poly.is_zero()])

    def _check_degree(self) -> None:
        for t in self.terms:
            if t.poly.degree > MAX_DEGREE:
                raise GaussianError(f"polynomial degree {t.poly.degree} exceeds cap {MAX_DEGREE}")

    def check(self) -> None:
        for t in self.terms:
            t.check()

    def min_real_eig(self) -> float:
        if self.n == 0 or not self.terms:
            return np.inf
        return min(np.linalg.eigvalsh(_sym(t.A.real)).min() for t in self.terms)

    # evaluation ---------------------------------------------------------------
    def __call__(self, X) -> np.ndarray | complex:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = X.reshape(1, -1) if single else X
        if X2.shape[1] != self.n:
            raise GaussianError(f"expected points of dimension {self.n}, got {X2.shape[1]}")
        out = np.zeros(X2.shape[0], dtype=complex)
        for t in self.terms:
            out += t.evaluate(X2)
        return complex(out[0]) if single else out

    def value_at_zero(self) -> complex:
        return complex(sum(t.c * t.poly.constant_term() for t in self.terms))

    # operators ----------------------------------------------------------------
    def linear_sub(self, M, scale: complex = 1.0) -> "GaussianFunction":
        """x -> scale * g(M x) for invertible real M."""
        M = np.asarray(M, dtype=float)
        if M.shape != (self.n, self.n):
            raise GaussianError("substitution matrix has the wrong shape")
        if self.n and abs(np.linalg.det(M)) < 1e-300:
            raise GaussianError("singular substitution")
        terms = [Term(t.poly.substitute(M), _sym(M.T @ t.A @ M), M.T @ t.b, t.c * scale) for t in self.terms]
        return GaussianFunction(self.n, terms)

    def mul_quadratic_phase(self, t: float, J) -> "GaussianFunction":
        """x -> e^{2 pi i t x^T J x / 2} g(x)."""
        J = np.asarray(J, dtype=float)
        return GaussianFunction(self.n, [Term(s.poly, s.A - 1j * t * J, s.b, s.c) for s in self.terms])

    def mul_linear_phase(self, v) -> "GaussianFunction":
        """x -> e^{2 pi i v.x} g(x)."""
        v = np.asarray(v, dtype=complex)
        return GaussianFunction(self.n, [Term(s.poly, s.A, s.b + v, s.c) for s in self.terms])

    def translate(self, v) -> "GaussianFunction":
        """x -> g(x - v)."""
        v = np.asarray(v, dtype=float)
        terms = []
        for s in self.terms:
            # -pi (x-v)^T A (x-v) = -pi x^T A x + 2 pi x^T A v - pi v^T A v
            b = s.b + (-1j) * (s.A @ v)
            c = s.c * np.exp(-np.pi * (v @ s.A @ v) - 2j * np.pi * (s.b @ v))
            shift = np.concatenate([np.eye(self.n), -v[:, None]], axis=1)
            # P(x - v) via a homogenising variable
            p = _dehomogenise(s.poly.substitute(shift), self.n)
            terms.append(Term(p, s.A, b, c))
        return GaussianFunction(self.n, terms)

    def restrict_zero(self, coords: Iterable[int]) -> "GaussianFunction":
        coords = sorted(set(coords))
        keep = [j for j in range(self.n) if j not in coords]
        terms = []
        for t in self.terms:
            p = t.poly.restrict_zero(coords)
            if p.is_zero():
                continue
            terms.append(Term(p, t.A[np.ix_(keep, keep)].copy(), t.b[keep].copy(), t.c))
        return GaussianFunction(len(keep), terms)

    def reflect(self, coords: Iterable[int]) -> "GaussianFunction":
        d = np.ones(self.n)
        d[list(coords)] = -1.0
        return self.linear_sub(np.diag(d))

    def fourier(self, coords: Iterable[int] | None = None, sign: int = 1) -> "GaussianFunction":
        """Partial Fourier transform in ``coords`` with kernel e^{sign 2 pi i u.x}."""
        S = list(range(self.n)) if coords is None else sorted(set(coords))
        if not S:
            raise GaussianError("empty coordinate set")
        out = GaussianFunction(self.n, [])
        for idx, t in enumerate(self.terms):
            out.terms.extend(_fourier_term(t, S, idx))
        out = out.merged()
        if sign < 0:
            out = out.reflect(S)
        out._check_degree()
        return out

    # serialisation ------------------------------------------------------------
    def to_json(self) -> dict:
        def cm(M):
            return [[[z.real, z.imag] for z in row] for row in np.atleast_2d(M)]

        return {
            "n": self.n,
            "terms": [
                {
                    "poly": t.poly.to_json(),
                    "A": cm(t.A) if self.n else [],
                    "b": [[z.real, z.imag] for z in t.b],
                    "c": [complex(t.c).real, complex(t.c).imag],
                }
                for t in self.terms
            ],
        }

    @classmethod
    def from_json(cls, d: dict) -> "GaussianFunction":
        n = d["n"]
        terms = []
        for t in d["terms"]:
            A = np.array([[complex(*z) for z in row] for row in t["A"]], dtype=complex).reshape(n, n)
            b = np.array([complex(*z) for z in t["b"]], dtype=complex).reshape(n)
            terms.append(Term(Poly.from_json(n, t["poly"]), A, b, complex(*t["c"])))
        return cls(n, terms)


def _dehomogenise(p: Poly, n: int) -> Poly:
    # p has n+1 variables, the last one standing for the constant 1
    d: Dict[Tuple[int, ...], complex] = {}
    for e, c in p.coeffs.items():
        e2 = e[:n]
        d[e2] = d.get(e2, 0j) + c
    return Poly(n, d)


def _fourier_term(t: Term, S: Sequence[int], idx: int) -> List[Term]:
    n = t.n
    R = [j for j in range(n) if j not in S]
    A = t.A
    ASS = A[np.ix_(S, S)]
    if np.linalg.cond(ASS) > COND_LIMIT:
        raise GaussianError(f"term {idx}: Gaussian block is numerically singular")
    C = np.linalg.inv(ASS)
    C = _sym(C)
    # beta = b_S + P w, with w the output variables (u on S, z on R)
    P = np.zeros((len(S), n), complex)
    P[:, S] = np.eye(len(S))
    if R:
        P[:, R] = 1j * A[np.ix_(S, R)]
    bS = t.b[S]
    A2 = P.T @ C @ P
    if R:
        A2[np.ix_(R, R)] += A[np.ix_(R, R)]
    b2 = 1j * (P.T @ C @ bS)
    if R:
        b2[R] += t.b[R]
    pref = t.c * np.exp(-np.pi * (bS @ C @ bS)) / sqrt_det(ASS)
    A2 = _sym(A2)

    if t.poly.is_constant():
        return [Term(Poly.const(n, t.poly.constant_term()), A2, b2, pref)]

    # y^alpha z^beta  ->  z^beta * prod_j ((2 pi i)^{-1} d/du_j)^{alpha_j} [Gaussian]
    # d/dw_j (Q e^phi) = (dQ/dw_j + Q * (-2 pi (A2 w)_j + 2 pi i b2_j)) e^phi
    grad = [Poly.linear(-2 * np.pi * A2[j], 2j * np.pi * b2[j]) for j in range(n)]
    memo: Dict[Tuple[int, ...], Poly] = {}

    def D(alpha: Tuple[int, ...]) -> Poly:
        if alpha in memo:
            return memo[alpha]
        if sum(alpha) == 0:
            res = Poly.const(n)
        else:
            k = next(i for i, a in enumerate(alpha) if a)
            prev = list(alpha)
            prev[k] -= 1
            q = D(tuple(prev))
            j = S[k]
            res = (q.derivative(j) + q * grad[j]).scale(1.0 / (2j * np.pi))
        memo[alpha] = res
        return res

    total = Poly(n)
    for e, coef in t.poly.coeffs.items():
        alpha = tuple(e[j] for j in S)
        zpart = [0] * n
        for j in R:
            zpart[j] = e[j]
        total = total + D(alpha) * Poly.monomial(n, tuple(zpart), coef)
    return [Term(total, A2, b2, pref)]


def block_embed(J: np.ndarray, n: int, start: int = 0) -> np.ndarray:
    """Embed a square matrix into an n x n zero matrix at offset ``start``."""
    out = np.zeros((n, n), dtype=np.result_type(J, float))
    k = J.shape[0]
    out[start:start + k, start:start + k] = J
    return out


def block_linear(M: np.ndarray, n: int, start: int = 0) -> np.ndarray:
    """Identity on R^n with M acting on coordinates start..start+k-1."""
    out = np.eye(n)
    k = M.shape[0]
    out[start:start + k, start:start + k] = M
    return out


def sum_functions(fs: Iterable[GaussianFunction]) -> GaussianFunction:
    fs = list(fs)
    return GaussianFunction(fs[0].n, [t for f in fs for t in f.terms]).merged()
