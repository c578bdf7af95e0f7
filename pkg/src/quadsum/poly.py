"""Sparse multivariate polynomials with complex coefficients.

Used as the prefactors of Gaussian terms. A polynomial is a mapping from
exponent tuples to coefficients; all operations return new objects.
"""

from __future__ import annotations

from itertools import product
from typing import Dict, Iterable, Tuple

import numpy as np

Exponent = Tuple[int, ...]


class Poly:
    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Dict[Exponent, complex] | None = None):
        self.n = n
        self.coeffs: Dict[Exponent, complex] = {}
        if coeffs:
            for e, c in coeffs.items():
                if len(e) != n:
                    raise ValueError(f"exponent {e} does not have length {n}")
                if c != 0:
                    self.coeffs[tuple(int(k) for k in e)] = complex(c)

    # construction ---------------------------------------------------------
    @classmethod
    def const(cls, n: int, c: complex = 1.0) -> "Poly":
        return cls(n, {(0,) * n: c})

    @classmethod
    def linear(cls, coef: Iterable[complex], const: complex = 0.0) -> "Poly":
        coef = list(coef)
        n = len(coef)
        d: Dict[Exponent, complex] = {}
        if const != 0:
            d[(0,) * n] = const
        for j, c in enumerate(coef):
            if c != 0:
                e = [0] * n
                e[j] = 1
                d[tuple(e)] = c
        return cls(n, d)

    @classmethod
    def monomial(cls, n: int, exps: Exponent, c: complex = 1.0) -> "Poly":
        return cls(n, {tuple(exps): c})

    # queries ----------------------------------------------------------------
    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.coeffs)

    def constant_term(self) -> complex:
        return self.coeffs.get((0,) * self.n, 0j)

    def __repr__(self) -> str:
        return f"Poly(n={self.n}, {self.coeffs})"

    # arithmetic -------------------------------------------------------------
    def __add__(self, other: "Poly") -> "Poly":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        d = dict(self.coeffs)
        for e, c in other.coeffs.items():
            d[e] = d.get(e, 0j) + c
        return Poly(self.n, d)

    def __neg__(self) -> "Poly":
        return self.scale(-1.0)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, s: complex) -> "Poly":
        return Poly(self.n, {e: c * s for e, c in self.coeffs.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        d: Dict[Exponent, complex] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = d.get(e, 0j) + c1 * c2
        return Poly(self.n, d)

    def power(self, k: int) -> "Poly":
        out = Poly.const(self.n)
        for _ in range(k):
            out = out * self
        return out

    def derivative(self, j: int) -> "Poly":
        d: Dict[Exponent, complex] = {}
        for e, c in self.coeffs.items():
            if e[j] > 0:
                e2 = list(e)
                e2[j] -= 1
                d[tuple(e2)] = d.get(tuple(e2), 0j) + c * e[j]
        return Poly(self.n, d)

    # structural maps --------------------------------------------------------
    def substitute(self, M: np.ndarray) -> "Poly":
        """Return x -> P(M x) for an (n x m) matrix M; result has m variables."""
        M = np.asarray(M)
        m = M.shape[1]
        rows = [Poly.linear(M[j]) for j in range(self.n)]
        cache: Dict[Tuple[int, int], Poly] = {}

        def pw(j: int, k: int) -> Poly:
            if (j, k) not in cache:
                cache[(j, k)] = rows[j].power(k)
            return cache[(j, k)]

        out = Poly(m)
        for e, c in self.coeffs.items():
            term = Poly.const(m, c)
            for j, k in enumerate(e):
                if k:
                    term = term * pw(j, k)
            out = out + term
        return out

    def restrict_zero(self, coords: Iterable[int]) -> "Poly":
        coords = sorted(set(coords))
        keep = [j for j in range(self.n) if j not in coords]
        d: Dict[Exponent, complex] = {}
        for e, c in self.coeffs.items():
            if all(e[j] == 0 for j in coords):
                e2 = tuple(e[j] for j in keep)
                d[e2] = d.get(e2, 0j) + c
        return Poly(len(keep), d)

    def permute(self, perm: Iterable[int]) -> "Poly":
        """New variable k is old variable perm[k]."""
        perm = list(perm)
        return Poly(self.n, {tuple(e[p] for p in perm): c for e, c in self.coeffs.items()})

    def embed(self, n_total: int, positions: Iterable[int]) -> "Poly":
        """Place the variables of self at ``positions`` inside n_total variables."""
        positions = list(positions)
        d = {}
        for e, c in self.coeffs.items():
            e2 = [0] * n_total
            for k, p in zip(e, positions):
                e2[p] = k
            d[tuple(e2)] = c
        return Poly(n_total, d)

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        """Evaluate at the rows of X (shape (m, n)); returns shape (m,)."""
        X = np.atleast_2d(X)
        out = np.zeros(X.shape[0], dtype=complex)
        if not self.coeffs:
            return out
        maxdeg = max(max(e) for e in self.coeffs) if self.n else 0
        powers = [np.ones_like(X, dtype=complex)]
        for _ in range(maxdeg):
            powers.append(powers[-1] * X)
        for e, c in self.coeffs.items():
            t = np.full(X.shape[0], c, dtype=complex)
            for j, k in enumerate(e):
                if k:
                    t = t * powers[k][:, j]
            out += t
        return out

    def close_to(self, other: "Poly", tol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) <= tol for c in diff.coeffs.values())

    def to_json(self):
        return [[list(e), [c.real, c.imag]] for e, c in sorted(self.coeffs.items())]

    @classmethod
    def from_json(cls, n: int, data) -> "Poly":
        return cls(n, {tuple(e): complex(c[0], c[1]) for e, c in data})


def all_exponents(n: int, max_degree: int):
    for e in product(range(max_degree + 1), repeat=n):
        if sum(e) <= max_degree:
            yield e
