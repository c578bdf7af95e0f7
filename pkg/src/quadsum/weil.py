"""Weil representation of SL2(R) on Gaussian test functions.

Conventions: psi(x) = e^{2 pi i x}, Q(x) = x^T J x / 2, <x, y> = x^T J y.
On a block carrying the form J (dimension m) the generators act by

    n(t) = [[1, t], [0, 1]]      f(x) -> psi(t Q(x)) f(x)
    m(a) = diag(a, 1/a)          f(x) -> chi(a) |a|^{m/2} f(a x)
    w    = [[0, 1], [-1, 0]]     f(x) -> gamma * int f(y) psi(<x, y>) dy

with dy self-dual for the pairing, i.e. |det J|^{1/2} times Lebesgue measure.
A general element is split into these generators through its Bruhat
decomposition, pivoting through w when the lower-left entry is small so that
no huge intermediate parameters occur.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .gaussian import GaussianFunction, block_embed, block_linear
from .quadspace import GOElement, QuadFamily, unipotent_matrix

Generator = Tuple[str, float]


@dataclass(frozen=True)
class SL2Element:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if abs(self.a * self.d - self.b * self.c - 1.0) > 1e-12 * max(1.0, abs(self.a * self.d)):
            raise ValueError("determinant is not 1")

    # constructors -------------------------------------------------------------
    @classmethod
    def from_matrix(cls, M) -> "SL2Element":
        M = np.asarray(M, dtype=float)
        return cls(M[0, 0], M[0, 1], M[1, 0], M[1, 1])

    @classmethod
    def n(cls, t: float) -> "SL2Element":
        return cls(1.0, t, 0.0, 1.0)

    @classmethod
    def m(cls, a: float) -> "SL2Element":
        return cls(a, 0.0, 0.0, 1.0 / a)

    @classmethod
    def w(cls) -> "SL2Element":
        return cls(0.0, 1.0, -1.0, 0.0)

    @classmethod
    def k(cls, theta: float) -> "SL2Element":
        c, s = math.cos(theta), math.sin(theta)
        return cls(c, s, -s, c)

    @classmethod
    def random(cls, rng: np.random.Generator, spread: float = 0.7) -> "SL2Element":
        """n(x) m(t) k(theta) with x, log t ~ normal(spread) and theta uniform."""
        x = rng.normal() * spread
        t = math.exp(rng.normal() * spread) * (1 if rng.random() < 0.8 else -1)
        th = rng.uniform(0, 2 * math.pi)
        return cls.n(x) @ cls.m(t) @ cls.k(th)

    # group structure ----------------------------------------------------------
    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "SL2Element") -> "SL2Element":
        return SL2Element.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "SL2Element":
        return SL2Element(self.d, -self.b, -self.c, self.a)

    # Iwasawa decomposition g = n(x) diag(t, 1/t) k(theta), t > 0 -----------------
    def iwasawa(self) -> Tuple[float, float, float]:
        r = math.hypot(self.c, self.d)
        t = 1.0 / r
        theta = math.atan2(-self.c, self.d)
        kinv = SL2Element.k(-theta).matrix
        x = (self.matrix @ kinv)[0, 1] * t
        return x, t, theta

    def H_B(self) -> float:
        return math.log(self.iwasawa()[1])


def bruhat_word(g: SL2Element) -> List[Generator]:
    """Generators whose product (left to right) equals g.

    For |c| >= |d| this is n(a/c) m(-1/c) w n(d/c). Otherwise g = (g w^{-1}) w
    and g w^{-1} has lower-left entry d, so the first branch applies to it.
    The lower-left entry used is therefore always at least |(c, d)| / sqrt 2.
    """
    a, b, c, d = g.a, g.b, g.c, g.d
    if abs(c) >= abs(d):
        return [("n", a / c), ("m", -1.0 / c), ("w", 0.0), ("n", d / c)]
    # g w^{-1} = [[b, -a], [d, -c]]
    return [("n", b / d), ("m", -1.0 / d), ("w", 0.0), ("n", -c / d), ("w", 0.0)]


def iwasawa_word(g: SL2Element) -> List[Generator]:
    x, t, theta = g.iwasawa()
    return [("n", x), ("m", t)] + bruhat_word(SL2Element.k(theta))


def word_matrix(word: List[Generator]) -> np.ndarray:
    M = np.eye(2)
    for kind, p in word:
        if kind == "n":
            G = SL2Element.n(p).matrix
        elif kind == "m":
            G = SL2Element.m(p).matrix
        else:
            G = SL2Element.w().matrix
        M = M @ G
    return M


# -- the action on a block -------------------------------------------------------

@dataclass(frozen=True)
class WeilBlock:
    """Where the Weil representation acts inside a GaussianFunction."""

    J: np.ndarray
    start: int
    gamma: complex
    odd_sign: bool  # chi_inf(-1) = -1

    @property
    def m(self) -> int:
        return self.J.shape[0]

    def coords(self) -> List[int]:
        return list(range(self.start, self.start + self.m))


def apply_generator(f: GaussianFunction, blk: WeilBlock, kind: str, p: float) -> GaussianFunction:
    m, n = blk.m, f.n
    if kind == "n":
        if m == 0 or p == 0.0:
            return f
        return f.mul_quadratic_phase(p, block_embed(blk.J.astype(float), n, blk.start))
    if kind == "m":
        sign = -1.0 if (p < 0 and blk.odd_sign) else 1.0
        scale = sign * abs(p) ** (m / 2)
        if m == 0:
            return f.scaled(scale)
        return f.linear_sub(block_linear(p * np.eye(m), n, blk.start), scale)
    # w: gamma |det J|^{1/2} \hat f(J x) on the block
    if m == 0:
        return f.scaled(blk.gamma)
    Jf = blk.J.astype(float)
    g = f.fourier(blk.coords())
    return g.linear_sub(block_linear(Jf, n, blk.start), blk.gamma * math.sqrt(abs(np.linalg.det(Jf))))


def weil_block(f: GaussianFunction, blk: WeilBlock, g: SL2Element) -> GaussianFunction:
    word = iwasawa_word(g)
    for kind, p in reversed(word):
        f = apply_generator(f, blk, kind, p)
    return f


def family_block(fam: QuadFamily, i: int, start: int = 0) -> WeilBlock:
    return WeilBlock(fam.J(i), start, fam.gamma, fam.chi_sign < 0)


# -- public operations --------------------------------------------------------------

def rho(fam: QuadFamily, i: int, g: SL2Element, f: GaussianFunction) -> GaussianFunction:
    """rho_i(g) f for f a function on V_i."""
    if f.n != fam.dim(i):
        raise ValueError(f"rho_{i} acts on functions of {fam.dim(i)} variables, got {f.n}")
    return weil_block(f, family_block(fam, i), g)


def L_vee(g: SL2Element, f: GaussianFunction) -> GaussianFunction:
    """v -> f(g^T v) on the last two coordinates."""
    return f.linear_sub(block_linear(g.matrix.T, f.n, f.n - 2))


def r_action(fam: QuadFamily, i: int, g: SL2Element, f: GaussianFunction) -> GaussianFunction:
    """r_i(g) = rho_i(g) on the V_i block, tensored with L^vee(g) on the last pair."""
    if f.n != fam.dim(i) + 2:
        raise ValueError(f"r_{i} acts on functions of {fam.dim(i) + 2} variables, got {f.n}")
    return L_vee(g, weil_block(f, family_block(fam, i), g))


def F2(f: GaussianFunction) -> GaussianFunction:
    """Fourier transform in the last coordinate."""
    return f.fourier([f.n - 1])


def F2_inverse(f: GaussianFunction) -> GaussianFunction:
    return f.fourier([f.n - 1], sign=-1)


_SYMPLECTIC_SWAP = np.array([[0.0, 1.0], [-1.0, 0.0]])


def wedge_transform(f: GaussianFunction) -> GaussianFunction:
    """int f(w) psi(w1 v2 - w2 v1) dw on the last two coordinates."""
    if f.n < 2:
        raise ValueError("need at least two coordinates")
    g = f.fourier([f.n - 2, f.n - 1])
    return g.linear_sub(block_linear(_SYMPLECTIC_SWAP, f.n, f.n - 2))


def sigma_action(fam: QuadFamily, i: int, h: GOElement, f: GaussianFunction) -> GaussianFunction:
    """sigma_i(h) on S(V_i + R^2), by closed forms (no Fourier transform except for the swap)."""
    d = fam.dim(i)
    if f.n != d + 2:
        raise ValueError("dimension mismatch")
    if h.kind == "similitude":
        M = np.eye(d + 2)
        M[:d, :d] = np.linalg.inv(np.asarray(h.payload, dtype=float))
        M[d, d] = 1.0 / h.lam
        return f.linear_sub(M)
    if h.kind == "torus":
        a = float(h.payload)
        M = np.eye(d + 2)
        M[d, d] = M[d + 1, d + 1] = 1.0 / a
        return f.linear_sub(M, 1.0 / abs(a))
    if h.kind == "unipotent":
        J = fam.J(i).astype(float)
        y = J @ np.asarray(h.payload, dtype=float)
        M = np.eye(d + 2)
        M[:d, d] = -y
        # phase psi(xi2' (-y^T J xi + Q(y) xi1')) written as psi(z^T P z / 2)
        P = np.zeros((d + 2, d + 2))
        P[:d, d + 1] = P[d + 1, :d] = -(J @ y)
        P[d, d + 1] = P[d + 1, d] = y @ J @ y / 2
        return f.linear_sub(M).mul_quadratic_phase(1.0, P)
    if h.kind == "weyl":
        return wedge_transform(f)
    raise ValueError(f"unsupported GO element kind {h.kind!r}")


def sigma_by_transport(fam: QuadFamily, i: int, h: GOElement, f: GaussianFunction) -> GaussianFunction:
    """F_2 o L(h) o F_2^{-1}, the defining formula; used to check the closed forms."""
    H = h.matrix(fam.J(i))
    return F2(F2_inverse(f).linear_sub(np.linalg.inv(H)))


__all__ = [
    "SL2Element",
    "WeilBlock",
    "bruhat_word",
    "iwasawa_word",
    "rho",
    "r_action",
    "L_vee",
    "F2",
    "F2_inverse",
    "wedge_transform",
    "sigma_action",
    "sigma_by_transport",
    "weil_block",
    "family_block",
    "unipotent_matrix",
]
