"""The tower of quadratic spaces V_i = V_0 + i hyperbolic planes.

Q_i(x) = x^T J_i x / 2 with J_i = diag(J_0, H, ..., H), H = [[0, 1], [1, 0]].
The quadratic character is carried by the fundamental discriminant of
(-1)^{d/2} det J_i and evaluated with the Kronecker symbol.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

HYPERBOLIC = np.array([[0, 1], [1, 0]], dtype=np.int64)
ANISOTROPY_SCAN_RADIUS = 20


class FamilyError(ValueError):
    """Invalid tower data. ``code`` distinguishes the failure."""

    def __init__(self, code: str, msg: str):
        super().__init__(f"[{code}] {msg}")
        self.code = code


# -- elementary number theory -------------------------------------------------

def squarefree_part(n: int) -> int:
    if n == 0:
        raise ValueError("zero has no squarefree part")
    sign = -1 if n < 0 else 1
    n = abs(n)
    out = 1
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e % 2:
            out *= p
        p += 1
    return sign * out * n


def fundamental_discriminant(n: int) -> int:
    d = squarefree_part(n)
    return d if d % 4 == 1 else 4 * d


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a / n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a / n), n odd positive
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def prime_factors(n: int) -> List[int]:
    n = abs(n)
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def hilbert_symbol(a: int, b: int, p) -> int:
    """Hilbert symbol (a, b)_p for p a prime or the string 'inf'."""
    if p == "inf":
        return -1 if (a < 0 and b < 0) else 1

    def split(x):
        v = 0
        while x % p == 0:
            x //= p
            v += 1
        return v, x

    al, u = split(a)
    be, v = split(b)
    if p == 2:
        eps = lambda t: ((t - 1) // 2) % 2
        omega = lambda t: ((t * t - 1) // 8) % 2
        e = eps(u) * eps(v) + al * omega(v) + be * omega(u)
        return -1 if e % 2 else 1
    leg = lambda t: 1 if pow(t % p, (p - 1) // 2, p) == 1 else -1
    s = (-1) ** (al * be * ((p - 1) // 2))
    return s * leg(u) ** be * leg(v) ** al


def chi_by_hilbert(disc: int, n: int) -> int:
    """chi_disc(n) for n coprime to disc via Hilbert symbols.

    The character is the product of (n, disc)_v over v = inf and p | n.
    Reciprocity turns that into the product over the primes p | 2 disc
    with p not dividing n, which is what is evaluated here.
    """
    if math.gcd(n, disc) != 1:
        return 0
    out = 1
    for p in sorted(set(prime_factors(2 * disc))):
        if n % p:
            out *= hilbert_symbol(n, disc, p)
    return out


def signature(J: np.ndarray) -> tuple[int, int]:
    if J.shape[0] == 0:
        return 0, 0
    ev = np.linalg.eigvalsh(np.asarray(J, dtype=float))
    return int((ev > 0).sum()), int((ev < 0).sum())


# -- the tower ------------------------------------------------------------------

def tower_matrix(J0: np.ndarray, i: int) -> np.ndarray:
    d0 = J0.shape[0]
    d = d0 + 2 * i
    J = np.zeros((d, d), dtype=np.int64)
    J[:d0, :d0] = J0
    for k in range(i):
        s = d0 + 2 * k
        J[s:s + 2, s:s + 2] = HYPERBOLIC
    return J


@dataclass(frozen=True)
class QuadFamily:
    J0: np.ndarray
    ell: int
    disc: int
    conductor: int
    Js: List[np.ndarray] = field(repr=False)

    @property
    def dim0(self) -> int:
        return self.J0.shape[0]

    def dim(self, i: int) -> int:
        return self.dim0 + 2 * i

    def J(self, i: int) -> np.ndarray:
        if i < 0:
            raise IndexError("level must be nonnegative")
        if i < len(self.Js):
            return self.Js[i]
        return tower_matrix(self.J0, i)

    def Q(self, i: int, x) -> np.ndarray:
        x = np.asarray(x)
        J = self.J(i)
        if x.ndim == 1:
            return x @ J @ x / 2
        return np.einsum("mi,ij,mj->m", x, J, x) / 2

    def pairing(self, i: int, v, w):
        return np.asarray(v) @ self.J(i) @ np.asarray(w)

    @property
    def chi_trivial(self) -> bool:
        return self.disc == 1

    @property
    def chi_sign(self) -> int:
        """chi(-1), which also fixes the archimedean factor chi_inf(a) = sign(a)^e."""
        return -1 if self.disc < 0 else 1

    def chi_inf(self, a: float) -> int:
        return -1 if (a < 0 and self.disc < 0) else 1

    def chi(self, n: int) -> int:
        return chi_eval(self, n)

    @property
    def gamma(self) -> complex:
        return weil_index_arch(self)

    def to_json(self) -> str:
        return json.dumps(
            {
                "dim0": self.dim0,
                "ell": self.ell,
                "J0": [int(v) for v in self.J0.ravel()],
                "disc": self.disc,
                "conductor": self.conductor,
            }
        )

    @classmethod
    def from_json(cls, s: str | dict) -> "QuadFamily":
        d = json.loads(s) if isinstance(s, str) else s
        n = d["dim0"]
        J0 = np.array(d["J0"], dtype=np.int64).reshape(n, n)
        fam = build_family(J0, d["ell"], scan=False)
        if "disc" in d and d["disc"] != fam.disc:
            raise FamilyError("E_DISC", f"stored disc {d['disc']} disagrees with computed {fam.disc}")
        return fam


def _small_zero(J0: np.ndarray, radius: int) -> np.ndarray | None:
    """Look for a nonzero integral zero of x^T J0 x in a box (dim 2 or 4)."""
    n = J0.shape[0]
    r = np.arange(-radius, radius + 1)
    X = np.array(np.meshgrid(r, r, indexing="ij")).reshape(2, -1).T
    if n == 2:
        vals = np.einsum("mi,ij,mj->m", X, J0, X)
        hit = np.flatnonzero((vals == 0) & np.any(X != 0, axis=1))
        return X[hit[0]] if hit.size else None
    if np.any(J0[:2, 2:] != 0):
        for x in X:
            Y = np.column_stack([np.full(len(X), x[0]), np.full(len(X), x[1]), X])
            vals = np.einsum("mi,ij,mj->m", Y, J0, Y)
            hit = np.flatnonzero((vals == 0) & np.any(Y != 0, axis=1))
            if hit.size:
                return Y[hit[0]]
        return None
    # block diagonal: join the values of the two binary halves
    va = np.einsum("mi,ij,mj->m", X, J0[:2, :2], X)
    vb = np.einsum("mi,ij,mj->m", X, J0[2:, 2:], X)
    for v in np.intersect1d(va, -vb):
        for ia in np.flatnonzero(va == v):
            for ib in np.flatnonzero(vb == -v):
                z = np.concatenate([X[ia], X[ib]])
                if np.any(z != 0):
                    return z
    return None


def build_family(J0, ell: int, scan: bool = True) -> QuadFamily:
    """Assemble the tower V_0 < V_1 < ... < V_ell.

    Anisotropy of Q_0 is the caller's assertion. A cheap scan for small
    integral zeros rejects obvious mistakes.
    """
    J0 = np.asarray(J0)
    J0 = np.zeros((0, 0), np.int64) if J0.size == 0 else np.atleast_2d(J0)
    if J0.ndim != 2 or J0.shape[0] != J0.shape[1]:
        raise FamilyError("E_SHAPE", "J0 must be square")
    if J0.size and not np.array_equal(J0, np.round(J0)):
        raise FamilyError("E_NOT_INTEGRAL", "J0 must have integer entries")
    J0 = J0.astype(np.int64)
    n = J0.shape[0]
    if n % 2:
        raise FamilyError("E_ODD_DIM", f"dim V_0 = {n} is odd")
    if not np.array_equal(J0, J0.T):
        raise FamilyError("E_NOT_SYMMETRIC", "J0 must be symmetric")
    if not isinstance(ell, (int, np.integer)) or ell < 1:
        raise FamilyError("E_ELL", "ell must be a positive integer")
    if n == 0 and ell == 1:
        raise FamilyError("E_DEGENERATE_ELL", "V_0 = {0} requires ell > 1")
    if n and int(round(np.linalg.det(J0))) == 0:
        raise FamilyError("E_SINGULAR", "J0 is singular")
    if scan and n:
        p, q = signature(J0)
        if p and q:
            if n > 4:
                raise FamilyError("E_ISOTROPIC", "indefinite forms in 5 or more variables are isotropic over Q")
            z = _small_zero(J0, ANISOTROPY_SCAN_RADIUS)
            if z is not None:
                raise FamilyError("E_ISOTROPIC", f"Q_0 has the rational zero {z.tolist()}")
    Js = [tower_matrix(J0, i) for i in range(ell + 1)]
    d = n + 2 * ell
    raw = (-1) ** (d // 2) * int(round(np.linalg.det(Js[-1])))
    disc = fundamental_discriminant(raw)
    return QuadFamily(J0=J0, ell=int(ell), disc=disc, conductor=abs(disc), Js=Js)


def chi_eval(fam: QuadFamily, n: int) -> int:
    if n == 0:
        raise ValueError("chi is not evaluated at 0")
    return kronecker(fam.disc, int(n))


def weil_index_arch(fam: QuadFamily) -> complex:
    """exp(2 pi i sigma / 8), sigma the signature of J_ell, for psi(x) = e^{2 pi i x}."""
    p, q = signature(fam.J(fam.ell))
    return complex(np.exp(2j * np.pi * (p - q) / 8))


# -- similitudes and the unipotent radical ------------------------------------

def unipotent_matrix(J: np.ndarray, x) -> np.ndarray:
    """The unipotent element u(x) of O(V_{i+1}) with translation column Jx.

    With y = Jx it is [[I, y, 0], [0, 1, 0], [-y^T J, -Q(y), 1]]. When
    J^2 = I (every split level) this is [[I, Jx, 0], [0, 1, 0], [-x^T, -Q(x), 1]].
    Integer input stays integer when Q(y) is integral; otherwise floats
    (halves are exact in binary).
    """
    J = np.asarray(J)
    x = np.asarray(x)
    d = J.shape[0]
    y = J @ x
    q2 = y @ J @ y
    dtype = np.result_type(J, x)
    if np.issubdtype(dtype, np.integer) and q2 % 2:
        dtype = np.float64
    M = np.zeros((d + 2, d + 2), dtype=dtype)
    M[:d, :d] = np.eye(d, dtype=dtype)
    M[:d, d] = y
    M[d, d] = 1
    M[d + 1, :d] = -(J @ y)
    M[d + 1, d] = -(q2 // 2) if np.issubdtype(dtype, np.integer) else -q2 / 2
    M[d + 1, d + 1] = 1
    return M


def similitude_norm(h: np.ndarray, J: np.ndarray) -> float:
    """Recover lambda with h^T J h = lambda J; raises if h is not a similitude."""
    h = np.asarray(h, dtype=float)
    J = np.asarray(J, dtype=float)
    M = h.T @ J @ h
    k = np.argmax(np.abs(J))
    lam = M.flat[k] / J.flat[k]
    if not np.allclose(M, lam * J, atol=1e-10 * max(1.0, abs(lam))):
        raise ValueError("matrix is not a similitude of J")
    return float(lam)


@dataclass(frozen=True)
class GOElement:
    """Element of GO(V_{i+1}) acting on V_i + R^2.

    ``kind`` is one of

    * ``'similitude'``: payload is h in GO(V_i), ``lam`` its norm; acts as diag(h, lam, 1)
    * ``'torus'``: payload is a scalar a; acts as diag(I, a, 1/a)
    * ``'unipotent'``: payload is a vector x; the element u(x)
    * ``'weyl'``: swaps the last two coordinates
    """

    kind: str
    payload: object = None
    lam: float = 1.0

    @classmethod
    def similitude(cls, h, J) -> "GOElement":
        return cls("similitude", np.asarray(h, dtype=float), similitude_norm(h, J))

    def matrix(self, J: np.ndarray) -> np.ndarray:
        """The matrix on V_{i+1} = V_i + R^2, where J = J_i."""
        d = J.shape[0]
        M = np.eye(d + 2)
        if self.kind == "similitude":
            M[:d, :d] = np.asarray(self.payload, dtype=float)
            M[d, d] = self.lam
        elif self.kind == "torus":
            a = float(self.payload)
            M[d, d], M[d + 1, d + 1] = a, 1.0 / a
        elif self.kind == "unipotent":
            M = unipotent_matrix(J, self.payload).astype(float)
        elif self.kind == "weyl":
            M[d:, d:] = [[0, 1], [1, 0]]
        else:
            raise ValueError(f"unknown GO element kind {self.kind!r}")
        return M

    def similitude_norm(self) -> float:
        return self.lam if self.kind == "similitude" else 1.0
