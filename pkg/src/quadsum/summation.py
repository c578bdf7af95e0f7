"""Lattice points on the quadrics and both sides of the summation formula.

Every sum is accumulated with ``math.fsum`` on real and imaginary parts.
fsum is correctly rounded, so totals do not depend on the order in which
worker threads return their chunks.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy import integrate

from .analytic import (
    ArchIntegrator,
    c_of,
    closed_form_mellin,
    k_average,
    kappa,
    prepare_I,
)
from .descent import TestFunction, descend_to, fourier_X, majorant
from .gaussian import GaussianFunction
from .local_arith import DirichletL, L_value, singular_series, weight_from_content
from .poly import Poly
from .quadspace import QuadFamily

log = logging.getLogger(__name__)

HYPERBOLIC = np.array([[0, 1], [1, 0]])
MAX_POINTS = 20_000_000
TAIL_RTOL = 1e-12
START_RADIUS = 3
MAX_RADIUS = 200
CHUNK = 4096
BATCH = 1 << 18


def csum(values) -> complex:
    """Correctly rounded complex sum, independent of the order of ``values``."""
    values = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(values.real), math.fsum(values.imag))


# -- enumeration --------------------------------------------------------------------

@dataclass
class QuadricPointSet:
    J: np.ndarray
    radius: float
    points: np.ndarray
    contents: np.ndarray
    exhaustive: bool = True

    def __len__(self) -> int:
        return len(self.points)


def _check_last_pair(J: np.ndarray) -> None:
    d = J.shape[0]
    if d < 2 or not np.array_equal(J[-2:, -2:], HYPERBOLIC) or np.any(J[:-2, -2:]):
        raise ValueError("the last two coordinates must span an orthogonal hyperbolic plane")


@lru_cache(maxsize=None)
def _pairs(t: int, R: int) -> np.ndarray:
    """All (x, y) with x y = t and max(|x|, |y|) <= R."""
    if t == 0:
        r = np.arange(-R, R + 1)
        nz = r[r != 0]
        return np.concatenate([
            np.column_stack([np.zeros_like(r), r]),
            np.column_stack([nz, np.zeros_like(nz)]),
        ])
    out = []
    for x in range(1, min(abs(t), R) + 1):
        if t % x == 0 and abs(t // x) <= R:
            out.append((x, t // x))
            out.append((-x, -(t // x)))
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def _rest_rows(m: int, R: int, first: int | None) -> np.ndarray:
    r = np.arange(-R, R + 1)
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64)
    if first is None:
        grids = np.meshgrid(*([r] * m), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    tail = _rest_rows(m - 1, R, None)
    return np.column_stack([np.full(len(tail), first, dtype=np.int64), tail])


def _quadric_blocks(J: np.ndarray, R: int):
    """Yield arrays of integral zeros with sup-norm <= R, in a fixed order (may include 0).

    The free coordinates are enumerated in slices of the first coordinate;
    for each value q of the form on them, the last hyperbolic pair must solve
    x y = -q, found by a divisor table shared between equal values of q.
    """
    d = J.shape[0]
    m = d - 2
    Jr = J[:m, :m]
    slices = [None] if m <= 1 else list(range(-R, R + 1))
    for first in slices:
        rest = _rest_rows(m, R, first)
        q = np.einsum("ni,ij,nj->n", rest, Jr, rest) // 2 if m else np.zeros(1, dtype=np.int64)
        order = np.argsort(q, kind="stable")
        rest, q = rest[order], q[order]
        values, starts = np.unique(q, return_index=True)
        bounds = list(starts) + [len(q)]
        for k, val in enumerate(values):
            P = _pairs(int(-val), R)
            if not len(P):
                continue
            rows = rest[bounds[k]:bounds[k + 1]]
            yield np.column_stack([np.repeat(rows, len(P), axis=0), np.tile(P, (len(rows), 1))])


def enumerate_quadric(J, radius: float, max_points: int = MAX_POINTS) -> QuadricPointSet:
    """Nonzero integral zeros of x^T J x / 2 with sup-norm <= radius.

    Stops early, with ``exhaustive=False``, once more than ``max_points``
    points have been produced.
    """
    J = np.asarray(J, dtype=np.int64)
    _check_last_pair(J)
    if radius < 1:
        raise ValueError("radius must be at least 1")
    R = int(math.floor(radius))
    d = J.shape[0]
    blocks, total, exhaustive = [], 0, True
    for pts in _quadric_blocks(J, R):
        blocks.append(pts)
        total += len(pts)
        if total > max_points:
            exhaustive = False
            log.warning("enumeration stopped at %d points (radius %s)", total, radius)
            break
    pts = np.concatenate(blocks) if blocks else np.zeros((0, d), dtype=np.int64)
    pts = pts[np.any(pts != 0, axis=1)]
    contents = np.gcd.reduce(np.abs(pts), axis=1) if len(pts) else np.zeros(0, dtype=np.int64)
    return QuadricPointSet(J, float(radius), pts, contents, exhaustive)


def brute_force_quadric(J, radius: int) -> np.ndarray:
    """Every nonzero zero in the box, by testing all (2R+1)^d candidates."""
    J = np.asarray(J, dtype=np.int64)
    d = J.shape[0]
    r = np.arange(-radius, radius + 1)
    grids = np.meshgrid(*([r] * d), indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1)
    X = X[np.any(X != 0, axis=1)]
    return X[np.einsum("ni,ij,nj->n", X, J, X) == 0]


# -- point sums ------------------------------------------------------------------------

@dataclass
class PointSum:
    value: complex
    radius: int
    n_points: int
    tail_bound: float
    shells: List[float] = field(default_factory=list)


def _weights(fam: QuadFamily, level: int, contents: np.ndarray) -> np.ndarray:
    uniq, inv = np.unique(contents, return_inverse=True)
    table = np.array([weight_from_content(fam, int(c), level) for c in uniq], dtype=float)
    return table[inv]


def _evaluate(integ: ArchIntegrator, X: np.ndarray, threads: int) -> np.ndarray:
    chunks = [X[k:k + CHUNK] for k in range(0, len(X), CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(integ, chunks))
    else:
        parts = [integ(c) for c in chunks]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=complex)


def point_sum(fam: QuadFamily, level: int, arch: GaussianFunction, scale: float = 1.0,
              threads: int = 1, tail_rtol: float = TAIL_RTOL, radius: int | None = None,
              integ: ArchIntegrator | None = None, weighted: bool = True) -> PointSum:
    """sum over nonzero integral zeros xi of weight(xi) I(arch)(scale * xi).

    ``weighted=False`` drops the finite-place weight (every point counts 1).

    Without a fixed ``radius``, shells of growing sup-norm are added until
    the geometric extrapolation of the remaining shells falls below
    ``tail_rtol`` of the summed magnitudes, so sums that cancel (the
    counting functions) are not driven to huge radii.
    """
    integ = prepare_I(fam, level, arch) if integ is None else integ
    J = np.asarray(fam.J(level), dtype=np.int64)
    _check_last_pair(J)
    shells: List[complex] = []
    abs_shells: List[float] = []
    done_R = 0
    R = radius if radius is not None else max(START_RADIUS, int(math.ceil(START_RADIUS / scale)))
    n_points = 0
    while True:
        # stream the ball of radius R, keeping only the new shells done_R < sup <= R
        parts: Dict[int, List[complex]] = {r: [] for r in range(done_R + 1, R + 1)}
        abs_parts: Dict[int, List[float]] = {r: [] for r in parts}
        for pts in _batched(_quadric_blocks(J, R), done_R, BATCH):
            sup = np.max(np.abs(pts), axis=1)
            vals = _evaluate(integ, pts * scale, threads)
            if weighted:
                vals = _weights(fam, level, np.gcd.reduce(np.abs(pts), axis=1)) * vals
            for r in np.unique(sup):
                sel = sup == r
                parts[int(r)].append(csum(vals[sel]))
                abs_parts[int(r)].append(math.fsum(np.abs(vals[sel])))
            n_points += len(pts)
        for r in range(done_R + 1, R + 1):
            shells.append(csum(parts[r]))
            abs_shells.append(math.fsum(abs_parts[r]))
        done_R = R
        total = csum(shells)
        tail = _tail_estimate(abs_shells)
        if radius is not None:
            break
        if tail <= tail_rtol * max(math.fsum(abs_shells), 1e-300):
            break
        if R >= MAX_RADIUS:
            raise RuntimeError(f"point sum did not settle by radius {R} (tail {tail:.2e})")
        R = R + max(1, R // 2)
    log.info("point sum level %d: radius %d, %d points, tail %.2e", level, done_R, n_points, tail)
    return PointSum(total, done_R, n_points, tail, abs_shells)


def _batched(blocks, inner: int, size: int):
    """Regroup point blocks into batches of about ``size`` points with sup-norm > inner."""
    buf, n = [], 0
    for pts in blocks:
        pts = pts[np.max(np.abs(pts), axis=1) > inner]
        if len(pts):
            buf.append(pts)
            n += len(pts)
        if n >= size:
            yield np.concatenate(buf)
            buf, n = [], 0
    if buf:
        yield np.concatenate(buf)


def _tail_estimate(abs_shells: Sequence[float]) -> float:
    """Bound on the shells beyond the last one, assuming at least geometric decay."""
    if len(abs_shells) < 2:
        return math.inf
    last, prev = abs_shells[-1], abs_shells[-2]
    if last == 0.0:
        return 0.0
    q = last / prev if prev > 0 else 1.0
    return math.inf if q >= 0.9 else last * q / (1 - q)


# -- sides of the identity -------------------------------------------------------------

@dataclass
class SideResult:
    terms: Dict[str, complex]
    errors: Dict[str, float]
    runtimes: Dict[str, float]
    radii: Dict[str, int]


def side_assemble(tf: TestFunction, which: str = "direct", threads: int = 1) -> SideResult:
    """c_i(d_{l,i} f) and the level-i point sums for 1 <= i <= l, plus the kappa term."""
    if which == "fourier":
        tf = fourier_X(tf)
    elif which != "direct":
        raise ValueError("which must be 'direct' or 'fourier'")
    fam, ell = tf.fam, tf.level
    terms: Dict[str, complex] = {}
    errors: Dict[str, float] = {}
    runtimes: Dict[str, float] = {}
    radii: Dict[str, int] = {}
    for i in range(ell, 0, -1):
        fi = descend_to(tf, i).arch
        t0 = time.perf_counter()
        cv = c_of(fam, i, fi)
        terms[f"c-{i}"] = cv.value
        errors[f"c-{i}"] = max(cv.stencil_error, 1e-12 * abs(cv.value))
        runtimes[f"c-{i}"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        ps = point_sum(fam, i, fi, threads=threads)
        terms[f"point-sum-{i}"] = ps.value
        errors[f"point-sum-{i}"] = ps.tail_bound
        runtimes[f"point-sum-{i}"] = time.perf_counter() - t0
        radii[f"point-sum-{i}"] = ps.radius
    terms["kappa-term"] = kappa_term(tf)
    errors["kappa-term"] = 1e-12 * abs(terms["kappa-term"])
    runtimes["kappa-term"] = 0.0
    return SideResult(terms, errors, runtimes, radii)


def kappa_term(tf: TestFunction) -> complex:
    """kappa d_{l,0}(f)(0) when V_0 = 0; zero otherwise."""
    if tf.fam.dim0 > 0:
        return 0j
    return kappa() * complex(descend_to(tf, 0).arch.value_at_zero())


@dataclass
class VerificationReport:
    lhs_terms: Dict[str, complex]
    rhs_terms: Dict[str, complex]
    lhs_errors: Dict[str, float]
    rhs_errors: Dict[str, float]
    runtimes: Dict[str, float]
    settings: Dict[str, object] = field(default_factory=dict)

    @property
    def lhs_total(self) -> complex:
        return csum(list(self.lhs_terms.values()))

    @property
    def rhs_total(self) -> complex:
        return csum(list(self.rhs_terms.values()))

    @property
    def tail_bound(self) -> float:
        return math.fsum(self.lhs_errors.values()) + math.fsum(self.rhs_errors.values())

    @property
    def relative_deviation(self) -> float:
        return _rel_dev(self.lhs_total, self.rhs_total)

    def to_json(self) -> dict:
        cx = lambda z: [z.real, z.imag]
        return {
            "lhs_terms": {k: cx(v) for k, v in self.lhs_terms.items()},
            "rhs_terms": {k: cx(v) for k, v in self.rhs_terms.items()},
            "lhs_total": cx(self.lhs_total),
            "rhs_total": cx(self.rhs_total),
            "relative_deviation": self.relative_deviation,
            "tail_bound": self.tail_bound,
            "runtimes": self.runtimes,
            "settings": self.settings,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["term_label", "side", "real", "imag", "abs_err_bound"])
            for side, terms, errs in (("lhs", self.lhs_terms, self.lhs_errors), ("rhs", self.rhs_terms, self.rhs_errors)):
                for label, v in terms.items():
                    w.writerow([label, side, repr(float(v.real)), repr(float(v.imag)), repr(float(errs[label]))])


def verify_main(tf: TestFunction, threads: int = 1) -> VerificationReport:
    _require_verify(tf)
    lhs = side_assemble(tf, "direct", threads)
    rhs = side_assemble(tf, "fourier", threads)
    runtimes = {f"lhs:{k}": v for k, v in lhs.runtimes.items()}
    runtimes.update({f"rhs:{k}": v for k, v in rhs.runtimes.items()})
    settings = {"radii": {"lhs": lhs.radii, "rhs": rhs.radii}, "tail_rtol": TAIL_RTOL, "threads": threads}
    return VerificationReport(lhs.terms, rhs.terms, lhs.errors, rhs.errors, runtimes, settings)


def _rel_dev(lhs: complex, rhs: complex) -> float:
    """|lhs - rhs| / max(|lhs|, |rhs|), and 0 when both sides vanish."""
    scale = max(abs(lhs), abs(rhs))
    return abs(lhs - rhs) / scale if scale > 0 else 0.0


def _require_unramified(fam) -> None:
    # the finite part is the lattice indicator; off a unimodular lattice it is
    # not fixed by SL2(Z_p) and its local integrals are not the divisor sums used here
    if fam.dim0 and round(abs(np.linalg.det(fam.J(0)))) != 1:
        raise ValueError("the anisotropic core must be unimodular (ramified finite places are not modelled)")


def _require_verify(tf: TestFunction) -> None:
    if tf.d < 4:
        raise ValueError("the summation identity is checked for dim V_l >= 4")
    _require_unramified(tf.fam)


# -- scaling --------------------------------------------------------------------------------

@dataclass
class ScalingReport:
    a: Fraction
    lhs_terms: Dict[str, complex]
    rhs_terms: Dict[str, complex]

    @property
    def lhs(self) -> complex:
        return csum(list(self.lhs_terms.values()))

    @property
    def rhs(self) -> complex:
        return csum(list(self.rhs_terms.values()))

    @property
    def relative_deviation(self) -> float:
        return _rel_dev(self.lhs, self.rhs)

    def to_json(self) -> dict:
        cx = lambda z: [z.real, z.imag]
        return {"a": str(self.a), "lhs_terms": {k: cx(v) for k, v in self.lhs_terms.items()},
                "rhs_terms": {k: cx(v) for k, v in self.rhs_terms.items()},
                "lhs": cx(self.lhs), "rhs": cx(self.rhs), "relative_deviation": self.relative_deviation}


def _lower_terms(tf: TestFunction, threads: int) -> Dict[str, complex]:
    out = {}
    for i in range(tf.level - 1, 0, -1):
        fi = descend_to(tf, i).arch
        out[f"c-{i}"] = c_of(tf.fam, i, fi).value
        out[f"point-sum-{i}"] = point_sum(tf.fam, i, fi, threads=threads).value
    out["kappa-term"] = kappa_term(tf)
    return out


def scaling_check(tf: TestFunction, a, threads: int = 1) -> ScalingReport:
    """Both sides of the identity for the archimedean dilation by a, from the primitives of f.

    a acts only at the real place, and chi is trivial on positive reals, so
    the character factors are 1.
    """
    fam, ell, d = tf.fam, tf.level, tf.d
    _require_unramified(fam)
    if not (d > 4 or not fam.chi_trivial):
        raise ValueError("scaling identity needs dim V_l > 4 or a nontrivial character")
    a = Fraction(a)
    if a <= 0:
        raise ValueError("a must be positive")
    af = float(a)
    g = fourier_X(tf)
    top = af ** (1 - d / 2)
    lhs = {
        "c-top": top * c_of(fam, ell, tf.arch).value,
        "point-sum-top": top * point_sum(fam, ell, tf.arch, scale=1 / af, threads=threads).value,
    }
    lhs.update({f"lower:{k}": v / af for k, v in _lower_terms(tf, threads).items()})
    rhs = {
        "c-top": c_of(fam, ell, g.arch).value / top,
        "point-sum-top": point_sum(fam, ell, g.arch, scale=af, threads=threads).value / top,
    }
    rhs.update({f"lower:{k}": v * af for k, v in _lower_terms(g, threads).items()})
    return ScalingReport(a, lhs, rhs)


# -- the counting application -----------------------------------------------------------------

def _radial_aux(width: float) -> GaussianFunction:
    """|u|^2 exp(-pi width |u|^2) on R^2."""
    p = Poly.monomial(2, (2, 0)) + Poly.monomial(2, (0, 2))
    return GaussianFunction.gaussian(width * np.eye(2), poly=p)


COUNT_WIDTHS = (1.0, 0.6, 1.8)


def counting_function(fam: QuadFamily, level: int | None = None, widths=COUNT_WIDTHS) -> TestFunction:
    """Majorant Gaussian on V_l times a radial auxiliary factor vanishing at 0.

    The auxiliary factor phi = sum_j alpha_j |u|^2 exp(-pi w_j |u|^2) has
    alpha_0 = 1 and (alpha_1, alpha_2) solving the 2x2 system
    int phi = 0 and c_l(f) = 0. Then d_l(f) = 0 because phi(0) = 0, and
    d_l(F_X f) = 0 because F_X f(v, 0, 0) is proportional to int phi.
    """
    level = fam.ell if level is None else level
    g = GaussianFunction.gaussian(majorant(fam.J(level)))
    basis = [g.tensor(_radial_aux(w)) for w in widths]
    mass = [1.0 / (np.pi * w * w) for w in widths]
    cs = [c_of(fam, level, b).value for b in basis]
    M = np.array([[mass[1], mass[2]], [cs[1], cs[2]]], dtype=complex)
    rhs = -np.array([mass[0], cs[0]], dtype=complex)
    alpha = np.linalg.solve(M, rhs)
    arch = basis[0] + basis[1].scaled(alpha[0]) + basis[2].scaled(alpha[1])
    return TestFunction(fam, level, arch)


@dataclass
class CountRow:
    B: float
    count: complex
    main: complex
    lower: complex
    tail: complex
    self_terms: complex
    radius: int

    @property
    def ratio(self) -> float:
        return (self.count / self.main).real

    @property
    def predicted(self) -> complex:
        return self.main + self.lower + self.tail - self.self_terms

    @property
    def expansion_deviation(self) -> float:
        return abs(self.count - self.predicted) / abs(self.count)


def count_asymptotics(tf: TestFunction, B_list: Sequence[float], threads: int = 1) -> List[CountRow]:
    """Smoothed counts sum_xi weight(xi) I(f)(xi / B) against their expansion in B.

    The expansion is exact: B^{d-2} [c_l(F_X f) + sum I(F_X f)(B xi)]
    + B^{d/2} (lower terms of F_X f) - c_l(f) - B^{d/2-2} (lower terms of f).
    """
    fam, ell, d = tf.fam, tf.level, tf.d
    if d <= 4:
        raise ValueError("the counting expansion needs dim V_l > 4")
    g = fourier_X(tf)
    c_top = c_of(fam, ell, g.arch).value
    c_self = c_of(fam, ell, tf.arch).value
    low_g = csum(list(_lower_terms(g, threads).values()))
    low_f = csum(list(_lower_terms(tf, threads).values()))
    integ_f = prepare_I(fam, ell, tf.arch)
    integ_g = prepare_I(fam, ell, g.arch)
    rows = []
    for B in B_list:
        ps = point_sum(fam, ell, tf.arch, scale=1 / B, threads=threads, integ=integ_f)
        tail = point_sum(fam, ell, g.arch, scale=B, threads=threads, integ=integ_g).value
        rows.append(CountRow(B, ps.value, B ** (d - 2) * c_top, B ** (d / 2) * low_g, B ** (d - 2) * tail,
                             c_self + B ** (d / 2 - 2) * low_f, ps.radius))
    return rows


def count_by_n(tf: TestFunction, B: float, n_max: int, threads: int = 1) -> List[complex]:
    """The terms chi(n) n^{d/2-2} sum_{eta} I(f)(n eta / B), n = 1..n_max, of the smoothed count.

    eta runs over all nonzero integral zeros, so n eta runs over the zeros in
    n Z^d. Their sum over n is the weighted count of :func:`count_asymptotics`.
    """
    fam, ell, d = tf.fam, tf.level, tf.d
    integ = prepare_I(fam, ell, tf.arch)
    out = []
    for n in range(1, n_max + 1):
        ps = point_sum(fam, ell, tf.arch, scale=n / B, threads=threads, integ=integ, weighted=False)
        out.append(fam.chi(n) * n ** (d / 2 - 2) * ps.value)
    return out


def singular_integral(tf: TestFunction) -> complex:
    """int over Q = 0 of I(f), with the Leray measure delta(Q(xi)) d xi.

    delta(Q) = int_R e^{2 pi i t Q} dt turns the inner xi-integral into a
    Gaussian integral; the a-integral is a Mellin transform in closed form
    and only the t-integral is numerical.
    """
    fam, ell, d = tf.fam, tf.level, tf.d
    avg = k_average(fam, ell, tf.arch).restrict_zero([d])
    J = np.zeros((d + 1, d + 1))
    J[:d, :d] = fam.J(ell)

    def h(t: float) -> complex:
        g = avg.mul_quadratic_phase(t, J).fourier(range(d)).restrict_zero(range(d))
        return closed_form_mellin(g, fam.chi_sign, d / 2)

    re = integrate.quad(lambda t: h(t).real, -np.inf, np.inf, limit=400, epsabs=1e-13, epsrel=1e-11)[0]
    im = integrate.quad(lambda t: h(t).imag, -np.inf, np.inf, limit=400, epsabs=1e-13, epsrel=1e-11)[0]
    return re + 1j * im


@dataclass
class SingularSeriesCheck:
    c_top: complex
    L_value: complex
    density_product: float
    singular_integral: complex

    @property
    def predicted(self) -> complex:
        return self.L_value * self.density_product * self.singular_integral

    @property
    def relative_deviation(self) -> float:
        return abs(self.c_top - self.predicted) / abs(self.c_top)


def singular_series_check(tf: TestFunction) -> SingularSeriesCheck:
    """c_l(F_X f) against L(d/2, chi) x (product of local densities) x (singular integral of I(f))."""
    fam, ell, d = tf.fam, tf.level, tf.d
    c_top = c_of(fam, ell, fourier_X(tf).arch).value
    Lv = L_value(DirichletL(fam.disc), d / 2)
    return SingularSeriesCheck(c_top, Lv, singular_series(fam, ell), singular_integral(tf))


# -- truncated theta integral ----------------------------------------------------------

THETA_SHELL = 60


def _null_shell_counts(J: np.ndarray, P: int) -> Dict[Tuple[int, int], int]:
    """#{xi in Z^D : Q(xi) = q, |xi|^2 = p} for p <= P, when J is a sum of hyperbolic planes."""
    D = J.shape[0]
    if D % 2 or not np.array_equal(J, np.kron(np.eye(D // 2, dtype=int), HYPERBOLIC)):
        raise ValueError("the theta experiment needs a split form given as hyperbolic planes")
    r = math.isqrt(P)
    pair: Dict[Tuple[int, int], int] = {}
    for u in range(-r, r + 1):
        for v in range(-r, r + 1):
            if u * u + v * v <= P:
                pair[(u * v, u * u + v * v)] = pair.get((u * v, u * u + v * v), 0) + 1
    counts = {(0, 0): 1}
    for _ in range(D // 2):
        nxt: Dict[Tuple[int, int], int] = {}
        for (q1, p1), c1 in counts.items():
            for (q2, p2), c2 in pair.items():
                if p1 + p2 <= P:
                    nxt[(q1 + q2, p1 + p2)] = nxt.get((q1 + q2, p1 + p2), 0) + c1 * c2
        counts = nxt
    return counts


def _upper_incomplete(a: float, lo: float, hi: float, p: float) -> float:
    """int_lo^hi y^{a-1} e^{-pi p y} dy."""
    from scipy.special import gamma, gammaincc

    x = math.pi * p
    if p == 0:
        return math.log(hi / lo) if a == 0 else (hi ** a - lo ** a) / a
    return x ** (-a) * gamma(a) * (gammaincc(a, x * lo) - gammaincc(a, x * hi))


@dataclass
class ThetaFitReport:
    T_list: List[float]
    integrals: List[float]
    exponents: List[float]
    coefficients: Dict[str, float]
    constant: float
    predicted: complex
    condition: float

    @property
    def relative_deviation(self) -> float:
        return abs(self.constant - self.predicted) / abs(self.predicted)

    def detected_exponents(self, rtol: float = 1e-8) -> List[float]:
        scale = max(abs(v) for v in self.coefficients.values())
        return [s for s in self.exponents if abs(self.coefficients[f"exp({s:g}T)"]) > rtol * scale]

    def to_json(self) -> dict:
        return {"T_list": self.T_list, "integrals": self.integrals, "exponents": self.exponents,
                "coefficients": self.coefficients, "constant": self.constant,
                "predicted": [self.predicted.real, self.predicted.imag], "condition": self.condition,
                "relative_deviation": self.relative_deviation,
                "detected_exponents": self.detected_exponents()}


def theta_integral(tf: TestFunction, T: float, counts=None) -> float:
    """Integral of the truncated theta function of tf.arch over {g : g i in F}, T >= 0.

    The measure is dx dy / (2 y^2) dk, the Iwasawa measure with a > 0. With
    y = e^{2 H_B}, truncation at T only touches y > e^{2T} > 1, where only the
    trivial coset contributes. There the truncated function has zero mean in
    x, so the integral is the integral of the theta function over y <= e^{2T}.
    Above y = 1 the x-integral keeps only the null vectors and the y-integral
    is an incomplete gamma function; below y = 1 each shell of Q(xi) = q is
    integrated in x in closed form and in y by quadrature.
    """
    fam, ell = tf.fam, tf.level
    if T < 0:
        raise ValueError("T must be nonnegative")
    J = fam.J(ell + 1)
    D = J.shape[0]
    c0 = _majorant_multiple(tf)
    counts = _null_shell_counts(J, THETA_SHELL) if counts is None else counts
    a = D / 4 - 1
    Y = math.exp(2 * T)
    cusp = math.fsum(n * _upper_incomplete(a, 1.0, Y, p) for (q, p), n in counts.items() if q == 0)
    qs = np.array([k[0] for k in counts])
    ps = np.array([k[1] for k in counts], dtype=float)
    ns = np.array(list(counts.values()), dtype=float)
    safe_q = np.where(qs == 0, 1, qs)

    def lower(y: float) -> float:
        s = math.sqrt(max(1 - y * y, 0.0))
        xs = np.where(qs == 0, 1 - 2 * s, -np.sin(2 * np.pi * qs * s) / (np.pi * safe_q))
        return y ** (a - 1) * float(np.sum(ns * np.exp(-np.pi * y * ps) * xs))

    low = integrate.quad(lower, math.sqrt(3) / 2, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    return 0.5 * c0 * (cusp + low)


def _majorant_multiple(tf: TestFunction) -> float:
    """The scalar c with tf.arch = c exp(-pi xi^T |J| xi) on V_{l+1}; ValueError otherwise."""
    fam, ell = tf.fam, tf.level
    if fam.dim0:
        raise ValueError("the theta experiment needs a split family")
    P = majorant(fam.J(ell + 1))
    terms = tf.arch.merged().terms
    if len(terms) != 1:
        raise ValueError("the theta experiment needs a multiple of the majorant Gaussian")
    t = terms[0]
    if not (np.allclose(t.A, P, atol=1e-12) and np.allclose(t.b, 0) and t.poly.is_constant()):
        raise ValueError("the theta experiment needs a multiple of the majorant Gaussian")
    c = complex(t.c * t.poly.constant_term())
    if abs(c.imag) > 1e-14 * abs(c):
        raise ValueError("the theta experiment needs a real multiple")
    return c.real


def theta_truncation_experiment(tf: TestFunction, T_list: Sequence[float], threads: int = 1,
                                max_condition: float = 1e12) -> ThetaFitReport:
    """Fit the truncated theta integral at T_list to a + c T + sum_j b_j e^{s_j T}.

    The exponents are the positive residue points d/2 - 1 and d/2 - 2 of the
    boundary zeta integrals (d = dim V_l). The constant a is compared with the
    boundary total of F_2 f.
    """
    from .weil import F2

    T_list = [float(T) for T in T_list]
    if len(T_list) < 4 or any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be increasing with at least four entries")
    d = tf.d
    exps = sorted({s for s in (d / 2 - 1, d / 2 - 2) if s > 0}, reverse=True)
    counts = _null_shell_counts(tf.fam.J(tf.level + 1), THETA_SHELL)
    vals = [theta_integral(tf, T, counts) for T in T_list]
    T = np.array(T_list)
    cols = [np.ones_like(T), T] + [np.exp(s * T) for s in exps]
    M = np.stack(cols, axis=1)
    norms = np.linalg.norm(M, axis=0)
    cond = float(np.linalg.cond(M / norms))
    if cond > max_condition:
        raise ValueError(f"fit condition number {cond:.3g} too large")
    sol = np.linalg.lstsq(M / norms, np.array(vals), rcond=None)[0] / norms
    coef = {"const": float(sol[0]), "T": float(sol[1])}
    coef.update({f"exp({s:g}T)": float(b) for s, b in zip(exps, sol[2:])})
    side = side_assemble(TestFunction(tf.fam, tf.level, F2(tf.arch)), threads=threads)
    predicted = csum(list(side.terms.values()))
    log.info("theta fit: T=%s values=%s coefficients=%s condition=%.3g", T_list, vals, coef, cond)
    return ThetaFitReport(T_list, vals, exps, coef, float(sol[0]), predicted, cond)


__all__ = [
    "CountRow",
    "PointSum",
    "QuadricPointSet",
    "ScalingReport",
    "SideResult",
    "SingularSeriesCheck",
    "ThetaFitReport",
    "VerificationReport",
    "brute_force_quadric",
    "count_asymptotics",
    "count_by_n",
    "counting_function",
    "csum",
    "enumerate_quadric",
    "kappa_term",
    "point_sum",
    "scaling_check",
    "side_assemble",
    "singular_integral",
    "singular_series_check",
    "theta_integral",
    "theta_truncation_experiment",
    "verify_main",
]
