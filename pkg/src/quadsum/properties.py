"""Quantitative property checks across the package, each reporting a deviation and a tolerance.

The ``properties`` subcommand runs all of them; the acceptance tests call
the same functions. Every check is deterministic (fixed seeds).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, List

import numpy as np

from .analytic import (
    c_extract,
    c_of,
    c_product_route,
    fe_check,
    prepare_I,
    psi_profile,
    tate_zeta,
)
from .descent import TestFunction, arch_preset, descend
from .gaussian import GaussianFunction
from .local_arith import basic_weight, divisors, local_density_count
from .poly import Poly
from .quadspace import GOElement, QuadFamily, build_family
from .summation import brute_force_quadric, enumerate_quadric
from .weil import F2, SL2Element, r_action, rho, sigma_action, wedge_transform


@dataclass
class PropertyResult:
    name: str
    deviation: float
    tolerance: float
    runtime: float = 0.0
    detail: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.deviation) and self.deviation <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: deviation {self.deviation:.3e} (tolerance {self.tolerance:.0e}, {self.runtime:.1f} s)"

    def to_json(self) -> dict:
        return {"name": self.name, "deviation": self.deviation, "tolerance": self.tolerance,
                "passed": self.passed, "runtime": self.runtime, "detail": self.detail}


def split_family(ell: int) -> QuadFamily:
    return build_family(np.zeros((0, 0), dtype=int), ell)


def random_function(rng: np.random.Generator, n: int) -> GaussianFunction:
    """A complex Gaussian times a linear polynomial, plus a real Gaussian."""
    R = rng.normal(size=(n, n))
    S = rng.normal(size=(n, n))
    A = R @ R.T + np.eye(n) + 0.2j * (S + S.T)
    g = GaussianFunction.gaussian(A, poly=Poly.linear(rng.normal(size=n), 1.0))
    return g + GaussianFunction.gaussian(1.5 * np.eye(n))


def random_null_vector(fam: QuadFamily, i: int, rng: np.random.Generator) -> np.ndarray:
    """A random real zero of Q_i, solved for in the last coordinate."""
    J = fam.J(i).astype(float)
    x = rng.normal(size=J.shape[0])
    x[-2] = np.sign(x[-2]) * max(abs(x[-2]), 0.3)
    rest = x[:-1] @ J[:-1, :-1] @ x[:-1] / 2
    x[-1] = -rest / x[-2]
    return x


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), 1e-300))


def _timed(fn: Callable[[], PropertyResult]) -> PropertyResult:
    t0 = time.perf_counter()
    res = fn()
    res.runtime = time.perf_counter() - t0
    return res


# -- weil-action -------------------------------------------------------------------

def check_equivariance(n_g: int = 50, n_pts: int = 20, seed: int = 0) -> PropertyResult:
    """F_2 rho_{i+1}(g) = r_i(g) F_2 on the split senary family (i = 2)."""
    def run():
        fam, i = split_family(3), 2
        rng = np.random.default_rng(seed)
        f = random_function(rng, fam.dim(i + 1))
        X = rng.normal(size=(n_pts, fam.dim(i) + 2)) * 0.6
        F = F2(f)
        worst = 0.0
        for _ in range(n_g):
            g = SL2Element.random(rng)
            worst = max(worst, _rel(F2(rho(fam, i + 1, g, f))(X), r_action(fam, i, g, F)(X)))
        return PropertyResult("equivariance of F2", worst, 1e-9, detail={"group_elements": n_g, "points": n_pts})
    return _timed(run)


def check_cocycle(n_pairs: int = 50, n_pts: int = 20, seed: int = 1) -> PropertyResult:
    """rho(g1 g2) = rho(g1) rho(g2) on a split and on a definite-core family."""
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for fam in (split_family(3), build_family(2 * np.eye(2, dtype=int), 2)):
            i = fam.ell
            f = random_function(rng, fam.dim(i))
            X = rng.normal(size=(n_pts, fam.dim(i)))
            for _ in range(n_pairs):
                g1, g2 = SL2Element.random(rng), SL2Element.random(rng)
                worst = max(worst, _rel(rho(fam, i, g1 @ g2, f)(X), rho(fam, i, g1, rho(fam, i, g2, f))(X)))
        return PropertyResult("metaplectic cocycle", worst, 1e-8, detail={"pairs": n_pairs, "points": n_pts})
    return _timed(run)


def check_sigma_commutes(n_g: int = 10, seed: int = 2) -> PropertyResult:
    """sigma(h) r(g) = r(g) sigma(h) for the isometries u(x) and the Weyl swap."""
    def run():
        fam, i = split_family(3), 2
        rng = np.random.default_rng(seed)
        d = fam.dim(i)
        f = random_function(rng, d + 2)
        X = rng.normal(size=(20, d + 2)) * 0.6
        worst = 0.0
        for h in (GOElement("unipotent", rng.integers(-2, 3, size=d).astype(float)), GOElement("weyl")):
            for _ in range(n_g):
                g = SL2Element.random(rng)
                a = sigma_action(fam, i, h, r_action(fam, i, g, f))(X)
                b = r_action(fam, i, g, sigma_action(fam, i, h, f))(X)
                worst = max(worst, _rel(a, b))
        return PropertyResult("sigma commutes with r", worst, 1e-9)
    return _timed(run)


# -- the operator I ------------------------------------------------------------------------

def check_action_formulas(n_xi: int = 10, seed: int = 3) -> PropertyResult:
    """The four transformation rules of I under GO(V_{l+1}), at random real null vectors."""
    def run():
        fam, i = split_family(3), 3
        d = fam.dim(i)
        rng = np.random.default_rng(seed)
        f = arch_preset(fam, i, "skew") + arch_preset(fam, i, "majorant-times-linear").scaled(0.5)
        base = prepare_I(fam, i, f)
        lam = 3.0
        h = np.eye(d)
        h[0::2, 0::2] *= lam
        x = rng.integers(-2, 3, size=d).astype(float)
        a = 2.0
        sim = prepare_I(fam, i, sigma_action(fam, i, GOElement.similitude(h, fam.J(i)), f))
        tor = prepare_I(fam, i, sigma_action(fam, i, GOElement("torus", a), f))
        uni = prepare_I(fam, i, sigma_action(fam, i, GOElement("unipotent", x), f))
        devs = {"similitude": 0.0, "torus": 0.0, "unipotent": 0.0, "weyl": 0.0}
        for _ in range(n_xi):
            xi = random_null_vector(fam, i, rng)
            ref = base(xi)
            devs["similitude"] = max(devs["similitude"], _rel(sim(xi), lam * base(np.linalg.solve(h, xi))))
            # chi(a) = 1 for a > 0
            devs["torus"] = max(devs["torus"], _rel(tor(xi), a ** (1 - d / 2) * base(xi / a)))
            devs["unipotent"] = max(devs["unipotent"], _rel(uni(xi), np.exp(-2j * np.pi * (x @ xi)) * ref))
        X = rng.normal(size=(20, d + 2)) * 0.6
        devs["weyl"] = _rel(sigma_action(fam, i, GOElement("weyl"), f)(X), wedge_transform(f)(X))
        return PropertyResult("action formulas for I", max(devs.values()), 1e-7, detail=devs)
    return _timed(run)


# -- zeta integrals and constants -------------------------------------------------------------

def check_functional_equation() -> PropertyResult:
    def run():
        cases = [(split_family(3), 3, "majorant"), (split_family(2), 2, "skew"),
                 (build_family(2 * np.eye(2, dtype=int), 1), 1, "majorant-times-linear")]
        devs = {}
        for fam, i, name in cases:
            devs[f"d={fam.dim(i)},{name}"] = fe_check(fam, i, arch_preset(fam, i, name)).max_deviation
        return PropertyResult("functional equation of the zeta integral", max(devs.values()), 1e-7, detail=devs)
    return _timed(run)


def check_c_routes() -> PropertyResult:
    """Decomposition route against the product route, and the pole-branch rule."""
    def run():
        binary = build_family(2 * np.eye(2, dtype=int), 1)
        cases = [(split_family(3), 3, "skew", "holomorphic-value"),
                 (split_family(2), 2, "skew", "pole-derivative"),
                 (binary, 1, "majorant-times-linear", "holomorphic-value")]
        devs, branches_ok = {}, True
        for fam, i, name, branch in cases:
            zp = psi_profile(fam, i, arch_preset(fam, i, name))
            d = fam.dim(i)
            cv = c_extract(zp, d)
            branches_ok &= cv.branch == branch
            devs[f"d={d},chi_sign={fam.chi_sign}"] = abs(cv.value - c_product_route(zp, d)) / max(1.0, abs(cv.value))
        dev = max(devs.values()) if branches_ok else float("inf")
        return PropertyResult("boundary constants by two routes", dev, 1e-6,
                              detail={**devs, "branches_as_expected": branches_ok})
    return _timed(run)


def check_zeta_covariance() -> PropertyResult:
    def run():
        fam, i = split_family(3), 3
        f = arch_preset(fam, i, "skew")
        base = psi_profile(fam, i, f)
        s_pts = (2.5, 0.4 + 1j, -0.6)
        x = np.array([1.0, -1.0, 0.0, 2.0, 1.0, 0.0])
        moved = psi_profile(fam, i, sigma_action(fam, i, GOElement("unipotent", x), f))
        worst = 0.0
        for s in s_pts:
            ref = tate_zeta(base, s)
            worst = max(worst, abs(tate_zeta(moved, s) - ref) / max(1.0, abs(ref)))
        for a in (2.0, 1 / 3):
            scaled = psi_profile(fam, i, sigma_action(fam, i, GOElement("torus", a), f))
            for s in s_pts:
                ref = a ** (s - 1) * tate_zeta(base, s)
                worst = max(worst, abs(tate_zeta(scaled, s) - ref) / max(1.0, abs(ref)))
        return PropertyResult("zeta covariance under u(x) and the torus", worst, 1e-8)
    return _timed(run)


def check_c_invariance(n_g: int = 10) -> PropertyResult:
    """c_3 at d = 6, and c_2 + c_1(d_2 f) at d = 4, unchanged by r(g)."""
    def run():
        devs = {}
        fam, i = split_family(3), 3
        f = arch_preset(fam, i, "skew")
        ref = c_of(fam, i, f).value
        rng = np.random.default_rng(11)
        devs["d=6"] = max(abs(c_of(fam, i, r_action(fam, i, SL2Element.random(rng), f)).value - ref) / abs(ref)
                          for _ in range(n_g))
        fam, i = split_family(2), 2
        f = arch_preset(fam, i, "skew")

        def grouped(h):
            return c_of(fam, i, h).value + c_of(fam, i - 1, descend(TestFunction(fam, i, h)).arch).value

        ref = grouped(f)
        rng = np.random.default_rng(12)
        devs["d=4 grouped"] = max(abs(grouped(r_action(fam, i, SL2Element.random(rng), f)) - ref) / abs(ref)
                                  for _ in range(n_g))
        return PropertyResult("invariance of the boundary constants", max(devs.values()), 1e-6, detail=devs)
    return _timed(run)


# -- exact arithmetic ---------------------------------------------------------------------------

def check_enumeration() -> PropertyResult:
    """Number of symmetric-difference points against brute force, radius <= 3, d <= 6."""
    def run():
        mismatches = 0
        cases = [(split_family(3).J(3), 2), (split_family(3).J(3), 3), (split_family(2).J(2), 3),
                 (build_family(2 * np.eye(2, dtype=int), 1).J(1), 3),
                 (build_family(np.array([[2, 1], [1, 2]]), 1).J(1), 3)]
        for J, R in cases:
            a = {tuple(p) for p in enumerate_quadric(J, R).points.tolist()}
            b = {tuple(p) for p in brute_force_quadric(J, R).tolist()}
            mismatches += len(a ^ b)
        return PropertyResult("enumeration against brute force", float(mismatches), 0.0)
    return _timed(run)


def check_local_density() -> PropertyResult:
    def run():
        J = split_family(3).J(3)
        brute = sum(1 for x in product(range(3), repeat=6) if (np.array(x) @ J @ np.array(x) // 2) % 3 == 0)
        got = local_density_count(split_family(3), 3, 1)
        return PropertyResult("local density count mod 3", float(abs(got - brute)), 0.0,
                              detail={"count": got, "brute_force": brute})
    return _timed(run)


def check_basic_weight(n_points: int = 100, seed: int = 4) -> PropertyResult:
    """basic_weight against sum over n | content of chi(n) n^{d/2-2}, at random quadric points."""
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for fam in (split_family(3), build_family(2 * np.eye(2, dtype=int), 2)):
            pts = enumerate_quadric(fam.J(fam.ell), 4).points
            pick = pts[rng.choice(len(pts), size=n_points // 2, replace=False)]
            pick = pick * rng.integers(1, 13, size=(len(pick), 1))
            e = fam.dim(fam.ell) / 2 - 2
            for xi in pick:
                c = int(np.gcd.reduce(np.abs(xi)))
                oracle = sum(fam.chi(n) * n ** e for n in divisors(c))
                worst = max(worst, abs(basic_weight(fam, xi) - oracle) / abs(oracle))
        return PropertyResult("basic weight against divisor sums", worst, 1e-12)
    return _timed(run)


CHECKS: Dict[str, Callable[[], PropertyResult]] = {
    "equivariance": check_equivariance,
    "cocycle": check_cocycle,
    "sigma-commutes": check_sigma_commutes,
    "action-formulas": check_action_formulas,
    "functional-equation": check_functional_equation,
    "c-routes": check_c_routes,
    "zeta-covariance": check_zeta_covariance,
    "c-invariance": check_c_invariance,
    "enumeration": check_enumeration,
    "local-density": check_local_density,
    "basic-weight": check_basic_weight,
}


def run_all(names: List[str] | None = None) -> List[PropertyResult]:
    names = list(CHECKS) if names is None else names
    return [CHECKS[n]() for n in names]


__all__ = ["CHECKS", "PropertyResult", "random_function", "random_null_vector", "run_all", "split_family"]
