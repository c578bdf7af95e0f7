"""Test functions on V_i + R^2 and the maps between levels of the tower."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .gaussian import GaussianFunction
from .poly import Poly
from .quadspace import GOElement, QuadFamily
from .weil import F2, sigma_action, wedge_transform


@dataclass(frozen=True)
class TestFunction:
    """An archimedean Gaussian part times the basic function at every prime.

    ``dilation`` records the cumulative archimedean scaling applied through
    :func:`scale`; the finite part itself never changes.
    """

    __test__ = False  # keep pytest from collecting this class

    fam: QuadFamily
    level: int
    arch: GaussianFunction
    dilation: Fraction = Fraction(1)

    def __post_init__(self):
        if not 0 <= self.level <= self.fam.ell:
            raise ValueError(f"level {self.level} outside 0..{self.fam.ell}")
        if self.arch.n != self.fam.dim(self.level) + 2:
            raise ValueError(
                f"arch part has {self.arch.n} variables, level {self.level} needs {self.fam.dim(self.level) + 2}"
            )

    @property
    def d(self) -> int:
        return self.fam.dim(self.level)

    def to_json(self) -> str:
        return json.dumps({
            "family": json.loads(self.fam.to_json()),
            "level": self.level,
            "arch": self.arch.to_json(),
            "dilation": [self.dilation.numerator, self.dilation.denominator],
        })

    @classmethod
    def from_json(cls, s: str) -> "TestFunction":
        data = json.loads(s)
        return cls(QuadFamily.from_json(data["family"]), data["level"],
                   GaussianFunction.from_json(data["arch"]), Fraction(*data["dilation"]))


def descend(tf: TestFunction) -> TestFunction:
    """Pin the auxiliary pair to zero, then Fourier transform the last coordinate."""
    if tf.level == 0:
        raise ValueError("cannot descend below level 0")
    n = tf.arch.n
    pinned = tf.arch.restrict_zero([n - 2, n - 1])
    return replace(tf, level=tf.level - 1, arch=F2(pinned))


def descend_to(tf: TestFunction, target: int) -> TestFunction:
    if target > tf.level or target < 0:
        raise ValueError("target level must lie between 0 and the current level")
    while tf.level > target:
        tf = descend(tf)
    return tf


def fourier_X(tf: TestFunction) -> TestFunction:
    return replace(tf, arch=wedge_transform(tf.arch))


def scale(tf: TestFunction, a) -> TestFunction:
    """Act by the torus element diag(I, a, 1/a) at the real place."""
    a = Fraction(a)
    if a <= 0:
        raise ValueError("scale factor must be positive")
    if a.numerator > 1 and a.denominator > 1:
        raise ValueError("mixed dilations (neither integral nor reciprocal integral) are not supported")
    arch = sigma_action(tf.fam, tf.level, GOElement("torus", float(a)), tf.arch)
    return replace(tf, arch=arch, dilation=tf.dilation * a)


# -- archimedean presets ---------------------------------------------------------

def majorant(J: np.ndarray) -> np.ndarray:
    """The positive majorant |J| = sqrt(J^2) of a symmetric matrix."""
    w, V = np.linalg.eigh(np.asarray(J, dtype=float))
    return (V * np.abs(w)) @ V.T


def majorant_gaussian(fam: QuadFamily, level: int) -> GaussianFunction:
    """exp(-pi x^T |J| x) on V_level times exp(-pi |u|^2) on the auxiliary pair."""
    d = fam.dim(level)
    A = np.eye(d + 2)
    A[:d, :d] = majorant(fam.J(level))
    return GaussianFunction.gaussian(A)


def majorant_times_linear(fam: QuadFamily, level: int, coef=None) -> GaussianFunction:
    d = fam.dim(level)
    coef = np.linspace(0.5, -0.5, d + 2) if coef is None else np.asarray(coef, dtype=float)
    g = majorant_gaussian(fam, level)
    return g.times_poly(Poly.linear(coef, 1.0))


def tensor_aux(fam: QuadFamily, level: int, aux: GaussianFunction, v_part: GaussianFunction | None = None) -> GaussianFunction:
    """v_part (default: majorant Gaussian on V_level) tensored with a function of the auxiliary pair."""
    d = fam.dim(level)
    if v_part is None:
        v_part = GaussianFunction.gaussian(majorant(fam.J(level))) if d else GaussianFunction.constant()
    if aux.n != 2:
        raise ValueError("auxiliary factor must be a function of two variables")
    return v_part.tensor(aux) if d else aux


def arch_preset(fam: QuadFamily, level: int, name: str) -> GaussianFunction:
    if name == "majorant":
        return majorant_gaussian(fam, level)
    if name == "majorant-times-linear":
        return majorant_times_linear(fam, level)
    if name == "skew":
        aux = GaussianFunction.gaussian([[2.0, 0.3], [0.3, 0.5]])
        return tensor_aux(fam, level, aux)
    raise ValueError(f"unknown arch preset {name!r}")


__all__ = [
    "TestFunction",
    "arch_preset",
    "descend",
    "descend_to",
    "fourier_X",
    "majorant",
    "majorant_gaussian",
    "majorant_times_linear",
    "scale",
    "tensor_aux",
]
