"""Integral of the truncated theta function against T, fitted and compared with the boundary total."""

import numpy as np

from quadsum.descent import TestFunction, majorant_gaussian
from quadsum.quadspace import build_family
from quadsum.summation import theta_truncation_experiment

for ell in (2, 3):
    fam = build_family(np.zeros((0, 0), dtype=int), ell)
    rep = theta_truncation_experiment(TestFunction(fam, ell, majorant_gaussian(fam, ell)), [2, 3, 4, 5, 6])
    print(f"d = {fam.dim(ell)}")
    for T, v in zip(rep.T_list, rep.integrals):
        print(f"  T = {T:g}: {v:.12f}")
    print(f"  fit {rep.coefficients}")
    print(f"  constant {rep.constant:.12f}, boundary total {rep.predicted.real:.12f}, "
          f"deviation {rep.relative_deviation:.1e}")
