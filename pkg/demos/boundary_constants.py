"""Boundary constants by two routes, and the pole branch in dimension four."""

import numpy as np

from quadsum.analytic import c_extract, c_product_route, fe_check, psi_profile
from quadsum.descent import arch_preset
from quadsum.quadspace import build_family

CASES = [
    ("split, d = 6", np.zeros((0, 0), dtype=int), 3, "skew"),
    ("split, d = 4", np.zeros((0, 0), dtype=int), 2, "skew"),
    ("binary core 2I, d = 4", 2 * np.eye(2, dtype=int), 1, "majorant-times-linear"),
]

for label, J0, ell, preset in CASES:
    fam = build_family(J0, ell)
    f = arch_preset(fam, ell, preset)
    prof = psi_profile(fam, ell, f)
    d = fam.dim(ell)
    cv = c_extract(prof, d)
    alt = c_product_route(prof, d)
    fe = fe_check(fam, ell, f)
    print(f"{label:<24} branch {cv.branch:<18} c = {cv.value.real:+.15f}  "
          f"product route {alt.real:+.15f}  functional equation {fe.max_deviation:.1e}")
