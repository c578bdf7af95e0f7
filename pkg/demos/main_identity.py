"""Both sides of the summation identity, term by term, for two split families.

    python3 demos/main_identity.py [--preset skew]
"""

import argparse

import numpy as np

from quadsum.descent import TestFunction, arch_preset
from quadsum.quadspace import build_family
from quadsum.summation import verify_main


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="skew")
    args = ap.parse_args()
    for ell in (2, 3):
        fam = build_family(np.zeros((0, 0), dtype=int), ell)
        rep = verify_main(TestFunction(fam, ell, arch_preset(fam, ell, args.preset)))
        print(f"split family, dim V_l = {fam.dim(ell)}, preset {args.preset}")
        print(f"  {'term':<14}{'f':>22}{'Fourier transform':>22}")
        for k in rep.lhs_terms:
            print(f"  {k:<14}{rep.lhs_terms[k].real:>22.15f}{rep.rhs_terms[k].real:>22.15f}")
        print(f"  {'total':<14}{rep.lhs_total.real:>22.15f}{rep.rhs_total.real:>22.15f}")
        print(f"  relative deviation {rep.relative_deviation:.2e}\n")


if __name__ == "__main__":
    main()
