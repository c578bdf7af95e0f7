"""Smoothed point counts on the split senary quadric against the main term.

B = 3 takes a few minutes on one core.
"""

import numpy as np

from quadsum.quadspace import build_family
from quadsum.summation import count_asymptotics, counting_function, singular_series_check

fam = build_family(np.zeros((0, 0), dtype=int), 3)
tf = counting_function(fam)
print(f"{'B':>4}{'count':>18}{'main term':>18}{'ratio':>10}{'expansion':>12}")
for r in count_asymptotics(tf, [1, 2, 3]):
    print(f"{r.B:>4g}{r.count.real:>18.9f}{r.main.real:>18.9f}{r.ratio:>10.5f}{r.expansion_deviation:>12.1e}")
ss = singular_series_check(tf)
print(f"singular series: L-value x densities x singular integral vs constant, deviation {ss.relative_deviation:.1e}")
