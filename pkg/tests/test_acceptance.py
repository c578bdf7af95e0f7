"""Acceptance criteria 1-10 (default run) and 11 (slow).

Each test records one line "criterion N: PASS/FAIL ..." that is printed in
the terminal summary, then asserts.
"""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from quadsum import properties
from quadsum.descent import TestFunction, arch_preset, majorant_gaussian
from quadsum.quadspace import build_family
from quadsum.summation import (
    count_asymptotics,
    counting_function,
    scaling_check,
    singular_series_check,
    theta_truncation_experiment,
    verify_main,
)
from quadsum.weil import SL2Element, r_action

SPLIT6 = build_family(np.zeros((0, 0), dtype=int), 3)


def record(n, ok, detail, runtime, budget):
    ok = ok and runtime < budget
    ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}  [{runtime:.1f} s of {budget:.0f} s]")
    print(ACCEPTANCE_LINES[-1])
    return ok


def record_properties(n, results, budget):
    runtime = sum(r.runtime for r in results)
    detail = "; ".join(f"{r.name} {r.deviation:.2e} <= {r.tolerance:.0e}" for r in results)
    return record(n, all(r.passed for r in results), detail, runtime, budget)


def test_criterion_01_main_identity():
    t0 = time.perf_counter()
    devs = {}
    for name in ("majorant", "skew"):
        rep = verify_main(TestFunction(SPLIT6, 3, arch_preset(SPLIT6, 3, name)))
        devs[name] = rep.relative_deviation
    ok = all(v < 1e-5 for v in devs.values())
    assert record(1, ok, ", ".join(f"{k} {v:.2e} < 1e-5" for k, v in devs.items()),
                  time.perf_counter() - t0, 300)


def test_criterion_02_equivariance():
    assert record_properties(2, [properties.check_equivariance()], 10)


def test_criterion_03_cocycle():
    assert record_properties(3, [properties.check_cocycle()], 30)


def test_criterion_04_action_formulas():
    assert record_properties(4, [properties.check_action_formulas()], 120)


def test_criterion_05_functional_equation():
    assert record_properties(5, [properties.check_functional_equation()], 60)


def test_criterion_06_boundary_constant_routes():
    assert record_properties(6, [properties.check_c_routes()], 60)


def test_criterion_07_invariance():
    res = properties.check_c_invariance()
    t0 = time.perf_counter()
    tf = TestFunction(SPLIT6, 3, arch_preset(SPLIT6, 3, "skew"))
    base = verify_main(tf)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(3):
        moved = verify_main(TestFunction(SPLIT6, 3, r_action(SPLIT6, 3, SL2Element.random(rng), tf.arch)))
        worst = max(worst, abs(moved.lhs_total - base.lhs_total) / abs(base.lhs_total),
                    abs(moved.rhs_total - base.rhs_total) / abs(base.rhs_total))
    runtime = res.runtime + time.perf_counter() - t0
    ok = res.passed and worst < 1e-5
    assert record(7, ok, f"c-invariance {res.deviation:.2e} <= 1e-6; totals under r(g) {worst:.2e} < 1e-5",
                  runtime, 300)


def test_criterion_08_scaling():
    t0 = time.perf_counter()
    tf = TestFunction(SPLIT6, 3, arch_preset(SPLIT6, 3, "skew"))
    devs = {a: scaling_check(tf, a).relative_deviation for a in (2, 3, "1/2")}
    ok = all(v < 1e-5 for v in devs.values())
    assert record(8, ok, ", ".join(f"a={a} {v:.2e}" for a, v in devs.items()) + " < 1e-5",
                  time.perf_counter() - t0, 600)


def test_criterion_09_circle_method():
    t0 = time.perf_counter()
    tf = counting_function(SPLIT6)
    rows = count_asymptotics(tf, [1, 2, 3])
    ss = singular_series_check(tf)
    ratio = rows[-1].ratio
    ok = abs(ratio - 1) < 0.05 and ss.relative_deviation < 1e-6
    assert record(9, ok, f"ratio at B={rows[-1].B:g} {ratio:.5f} within 5%; singular series {ss.relative_deviation:.2e} < 1e-6",
                  time.perf_counter() - t0, 600)


def test_criterion_10_exact_oracles():
    results = [properties.check_enumeration(), properties.check_local_density(), properties.check_basic_weight()]
    assert record_properties(10, results, 120)


@pytest.mark.slow
def test_criterion_11_truncated_theta():
    t0 = time.perf_counter()
    lines = []
    ok = True
    for ell in (2, 3):
        fam = build_family(np.zeros((0, 0), dtype=int), ell)
        d = fam.dim(ell)
        rep = theta_truncation_experiment(TestFunction(fam, ell, majorant_gaussian(fam, ell)), [2, 3, 4, 5, 6])
        found = rep.detected_exponents()
        ok &= rep.relative_deviation < 1e-3 and d / 2 - 1 in found and set(found) <= {d / 2 - 1, d / 2 - 2}
        lines.append(f"d={d}: constant {rep.relative_deviation:.2e} < 1e-3, exponents {found}")
    assert record(11, ok, "; ".join(lines), time.perf_counter() - t0, 1800)
