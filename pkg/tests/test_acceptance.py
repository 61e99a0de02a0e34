"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line."""

import random
import time
from math import comb

from rzmoduli import combinatorics as cb
from rzmoduli.batteries import coprime_pairs, lattices_suite, paving_suite, random_shape, witt_suite
from rzmoduli.isocrystal import IsocrystalShape


def test_criterion_1_cycle_counts(report):
    start = time.perf_counter()
    bad = [(m, n) for m, n in coprime_pairs(14) if len(cb.enumerate_cycles(m, n)) != comb(m + n, m) // (m + n)]
    seconds = time.perf_counter() - start
    ok = not bad and seconds < 10
    report(1, "normalized cycle counts equal C(h,m)/h for h <= 14", ok,
           f"{sum(1 for _ in coprime_pairs(14))} pairs, mismatches {bad}, {seconds:.2f}s (limit 10s)")
    assert ok


def test_criterion_2_betti_profiles(report):
    checks = {"(2,3) = [1,1]": cb.paving_profile(2, 3).d == (1, 1)}
    for l in range(1, 6):
        d = cb.paving_profile(2, 2 * l + 1).d
        checks[f"(2,{2 * l + 1}) all ones"] = d == (1,) * (l + 1)
    for m, n in [(3, 4), (3, 5)]:
        prof = cb.paving_profile(m, n)
        checks[f"({m},{n}) d[dim-1] = {prof.d[prof.dim - 1]} >= 2"] = prof.d[prof.dim - 1] >= 2
    ok = all(checks.values())
    report(2, "Betti profiles", ok, ", ".join(f"{k}: {'ok' if v else 'no'}" for k, v in checks.items()))
    assert ok


def test_criterion_3_dimension_formulas(report):
    rng = random.Random(2024)
    mismatches = 0
    for _ in range(200):
        shape = random_shape(rng, max_h=30)
        assert shape.h <= 30
        if cb.dim_formula(shape) != cb.dim_rho_formula(shape):
            mismatches += 1
    anchors = {"2:3": 1, "1:1": 0, "1:4": 0, "1:12": 0, "1:2,1:1": 1, "2:3^2": 8}
    got = {s: cb.dimension(s) for s in anchors}
    ok = mismatches == 0 and got == anchors
    report(3, "dimension formulas agree and match anchors", ok,
           f"200 random shapes, {mismatches} mismatches; anchors {got}")
    assert ok


def test_criterion_4_lattice_battery(report):
    start = time.perf_counter()
    checks = lattices_suite(seed=7, trials=50, primes=(2, 3))
    seconds = time.perf_counter() - start
    ok = all(c.passed for c in checks) and len(checks) == 8 and seconds < 120
    failed = [f"{c.name}: {c.detail}" for c in checks if not c.passed]
    report(4, "closure battery: vol = c, a = 1, P(M) = M0, semimodule enumerated", ok,
           f"{len(checks)} shape/prime batteries x 50 trials, {seconds:.1f}s (limit 120s); failures {failed}")
    assert ok


def test_criterion_5_paving_points(report):
    checks = paving_suite(seed=7, samples=100, field_degree=3)
    ok = all(c.passed for c in checks) and len(cb.enumerate_semimodules(3, 4)) == 5
    report(5, "cycle points over F_8 are injective and keep their semimodule", ok,
           "; ".join(c.detail for c in checks))
    assert ok


def test_criterion_6_witt_kernel(report):
    checks = witt_suite(seed=7, instances=1000, smith_trials=100)
    ok = all(c.passed for c in checks)
    report(6, "Witt digit identities and echelon/Smith volume agreement", ok,
           "; ".join(f"{c.name}: {c.detail}" for c in checks))
    assert ok


def test_criterion_7_smoothness_table(report):
    expected = {
        "0:1^2,1:0": ("SmoothDim0", None),
        "1:4": ("SmoothDim0", None),
        "4:1": ("SmoothDim0", None),
        "2:3": ("SmoothP1", None),
        "3:2": ("SmoothP1", None),
        "2:5": ("NotSmooth", None),
        "3:4": ("NotSmooth", True),
        "3:5": ("NotSmooth", True),
        "1:2,1:1": ("NotSmooth", None),
    }
    got = {}
    for text in expected:
        res = cb.smoothness(IsocrystalShape.parse(text))
        got[text] = (res.verdict, res.duality_confirmed)
    for text in ("3:4", "3:5"):
        prof = cb.paving_profile(*IsocrystalShape.parse(text).summands[0][:2])
        assert prof.d[1] != prof.d[prof.dim - 1]
    ok = got == expected
    report(7, "smoothness verdicts with profile asymmetry confirmation", ok,
           ", ".join(f"{k} -> {v[0]}" for k, v in got.items()))
    assert ok
