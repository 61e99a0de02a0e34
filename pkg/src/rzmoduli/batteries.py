"""Verification batteries shared by the CLI ``verify`` command."""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass
from math import comb, gcd

from . import combinatorics as cb
from .errors import RZError
from .isocrystal import IsocrystalShape, IsoVector, make_ring, random_condition_star, random_vector
from .lattice import (M0, a_invariant, c_constant, default_precision, dieudonne_closure, index_set,
                      lattice_from_cycle_point, p_closure, smith_vol, span)
from .padic import FiniteField, WittRing, from_witt_coordinates, witt_coordinates


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float

    def to_json(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "seconds": round(self.seconds, 3)}


def _run(name, fn):
    start = time.perf_counter()
    try:
        passed, detail = fn()
    except (RZError, AssertionError, ValueError, ArithmeticError) as exc:
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return Check(name, bool(passed), detail, time.perf_counter() - start)


def coprime_pairs(max_h, min_h=2):
    for h in range(min_h, max_h + 1):
        for m in range(1, h):
            if gcd(m, h - m) == 1:
                yield m, h - m


# -- counts -------------------------------------------------------------------

def counts_suite(max_h=14):
    def counting():
        bad = [(m, n) for m, n in coprime_pairs(max_h)
               if len(cb.enumerate_cycles(m, n)) != comb(m + n, m) // (m + n)]
        total = sum(1 for _ in coprime_pairs(max_h))
        return not bad, f"{total} pairs with h <= {max_h}; mismatches: {bad}"

    def profile_shape():
        bad = []
        for m, n in coprime_pairs(max_h):
            prof = cb.paving_profile(m, n)
            d, dim = prof.d, prof.dim
            ok = d[0] == 1 and d[dim] == 1 and prof.count_check()
            if m > 1 and n > 1:
                ok = ok and d[1] == 1
            if min(m, n) == 2:
                ok = ok and all(x == 1 for x in d)
            if min(m, n) > 2:
                ok = ok and d[dim - 1] >= 2
            if not ok:
                bad.append((m, n))
        return not bad, f"d(0) = d(dim) = 1, d(1) = 1, min=2 all ones, min>2 d(dim-1) >= 2; failures: {bad}"

    def duality():
        bad = [(m, n) for m, n in coprime_pairs(12)
               if cb.paving_profile(m, n).is_palindromic() != (min(m, n) <= 2)]
        return not bad, f"palindromic profile iff min(m, n) <= 2 for h <= 12; exceptions: {bad}"

    def anchors():
        got = {(m, n): list(cb.paving_profile(m, n).d) for m, n in [(2, 3), (3, 4)]}
        ok = got[(2, 3)] == [1, 1] and got[(3, 4)] == [1, 1, 2, 1]
        return ok, f"profiles {got}"

    return [_run("cycle count equals C(h,m)/h", counting),
            _run("profile positivity and min(m,n) statements", profile_shape),
            _run("Betti profile anchors (2,3), (3,4)", anchors),
            _run("profile symmetry observation", duality)]


# -- formulas -----------------------------------------------------------------

def random_shape(rng: random.Random, max_h=30, max_mult=3):
    """Random shape with coprime summands, multiplicities <= max_mult and height <= max_h."""
    while True:
        k = rng.randint(1, 4)
        summands = []
        for _ in range(k):
            h = rng.randint(1, 12)
            if h == 1:
                pair = rng.choice([(0, 1), (1, 0)])
            else:
                m = rng.choice([m for m in range(1, h) if gcd(m, h) == 1])
                pair = (m, h - m)
            summands.append((*pair, rng.randint(1, max_mult)))
        try:
            shape = IsocrystalShape(summands)
        except RZError:
            continue
        if shape.h <= max_h:
            return shape


FORMULA_ANCHORS = {"2:3": 1, "1:4": 0, "1:7": 0, "1:2,1:1": 1, "2:3^2": 8}


def formulas_suite(seed=0, trials=200):
    def random_shapes():
        rng = random.Random(seed)
        for _ in range(trials):
            cb.dimension(random_shape(rng))
        return True, f"{trials} random shapes, both formulas agree"

    def anchors():
        got = {s: cb.dimension(s) for s in FORMULA_ANCHORS}
        return got == FORMULA_ANCHORS, f"dimensions {got}"

    def permutation():
        rng = random.Random(seed + 1)
        for _ in range(50):
            shape = random_shape(rng)
            copies = [(m, n) for (_, _, m, n) in shape.copies()]
            base = cb.dim_formula(shape)
            # reorder copies within each slope; the per-copy sum only sees slope order
            by_slope = {}
            for m, n in copies:
                by_slope.setdefault(m / (m + n), []).append((m, n))
            total = 0
            order = []
            for key in sorted(by_slope):
                grp = by_slope[key][:]
                rng.shuffle(grp)
                order.extend(grp)
            for a, (m, n) in enumerate(order):
                total += (m - 1) * (n - 1) // 2 + sum(m * n2 for _, n2 in order[a + 1:])
            if total != base:
                return False, f"order dependence on {shape}"
        return True, "50 shapes, intra-slope reordering leaves the formula unchanged"

    def c_matches():
        rng = random.Random(seed + 2)
        for _ in range(100):
            shape = random_shape(rng)
            if index_set(shape).c != c_constant(shape) or c_constant(shape) != cb.dim_formula(shape):
                return False, f"index set / c mismatch on {shape}"
        return True, "100 shapes, |I| = c = dimension"

    return [_run("dimension formulas agree on random shapes", random_shapes),
            _run("dimension anchors", anchors),
            _run("dimension formula independent of intra-slope order", permutation),
            _run("index set size equals c", c_matches)]


# -- lattices ------------------------------------------------------------------

LATTICE_SHAPES = ("2:3", "3:2", "2:5", "3:4")


def lattice_trial_check(shape: IsocrystalShape, ring: WittRing, rng: random.Random, normalized_cycles):
    """One random condition-star generator; returns a list of failed properties."""
    v, _ = random_condition_star(shape, ring, rng)
    L = dieudonne_closure(v)
    failures = []
    if L.vol() != c_constant(shape):
        failures.append(f"vol {L.vol()}")
    if a_invariant(L) != 1:
        failures.append("a-invariant")
    if p_closure(L) != M0(shape, ring):
        failures.append("P(M) != M0")
    if normalized_cycles is not None:
        A = L.semimodule().normalization()
        if cb.cycle_from_semimodule(A).values not in normalized_cycles:
            failures.append(f"semimodule {A.fringe}")
    return failures


def lattices_suite(seed=0, trials=50, primes=(2, 3), shapes=LATTICE_SHAPES):
    checks = []
    for p in primes:
        for text in shapes:
            shape = IsocrystalShape.parse(text)

            def battery(shape=shape, p=p):
                ring = make_ring(p, shape.required_field_degree(), default_precision(shape))
                m, n, _ = shape.summands[0]
                cycles = {c.values for c in cb.enumerate_cycles(m, n)}
                rng = random.Random(f"{seed}:{p}:{shape}")
                bad = []
                for t in range(trials):
                    fails = lattice_trial_check(shape, ring, rng, cycles)
                    if fails:
                        bad.append((t, fails))
                return not bad, f"{trials} trials over F_{p}^{ring.a}; failures: {bad}"
            checks.append(_run(f"closure battery {text} p={p}", battery))
    return checks


def paving_suite(seed=0, samples=100, field_degree=3, pairs=((2, 3), (3, 4))):
    checks = []
    for m, n in pairs:
        def run(m=m, n=n):
            shape = IsocrystalShape([(m, n)])
            ring = make_ring(2, field_degree, default_precision(shape))
            rng = random.Random(f"{seed}:{m}:{n}")
            report = []
            for A in cb.enumerate_semimodules(m, n):
                vset = cb.cycle_from_semimodule(A).v_set()
                elems = list(ring.field.elements())
                if len(vset) <= 2:
                    points = list(itertools.product(elems, repeat=len(vset)))
                else:
                    points = {tuple(ring.field.random(rng) for _ in vset) for _ in range(samples)}
                    while len(points) < samples:
                        points.add(tuple(ring.field.random(rng) for _ in vset))
                    points = sorted(points, key=lambda pt: [x.index() for x in pt])
                keys = set()
                for pt in points:
                    L = lattice_from_cycle_point(A, dict(zip(vset, pt)), ring)
                    if L.semimodule() != A or L.vol() != 0:
                        return False, f"point {pt} of {A.fringe} gives semimodule {L.semimodule().fringe}"
                    keys.add(L.canonical_key())
                if len(keys) != len(points):
                    return False, f"{A.fringe}: {len(points)} points but {len(keys)} lattices"
                report.append(f"{A.fringe}:{len(points)}")
            return True, "injective and semimodule-preserving on " + ", ".join(report)
        checks.append(_run(f"paving points ({m},{n}) over F_2^{field_degree}", run))
    return checks


# -- Witt kernel ---------------------------------------------------------------

WITT_RINGS = ((2, 1, 6), (2, 3, 5), (3, 2, 5), (5, 1, 4), (2, 4, 6))


def digit_identity_instance(ring: WittRing, rng: random.Random):
    """Check the digit-of-sum and Teichmüller cancellation identities on one random pair."""
    F = ring.field
    N = ring.precision
    n = rng.randrange(N)
    a = witt_coordinates(ring.random(rng))
    b_coords = [F.zero()] * n + [F.random(rng, nonzero=True)] + [F.random(rng) for _ in range(N - n - 1)]
    A = from_witt_coordinates(ring, a)
    Bv = from_witt_coordinates(ring, b_coords)
    s = witt_coordinates(A + Bv)
    if s[:n] != a[:n] or s[n] != a[n] + b_coords[n]:
        return False
    lam_pow = -a[n] / b_coords[n]
    lam = lam_pow.frobenius(-n)
    tb = witt_coordinates(ring.teichmuller(lam) * Bv)
    if any(tb[:n]) or tb[n] != lam ** (F.p ** n) * b_coords[n]:
        return False
    killed = witt_coordinates(A + ring.teichmuller(lam) * Bv)
    return killed[:n] == a[:n] and not killed[n]


def witt_suite(seed=0, instances=1000, smith_trials=100):
    def digit_identities():
        rng = random.Random(seed)
        rings = [WittRing(FiniteField(p, a), N) for p, a, N in WITT_RINGS]
        bad = sum(not digit_identity_instance(rings[k % len(rings)], rng) for k in range(instances))
        return bad == 0, f"{instances} instances over {len(rings)} rings; failures: {bad}"

    def teich():
        rng = random.Random(seed + 1)
        for p, a, N in WITT_RINGS:
            ring = WittRing(FiniteField(p, a), N)
            for _ in range(20):
                x, y = ring.field.random(rng), ring.field.random(rng)
                t = ring.teichmuller(x)
                if ring.teichmuller(x * y) != t * ring.teichmuller(y) or t ** (p ** a) != t:
                    return False, f"Teichmüller failure over F_{p}^{a}"
                if t.sigma() != ring.teichmuller(x.frobenius()):
                    return False, "Frobenius does not lift the p-power map"
        return True, "multiplicativity, [x]^q = [x], sigma[x] = [x^p]"

    def smith():
        rng = random.Random(seed + 2)
        shapes = ["2:3", "1:1^2", "1:2,1:1", "3:4"]
        bad = []
        degenerate = 0
        for k in range(smith_trials):
            shape = IsocrystalShape.parse(shapes[k % len(shapes)])
            ring = make_ring(rng.choice([2, 3]), 2, 8)
            vs = [random_vector(shape, ring, rng).p_multiple(rng.randrange(2)) for _ in range(shape.h)]
            if rng.random() < 0.5:
                vs.append(random_vector(shape, ring, rng))
            try:
                L = span(vs)
            except RZError:
                degenerate += 1
                continue
            if L.vol() != smith_vol(vs):
                bad.append((k, L.vol(), smith_vol(vs)))
        return not bad and not degenerate, (f"{smith_trials} random sublattices of M0; mismatches: {bad}; "
                                            f"uncertified spans: {degenerate}")

    return [_run("Witt digit identities for sums and Teichmüller multiples", digit_identities),
            _run("Teichmüller lifts and Frobenius", teich),
            _run("echelon volume equals elementary-divisor volume", smith)]


SUITES = ("counts", "formulas", "lattices", "witt", "paving")


def run_suite(name, seed=0, trials=None):
    if name == "counts":
        return counts_suite()
    if name == "formulas":
        return formulas_suite(seed, trials or 200)
    if name == "lattices":
        return lattices_suite(seed, trials or 50)
    if name == "witt":
        return witt_suite(seed, trials or 1000)
    if name == "paving":
        return paving_suite(seed, max(trials or 100, 100))
    raise ValueError(f"unknown suite {name}")
