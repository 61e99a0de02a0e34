"""Semimodules, cycles, Betti profiles, dimension formulas, π₀ and smoothness.

Everything here is exact integer or rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd

from .errors import FormulaMismatch, NoBiPart, NonCoprime, NotASemimodule, ShiftNotIntegral
from .isocrystal import IsocrystalShape


def _check_pair(m: int, n: int):
    if m < 1 or n < 1:
        raise ValueError(f"need m, n >= 1, got ({m}, {n})")
    if gcd(m, n) != 1:
        raise NonCoprime(f"({m}, {n}) are not coprime")


def semigroup_minima(m: int, n: int):
    """For each residue r mod m+n, the least element of <m, n> congruent to r."""
    _check_pair(m, n)
    h = m + n
    # a*m + b*n - h stays in the class, so a minimum has a = 0 or b = 0
    mins = [None] * h
    for a in range(h):
        for x in (a * m, a * n):
            r = x % h
            if mins[r] is None or x < mins[r]:
                mins[r] = x
    return mins


def semigroup_gaps(m: int, n: int):
    """N \\ <m, n>, sorted."""
    return sorted(x for r, top in enumerate(semigroup_minima(m, n)) for x in range(r, top, m + n))


@dataclass(frozen=True)
class SemiModule:
    """A subset A of Z with m+A, n+A ⊆ A, stored by its fringe A \\ (h+A)."""

    m: int
    n: int
    fringe: tuple

    def __post_init__(self):
        _check_pair(self.m, self.n)
        h = self.m + self.n
        fr = tuple(sorted(self.fringe))
        object.__setattr__(self, "fringe", fr)
        if len(fr) != h or len({b % h for b in fr}) != h:
            raise NotASemimodule(f"fringe {fr} does not meet every residue mod {h} exactly once")
        for b in fr:
            if b + self.m not in self or b + self.n not in self:
                raise NotASemimodule(f"{fr} is not stable under +{self.m} and +{self.n}")

    @property
    def h(self):
        return self.m + self.n

    @classmethod
    def from_generators(cls, m: int, n: int, generators) -> SemiModule:
        gens = list(generators)
        if not gens:
            raise NotASemimodule("a semimodule needs at least one generator")
        h = m + n
        mins = semigroup_minima(m, n)
        fringe = []
        for r in range(h):
            fringe.append(min(g + mins[(r - g) % h] for g in gens))
        return cls(m, n, tuple(fringe))

    @classmethod
    def natural(cls, m: int, n: int) -> SemiModule:
        """The semimodule N = {0, 1, 2, ...}."""
        return cls(m, n, tuple(range(m + n)))

    def __contains__(self, x: int) -> bool:
        h = self.h
        for b in self.fringe:
            if (x - b) % h == 0:
                return x >= b
        return False

    def min(self):
        return self.fringe[0]

    def vol(self) -> int:
        """|N \\ A| - |A \\ N|."""
        h = self.h
        return (sum(self.fringe) - h * (h - 1) // 2) // h

    def is_normalized(self) -> bool:
        return self.vol() == 0

    def shifted(self, t: int) -> SemiModule:
        return SemiModule(self.m, self.n, tuple(b + t for b in self.fringe))

    def normalization(self) -> SemiModule:
        h = self.h
        excess = h * (h - 1) // 2 - sum(self.fringe)
        if excess % h:
            raise ShiftNotIntegral(f"fringe sum of {self.fringe} is not congruent to h(h-1)/2")
        return self.shifted(excess // h)

    def generators(self):
        """Minimal generating set: fringe elements not reachable from other ones."""
        return [b for b in self.fringe
                if not any(c != b and _in_semigroup(b - c, self.m, self.n) for c in self.fringe)]

    def elements_below(self, bound: int):
        return [x for x in range(self.min(), bound) if x in self]

    def to_json(self):
        return {"m": self.m, "n": self.n, "fringe": list(self.fringe), "generators": self.generators()}


def _in_semigroup(x: int, m: int, n: int) -> bool:
    if x < 0:
        return False
    mins = semigroup_minima(m, n)
    return x >= mins[x % (m + n)]


@dataclass(frozen=True)
class Cycle:
    m: int
    n: int
    values: tuple

    def __post_init__(self):
        _check_pair(self.m, self.n)
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        h = self.m + self.n
        if len(vals) != h:
            raise NotASemimodule(f"cycle must have {h} entries")
        if any(vals[0] <= v for v in vals[1:]):
            raise NotASemimodule("b_0 must be the strict maximum")
        for i in range(h):
            step = vals[(i + 1) % h] - vals[i]
            if step not in (self.m, -self.n):
                raise NotASemimodule(f"step {step} at position {i} is neither +{self.m} nor -{self.n}")
        if len({v % h for v in vals}) != h:
            raise NotASemimodule("cycle values must cover every residue class once")

    @property
    def h(self):
        return self.m + self.n

    def is_normalized(self) -> bool:
        h = self.h
        return sum(self.values) == h * (h - 1) // 2

    def plus_positions(self):
        """Positions i with b_i + m in B (the set B⁺)."""
        vals = set(self.values)
        return [i for i, b in enumerate(self.values) if b + self.m in vals]

    def minus_positions(self):
        """Positions i with b_i - n in B (the set B⁻)."""
        vals = set(self.values)
        return [i for i, b in enumerate(self.values) if b - self.n in vals]

    def b_plus(self):
        return [self.values[i] for i in self.plus_positions()]

    def b_minus(self):
        return [self.values[i] for i in self.minus_positions()]

    def v_set(self):
        """Pairs (d, i) with b_d ∈ B⁺, b_i ∈ B⁻ and b_i < b_d."""
        b = self.values
        plus, minus = self.plus_positions(), self.minus_positions()
        return sorted((d, i) for d in plus for i in minus if b[i] < b[d])

    def to_json(self):
        return {"m": self.m, "n": self.n, "values": list(self.values),
                "B_plus": self.b_plus(), "B_minus": self.b_minus(),
                "V": [list(p) for p in self.v_set()]}


def _step_sequences(m: int, n: int):
    """Yield value sequences from b_0 = 0 with all later partial sums negative."""
    h = m + n
    plus_left0, minus_left0 = n - 1, m
    out = []

    def walk(seq, cur, plus_left, minus_left):
        if len(seq) == h:
            out.append(tuple(seq))
            return
        if plus_left and cur + m < 0:
            seq.append(cur + m)
            walk(seq, cur + m, plus_left - 1, minus_left)
            seq.pop()
        if minus_left:
            seq.append(cur - n)
            walk(seq, cur - n, plus_left, minus_left - 1)
            seq.pop()

    walk([0], 0, plus_left0, minus_left0)
    return out


def enumerate_cycles(m: int, n: int):
    _check_pair(m, n)
    h = m + n
    target = h * (h - 1) // 2
    cycles = []
    for seq in _step_sequences(m, n):
        excess = target - sum(seq)
        if excess % h:
            raise ShiftNotIntegral(f"cycle {seq} cannot be normalized by an integer shift")
        t = excess // h
        cycles.append(Cycle(m, n, tuple(b + t for b in seq)))
    cycles.sort(key=lambda c: c.values)
    return cycles


def enumerate_semimodules(m: int, n: int):
    return [semimodule_from_cycle(c) for c in enumerate_cycles(m, n)]


def cycle_from_semimodule(A: SemiModule) -> Cycle:
    vals = [max(A.fringe)]
    for _ in range(A.h - 1):
        prev = vals[-1]
        vals.append(prev - A.n if prev - A.n in A else prev + A.m)
    try:
        return Cycle(A.m, A.n, tuple(vals))
    except NotASemimodule as exc:
        raise NotASemimodule(f"fringe {A.fringe} does not close up into a cycle: {exc}") from exc


def semimodule_from_cycle(B: Cycle) -> SemiModule:
    return SemiModule(B.m, B.n, tuple(B.values))


@dataclass(frozen=True)
class PavingProfile:
    m: int
    n: int
    d: tuple
    cycles: int = field(default=0)

    @property
    def dim(self):
        return (self.m - 1) * (self.n - 1) // 2

    @property
    def euler(self):
        return sum(self.d)

    @property
    def expected_count(self):
        h = self.m + self.n
        return comb(h, self.m) // h

    def count_check(self) -> bool:
        return self.euler == self.expected_count == self.cycles

    def is_palindromic(self) -> bool:
        return list(self.d) == list(reversed(self.d))

    def to_json(self):
        return {"m": self.m, "n": self.n, "dim": self.dim, "d": list(self.d),
                "euler": self.euler, "count_check": self.count_check()}


def paving_profile(m: int, n: int) -> PavingProfile:
    cycles = enumerate_cycles(m, n)
    dim = (m - 1) * (n - 1) // 2
    d = [0] * (dim + 1)
    for c in cycles:
        k = len(c.v_set())
        if k > dim:
            raise AssertionError(f"|V(B)| = {k} exceeds the dimension {dim} for {c.values}")
        d[k] += 1
    return PavingProfile(m, n, tuple(d), len(cycles))


# -- dimension formulas -------------------------------------------------------

def _as_shape(shape) -> IsocrystalShape:
    if isinstance(shape, IsocrystalShape):
        return shape
    if isinstance(shape, str):
        return IsocrystalShape.parse(shape)
    return IsocrystalShape(shape)


def dim_formula(shape) -> Fraction:
    """Sum of per-copy (m-1)(n-1)/2 plus m_c n_c' over ordered pairs of copies."""
    shape = _as_shape(shape)
    copies = [(m, n) for (_, _, m, n) in shape.copies()]
    total = Fraction(0)
    for idx, (m, n) in enumerate(copies):
        total += Fraction((m - 1) * (n - 1), 2)
        for m2, n2 in copies[idx + 1:]:
            total += m * n2
    if total.denominator != 1:
        raise FormulaMismatch(f"dimension {total} is not an integer")
    return total


def defect(shape) -> int:
    shape = _as_shape(shape)
    return shape.h - len(shape.copies())


def dim_rho_formula(shape) -> Fraction:
    """<rho, mu - nu> - defect/2 with ascending Newton and Hodge vectors."""
    shape = _as_shape(shape)
    h = shape.h
    nu = []
    for (_, _, m, n) in shape.copies():
        nu.extend([Fraction(m, m + n)] * (m + n))
    nu.sort()
    ones = sum(m for (_, _, m, _) in shape.copies())
    mu = [0] * (h - ones) + [1] * ones
    pairing = sum(Fraction(2 * i - h - 1, 2) * (mu[i - 1] - nu[i - 1]) for i in range(1, h + 1))
    return pairing - Fraction(defect(shape), 2)


def dimension(shape) -> int:
    """Dimension via both formulas; raises FormulaMismatch if they disagree."""
    d1 = dim_formula(shape)
    d2 = dim_rho_formula(shape)
    if d1 != d2:
        raise FormulaMismatch(f"formulas disagree on {_as_shape(shape)}: {d1} vs {d2}")
    return int(d1)


# -- connected components and smoothness --------------------------------------

@dataclass(frozen=True)
class Pi0Descriptor:
    ht_mult: int
    ht_et: int
    has_bi: bool

    def describe(self) -> str:
        factors = []
        for ht in (self.ht_mult, self.ht_et):
            if ht:
                factors.append(f"GL_{ht}(Q_p)/GL_{ht}(Z_p)")
        if self.has_bi:
            factors.append("Z")
        return " x ".join(factors) if factors else "point"

    def to_json(self):
        return {"ht_mult": self.ht_mult, "ht_et": self.ht_et, "has_bi": self.has_bi,
                "pi0": self.describe()}


def pi0_descriptor(shape) -> Pi0Descriptor:
    shape = _as_shape(shape)
    ht_et = ht_mult = 0
    has_bi = False
    for (_, _, m, n) in shape.copies():
        if m == 0:
            ht_et += m + n
        elif n == 0:
            ht_mult += m + n
        else:
            has_bi = True
    return Pi0Descriptor(ht_mult, ht_et, has_bi)


def _egcd(a: int, b: int):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def height_reachability(m: int, n: int, target: int):
    """(a, b) with a*(m+n) + b*m = target for a simple summand of dimension m."""
    if m == 0 or n == 0:
        raise NoBiPart(f"summand ({m}, {n}) is not bi-infinitesimal")
    _check_pair(m, n)
    g, x, y = _egcd(m + n, m)
    return x * target, y * target


def bi_part(shape):
    """The bi-infinitesimal copies of ``shape`` as a list of (m, n)."""
    shape = _as_shape(shape)
    return [(m, n) for (_, _, m, n) in shape.copies() if m and n]


@dataclass(frozen=True)
class Smoothness:
    verdict: str
    reason: str
    duality_confirmed: bool | None = None

    def to_json(self):
        out = {"verdict": self.verdict, "reason": self.reason}
        if self.duality_confirmed is not None:
            out["duality_asymmetry_confirmed"] = self.duality_confirmed
        return out


SMOOTH_DIM0 = "SmoothDim0"
SMOOTH_P1 = "SmoothP1"
NOT_SMOOTH = "NotSmooth"

# profile enumeration is cheap up to about this height
_PROFILE_HEIGHT_LIMIT = 18


def smoothness(shape) -> Smoothness:
    bi = bi_part(shape)
    if not bi:
        return Smoothness(SMOOTH_DIM0, "Ordinary")
    if len(bi) > 1:
        return Smoothness(NOT_SMOOTH, "ComponentsNotIrreducible")
    m, n = bi[0]
    lo, hi = min(m, n), max(m, n)
    if lo == 1:
        return Smoothness(SMOOTH_DIM0, "DimensionZero")
    if (lo, hi) == (2, 3):
        return Smoothness(SMOOTH_P1, "ProjectiveLine")
    if lo == 2:
        return Smoothness(NOT_SMOOTH, "TangentSpaceExcess")
    confirmed = None
    if m + n <= _PROFILE_HEIGHT_LIMIT:
        prof = paving_profile(m, n)
        confirmed = prof.d[1] != prof.d[prof.dim - 1]
    return Smoothness(NOT_SMOOTH, "PoincareDualityFails", confirmed)
