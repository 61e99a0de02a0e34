"""Isocrystals N = ⊕ N_{λ_j}^{l_j} with basis e_{jil} and the operators F, V, π_j, σ_j.

Each simple copy (j, i) of slope m/h is modelled as O_h[1/π] with O_h = W[π]/(π^h - p),
the basis vector e_{jil} being π^l.  A component is stored as p^t Σ_{r<h} c_r π^r
together with an absolute index bound E: all digits at indices below E are known.
On a copy,

    F = π^m ∘ σ,   V = π^n ∘ σ^-1,   π_j = π ∘ σ^b,   σ_j = σ^h,

with a h + b m = 1.
"""

from __future__ import annotations

import random
import re
from functools import reduce
from math import gcd, lcm

from .errors import (BadCoordinateIndex, IterationCap, MixedParents, NonCoprime, NotNormalized, ParseError,
                     PrecisionExhausted, UnsupportedResidueField)
from .padic import FFElement, FiniteField, WittElement, WittRing, raw_valuation, subfield_linear_independent

# index bound used for components that are exactly zero
EXACT = 1 << 60
_EXACT_HALF = EXACT >> 1


def is_exact(E) -> bool:
    return E >= _EXACT_HALF


class IsocrystalShape:
    """Ordered summands (m_j, n_j, l_j) with strictly increasing slopes m_j/(m_j+n_j)."""

    def __init__(self, summands):
        merged = {}
        for s in summands:
            if len(s) == 2:
                m, n, l = s[0], s[1], 1
            else:
                m, n, l = s
            m, n, l = int(m), int(n), int(l)
            if m < 0 or n < 0 or m + n == 0:
                raise ValueError(f"invalid summand ({m}, {n})")
            if l < 1:
                raise ValueError("multiplicity must be >= 1")
            if gcd(m, m + n) != 1:
                raise NonCoprime(f"({m}, {n}) are not coprime")
            merged[(m, n)] = merged.get((m, n), 0) + l
        if not merged:
            raise ValueError("empty shape")
        self.summands = tuple(sorted(((m, n, l) for (m, n), l in merged.items()),
                                     key=lambda s: s[0] / (s[0] + s[1])))
        self._copies = tuple((j, i, m, n) for j, (m, n, l) in enumerate(self.summands, 1)
                             for i in range(1, l + 1))
        self._copy_pos = {(j, i): q for q, (j, i, _, _) in enumerate(self._copies)}

    @classmethod
    def parse(cls, text: str) -> IsocrystalShape:
        summands = []
        pos = 0
        for part in text.split(","):
            mt = re.fullmatch(r"\s*(\d+)\s*:\s*(\d+)\s*(?:\^\s*(\d+))?\s*", part)
            if not mt:
                raise ParseError("expected m:n or m:n^l", text, pos)
            m, n = int(mt.group(1)), int(mt.group(2))
            l = int(mt.group(3)) if mt.group(3) else 1
            if (n == 0 and m != 1) or (m == 0 and n != 1):
                raise NonCoprime(f"summand {m}:{n} is not a coprime pair")
            summands.append((m, n, l))
            pos += len(part) + 1
        return cls(summands)

    def __str__(self):
        return ",".join(f"{m}:{n}" + (f"^{l}" if l > 1 else "") for m, n, l in self.summands)

    def __repr__(self):
        return f"IsocrystalShape({str(self)!r})"

    def __eq__(self, other):
        return isinstance(other, IsocrystalShape) and self.summands == other.summands

    def __hash__(self):
        return hash(self.summands)

    @property
    def h(self) -> int:
        return sum((m + n) * l for m, n, l in self.summands)

    def copies(self):
        """(j, i, m_j, n_j) for every simple copy, lexicographically ordered, 1-based."""
        return self._copies

    def copy_position(self, j: int, i: int) -> int:
        try:
            return self._copy_pos[(j, i)]
        except KeyError:
            raise BadCoordinateIndex(f"no copy (j={j}, i={i}) in shape {self}") from None

    def height(self, j: int) -> int:
        m, n, _ = self.summands[j - 1]
        return m + n

    def slope(self, j: int):
        from fractions import Fraction
        m, n, _ = self.summands[j - 1]
        return Fraction(m, m + n)

    def bezout(self, j: int):
        """(a_j, b_j) with a_j h_j + b_j m_j = 1 and 0 <= b_j < h_j."""
        m, n, _ = self.summands[j - 1]
        return _bezout(m, n)

    def is_simple(self) -> bool:
        return len(self._copies) == 1

    def is_bi_infinitesimal(self) -> bool:
        return all(m and n for (_, _, m, n) in self._copies)

    def required_field_degree(self) -> int:
        return reduce(lcm, (m + n for m, n, _ in self.summands), 1)

    def to_json(self):
        return [[m, n, l] for m, n, l in self.summands]


def _bezout(m: int, n: int):
    h = m + n
    b = pow(m, -1, h) if h > 1 else 0
    a = (1 - b * m) // h
    return a, b


# -- single-copy components ---------------------------------------------------

class Component:
    """p^t Σ_{r<h} c_r π^r, digits known below absolute index E; t is None for zero."""

    __slots__ = ("h", "t", "E", "c")

    def __init__(self, h, t, E, c):
        self.h = h
        self.t = t
        self.E = E
        self.c = c

    def is_zero(self):
        return self.t is None

    def known_digits(self, ring, r):
        if is_exact(self.E):
            return ring.precision
        k = -((r - self.E) // self.h) - self.t
        return max(0, min(ring.precision, k))

    def first_index(self, ring):
        if self.t is None:
            return None
        best = None
        for r, cr in enumerate(self.c):
            K = self.known_digits(ring, r)
            v = raw_valuation(cr, ring.p, K)
            if v < K:
                idx = r + self.h * (self.t + v)
                if best is None or idx < best:
                    best = idx
        return best

    def leading(self, ring):
        """(index, r, v, unit) of the leading term: c_r = p^v * unit."""
        idx = self.first_index(ring)
        if idx is None:
            return None
        r = idx % self.h
        v = (idx - r) // self.h - self.t
        pv = ring._pk[v]
        return idx, r, v, tuple(x // pv for x in self.c[r])

    def digit(self, ring, l):
        """Residue-field digit at absolute index l (raw tuple)."""
        if self.t is None:
            if l < self.E:
                return (0,) * ring.a
            raise PrecisionExhausted(f"digit at index {l} lies beyond known index {self.E}", depth=self.E)
        r = l % self.h
        k = (l - r) // self.h - self.t
        if k < 0:
            return (0,) * ring.a
        K = self.known_digits(ring, r)
        if k >= K:
            raise PrecisionExhausted(f"digit at index {l} lies beyond known index {self.E}", depth=self.E)
        return ring._digits(self.c[r], K)[k]


def _zero(h, E=EXACT):
    return Component(h, None, E, None)


def _normalize(ring, h, t, E, c):
    if c is None:
        return Component(h, None, E, None)
    N = ring.precision
    pk = ring._pk
    p = ring.p
    cap = h * (t + N)
    if E > cap:
        E = cap
    Ks = []
    vals = []
    best = None
    for r in range(h):
        K = max(0, min(N, -((r - E) // h) - t))
        Ks.append(K)
        v = raw_valuation(c[r], p, K)
        vals.append(v)
        if v < K and (best is None or v < best):
            best = v
    if best is None:
        return Component(h, None, E, None)
    zero = (0,) * ring.a
    pb = pk[best]
    new = []
    for r in range(h):
        if vals[r] >= Ks[r]:
            new.append(zero)
        else:
            M = pk[Ks[r] - best]
            new.append(tuple((x // pb) % M for x in c[r]))
    return Component(h, t + best, E, tuple(new))


def _pshift(ring, d):
    return ring._pk[d] if d <= ring.precision else 0


def comp_add(ring, x, y, sign=1):
    E = min(x.E, y.E)
    if y.t is None:
        if x.t is None:
            return _zero(x.h, E)
        return _normalize(ring, x.h, x.t, E, x.c)
    M = ring._pk[ring.precision]
    if x.t is None:
        c = y.c if sign == 1 else tuple(tuple(-v % M for v in cr) for cr in y.c)
        return _normalize(ring, x.h, y.t, E, c)
    t = min(x.t, y.t)
    fx = _pshift(ring, x.t - t)
    fy = sign * _pshift(ring, y.t - t)
    c = tuple(tuple((u * fx + v * fy) % M for u, v in zip(cx, cy)) for cx, cy in zip(x.c, y.c))
    return _normalize(ring, x.h, t, E, c)


def comp_neg(ring, x):
    if x.t is None:
        return x
    M = ring._pk[ring.precision]
    return Component(x.h, x.t, x.E, tuple(tuple(-v % M for v in cr) for cr in x.c))


def comp_scale(ring, x, s):
    """Multiply by a raw Witt scalar s (exact modulo p^N)."""
    v = raw_valuation(s, ring.p, ring.precision)
    if x.t is None:
        return x if is_exact(x.E) else _zero(x.h, x.E + x.h * v)
    if v >= ring.precision:
        return _zero(x.h, min(x.E, x.h * (x.t + ring.precision)))
    E = x.E if is_exact(x.E) else x.E + x.h * v
    c = tuple(ring._mul(cr, s) for cr in x.c)
    return _normalize(ring, x.h, x.t, E, c)


def comp_sigma(ring, x, k):
    if x.t is None or k % ring.a == 0:
        return x
    return Component(x.h, x.t, x.E, tuple(ring._sigma(cr, k) for cr in x.c))


def comp_shift(ring, x, s):
    """Multiply by π^s."""
    h = x.h
    E = x.E if is_exact(x.E) else x.E + s
    if x.t is None:
        return _zero(h, E)
    if s % h == 0:
        return Component(h, x.t + s // h, E, x.c)
    qmin = s // h
    new = [None] * h
    p = ring.p
    M = ring._pk[ring.precision]
    for r in range(h):
        q, r2 = divmod(r + s, h)
        cr = x.c[r]
        new[r2] = cr if q == qmin else tuple(v * p % M for v in cr)
    return _normalize(ring, h, x.t + qmin, E, tuple(new))


def comp_truncate(ring, x, E):
    if E >= x.E:
        return x
    if x.t is None:
        return _zero(x.h, E)
    return _normalize(ring, x.h, x.t, E, x.c)


# -- vectors -----------------------------------------------------------------

class IsoVector:
    """Element of N_K with Witt coefficients, one Component per simple copy."""

    __slots__ = ("shape", "ring", "comps")

    def __init__(self, shape: IsocrystalShape, ring: WittRing, comps):
        self.shape = shape
        self.ring = ring
        self.comps = tuple(comps)

    # constructors
    @classmethod
    def zero(cls, shape, ring):
        return cls(shape, ring, [_zero(m + n) for (_, _, m, n) in shape.copies()])

    @classmethod
    def basis(cls, shape, ring, j, i, l, coeff=None):
        """[coeff] e_{jil} (coeff a Witt element, field element or None for 1)."""
        q = shape.copy_position(j, i)
        comps = [_zero(m + n) for (_, _, m, n) in shape.copies()]
        h = comps[q].h
        r, t = l % h, l // h
        c = [(0,) * ring.a] * h
        if coeff is None:
            c[r] = ring._const(1)
        else:
            c[r] = _coerce_scalar(ring, coeff)
        comps[q] = _normalize(ring, h, t, h * (t + ring.precision), tuple(c))
        return cls(shape, ring, comps)

    @classmethod
    def from_terms(cls, shape, ring, terms):
        """Sum of [c] e_{jil} over ((j, i, l), c) pairs."""
        v = cls.zero(shape, ring)
        for (j, i, l), c in terms:
            v = v + cls.basis(shape, ring, j, i, l, c)
        return v

    @classmethod
    def from_digit_streams(cls, shape, ring, streams):
        """Inverse of :meth:`digit_stream`: streams maps (j, i) to {l: digit}."""
        terms = []
        for (j, i), stream in streams.items():
            for l, d in stream.items():
                if d:
                    terms.append(((j, i, l), d))
        return cls.from_terms(shape, ring, terms)

    @classmethod
    def parse(cls, shape, ring, text: str):
        """Parse ``[c]e(j,i,l) + e_l + ...``; ``e_l`` needs a simple shape."""
        s = text
        pos = 0
        terms = []
        term = re.compile(r"\s*(?:\[([^\]]*)\])?\s*e\s*(?:\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)"
                          r"|_\{?\s*(-?\d+)\s*\}?)\s*")
        while True:
            mt = term.match(s, pos)
            if not mt:
                raise ParseError("expected a term [c]e(j,i,l) or e_l", text, pos)
            coeff = ring.field.one()
            if mt.group(1) is not None:
                try:
                    coeff = ring.field.parse(mt.group(1))
                except ParseError as exc:
                    raise ParseError("bad coefficient", text, mt.start(1) + exc.position) from None
            if mt.group(5) is not None:
                if not shape.is_simple():
                    raise ParseError("e_l needs a simple shape; use e(j,i,l)", text, mt.start())
                j, i, l = 1, 1, int(mt.group(5))
            else:
                j, i, l = int(mt.group(2)), int(mt.group(3)), int(mt.group(4))
                if (j, i) not in shape._copy_pos:
                    raise ParseError(f"no copy ({j},{i}) in shape", text, mt.start())
            terms.append(((j, i, l), coeff))
            pos = mt.end()
            if pos == len(s):
                break
            if s[pos] != "+":
                raise ParseError("expected '+'", text, pos)
            pos += 1
        return cls.from_terms(shape, ring, terms)

    # helpers
    def _same(self, other):
        if not isinstance(other, IsoVector):
            raise TypeError("expected an IsoVector")
        if self.shape != other.shape or (self.ring is not other.ring and self.ring != other.ring):
            raise MixedParents("vectors over different shapes or rings")

    def _map(self, fn):
        return IsoVector(self.shape, self.ring, [fn(q, x) for q, x in enumerate(self.comps)])

    def _copy_data(self, q):
        j, i, m, n = self.shape.copies()[q]
        return j, m, n

    # module structure
    def __add__(self, other):
        self._same(other)
        ring = self.ring
        return IsoVector(self.shape, ring, [comp_add(ring, x, y) for x, y in zip(self.comps, other.comps)])

    def __sub__(self, other):
        self._same(other)
        ring = self.ring
        return IsoVector(self.shape, ring, [comp_add(ring, x, y, -1) for x, y in zip(self.comps, other.comps)])

    def __neg__(self):
        return self._map(lambda q, x: comp_neg(self.ring, x))

    def scale(self, c) -> IsoVector:
        s = _coerce_scalar(self.ring, c)
        return self._map(lambda q, x: comp_scale(self.ring, x, s))

    def scale_raw(self, s) -> IsoVector:
        return self._map(lambda q, x: comp_scale(self.ring, x, s))

    def __rmul__(self, c):
        return self.scale(c)

    def p_multiple(self, k: int = 1) -> IsoVector:
        """p^k v for any integer k."""
        return self._map(lambda q, x: comp_shift(self.ring, x, k * x.h))

    # semilinear operators
    def apply_F(self) -> IsoVector:
        ring = self.ring
        return self._map(lambda q, x: comp_shift(ring, comp_sigma(ring, x, 1), self._copy_data(q)[1]))

    def apply_V(self) -> IsoVector:
        ring = self.ring
        return self._map(lambda q, x: comp_shift(ring, comp_sigma(ring, x, -1), self._copy_data(q)[2]))

    def apply_Vinv(self) -> IsoVector:
        ring = self.ring
        return self._map(lambda q, x: comp_shift(ring, comp_sigma(ring, x, 1), -self._copy_data(q)[2]))

    def apply_pi(self, j: int) -> IsoVector:
        ring = self.ring
        if not 1 <= j <= len(self.shape.summands):
            raise BadCoordinateIndex(f"no summand {j}")
        _, b = self.shape.bezout(j)

        def act(q, x):
            if self._copy_data(q)[0] != j:
                return x
            return comp_shift(ring, comp_sigma(ring, x, b), 1)
        return self._map(act)

    def apply_sigma_j(self, j: int) -> IsoVector:
        ring = self.ring
        if not 1 <= j <= len(self.shape.summands):
            raise BadCoordinateIndex(f"no summand {j}")
        h = self.shape.height(j)
        return self._map(lambda q, x: comp_sigma(ring, x, h) if self._copy_data(q)[0] == j else x)

    # inspection
    def component(self, j: int, i: int) -> Component:
        return self.comps[self.shape.copy_position(j, i)]

    def denominator(self, j: int, i: int):
        """Exponent d with the component equal to p^-d times an integral element."""
        x = self.component(j, i)
        return None if x.t is None else -x.t

    def is_zero(self) -> bool:
        """True when every component vanishes at the known precision."""
        return all(x.t is None for x in self.comps)

    def is_exact_zero(self) -> bool:
        return all(x.t is None and is_exact(x.E) for x in self.comps)

    def precision_bounds(self):
        """Per copy, the absolute index below which digits are known (None = exact)."""
        return [None if is_exact(x.E) else x.E for x in self.comps]

    def first_index(self):
        """Lexicographically least (j, i, l) with a nonzero digit; None for exact zero."""
        for (j, i, _, _), x in zip(self.shape.copies(), self.comps):
            if x.t is not None:
                return (j, i, x.first_index(self.ring))
            if not is_exact(x.E):
                raise PrecisionExhausted(
                    f"copy ({j},{i}) vanishes below index {x.E}; leading digit not certified", depth=x.E)
        return None

    def digit(self, j: int, i: int, l: int) -> FFElement:
        return FFElement(self.ring.field, self.component(j, i).digit(self.ring, l))

    def digit_stream(self, j: int, i: int):
        """Map l -> digit over the known range of copy (j, i), zero digits omitted."""
        x = self.component(j, i)
        ring = self.ring
        out = {}
        if x.t is None:
            return out
        for r in range(x.h):
            K = x.known_digits(ring, r)
            for k, d in enumerate(ring._digits(x.c[r], K) if K else ()):
                if any(d):
                    out[r + x.h * (x.t + k)] = FFElement(ring.field, d)
        return dict(sorted(out.items()))

    def condition_star(self) -> bool:
        """Leading digits at l = 0 independent over F_{p^{h_j}} for each summand j."""
        a = self.ring.a
        for m, n, _ in self.shape.summands:
            if a % (m + n):
                raise UnsupportedResidueField(f"F_p^{a} does not contain F_p^{m + n}")
        ring = self.ring
        groups = {}
        for (j, i, _, _), x in zip(self.shape.copies(), self.comps):
            if x.t is None:
                if not is_exact(x.E) and x.E <= 0:
                    raise PrecisionExhausted("component not known at index 0", depth=x.E)
                return False
            idx = x.first_index(ring)
            if idx != 0:
                raise NotNormalized(f"copy ({j},{i}) has minimal index {idx}, expected 0")
            groups.setdefault(j, []).append(FFElement(ring.field, x.digit(ring, 0)))
        return all(subfield_linear_independent(digs, self.shape.height(j)) for j, digs in groups.items())

    def truncated(self, bounds) -> IsoVector:
        """Forget digits at indices >= bound (one bound per copy, or a single int)."""
        if isinstance(bounds, int):
            bounds = [bounds] * len(self.comps)
        ring = self.ring
        return IsoVector(self.shape, ring, [comp_truncate(ring, x, E) for x, E in zip(self.comps, bounds)])

    def agreement(self, other):
        """Per copy, the index up to which self and other are known to agree."""
        diff = self - other
        return [None if is_exact(x.E) and x.t is None else
                (x.E if x.t is None else x.first_index(self.ring)) for x in diff.comps]

    def __eq__(self, other):
        if not isinstance(other, IsoVector):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def to_json(self):
        out = {}
        for (j, i, _, _), x in zip(self.shape.copies(), self.comps):
            out[f"{j},{i}"] = {"known_below": None if is_exact(x.E) else x.E,
                               "digits": {str(l): str(d) for l, d in self.digit_stream(j, i).items()}}
        return out

    def __repr__(self):
        parts = []
        for (j, i, _, _) in self.shape.copies():
            for l, d in self.digit_stream(j, i).items():
                parts.append(f"[{d}]e({j},{i},{l})")
        return "IsoVector(" + (" + ".join(parts) if parts else "0") + ")"


def _coerce_scalar(ring: WittRing, c):
    if isinstance(c, WittElement):
        if c.parent != ring:
            raise MixedParents("scalar from a different Witt ring")
        return c.value
    if isinstance(c, FFElement):
        if c.field != ring.field:
            raise MixedParents("scalar from a different field")
        return ring._teichmuller(c.c)
    if isinstance(c, int):
        return ring._const(c)
    raise TypeError(f"cannot use {type(c).__name__} as a scalar")


def apply_F(v):
    return v.apply_F()


def apply_V(v):
    return v.apply_V()


def apply_Vinv(v):
    return v.apply_Vinv()


def apply_pi(v, j):
    return v.apply_pi(j)


def apply_sigma_j(v, j):
    return v.apply_sigma_j(j)


def vector_add(v, w):
    return v + w


def scalar_mul(c, v):
    return v.scale(c)


def digit_stream(v, j=1, i=1):
    return v.digit_stream(j, i)


def first_index(v):
    return v.first_index()


def condition_star(v):
    return v.condition_star()


def random_vector(shape, ring, rng: random.Random, low=0, spread=None):
    """Random vector with every component starting at index >= low."""
    comps = []
    N = ring.precision
    for (_, _, m, n) in shape.copies():
        h = m + n
        t = low // h
        c = tuple(tuple(rng.randrange(ring._pk[N]) for _ in range(ring.a)) for _ in range(h))
        comps.append(_normalize(ring, h, t, h * (t + N), c))
    return IsoVector(shape, ring, comps)


def random_condition_star(shape, ring, rng: random.Random, max_tries=1000):
    """Rejection-sample a vector satisfying condition (★) with leading digits at l = 0.

    Returns (vector, rejections).  Each copy gets a unit c_0 coefficient, so a
    draw is rejected only when the leading digits of some summand are dependent
    over F_{p^{h_j}}.
    """
    N = ring.precision
    M = ring._pk[N]
    for attempt in range(max_tries):
        comps = []
        for (_, _, m, n) in shape.copies():
            h = m + n
            lead = ring.field.random(rng, nonzero=True).c
            c0 = tuple((u + ring.p * rng.randrange(M)) % M for u in lead)
            rest = tuple(tuple(rng.randrange(M) for _ in range(ring.a)) for _ in range(h - 1))
            comps.append(_normalize(ring, h, 0, h * N, (c0,) + rest))
        v = IsoVector(shape, ring, comps)
        if v.condition_star():
            return v, attempt
    raise IterationCap(f"no condition-star vector found in {max_tries} draws")


def make_ring(p: int, field_degree: int, precision: int) -> WittRing:
    return WittRing(FiniteField(p, field_degree), precision)
