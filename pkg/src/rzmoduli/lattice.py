"""W-lattices in an isocrystal: echelon spans, Dieudonné closures, volume, a-invariant.

A lattice L is computed modulo a frame p^T M0.  Every vector is reduced by its
lexicographic first index (copy, l) against one representative per class
(copy q, l mod h_q); representatives have leading coefficient exactly p^k.
The frame is certified once p^(T-1) M0 reduces to zero: then
p^(T-1) M0 ⊆ L + p^T M0, so p^(T-1) M0 ⊆ L by Nakayama, and the computed
representatives describe L exactly.  Otherwise T is doubled.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .combinatorics import SemiModule, cycle_from_semimodule, semigroup_gaps
from .errors import BadCoordinateIndex, IterationCap, PrecisionExhausted, ZeroVector
from .isocrystal import EXACT, Component, IsocrystalShape, IsoVector, comp_truncate, is_exact
from .padic import FFElement, WittRing


class _Echelon:
    """Representatives of L + p^T M0, keyed by (copy position, residue class)."""

    def __init__(self, shape: IsocrystalShape, ring: WittRing, frame: int):
        self.shape = shape
        self.ring = ring
        self.T = frame
        self.heights = [m + n for (_, _, m, n) in shape.copies()]
        self.bounds = [frame * h for h in self.heights]
        self.reps = {}

    def prepare(self, v: IsoVector) -> IsoVector:
        ring = self.ring
        comps = []
        for x, bound in zip(v.comps, self.bounds):
            if x.E < bound:
                raise PrecisionExhausted(
                    f"vector known only below index {x.E}, frame needs {bound}", depth=x.E)
            comps.append(comp_truncate(ring, x, bound))
        return IsoVector(v.shape, ring, comps)

    def pivot(self, v: IsoVector):
        for q, x in enumerate(v.comps):
            if x.t is not None:
                return q, x.first_index(self.ring)
        return None

    def _normalize_lead(self, v, q):
        ring = self.ring
        idx, r, vv, unit = v.comps[q].leading(ring)
        return v.scale_raw(ring._inv(unit)), idx

    def _eliminate(self, v, q, l, rep, rl):
        ring = self.ring
        h = self.heights[q]
        d = (l - rl) // h
        if d >= ring.precision:
            raise PrecisionExhausted("elimination factor beyond ring precision", depth=0)
        _, _, _, unit = v.comps[q].leading(ring)
        pd = ring._pk[d]
        M = ring._pk[ring.precision]
        s = tuple(u * pd % M for u in unit)
        return self.prepare(v - rep.scale_raw(s))

    def reduce(self, v: IsoVector):
        """Reduce v; returns the remainder (None if it lies in the span)."""
        v = self.prepare(v)
        while True:
            piv = self.pivot(v)
            if piv is None:
                return None
            q, l = piv
            key = (q, l % self.heights[q])
            rep = self.reps.get(key)
            if rep is None or rep[1] > l:
                return v
            v = self._eliminate(v, q, l, rep[0], rep[1])

    def insert(self, v: IsoVector):
        """Add v to the span; returns the list of newly created representatives."""
        created = []
        v = self.prepare(v)
        while True:
            piv = self.pivot(v)
            if piv is None:
                return created
            q, l = piv
            key = (q, l % self.heights[q])
            rep = self.reps.get(key)
            if rep is not None and rep[1] <= l:
                v = self._eliminate(v, q, l, rep[0], rep[1])
                continue
            new, idx = self._normalize_lead(v, q)
            new = self.prepare(new)
            self.reps[key] = (new, idx)
            created.append(new)
            if rep is None:
                return created
            v = rep[0]

    def full(self) -> bool:
        return len(self.reps) == sum(self.heights)

    def certify(self) -> bool:
        """p^(T-1) M0 ⊆ L + p^T M0."""
        if not self.full():
            return False
        shape, ring = self.shape, self.ring
        for (j, i, m, n), h in zip(shape.copies(), self.heights):
            for r in range(h):
                e = IsoVector.basis(shape, ring, j, i, r + (self.T - 1) * h)
                if self.reduce(e) is not None:
                    return False
        return True


def _generic_closure(shape, ring, seeds, operators, frame, cap):
    ech = _Echelon(shape, ring, frame)
    work = list(seeds)
    steps = 0
    while work:
        steps += 1
        if steps > cap:
            raise IterationCap(f"closure did not stabilize within {cap} insertions")
        v = work.pop(0)
        for new in ech.insert(v):
            for op in operators:
                work.append(op(new))
    return ech


def _max_frame(shape, ring, vectors):
    limit = 4 * ring.precision
    heights = [m + n for (_, _, m, n) in shape.copies()]
    for v in vectors:
        for x, h in zip(v.comps, heights):
            if not is_exact(x.E):
                limit = min(limit, x.E // h)
    return limit


def _start_frame(vectors):
    top = 0
    for v in vectors:
        for x in v.comps:
            if x.t is not None:
                top = max(top, x.t)
    return max(2, top + 2)


def _adaptive(shape, ring, vectors, operators, cap, start=None):
    limit = _max_frame(shape, ring, vectors)
    T = start if start is not None else _start_frame(vectors)
    tried = []
    while True:
        if T > limit:
            T = limit
        ech = _generic_closure(shape, ring, vectors, operators, T, cap)
        tried.append(T)
        if ech.certify():
            return DieudonneLattice._from_echelon(ech)
        if T >= limit:
            raise PrecisionExhausted(
                f"could not certify the lattice with frames {tried}; the generators are known to depth "
                f"{limit} (raise --precision, or the span is not of full rank)", depth=limit)
        T *= 2


def _complete(v: IsoVector) -> IsoVector:
    """Read unknown digits of a frame representative as zero.

    Since p^T M0 ⊆ L, any completion of a representative still lies in L, and
    the completed representatives span L (Nakayama again).
    """
    N = v.ring.precision
    comps = [Component(x.h, x.t, EXACT if x.t is None else x.h * (x.t + N), x.c) for x in v.comps]
    return IsoVector(v.shape, v.ring, comps)


class DieudonneLattice:
    """A full-rank W-lattice given by echelon representatives modulo p^T M0 ⊆ L."""

    def __init__(self, shape, ring, frame, reps):
        self.shape = shape
        self.ring = ring
        self.frame = frame
        self._reps = dict(reps)
        self._key = None
        self._conductor = None

    @classmethod
    def _from_echelon(cls, ech: _Echelon):
        return cls(ech.shape, ech.ring, ech.T,
                   {key: (_complete(v), l) for key, (v, l) in ech.reps.items()})

    def _echelon(self, frame=None) -> _Echelon:
        ech = _Echelon(self.shape, self.ring, self.frame if frame is None else frame)
        if frame is None or frame == self.frame:
            ech.reps = dict(self._reps)
        else:
            for v in self.basis:
                ech.insert(v)
        return ech

    @property
    def basis(self):
        return [rep for rep, _ in sorted(self._reps.values(), key=lambda rv: self._pivot_key(rv))]

    def _pivot_key(self, rv):
        v, l = rv
        for q, x in enumerate(v.comps):
            if x.t is not None:
                return (q, l)
        return (len(v.comps), l)

    def first_indices(self):
        """Pivots (j, i, l) of the echelon basis, in lexicographic order."""
        copies = self.shape.copies()
        out = []
        for (q, _), (_, l) in self._reps.items():
            j, i, _, _ = copies[q]
            out.append((j, i, l))
        return sorted(out)

    def vol(self) -> int:
        total = 0
        copies = self.shape.copies()
        for (q, r), (_, l) in self._reps.items():
            total += (l - r) // (copies[q][2] + copies[q][3])
        return total

    def contains(self, v: IsoVector) -> bool:
        if v.is_exact_zero():
            return True
        return self._echelon().reduce(v) is None

    def __contains__(self, v):
        return self.contains(v)

    def issubset(self, other: DieudonneLattice) -> bool:
        return all(other.contains(v) for v in self.basis)

    def __eq__(self, other):
        if not isinstance(other, DieudonneLattice):
            return NotImplemented
        if self.shape != other.shape or self.ring != other.ring:
            return False
        return self.canonical_key() == other.canonical_key()

    def __hash__(self):
        return hash(self.canonical_key())

    def is_dieudonne(self) -> bool:
        return all(self.contains(v.apply_F()) and self.contains(v.apply_V()) for v in self.basis)

    def conductor(self) -> int:
        """Least k >= 0 with p^k M0 ⊆ L."""
        if self._conductor is None:
            ech = self._echelon()
            shape, ring = self.shape, self.ring

            def contains_level(k):
                for (j, i, m, n) in shape.copies():
                    h = m + n
                    for r in range(h):
                        if ech.reduce(IsoVector.basis(shape, ring, j, i, r + k * h)) is not None:
                            return False
                return True
            k = self.frame - 1
            while k > 0 and contains_level(k - 1):
                k -= 1
            self._conductor = k
        return self._conductor

    @property
    def certified_depth(self) -> int:
        """Margin of the working frame over the conductor (at least 1)."""
        return self.frame - self.conductor()

    def scaled_by_p(self, k: int = 1) -> DieudonneLattice:
        copies = self.shape.copies()
        reps = {}
        for (q, r), (v, l) in self._reps.items():
            h = copies[q][2] + copies[q][3]
            reps[(q, r)] = (v.p_multiple(k), l + k * h)
        ech = _Echelon(self.shape, self.ring, self.frame + k)
        ech.reps = {key: (ech.prepare(v), l) for key, (v, l) in reps.items()}
        return DieudonneLattice._from_echelon(ech)

    def semimodule(self) -> SemiModule:
        if not self.shape.is_simple():
            raise ValueError("semimodules are defined for simple shapes only")
        (m, n, _), = self.shape.summands
        return SemiModule(m, n, tuple(l for _, l in self._reps.values()))

    def canonical_form(self):
        """Echelon basis modulo p^c M0 (c the conductor) in Teichmüller-digit normal form.

        Every representative has digit 1 at its pivot and digit 0 at every other
        index that is the first index of some lattice element.
        """
        shape, ring = self.shape, self.ring
        T = max(self.conductor(), 1)
        ech = _Echelon(shape, ring, T)
        for v in self.basis:
            ech.insert(v)
        reps = dict(ech.reps)
        heights = ech.heights
        owners = {key: (v, l) for key, (v, l) in reps.items()}
        for q, h in enumerate(heights):
            pivots = sorted(l for (qq, _), (_, l) in reps.items() if qq == q)
            if not pivots:
                continue
            for l in range(pivots[0], T * h):
                key = (q, l % h)
                if key not in owners or owners[key][1] > l:
                    continue
                for rk in list(reps):
                    w, wl = reps[rk]
                    x = w.comps[q]
                    if x.t is None or (rk == key and wl == l):
                        continue
                    d = x.digit(ring, l)
                    if not any(d):
                        continue
                    c, cl = reps[key]
                    s = (l - cl) // h
                    teich = ring._teichmuller(d)
                    M = ring._pk[ring.precision]
                    scal = tuple(u * ring._pk[s] % M for u in teich)
                    reps[rk] = (ech.prepare(w - c.scale_raw(scal)), wl)
        return T, reps

    def canonical_key(self):
        if self._key is None:
            T, reps = self.canonical_form()
            items = []
            for (q, r), (v, l) in reps.items():
                digits = []
                for qq, x in enumerate(v.comps):
                    if x.t is None:
                        continue
                    j, i, _, _ = self.shape.copies()[qq]
                    for ll, d in v.digit_stream(j, i).items():
                        digits.append((qq, ll, d.c))
                items.append(((q, l), tuple(digits)))
            self._key = (T, tuple(sorted(items)))
        return self._key

    def to_json(self):
        T, reps = self.canonical_form()
        field = self.ring.field
        basis = []
        copies = self.shape.copies()
        for (q, r), (v, l) in sorted(reps.items(), key=lambda kv: (kv[0][0], kv[1][1])):
            j, i, _, _ = copies[q]
            streams = {}
            for (jj, ii, _, _) in copies:
                st = v.digit_stream(jj, ii)
                if st:
                    streams[f"{jj},{ii}"] = {str(k): str(d) for k, d in st.items()}
            basis.append({"first_index": [j, i, l], "digits": streams})
        return {
            "shape": str(self.shape),
            "field": {"p": field.p, "degree": field.a, "modulus": list(field.modulus)},
            "precision": self.ring.precision,
            "frame": T,
            "certified_depth": self.certified_depth,
            "vol": self.vol(),
            "basis": basis,
        }


def _vectors(vectors):
    vectors = list(vectors)
    if not vectors:
        raise ZeroVector("span of no vectors")
    for v in vectors:
        if v.is_zero():
            raise ZeroVector("zero generator")
    return vectors


def span(vectors, cap=None) -> DieudonneLattice:
    """W-span of the given vectors (must be of full rank)."""
    vectors = _vectors(vectors)
    shape, ring = vectors[0].shape, vectors[0].ring
    for v in vectors:
        v._same(vectors[0])
    return _adaptive(shape, ring, vectors, (), cap or 10 * len(vectors) * shape.h * ring.precision)


def _default_cap(shape, ring):
    return 4 * shape.h * ring.precision


def dieudonne_closure(v, cap=None) -> DieudonneLattice:
    """Smallest F- and V-stable lattice containing v (or all vectors in v)."""
    vectors = _vectors([v] if isinstance(v, IsoVector) else v)
    shape, ring = vectors[0].shape, vectors[0].ring
    ops = (IsoVector.apply_F, IsoVector.apply_V)
    return _adaptive(shape, ring, vectors, ops, cap or _default_cap(shape, ring) * (len(vectors) + 1))


def p_closure(L: DieudonneLattice, cap=None) -> DieudonneLattice:
    """Smallest lattice containing L stable under F, V and every π_j, σ_j."""
    shape = L.shape
    ops = [IsoVector.apply_F, IsoVector.apply_V]
    for j in range(1, len(shape.summands) + 1):
        ops.append(lambda v, j=j: v.apply_pi(j))
        ops.append(lambda v, j=j: v.apply_sigma_j(j))
    cap = cap or _default_cap(shape, L.ring) * len(ops)
    return _adaptive(shape, L.ring, L.basis, tuple(ops), cap, start=L.frame)


def M0(shape: IsocrystalShape, ring: WittRing) -> DieudonneLattice:
    ech = _Echelon(shape, ring, 1)
    for (j, i, m, n) in shape.copies():
        for r in range(m + n):
            ech.insert(IsoVector.basis(shape, ring, j, i, r))
    return DieudonneLattice._from_echelon(ech)


def vol(L: DieudonneLattice) -> int:
    return L.vol()


def a_invariant(L: DieudonneLattice) -> int:
    """dim_K L / (FL + VL + pL), computed as a difference of volumes."""
    images = []
    for v in L.basis:
        images.extend((v.apply_F(), v.apply_V(), v.p_multiple()))
    images = [w for w in images if not w.is_zero()]
    sub = _adaptive(L.shape, L.ring, images, (), 10 * len(images) * L.shape.h * L.ring.precision,
                    start=L.frame + 1)
    return sub.vol() - L.vol()


def semimodule_of(L: DieudonneLattice) -> SemiModule:
    return L.semimodule()


# -- Smith-form oracle -------------------------------------------------------

def smith_exponents(vectors):
    """Elementary divisor exponents of the coordinate matrix of ``vectors`` in the basis of M0.

    Slow and independent of the echelon code; used as a test oracle.
    Coordinates p^t c_r of each component are placed in column (q, r).
    """
    vectors = _vectors(vectors)
    ring = vectors[0].ring
    p, N = ring.p, ring.precision
    shift = 0
    for v in vectors:
        for x in v.comps:
            if x.t is not None:
                shift = max(shift, -x.t)
    rows = []
    for v in vectors:
        row = []
        for x in v.comps:
            for r in range(x.h):
                if x.t is None:
                    row.append((0,) * ring.a)
                else:
                    e = x.t + shift
                    if e >= N:
                        row.append((0,) * ring.a)
                    else:
                        row.append(tuple(c * ring._pk[e] % ring._pk[N] for c in x.c[r]))
        rows.append(row)
    M = ring._pk[N]
    exps = []
    ncols = len(rows[0])
    while rows and ncols:
        best = None
        for a, row in enumerate(rows):
            for b, entry in enumerate(row):
                val = _val(entry, p, N)
                if val < N and (best is None or val < best[0]):
                    best = (val, a, b)
        if best is None:
            break
        val, a, b = best
        exps.append(val - shift)
        piv_row = rows.pop(a)
        pv = ring._pk[val]
        unit_inv = ring._inv(tuple(c // pv for c in piv_row[b]))
        new_rows = []
        for row in rows:
            entry = row[b]
            f = ring._mul(tuple(c // pv for c in entry), unit_inv)
            new_rows.append([tuple((u - w) % M for u, w in zip(x, ring._mul(f, y)))
                             for k, (x, y) in enumerate(zip(row, piv_row)) if k != b])
        rows = new_rows
        ncols -= 1
    return exps


def _val(entry, p, N):
    from .padic import raw_valuation
    return raw_valuation(entry, p, N)


def smith_vol(vectors) -> int:
    """lg(M0 / (M0 ∩ M)) - lg(M / (M0 ∩ M)) from elementary divisors."""
    exps = smith_exponents(vectors)
    return sum(max(e, 0) for e in exps) - sum(max(-e, 0) for e in exps)


# -- index set of the volume formula -------------------------------------------

@dataclass(frozen=True)
class IndexSet:
    shape: IsocrystalShape
    elements: frozenset
    c: int

    def for_copy(self, j, i):
        return sorted(l for (jj, ii, l) in self.elements if (jj, ii) == (j, i))

    def complement_generators(self, j, i):
        """(offset, m, n) with the complement equal to offset + <m, n>."""
        q = self.shape.copy_position(j, i)
        copies = self.shape.copies()
        n_q = copies[q][3]
        offset = sum(copies[k][2] * n_q for k in range(q))
        return offset, copies[q][2], copies[q][3]


def c_constant(shape: IsocrystalShape) -> int:
    copies = shape.copies()
    c = sum((m - 1) * (n - 1) // 2 for (_, _, m, n) in copies)
    for a in range(len(copies)):
        for b in range(a + 1, len(copies)):
            c += copies[a][2] * copies[b][3]
    return c


def index_set(shape: IsocrystalShape) -> IndexSet:
    copies = shape.copies()
    elements = set()
    for q, (j, i, m, n) in enumerate(copies):
        offset = sum(copies[k][2] * n for k in range(q))
        gaps = semigroup_gaps(m, n) if m and n else []
        elements.update((j, i, l) for l in range(offset))
        elements.update((j, i, offset + g) for g in gaps)
    c = c_constant(shape)
    if len(elements) != c:
        raise AssertionError(f"|I| = {len(elements)} differs from c = {c}")
    j1, i1 = copies[0][0], copies[0][1]
    if (j1, i1, 0) in elements:
        raise AssertionError("first copy index 0 lies in I")
    if shape.is_bi_infinitesimal():
        for (j, i, _, _) in copies[1:]:
            if (j, i, 0) not in elements:
                raise AssertionError(f"({j},{i},0) missing from I")
    return IndexSet(shape, frozenset(elements), c)


# -- field-valued points of the paving ----------------------------------------

def lattice_from_cycle_point(A: SemiModule, coords, ring: WittRing, max_passes=None) -> DieudonneLattice:
    """Lattice spanned by the v_i solving the cycle recursion with the given coordinates.

    ``coords`` maps pairs (d, i) of V(B) to field elements; missing pairs are 0.
    """
    shape = IsocrystalShape([(A.m, A.n)])
    B = cycle_from_semimodule(A)
    vset = set(B.v_set())
    coords = dict(coords or {})
    for key in coords:
        if tuple(key) not in vset:
            raise BadCoordinateIndex(f"{key} is not in V(B) = {sorted(vset)}")
    field = ring.field
    teich = {}
    for key, val in coords.items():
        if not isinstance(val, FFElement):
            val = field(val)
        if val.field != field:
            raise BadCoordinateIndex(f"coordinate {key} lies in another field")
        if val:
            teich[tuple(key)] = val
    b = B.values
    h = A.h
    plus = set(B.plus_positions())
    incoming = {}
    for (d, i) in sorted(teich):
        incoming.setdefault(i, []).append(d)

    frame = max(2, -(-(max(b) + 1) // h) + 1)
    needed = frame * h + (b[0] - min(b))
    if h * (b[0] // h + ring.precision) < needed:
        raise PrecisionExhausted(f"precision {ring.precision} too small for this cycle (need index {needed})",
                                 depth=ring.precision)

    # each pass fixes at least one more digit; a chain from v_0 loses at most b_0 - min(b) indices
    vs = [IsoVector.basis(shape, ring, 1, 1, bi).truncated(needed) for bi in b]
    passes = max_passes or (needed - min(b) + 2 * h + 4)
    for _ in range(passes):
        new = [vs[0]]
        for i in range(h - 1):
            prev = new[i]
            nxt = prev.apply_F() if i in plus else prev.apply_Vinv()
            for d in incoming.get(i + 1, ()):
                src = new[d] if d <= i else vs[d]
                nxt = nxt + src.scale(teich[(d, i + 1)])
            new.append(nxt.truncated(needed))
        if all(x == y for x, y in zip(new, vs)):
            break
        vs = new
    else:
        raise IterationCap(f"cycle recursion did not stabilize in {passes} passes")
    return _adaptive(shape, ring, vs, (), 10 * h * h * ring.precision, start=frame)


def default_precision(shape: IsocrystalShape) -> int:
    """c + 2h + 4 digits."""
    return c_constant(shape) + 2 * shape.h + 4


def cycle_count(m: int, n: int) -> int:
    return comb(m + n, m) // (m + n)
