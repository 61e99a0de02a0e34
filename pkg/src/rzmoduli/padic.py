"""Finite fields F_{p^a} and truncated Witt rings W(F_{p^a})/p^N.

A Witt ring element is stored as a residue of (Z/p^N)[x]/(f~) where f~ is the
integer lift of the field modulus (coefficients in [0, p)).  Frobenius is the
unique ring automorphism sending x to the Hensel root of f~ congruent to x^p;
it is computed once per power and then applied by evaluation, so no Witt
addition polynomials are needed.

Raw values (tuples of ``a`` ints) are used internally by the isocrystal and
lattice layers; :class:`FFElement` and :class:`WittElement` wrap them for the
public API.
"""

from __future__ import annotations

import random
import re
from itertools import product

from .errors import DivisionByZero, MixedParents, ParseError, PrecisionExhausted, UnsupportedResidueField


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _mulmod(x, y, f, M):
    """Product of two residues modulo (M, monic f); ``f`` omits the leading 1."""
    a = len(x)
    prod = [0] * (2 * a - 1)
    for i, xi in enumerate(x):
        if xi:
            for j, yj in enumerate(y):
                if yj:
                    prod[i + j] += xi * yj
    for i in range(2 * a - 2, a - 1, -1):
        c = prod[i]
        if c:
            base = i - a
            for k in range(a):
                fk = f[k]
                if fk:
                    prod[base + k] -= c * fk
    return tuple(v % M for v in prod[:a])


def _vp(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def raw_valuation(x, p, cap):
    """p-adic valuation of a raw residue, ``cap`` when it vanishes."""
    best = cap
    for c in x:
        if c:
            v = _vp(c, p)
            if v < best:
                best = v
    return best


# -- polynomials over F_p, lists low -> high, used for irreducibility only --

def _ptrim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pdivmod_rem(a, b, p):
    a = list(a)
    _ptrim(a)
    inv = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        c = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        _ptrim(a)
    return a


def _pgcd(a, b, p):
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        a, b = b, _pdivmod_rem(a, b, p)
    return a


def _is_irreducible(modulus, p):
    """Ben-Or test: gcd(f, x^(p^k) - x) = 1 for k <= deg/2."""
    a = len(modulus) - 1
    if a == 1:
        return True
    f = tuple(modulus[:-1])
    xpow = tuple(1 if i == 1 else 0 for i in range(a))
    for _ in range(a // 2):
        xpow = _powmod(xpow, p, f, p)
        diff = list(xpow)
        diff[1] = (diff[1] - 1) % p
        g = _pgcd(list(modulus), diff, p)
        if len(g) != 1:
            return False
    return True


def _powmod(x, e, f, M):
    a = len(x)
    result = tuple(1 if i == 0 else 0 for i in range(a))
    base = x
    while e:
        if e & 1:
            result = _mulmod(result, base, f, M)
        e >>= 1
        if e:
            base = _mulmod(base, base, f, M)
    return result


def _find_irreducible(p, a):
    for tail in product(range(p), repeat=a):
        poly = list(reversed(tail)) + [1]
        if a > 1 and poly[0] == 0:
            continue
        if _is_irreducible(poly, p):
            return tuple(poly)
    raise AssertionError("no irreducible polynomial found")


class FiniteField:
    """F_{p^a} = F_p[x]/(modulus), modulus monic irreducible of degree a."""

    def __init__(self, p: int, a: int = 1, modulus=None):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if a < 1:
            raise ValueError("extension degree must be >= 1")
        if modulus is None:
            modulus = _find_irreducible(p, a)
        else:
            modulus = tuple(int(c) % p for c in modulus)
            if len(modulus) != a + 1 or modulus[-1] != 1:
                raise ValueError("modulus must be monic of degree a")
            if not _is_irreducible(modulus, p):
                raise ValueError(f"modulus {modulus} is reducible over F_{p}")
        self.p = p
        self.a = a
        self.order = p ** a
        self.modulus = modulus
        self._f = modulus[:-1]
        self._frob = {}

    def __eq__(self, other):
        return isinstance(other, FiniteField) and self.p == other.p and self.modulus == other.modulus

    def __hash__(self):
        return hash((self.p, self.modulus))

    def __repr__(self):
        return f"FiniteField({self.p}, {self.a})"

    # raw helpers
    def _mul(self, x, y):
        return _mulmod(x, y, self._f, self.p)

    def _frob_raw(self, x, k):
        k %= self.a
        if k == 0:
            return x
        images = self._frob.get(k)
        if images is None:
            images = []
            for i in range(self.a):
                basis = tuple(1 if t == i else 0 for t in range(self.a))
                images.append(_powmod(basis, self.p ** k, self._f, self.p))
            self._frob[k] = images
        out = [0] * self.a
        for xi, img in zip(x, images):
            if xi:
                for t, v in enumerate(img):
                    out[t] += xi * v
        return tuple(v % self.p for v in out)

    # constructors
    def __call__(self, value) -> FFElement:
        if isinstance(value, FFElement):
            if value.field != self:
                raise MixedParents("element of a different field")
            return value
        if isinstance(value, int):
            return FFElement(self, (value % self.p,) + (0,) * (self.a - 1))
        if isinstance(value, str):
            return self.parse(value)
        coeffs = tuple(int(c) % self.p for c in value)
        if len(coeffs) > self.a:
            raise ValueError("too many coefficients")
        return FFElement(self, coeffs + (0,) * (self.a - len(coeffs)))

    def zero(self):
        return self(0)

    def one(self):
        return self(1)

    def _x_raw(self):
        if self.a == 1:
            return (-self.modulus[0] % self.p,)
        return (0, 1) + (0,) * (self.a - 2)

    def gen(self):
        """The class of x."""
        return FFElement(self, self._x_raw())

    def from_index(self, n: int) -> FFElement:
        coeffs = []
        for _ in range(self.a):
            n, r = divmod(n, self.p)
            coeffs.append(r)
        return FFElement(self, tuple(coeffs))

    def elements(self):
        for n in range(self.order):
            yield self.from_index(n)

    def random(self, rng: random.Random, nonzero=False) -> FFElement:
        lo = 1 if nonzero else 0
        return self.from_index(rng.randrange(lo, self.order))

    def parse(self, text: str) -> FFElement:
        """Parse a polynomial in ``x`` such as ``x^2+x+1`` or ``2x-1``."""
        s = text.replace(" ", "")
        if not s:
            raise ParseError("empty field literal", text, 0)
        coeffs = [0] * max(self.a, 1)
        term = re.compile(r"([+-]?)(\d*)(\*?x(?:\^(\d+))?)?")
        pos = 0
        while pos < len(s):
            mt = term.match(s, pos)
            if not mt or mt.end() == pos or (not mt.group(2) and not mt.group(3)):
                raise ParseError("bad field term", text, pos)
            sign = -1 if mt.group(1) == "-" else 1
            if mt.group(3) and mt.group(3).startswith("*") and not mt.group(2):
                raise ParseError("dangling '*'", text, pos)
            c = int(mt.group(2)) if mt.group(2) else 1
            if mt.group(3):
                deg = int(mt.group(4)) if mt.group(4) else 1
            else:
                deg = 0
            mono = _powmod(self._x_raw(), deg, self._f, self.p)
            for i, v in enumerate(mono):
                coeffs[i] += sign * c * v
            pos = mt.end()
        return FFElement(self, tuple(v % self.p for v in coeffs))


class FFElement:
    __slots__ = ("field", "c")

    def __init__(self, field: FiniteField, coeffs):
        self.field = field
        self.c = tuple(coeffs)

    def _check(self, other):
        if isinstance(other, int):
            return self.field(other)
        if not isinstance(other, FFElement):
            return NotImplemented
        if other.field is not self.field and other.field != self.field:
            raise MixedParents("elements of different fields")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.field.p
        return FFElement(self.field, tuple((u + v) % p for u, v in zip(self.c, other.c)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        p = self.field.p
        return FFElement(self.field, tuple((u - v) % p for u, v in zip(self.c, other.c)))

    def __neg__(self):
        p = self.field.p
        return FFElement(self.field, tuple(-u % p for u in self.c))

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return FFElement(self.field, self.field._mul(self.c, other.c))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return FFElement(self.field, _powmod(self.c, e, self.field._f, self.field.p))

    def inverse(self):
        if not any(self.c):
            raise DivisionByZero("inverse of 0 in a finite field")
        return self ** (self.field.order - 2)

    def __truediv__(self, other):
        other = self._check(other)
        return self * other.inverse()

    def frobenius(self, k: int = 1):
        """x -> x^(p^k); negative k applies the inverse Frobenius."""
        return FFElement(self.field, self.field._frob_raw(self.c, k))

    def is_zero(self):
        return not any(self.c)

    def __bool__(self):
        return any(self.c)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.field(other)
        if not isinstance(other, FFElement):
            return NotImplemented
        return self.field == other.field and self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def index(self) -> int:
        n = 0
        for v in reversed(self.c):
            n = n * self.field.p + v
        return n

    def __repr__(self):
        return f"FFElement({self})"

    def __str__(self):
        terms = []
        for i in range(len(self.c) - 1, -1, -1):
            v = self.c[i]
            if not v:
                continue
            if i == 0:
                terms.append(str(v))
            else:
                mono = "x" if i == 1 else f"x^{i}"
                terms.append(mono if v == 1 else f"{v}{mono}")
        return "+".join(terms) if terms else "0"


def subfield_linear_independent(elems, subfield_degree: int) -> bool:
    """True iff ``elems`` are linearly independent over F_{p^d} inside F_{p^a}.

    Uses the Moore matrix (x_i^(Q^k)), Q = p^d, whose determinant vanishes
    exactly when the x_i are F_Q-dependent.
    """
    elems = list(elems)
    if not elems:
        return True
    field = elems[0].field
    for e in elems:
        if e.field != field:
            raise MixedParents("elements of different fields")
    d = subfield_degree
    if d < 1 or field.a % d:
        raise UnsupportedResidueField(f"F_{field.p}^{d} does not embed in F_{field.p}^{field.a}")
    k = len(elems)
    if k > field.a // d:
        return False
    rows = [[e.frobenius(d * col) for col in range(k)] for e in elems]
    # rank by Gaussian elimination
    rank = 0
    for col in range(k):
        pivot = next((r for r in range(rank, k) if rows[r][col]), None)
        if pivot is None:
            return False
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = rows[rank][col].inverse()
        for r in range(k):
            if r != rank and rows[r][col]:
                factor = rows[r][col] * inv
                rows[r] = [u - factor * v for u, v in zip(rows[r], rows[rank])]
        rank += 1
    return rank == k


class WittRing:
    """W(F_{p^a}) / p^N."""

    def __init__(self, field: FiniteField, precision: int):
        if precision < 1:
            raise ValueError("precision must be >= 1")
        self.field = field
        self.p = field.p
        self.a = field.a
        self.precision = precision
        self._pk = [self.p ** k for k in range(precision + 2)]
        self._f = field._f
        self._sigma_images = {}
        self._teich = {}

    def __eq__(self, other):
        return isinstance(other, WittRing) and self.field == other.field and self.precision == other.precision

    def __hash__(self):
        return hash((self.field, self.precision))

    def __repr__(self):
        return f"WittRing({self.field!r}, precision={self.precision})"

    # -- raw arithmetic on tuples modulo p^K ------------------------------

    def _mul(self, x, y, K=None):
        return _mulmod(x, y, self._f, self._pk[self.precision if K is None else K])

    def _pow(self, x, e, K=None):
        return _powmod(x, e, self._f, self._pk[self.precision if K is None else K])

    def _const(self, c, K=None):
        M = self._pk[self.precision if K is None else K]
        return (c % M,) + (0,) * (self.a - 1)

    def _eval_modulus(self, xi, derivative=False):
        N = self.precision
        coeffs = list(self._f) + [1]
        if derivative:
            coeffs = [i * c for i, c in enumerate(coeffs)][1:]
        acc = self._const(coeffs[-1])
        for c in reversed(coeffs[:-1]):
            acc = self._mul(acc, xi)
            acc = ((acc[0] + c) % self._pk[N],) + acc[1:]
        return acc

    def _inv(self, x, K=None):
        K = self.precision if K is None else K
        resid = tuple(v % self.p for v in x)
        if not any(resid):
            raise DivisionByZero("inverse of a non-unit Witt vector")
        y = FFElement(self.field, resid).inverse().c
        prec = 1
        two = self._const(2, K)
        while prec < K:
            prec *= 2
            uy = self._mul(x, y, K)
            y = self._mul(y, tuple((t - s) for t, s in zip(two, uy)), K)
        return tuple(v % self._pk[K] for v in y)

    def _frobenius_images(self, k):
        """Powers xi^i (i < a) of the Hensel root xi = sigma^k(x)."""
        k %= self.a
        images = self._sigma_images.get(k)
        if images is not None:
            return images
        N = self.precision
        M = self._pk[N]
        if self.a == 1:
            images = ((1,),)
        else:
            xi = self.field._frob_raw(self.field._x_raw(), k)
            for _ in range(N.bit_length() + 2):
                fx = self._eval_modulus(xi)
                if not any(fx):
                    break
                step = self._mul(fx, self._inv(self._eval_modulus(xi, derivative=True)))
                xi = tuple((u - v) % M for u, v in zip(xi, step))
            assert not any(self._eval_modulus(xi)), "Hensel iteration did not converge"
            imgs = [self._const(1)]
            for _ in range(1, self.a):
                imgs.append(self._mul(imgs[-1], xi))
            images = tuple(imgs)
        self._sigma_images[k] = images
        return images

    def _sigma(self, x, k, K=None):
        if k % self.a == 0:
            return x
        K = self.precision if K is None else K
        M = self._pk[K]
        out = [0] * self.a
        for xi, img in zip(x, self._frobenius_images(k)):
            if xi:
                for t, v in enumerate(img):
                    out[t] += xi * v
        return tuple(v % M for v in out)

    def _teichmuller(self, resid, K=None):
        K = self.precision if K is None else K
        t = self._teich.get(resid)
        if t is None:
            N = self.precision
            # [x] = y^(p^(N-1)) for any lift y of x^(p^-(N-1))
            y = self.field._frob_raw(resid, -(N - 1))
            for _ in range(N - 1):
                y = self._pow(y, self.p)
            t = y
            self._teich[resid] = t
        if K == self.precision:
            return t
        M = self._pk[K]
        return tuple(v % M for v in t)

    def _digits(self, x, K=None):
        K = self.precision if K is None else K
        p = self.p
        out = []
        cur = x
        for i in range(K):
            d = tuple(v % p for v in cur)
            out.append(d)
            if i == K - 1:
                break
            rem = K - i
            t = self._teichmuller(d, rem)
            M = self._pk[rem]
            cur = tuple(((u - v) % M) // p for u, v in zip(cur, t))
        return out

    # -- public constructors -----------------------------------------------

    def __call__(self, value) -> WittElement:
        M = self._pk[self.precision]
        if isinstance(value, WittElement):
            if value.parent != self:
                raise MixedParents("Witt vector of a different ring; precision mixing is an error")
            return value
        if isinstance(value, int):
            return WittElement(self, self._const(value))
        if isinstance(value, FFElement):
            return self.teichmuller(value)
        vals = tuple(int(v) % M for v in value)
        if len(vals) != self.a:
            raise ValueError("wrong number of coefficients")
        return WittElement(self, vals)

    def zero(self):
        return self(0)

    def one(self):
        return self(1)

    def teichmuller(self, x: FFElement) -> WittElement:
        if x.field != self.field:
            raise MixedParents("field element not in the residue field of this ring")
        return WittElement(self, self._teichmuller(x.c))

    def from_digits(self, digits) -> WittElement:
        """Reassemble sum [d_i] p^i."""
        M = self._pk[self.precision]
        acc = [0] * self.a
        for i, d in enumerate(digits):
            if i >= self.precision:
                break
            if isinstance(d, FFElement):
                if d.field != self.field:
                    raise MixedParents("digit from a different field")
                d = d.c
            t = self._teichmuller(tuple(d))
            for j, v in enumerate(t):
                acc[j] += self._pk[i] * v
        return WittElement(self, tuple(v % M for v in acc))

    def random(self, rng: random.Random, unit=False) -> WittElement:
        M = self._pk[self.precision]
        while True:
            vals = tuple(rng.randrange(M) for _ in range(self.a))
            if not unit or any(v % self.p for v in vals):
                return WittElement(self, vals)


class WittElement:
    __slots__ = ("parent", "value", "_digits")

    def __init__(self, parent: WittRing, value):
        self.parent = parent
        self.value = value
        self._digits = None

    def _coerce(self, other):
        if isinstance(other, int):
            return self.parent(other)
        if not isinstance(other, WittElement):
            return NotImplemented
        if other.parent is not self.parent and other.parent != self.parent:
            raise MixedParents("Witt vectors of different rings")
        return other

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        M = self.parent._pk[self.parent.precision]
        return WittElement(self.parent, tuple((u + v) % M for u, v in zip(self.value, other.value)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        M = self.parent._pk[self.parent.precision]
        return WittElement(self.parent, tuple((u - v) % M for u, v in zip(self.value, other.value)))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        M = self.parent._pk[self.parent.precision]
        return WittElement(self.parent, tuple(-u % M for u in self.value))

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return WittElement(self.parent, self.parent._mul(self.value, other.value))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return WittElement(self.parent, self.parent._pow(self.value, e))

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.parent(other)
        if not isinstance(other, WittElement):
            return NotImplemented
        return self.parent == other.parent and self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"WittElement({self.value}, N={self.parent.precision})"

    def sigma(self, k: int = 1) -> WittElement:
        return WittElement(self.parent, self.parent._sigma(self.value, k))

    def valuation(self) -> int:
        """Least i with digit_i != 0; the precision N when the element vanishes."""
        return raw_valuation(self.value, self.parent.p, self.parent.precision)

    def is_unit(self) -> bool:
        return self.valuation() == 0

    def unit_part(self):
        """(v, u) with self = p^v u; u is determined modulo p^(N-v)."""
        v = self.valuation()
        if v >= self.parent.precision:
            raise PrecisionExhausted("unit part of a vector that vanishes at this precision", depth=0)
        pv = self.parent._pk[v]
        return v, WittElement(self.parent, tuple(c // pv for c in self.value))

    def inverse(self) -> WittElement:
        return WittElement(self.parent, self.parent._inv(self.value))

    def residue(self) -> FFElement:
        """The ghost-free first component w_0 (reduction mod p)."""
        return FFElement(self.parent.field, tuple(v % self.parent.p for v in self.value))

    def digits(self):
        if self._digits is None:
            field = self.parent.field
            self._digits = tuple(FFElement(field, d) for d in self.parent._digits(self.value))
        return self._digits


def witt_coordinates(x: WittElement):
    """Witt coordinates (x_0, x_1, ...): x = sum [x_i^(p^-i)] p^i."""
    return tuple(d.frobenius(i) for i, d in enumerate(x.digits()))


def from_witt_coordinates(ring: WittRing, coords) -> WittElement:
    return ring.from_digits([c.frobenius(-i) for i, c in enumerate(coords)])


def teichmuller(x: FFElement, ring: WittRing) -> WittElement:
    return ring.teichmuller(x)


def digits(x: WittElement):
    return x.digits()
