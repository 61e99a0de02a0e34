import random

import pytest
from hypothesis import given, settings, strategies as st

from rzmoduli.errors import MixedParents, NonCoprime, NotNormalized, ParseError, UnsupportedResidueField
from rzmoduli.isocrystal import (IsocrystalShape, IsoVector, apply_F, apply_pi, apply_sigma_j, apply_V,
                                 apply_Vinv, condition_star, first_index, make_ring, random_condition_star,
                                 random_vector)
from rzmoduli.padic import FiniteField, WittRing

S23 = IsocrystalShape.parse("2:3")
S11 = IsocrystalShape.parse("1:1")
MIXED = IsocrystalShape.parse("1:2,1:1^2,0:1")


def e(shape, ring, l, j=1, i=1, coeff=None):
    return IsoVector.basis(shape, ring, j, i, l, coeff)


# -- shapes --------------------------------------------------------------------

def test_shape_parsing_and_ordering():
    s = IsocrystalShape.parse("1:1, 1:2 ,0:1,1:1")
    assert s.summands == ((0, 1, 1), (1, 2, 1), (1, 1, 2))
    assert s.h == 1 + 3 + 4
    assert str(s) == "0:1,1:2,1:1^2"
    assert [c[:2] for c in s.copies()] == [(1, 1), (2, 1), (3, 1), (3, 2)]
    assert not s.is_bi_infinitesimal() and not s.is_simple()
    assert s.required_field_degree() == 6


def test_shape_errors():
    with pytest.raises(NonCoprime):
        IsocrystalShape.parse("2:4")
    with pytest.raises(NonCoprime):
        IsocrystalShape.parse("0:2")
    with pytest.raises(ParseError):
        IsocrystalShape.parse("2:3,x")


@pytest.mark.parametrize("m,n", [(1, 1), (2, 3), (3, 2), (3, 4), (5, 7), (0, 1), (1, 0)])
def test_bezout_pair(m, n):
    a, b = IsocrystalShape([(m, n)]).bezout(1)
    assert a * (m + n) + b * m == 1 and 0 <= b < max(m + n, 1)


# -- operators -------------------------------------------------------------------

def test_F_on_height_two():
    R = make_ring(2, 2, 6)
    assert apply_F(e(S11, R, 0)) == e(S11, R, 1)
    assert apply_F(e(S11, R, 1)) == e(S11, R, 0).p_multiple()
    assert apply_V(e(S11, R, 0)) == e(S11, R, 1)


def test_F_is_semilinear_shift():
    R = make_ring(2, 5, 6)
    a = R.field.gen()
    v = e(S23, R, 0) + e(S23, R, 1, coeff=a)
    assert apply_F(v) == e(S23, R, 2) + e(S23, R, 3, coeff=a ** 2)
    assert apply_V(v) == e(S23, R, 3) + e(S23, R, 4, coeff=a.frobenius(-1))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32), st.sampled_from(["2:3", "1:1^2", "1:2,1:1", "0:1,3:4", "1:0,2:1"]))
def test_FV_equals_p(seed, text):
    shape = IsocrystalShape.parse(text)
    rng = random.Random(seed)
    R = make_ring(rng.choice([2, 3]), 2 * shape.required_field_degree(), 6)
    v = random_vector(shape, R, rng, low=rng.randint(-3, 3))
    pv = v.p_multiple()
    assert apply_F(apply_V(v)) == pv
    assert apply_V(apply_F(v)) == pv
    assert apply_Vinv(apply_V(v)) == v


def test_pi_and_sigma_j():
    R = make_ring(2, 6, 6)
    for (j, i, m, n) in MIXED.copies():
        v = e(MIXED, R, 0, j, i)
        w = v
        for _ in range(m + n):
            w = apply_pi(w, j)
        assert w == v.p_multiple()
        assert apply_sigma_j(v, j) == v
        other = next(jj for (jj, _, _, _) in MIXED.copies() if jj != j)
        assert apply_pi(v, other) == v


def test_sigma_j_acts_on_scalars_by_frobenius_power():
    R = make_ring(2, 6, 6)
    x = R.field.gen()
    v = e(S23, R, 2, coeff=x)
    assert apply_sigma_j(v, 1) == e(S23, R, 2, coeff=x.frobenius(5))


def test_p_multiple_shifts_digit_streams_by_h():
    R = make_ring(3, 2, 5)
    rng = random.Random(4)
    v = random_vector(S23, R, rng)
    stream = v.digit_stream(1, 1)
    shifted = v.p_multiple().digit_stream(1, 1)
    assert {l + 5: d for l, d in stream.items() if l + 5 < max(stream) + 1} == \
        {l: d for l, d in shifted.items() if l <= max(stream)}


def test_sum_of_teichmuller_multiples_carries_into_next_block():
    # [a]e_l + [b]e_l: digit a+b at l, and the second Teichmüller digit of [a]+[b] at l+h
    R = make_ring(3, 2, 4)
    F = R.field
    rng = random.Random(5)
    for _ in range(20):
        a, b = F.random(rng), F.random(rng)
        v = e(S23, R, 1, coeff=a) + e(S23, R, 1, coeff=b)
        carry_coord = -(a * a * b + a * b * b)  # (a^3 + b^3 - (a+b)^3)/3 mod 3
        assert v.digit(1, 1, 1) == a + b
        assert v.digit(1, 1, 6) == carry_coord.frobenius(-1)


def test_first_index():
    R = make_ring(2, 5, 6)
    x = R.field.gen()
    assert first_index(e(S23, R, 3) + e(S23, R, 7, coeff=x)) == (1, 1, 3)
    assert first_index(e(S23, R, 0).p_multiple()) == (1, 1, 5)
    assert first_index(IsoVector.zero(S23, R)) is None


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_digit_stream_round_trip(seed):
    rng = random.Random(seed)
    R = make_ring(rng.choice([2, 3]), 2, 5)
    shape = rng.choice([S23, MIXED]) if R.a % 6 == 0 else S23
    terms = [((j, i, rng.randint(-4, 6)), R.field.random(rng, nonzero=True))
             for (j, i, _, _) in shape.copies() for _ in range(2)]
    v = IsoVector.from_terms(shape, R, terms)
    streams = {(j, i): v.digit_stream(j, i) for (j, i, _, _) in shape.copies()}
    assert IsoVector.from_digit_streams(shape, R, streams) == v


def test_parse_vectors():
    R = make_ring(2, 5, 6)
    x = R.field.gen()
    assert IsoVector.parse(S23, R, "e_0 + [x]e_{-1}") == e(S23, R, 0) + e(S23, R, -1, coeff=x)
    assert IsoVector.parse(S23, R, "[x^2]e(1,1,4)") == e(S23, R, 4, coeff=x * x)
    with pytest.raises(ParseError) as err:
        IsoVector.parse(S23, R, "e_0 + [")
    assert err.value.position == 5
    with pytest.raises(ParseError):
        IsoVector.parse(MIXED, make_ring(2, 6, 4), "e_0")


def test_mixed_parents():
    R, R2 = make_ring(2, 5, 6), make_ring(2, 5, 7)
    with pytest.raises(MixedParents):
        e(S23, R, 0) + e(S23, R2, 0)


# -- condition (★) ---------------------------------------------------------------

def test_condition_star_examples():
    R5 = make_ring(2, 5, 6)
    assert condition_star(e(S23, R5, 0))
    S = IsocrystalShape.parse("1:1^2")
    R4 = make_ring(2, 2, 4)
    assert not condition_star(e(S, R4, 0, 1, 1) + e(S, R4, 0, 1, 2))
    with pytest.raises(NotNormalized):
        condition_star(e(S23, R5, 1))
    with pytest.raises(UnsupportedResidueField):
        condition_star(e(S23, make_ring(2, 3, 4), 0))


def test_condition_star_over_f16_matches_exhaustive_f4_check():
    S = IsocrystalShape.parse("1:1^2")
    R = WittRing(FiniteField(2, 4), 4)
    F = R.field
    sub = [z for z in F.elements() if z.frobenius(2) == z]
    elems = list(F.elements())
    rng = random.Random(6)
    for _ in range(60):
        a, b = rng.choice(elems[1:]), rng.choice(elems[1:])
        v = e(S, R, 0, 1, 1, a) + e(S, R, 0, 1, 2, b)
        dependent = any(c * a + d * b == F.zero() for c in sub for d in sub if c or d)
        assert condition_star(v) == (not dependent)
    assert condition_star(e(S, R, 0, 1, 1) + e(S, R, 0, 1, 2, F.gen()))


def test_random_condition_star():
    R = make_ring(3, 6, 5)
    v, _ = random_condition_star(MIXED.__class__.parse("1:2,2:1,1:1^2"), R, random.Random(7))
    assert v.condition_star()
