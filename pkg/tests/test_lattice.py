import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from rzmoduli import combinatorics as cb
from rzmoduli.errors import BadCoordinateIndex, PrecisionExhausted, ZeroVector
from rzmoduli.isocrystal import IsocrystalShape, IsoVector, make_ring, random_condition_star, random_vector
from rzmoduli.lattice import (M0, a_invariant, c_constant, default_precision, dieudonne_closure, index_set,
                              lattice_from_cycle_point, p_closure, semimodule_of, smith_vol, span, vol)
from rzmoduli.padic import FiniteField, WittRing

S23 = IsocrystalShape.parse("2:3")


def e(shape, ring, l, j=1, i=1, coeff=None):
    return IsoVector.basis(shape, ring, j, i, l, coeff)


def ring_for(shape, p=2, degree=None):
    return make_ring(p, degree or shape.required_field_degree(), default_precision(shape))


def a_invariant_oracle(L):
    """Length of L / (FL + VL + pL) from elementary divisors of both sides."""
    images = []
    for v in L.basis:
        images.extend((v.apply_F(), v.apply_V(), v.p_multiple()))
    return smith_vol([w for w in images if not w.is_zero()]) - smith_vol(L.basis)


# -- span and M0 -------------------------------------------------------------------

def test_span_of_standard_basis_is_M0():
    R = ring_for(S23)
    L = span([e(S23, R, l) for l in range(5)])
    assert L == M0(S23, R) and vol(L) == 0
    assert L.is_dieudonne()


def test_column_operation_does_not_change_span():
    R = ring_for(S23)
    a = R.field.gen()
    rest = [e(S23, R, l) for l in range(2, 5)]
    assert span([e(S23, R, 0) + e(S23, R, 1, coeff=a), e(S23, R, 1)] + rest) == \
        span([e(S23, R, 0), e(S23, R, 1)] + rest)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32), st.sampled_from(["2:3", "1:1^2", "1:2,1:1", "0:1,1:1"]))
def test_span_is_idempotent_and_matches_smith(seed, text):
    shape = IsocrystalShape.parse(text)
    rng = random.Random(seed)
    R = make_ring(rng.choice([2, 3]), 2, 8)
    vs = [random_vector(shape, R, rng).p_multiple(rng.randrange(2)) for _ in range(shape.h + 1)]
    try:
        L = span(vs)
    except PrecisionExhausted:
        return
    assert span(L.basis) == L
    assert L.vol() == smith_vol(vs)
    assert all(L.contains(v) for v in vs)
    assert L.issubset(M0(shape, R))


def test_vol_of_p_M0():
    for text in ["2:3", "1:2,1:1", "3:4"]:
        shape = IsocrystalShape.parse(text)
        R = ring_for(shape)
        P = M0(shape, R).scaled_by_p()
        assert P.vol() == shape.h
        assert P == span([v.p_multiple() for v in M0(shape, R).basis])


def test_span_errors():
    R = ring_for(S23)
    with pytest.raises(ZeroVector):
        span([IsoVector.zero(S23, R)])
    with pytest.raises(ZeroVector):
        span([])
    with pytest.raises(PrecisionExhausted) as err:
        span([e(S23, R, 0), e(S23, R, 1)])
    assert err.value.depth is not None


# -- Dieudonné closure --------------------------------------------------------------

def test_closure_height_two():
    S = IsocrystalShape.parse("1:1")
    R = ring_for(S)
    L = dieudonne_closure(e(S, R, 0))
    assert L == M0(S, R) and L.vol() == 0


def test_closure_of_e0_matches_length_oracle():
    R = ring_for(S23)
    L = dieudonne_closure(e(S23, R, 0))
    assert L.vol() == smith_vol(L.basis) == 1
    assert L == span([e(S23, R, l) for l in (0, 2, 3, 4, 6)])
    assert L.semimodule() == cb.SemiModule.from_generators(2, 3, [0])


@pytest.mark.parametrize("text,p", [("2:3", 2), ("3:2", 3), ("1:2,1:1", 2), ("1:1^2", 2)])
def test_closure_of_condition_star_generator(text, p):
    shape = IsocrystalShape.parse(text)
    degree = 4 if text == "1:1^2" else shape.required_field_degree()
    R = ring_for(shape, p, degree)
    rng = random.Random(11)
    for _ in range(3):
        v, _ = random_condition_star(shape, R, rng)
        L = dieudonne_closure(v)
        assert L.vol() == c_constant(shape)
        assert a_invariant(L) == 1 == a_invariant_oracle(L)
        assert p_closure(L) == M0(shape, R)
        assert L.is_dieudonne() and v in L


# -- a-invariant ---------------------------------------------------------------------

@pytest.mark.parametrize("text,expected", [("1:3", 1), ("1:1", 1), ("2:3", 2), ("3:4", 3)])
def test_a_invariant_of_M0(text, expected):
    shape = IsocrystalShape.parse(text)
    L = M0(shape, ring_for(shape))
    assert a_invariant(L) == expected == a_invariant_oracle(L)


# -- P(M) ------------------------------------------------------------------------------

def test_p_closure_of_M0():
    for text in ["2:3", "1:2,1:1", "0:1,2:1"]:
        shape = IsocrystalShape.parse(text)
        R = ring_for(shape)
        assert p_closure(M0(shape, R)) == M0(shape, R)


def test_p_closure_multi_summand_over_f16():
    S = IsocrystalShape.parse("1:1^2")
    R = WittRing(FiniteField(2, 4), default_precision(S))
    v, _ = random_condition_star(S, R, random.Random(12))
    assert p_closure(dieudonne_closure(v)) == M0(S, R)


# -- semimodules and index sets ----------------------------------------------------------

def test_semimodule_of_M0_and_display_lattice():
    R = ring_for(S23)
    assert semimodule_of(M0(S23, R)) == cb.SemiModule.natural(2, 3)
    L = span([e(S23, R, l) for l in (-1, 1, 2, 3, 5)])
    assert semimodule_of(L).fringe == (-1, 1, 2, 3, 5)
    assert L.vol() == 0


def test_vol_agrees_with_semimodule_on_random_closures():
    shape = IsocrystalShape.parse("3:4")
    R = ring_for(shape, 2)
    rng = random.Random(13)
    for _ in range(20):
        v = random_vector(shape, R, rng, low=rng.randint(-2, 3))
        try:
            L = dieudonne_closure(v)
        except PrecisionExhausted:
            continue
        assert L.vol() == L.semimodule().vol()


def test_index_sets():
    I = index_set(S23)
    assert I.for_copy(1, 1) == [1] and I.c == 1
    assert index_set(IsocrystalShape.parse("1:5")).c == 0
    mixed = index_set(IsocrystalShape.parse("1:2,1:1"))
    assert len(mixed.elements) == mixed.c == c_constant(IsocrystalShape.parse("1:2,1:1")) == 1


# -- field-valued points of the paving --------------------------------------------------

def test_zero_coordinates_give_the_span_of_the_cycle():
    R = ring_for(S23, 2, 3)
    for A in cb.enumerate_semimodules(2, 3):
        L = lattice_from_cycle_point(A, {}, R)
        assert L == span([e(S23, R, b) for b in A.fringe])


def test_cycle_point_matches_display_lattice():
    R = ring_for(S23, 2, 3)
    A = cb.SemiModule.from_generators(2, 3, [-1])
    (key,) = cb.cycle_from_semimodule(A).v_set()
    for a in R.field.elements():
        L = lattice_from_cycle_point(A, {key: a}, R)
        display = span([e(S23, R, -1) + e(S23, R, 0, coeff=a.frobenius()),
                        e(S23, R, 1), e(S23, R, 2), e(S23, R, 3), e(S23, R, 5)])
        assert L == display
        assert L.semimodule() == A and L.vol() == 0


def test_cycle_points_are_injective_over_f8():
    R = ring_for(S23, 2, 3)
    A = cb.SemiModule.from_generators(2, 3, [-1])
    (key,) = cb.cycle_from_semimodule(A).v_set()
    lattices = {lattice_from_cycle_point(A, {key: a}, R) for a in R.field.elements()}
    assert len(lattices) == 8


def test_bad_coordinate_index():
    R = ring_for(S23, 2, 3)
    with pytest.raises(BadCoordinateIndex):
        lattice_from_cycle_point(cb.SemiModule.natural(2, 3), {(0, 1): R.field.one()}, R)


def test_to_json_is_deterministic():
    R = ring_for(S23)
    L1 = dieudonne_closure(e(S23, R, 0))
    L2 = dieudonne_closure([e(S23, R, 0), e(S23, R, 2)])
    assert L1 == L2 and hash(L1) == hash(L2)
    dump = json.dumps(L1.to_json(), sort_keys=True)
    assert dump == json.dumps(dieudonne_closure(e(S23, R, 0)).to_json(), sort_keys=True)
    assert json.loads(dump)["vol"] == 1
