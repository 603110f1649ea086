from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multlab.errors import FieldMismatch, InnerNotPositiveValuation
from multlab.exactalg import GF, QQ
from multlab.series import (
    AtLeast,
    Finite,
    TruncatedSeries,
    compose_series,
    mul_series,
    ord_max,
    ord_min,
    ord_series,
)

from oracles import cantor_coeffs


def S(coeffs, n=None, field=QQ):
    return TruncatedSeries(field, coeffs, n)


def test_product_examples():
    assert mul_series(S([1, 1], 4), S([1, -1], 4)) == S([1, 0, -1, 0])
    p = mul_series(S([0, 0, 1], 4), S([0, 0, 0, 1], 4))
    assert p == S([], 4) and ord_series(p) == AtLeast(4)


def test_cantor_square_over_gf2_is_frobenius():
    f = S(cantor_coeffs(9), 9, GF(2))
    sq = mul_series(f, f)
    # direct convolution oracle
    c = cantor_coeffs(9)
    conv = [sum(c[i] * c[k - i] for i in range(k + 1)) % 2 for k in range(9)]
    assert [x.v for x in sq.coeffs] == conv == [0, 0, 1, 0, 1, 0, 0, 0, 1]


def test_composition_examples():
    z2 = S([0, 0, 1], 16)
    assert compose_series(S([1, 1, 1], 16), z2).coeffs[:5] == (1, 0, 1, 0, 1)
    g = S([0, 3, 1, 2], 8)
    assert compose_series(S([0, 1], 8), g) == g
    f = S(cantor_coeffs(9), 9)
    fz2 = compose_series(f, S([0, 0, 1], 9))
    assert fz2 == S([0, 0, 1, 0, 1, 0, 0, 0, 1])
    assert fz2 == f - S([0, 1], 9)


def test_composition_precision_rule():
    a = S([1, 2, 3], 3)
    g = S([0, 0, 1, 1], 10)
    # min(N_a * ord g, N_g) = min(6, 10)
    out = compose_series(a, g)
    assert out.precision == 6
    # oracle: (1 + 2g + 3g^2) by hand mod z^6 with g = z^2 + z^3
    assert out.coeffs == (1, 0, 2, 2, 3, 6)


def test_composition_rejects_unit_inner():
    with pytest.raises(InnerNotPositiveValuation):
        compose_series(S([1, 1], 4), S([1, 1], 4))


def test_ord_examples():
    assert ord_series(S([0, 0, 1, 1])) == Finite(2)
    assert ord_series(S([], 16)) == AtLeast(16)
    f = S(cantor_coeffs(16), 16)
    assert ord_series(f - S([0, 1, 1], 16)) == Finite(4)


def test_mixed_fields_rejected():
    with pytest.raises(FieldMismatch):
        S([1], 2) + S([1], 2, GF(3))


def test_json_round_trip():
    s = S([Fraction(3, 2), 0, -1], 5)
    assert TruncatedSeries.from_json(s.to_json()) == s
    t = S([4, 1], 3, GF(7))
    assert t.to_json()["coeffs"][0] == "4 mod 7"
    assert TruncatedSeries.from_json(t.to_json()) == t


def test_ord_min_max_rules():
    assert ord_min(Finite(3), AtLeast(5)) == Finite(3)
    assert ord_min(Finite(7), AtLeast(5)) == AtLeast(5)
    assert ord_max(Finite(3), AtLeast(5)) == AtLeast(5)
    assert Finite(2) + AtLeast(3) == AtLeast(5)


def test_inverse():
    a = S([1, 1], 6)
    assert mul_series(a, a.inverse()) == S([1], 6)


coeff = st.fractions(min_value=-5, max_value=5, max_denominator=4)


def series_strategy(n):
    return st.lists(coeff, min_size=n, max_size=n).map(lambda c: S(c, n))


@settings(max_examples=200)
@given(series_strategy(12), series_strategy(12))
def test_ultrametric_axioms(a, b):
    oa, ob = ord_series(a), ord_series(b)
    prod = ord_series(mul_series(a, b))
    if oa.exact and ob.exact and oa.value + ob.value < 12:
        assert prod == Finite(oa.value + ob.value)
    s = ord_series(a + b)
    m = ord_min(oa, ob)
    assert s.value >= m.value
    if oa.exact and ob.exact and oa.value != ob.value:
        assert s == Finite(min(oa.value, ob.value))


@given(series_strategy(10))
def test_compose_with_identity_inner(a):
    assert compose_series(a, S([0, 1], 10)) == a


@settings(max_examples=50)
@given(series_strategy(8), series_strategy(8), series_strategy(8))
def test_product_associative(a, b, c):
    assert mul_series(mul_series(a, b), c) == mul_series(a, mul_series(b, c))


def test_general_composition_matches_power_sum():
    rng = random.Random(5)
    for _ in range(20):
        a = S([rng.randint(-3, 3) for _ in range(6)], 6)
        g = S([0] + [rng.randint(-3, 3) for _ in range(9)], 10)
        out = compose_series(a, g)
        ref = S([], out.precision)
        for i, c in enumerate(a.coeffs):
            ref = ref + (g.truncate(out.precision) ** i) * c
        assert out == ref
