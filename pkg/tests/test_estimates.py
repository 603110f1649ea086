from __future__ import annotations

import csv
import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multlab.biring import FunctionalPoint, dehomogenize, evaluate, parse_poly
from multlab.errors import CapExceeded, MissingParam, PrecisionExhausted
from multlab.estimates import (
    aux_poly,
    enumeration_lambda,
    max_finite_ord,
    monomial_count,
    multiplicity_scan,
)
from multlab.exactalg import GF, QQ
from multlab.funceq import load_system, solve_system
from multlab.series import AtLeast, Finite, TruncatedSeries, ord_series


def cantor(N=64, char=0):
    return solve_system(load_system({"kind": "mahler", "p": "z^2", "A": ["1", "X1 - z"], "seed": ["0"], "char": char, "t_f": 1}), N)


def exp_point(N=32):
    return solve_system(load_system({"kind": "differential", "A": ["1", "X1"], "seed": ["1"], "t_f": 1}), N)


def z_point(N=32):
    return FunctionalPoint((TruncatedSeries(QQ, [0, 1], N),), t_f=0)


def test_monomial_count():
    assert monomial_count(1, 1, 1) == 4
    assert monomial_count(2, 0, 2) == 6
    assert monomial_count(3, 2, 1) == 12


def test_aux_poly_cantor_hand_kernel():
    F = cantor(32)
    res = aux_poly(F, (1, 1))
    assert res.u == 4 and res.ord == Finite(3)
    target = parse_poly("X1 - z - z*X1", kind="affine")
    P = dehomogenize(res.poly)
    ratio = P.terms[next(iter(target.terms))] / target.terms[next(iter(target.terms))]
    assert P == target * ratio


def test_aux_poly_exp_and_preconditions():
    assert aux_poly(exp_point(32), (1, 1)).ord.value >= 3
    with pytest.raises(PrecisionExhausted):
        aux_poly(exp_point(3), (1, 1))
    res = aux_poly(exp_point(8), (0, 0))
    assert res.u == 1 and res.ord == Finite(0) and str(res.poly) == "1"


def test_aux_poly_two_monomials_kills_constant_term():
    res = aux_poly(exp_point(16), (0, 1))
    assert res.ord.value >= 1


def test_lambda_examples():
    F = cantor(32)
    r = max_finite_ord(F, (1, 1), 32)
    assert r.value == Finite(3) and r.stabilized and r.kernel_dim_final == 0
    assert max_finite_ord(F, (0, 0), 32).value == Finite(0)


def test_lambda_oracle_cantor_gf2():
    r = max_finite_ord(cantor(32), (1, 1), 32, oracle="finite-field", prime=2)
    assert r.oracle.candidates == 15
    assert r.oracle.enumerated == Finite(3) and r.oracle.agrees_with_base_field


def test_lambda_algebraic_point_excludes_ideal():
    F = z_point(32)
    r = max_finite_ord(F, (1, 1), 32, oracle="finite-field", prime=2)
    # X1 - z spans the kernel; the complement {1, z, zX1} has orders 0, 1, 2
    assert r.kernel_dim_final == 1
    assert r.value == Finite(2)


def test_lambda_not_stabilized():
    with pytest.raises(PrecisionExhausted):
        max_finite_ord(cantor(8), (1, 1), 8)
    r = max_finite_ord(cantor(8), (1, 1), 8, strict=False)
    assert not r.stabilized and r.value == AtLeast(3)


def test_enumeration_cap():
    with pytest.raises(CapExceeded):
        enumeration_lambda(np.zeros((4, 21), dtype=np.int64), 2)


def test_aux_poly_witnesses_lambda():
    for F in (cantor(48), exp_point(48)):
        for a, b in itertools.product(range(3), range(3)):
            res = aux_poly(F, (a, b))
            assert ord_series(evaluate(res.poly, F)) == res.ord
            assert max_finite_ord(F, (a, b), strict=False).value.value >= res.ord.value


def test_scan_cantor_small_and_csv():
    scan = multiplicity_scan(cantor(64), 2, 2, 64)
    assert scan.t == 1 and scan.all_finite() and scan.monotone() and scan.lower_bounds_hold()
    assert scan.cells[(1, 1)].value == Finite(3)
    rows = list(csv.DictReader(io.StringIO(scan.to_csv())))
    assert len(rows) == 9
    assert list(rows[0]) == ["a", "b", "lambda_kind", "lambda_value", "kernel_dim_final", "stabilized", "lower_bound_u_minus_1", "ratio"]
    assert scan.to_json()["empirical_K"] == str(scan.empirical_K())


def test_scan_needs_t():
    with pytest.raises(MissingParam):
        multiplicity_scan(FunctionalPoint((TruncatedSeries(QQ, [1, 1], 16),)), 1, 1)


def test_scan_parallel_matches_serial():
    F = cantor(48)
    a = multiplicity_scan(F, 1, 2, 48, workers=1)
    b = multiplicity_scan(F, 1, 2, 48, workers=2)
    assert a.to_csv() == b.to_csv()


def test_scan_exp_shape():
    scan = multiplicity_scan(exp_point(64), 2, 2, 64, shape="(a+1)(b+1)^t", t=1)
    assert scan.all_finite()
    assert all(c.value.value >= c.lower_bound for c in scan.cells.values())


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=12, max_size=12), st.integers(0, 1), st.integers(0, 1))
def test_rank_profile_matches_enumeration_random_gf3(coeffs, a, b):
    F = FunctionalPoint((TruncatedSeries(GF(3), coeffs, 12),))
    r = max_finite_ord(F, (a, b), 12, oracle="finite-field", window=1, strict=False)
    assert r.oracle.enumerated.value == r.value.value
