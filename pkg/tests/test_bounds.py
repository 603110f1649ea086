from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from multlab.bounds import BigOrLog, c_n, explicit_constants, rho_sequence, threshold
from multlab.errors import MissingParam, PrecisionExhausted
from multlab.exactalg import QQ
from multlab.funceq import load_system, solve_system
from multlab.biring import FunctionalPoint
from multlab.series import TruncatedSeries

from oracles import big_constants


def exact_log2(v: int) -> float:
    k = max(v.bit_length() - 64, 0)
    return math.log2(v >> k) + k


def test_desk_values_against_oracle():
    o = big_constants(1, 1, 1)
    assert o["c_n"] == 26244 and o["rho"][2] == 17496 and o["C_m"] == 17496**3
    pc = explicit_constants(1, 1, 1)
    assert pc.c_n == 26244
    assert pc.rho[0].exact == 0 and pc.rho[1].exact == 1 and pc.rho[2].exact == 17496
    assert pc.C_m.exact == 17496**3
    assert pc.to_json()["rho2"] == "17496"


@pytest.mark.parametrize("n,mu,nu0", [(1, 2, 1), (1, 3, 2), (1, 1, 5), (2, 1, 1)])
def test_exact_matches_oracle(n, mu, nu0):
    o = big_constants(n, mu, nu0)
    pc = explicit_constants(n, mu, nu0, budget=2**22)
    assert [r.exact for r in pc.rho] == o["rho"]
    assert pc.C_m.exact == o["C_m"]


@pytest.mark.parametrize("n,mu,nu0", [(1, 1, 1), (1, 2, 1), (1, 3, 2), (2, 1, 1), (1, Fraction(3, 2), 1)])
def test_exact_and_log2_paths_agree(n, mu, nu0):
    exact = explicit_constants(n, mu, nu0, budget=2**22)
    logs = explicit_constants(n, mu, nu0, budget=0)
    for e, l in list(zip(exact.rho[2:], logs.rho[2:])) + [(exact.C_m, logs.C_m)]:
        assert e.is_exact and not l.is_exact
        le, ll = e.log2_interval(), l.log2_interval()
        assert abs(float(le.mid) - float(ll.mid)) <= 2**-30 * abs(float(le.mid))
        assert ll.delta < 2**-40


def test_c_n_and_rho_monotone():
    assert [c_n(n) for n in range(1, 6)] == sorted({c_n(n) for n in range(1, 6)})
    rho = rho_sequence(1, 2, 1, upto=5)
    for a, b in zip(rho[1:], rho[2:]):
        assert b.max(a) is b and a.max(b) is b
    with pytest.raises(ValueError):
        c_n(0)


def test_tower_levels_are_reported():
    rho = rho_sequence(1, 2, 1, upto=4)
    assert rho[2].is_exact
    assert rho[3].level == 2 and rho[4].level == 3
    j = rho[3].to_json()
    assert j["kind"] == "iterated_log2" and j["depth"] == 2
    # log2 log2 rho_3 is about log2(E) + 2 log2(rho_2): rho_3 ~ 2^(E rho_2^2)
    assert abs(float(rho[3].x.mid) - (math.log2(17496) + 2 * exact_log2(rho[2].exact.numerator))) < 1e-6


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10**30), st.integers(1, 10**30), st.integers(0, 6))
def test_log_space_arithmetic_encloses_exact(a, b, k):
    A, B = BigOrLog.of(a, budget=0), BigOrLog.of(b, budget=0)
    for got, want in ((A + B, a + b), (A * B, a * b), (A**k, a**k), (A.max(B), max(a, b))):
        iv = got.log2_interval()
        w = exact_log2(want) if want > 0 else None
        if w is not None:
            assert iv.a - 1e-9 <= w <= iv.b + 1e-9


def test_c_iso():
    pc = explicit_constants(1, 2, 3, ord_value=1)
    assert pc.C_iso == Fraction(26244 + 1, 2)
    F = solve_system(load_system({"kind": "mahler", "p": "z^2", "A": ["1", "X1 - z"], "seed": ["0"]}), 16)
    assert explicit_constants(1, 2, 3, F=F).ord_isotrivial == 1
    flat = FunctionalPoint((TruncatedSeries(QQ, [5], 16),))
    with pytest.raises(PrecisionExhausted):
        explicit_constants(1, 2, 3, F=flat)


def test_threshold_examples():
    assert threshold("lmgp_rhs", dict(K=1, mu=1, nu0=1, nu1=0, n=1, t=1, degXp=1, degX=1)).value == 8
    assert threshold("stability_rhs", dict(K0=2, deg0_q=3, deg1_q=4)).value == 14
    r = threshold("transference", dict(C=1, t=1, mu=1, nu0=1, nu1=0, hP=0, degP=1))
    assert r.value == 6 and r.conditions["evaluated"] is False


def test_transference_conditions():
    r = threshold("transference", dict(C=100, t=1, mu=1, nu0=1, nu1=0, hP=0, degP=1, n=1, C_f=1, h_pf=3, deg_pf=2))
    assert r.value == 600
    assert r.conditions["C_lower_bound_1"] == "26244" and r.conditions["C_ge_bound_1"] is False
    assert r.conditions["C_ge_bound_2"] is True


def test_estimation_p():
    r = threshold("estimationP", {"n": 1, "t": 1, "mu": 1, "nu0": 1, "nu1": 0, "lambda": 1, "degXp": 1, "degX": 1, "ord_f": 0})
    # max(1, 2 * 17496 * 26244) * (2 * 2) * 2 + 1
    assert r.value.exact == 2 * 17496 * 26244 * 8 + 1
    assert r.conditions["max_branch"] == "second"


def test_missing_param():
    with pytest.raises(MissingParam):
        threshold("lmgp_rhs", dict(K=1, mu=1))
    with pytest.raises(ValueError):
        threshold("nonsense", {})
