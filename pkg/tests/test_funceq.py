from __future__ import annotations

import random
import time
from fractions import Fraction
from math import factorial

import pytest

from multlab.biring import FunctionalPoint, parse_poly
from multlab.errors import (
    CharacteristicDivision,
    DegenerateA0,
    SeedNotFixedPoint,
    SingularRecursion,
)
from multlab.exactalg import GF, QQ
from multlab.funceq import (
    MahlerSystem,
    load_system,
    solve_differential,
    solve_mahler,
    verify_residual,
)
from multlab.series import AtLeast, Finite, TruncatedSeries, compose_series

from oracles import cantor_coeffs, thue_morse_product_coeffs

CANTOR = {"kind": "mahler", "n": 1, "p": "z^2", "A": ["1", "X1 - z"], "seed": ["0"]}
THUE_MORSE = {"kind": "mahler", "n": 1, "p": "z^2", "A": ["1 - z", "X1"], "seed": ["1"]}
EXP = {"kind": "differential", "n": 1, "A": ["1", "X1"], "seed": ["1"]}
SINCOS = {"kind": "differential", "n": 2, "A": ["1", "X2", "-X1"], "seed": ["0", "1"]}


def test_cantor_expansion():
    F = solve_mahler(load_system(CANTOR), 17)
    assert list(F.series[0].coeffs) == cantor_coeffs(17)


def test_thue_morse_product():
    F = solve_mahler(load_system(THUE_MORSE), 64)
    assert list(F.series[0].coeffs[:8]) == [1, -1, -1, 1, -1, 1, 1, -1]
    assert list(F.series[0].coeffs) == thue_morse_product_coeffs(64)


def test_trivial_mahler_solution_is_zero():
    S = load_system({"kind": "mahler", "p": "z^2", "A": ["1", "X1"], "seed": ["0"]})
    # f(z^2) = f(z): the linearized matrix is 1 - 0 = 1, hence solvable
    F = solve_mahler(S, 16)
    assert all(c == 0 for c in F.series[0].coeffs)


def test_exponential_and_constant_rhs():
    F = solve_differential(load_system(EXP), 10)
    assert list(F.series[0].coeffs) == [Fraction(1, factorial(k)) for k in range(10)]
    G = solve_differential(load_system({"kind": "differential", "A": ["1", "1"], "seed": ["0"]}), 6)
    assert list(G.series[0].coeffs) == [0, 1, 0, 0, 0, 0]


def test_sine_cosine_pair():
    F = solve_differential(load_system(SINCOS), 6)
    assert list(F.series[0].coeffs) == [0, 1, 0, Fraction(-1, 6), 0, Fraction(1, 120)]
    assert list(F.series[1].coeffs) == [1, 0, Fraction(-1, 2), 0, Fraction(1, 24), 0]


def test_residual_examples():
    S = load_system(CANTOR)
    F = solve_mahler(S, 40)
    assert verify_residual(S, F) == [AtLeast(40)]
    z = FunctionalPoint((TruncatedSeries(QQ, [0, 1], 16),))
    assert verify_residual(S, z) == [Finite(2)]
    E = load_system(EXP)
    G = solve_differential(E, 12)
    coeffs = list(G.series[0].coeffs)
    coeffs[5] += 1
    bad = FunctionalPoint((TruncatedSeries(QQ, coeffs, 12),))
    assert verify_residual(E, bad) == [Finite(4)]
    assert verify_residual(E, G) == [AtLeast(11)]


def test_solve_then_verify_on_corpus():
    corpus = [
        CANTOR,
        THUE_MORSE,
        {**CANTOR, "char": 2},
        {**THUE_MORSE, "char": 3},
        {"kind": "mahler", "n": 1, "p": ["z^2", "1 - z"], "A": ["1", "X1 - z"], "seed": ["0"]},
        {"kind": "mahler", "n": 1, "p": "z^3", "A": ["1 + z", "X1^2 + X1 + z"], "seed": ["0"]},
        {"kind": "mahler", "n": 2, "p": "z^2", "A": ["1", "X1 + X2 - z", "X2 + z*X1"], "seed": ["0", "0"]},
        {"kind": "mahler", "n": 1, "p": "z^2", "A": ["2", "X1 + 1"], "seed": ["1"]},
    ]
    for desc in corpus:
        S = load_system(desc)
        F = solve_mahler(S, 48)
        assert all(not r.exact and r.value == 48 for r in verify_residual(S, F)), desc
    for desc in (EXP, SINCOS, {"kind": "differential", "A": ["1 - z", "X1^2"], "seed": ["1"]}):
        S = load_system(desc)
        F = solve_differential(S, 30)
        assert verify_residual(S, F) == [AtLeast(29)] * S.n


def test_solutions_agree_across_precisions():
    for desc in (CANTOR, THUE_MORSE, {"kind": "mahler", "n": 1, "p": "z^3", "A": ["1 + z", "X1^2 + X1 + z"], "seed": ["0"]}):
        S = load_system(desc)
        a = solve_mahler(S, 20).series[0]
        b = solve_mahler(S, 45).series[0]
        assert b.truncate(20) == a


def test_composed_coefficient_depends_on_low_coefficients_only():
    rng = random.Random(1)
    for delta in (2, 3):
        N = 30
        base = [rng.randint(-4, 4) for _ in range(N)]
        p = TruncatedSeries(QQ, [0] * delta + [1, 2], N)
        ref = compose_series(TruncatedSeries(QQ, base, N), p)
        for m in range(N):
            pert = list(base)
            for j in range(m // delta + 1, N):
                pert[j] += rng.randint(1, 3)
            out = compose_series(TruncatedSeries(QQ, pert, N), p)
            assert out.coeffs[m] == ref.coeffs[m]


def test_errors():
    with pytest.raises(SingularRecursion):
        solve_mahler(load_system({"kind": "mahler", "p": "z^2", "A": ["1", "z"], "seed": ["0"]}), 8)
    with pytest.raises(SeedNotFixedPoint):
        load_system({"kind": "mahler", "p": "z^2", "A": ["1", "X1 - z + 1"], "seed": ["0"]})
    with pytest.raises(DegenerateA0):
        load_system({"kind": "mahler", "p": "z^2", "A": ["z", "X1"], "seed": ["0"]})
    with pytest.raises(DegenerateA0):
        load_system({"kind": "differential", "A": ["X1", "1"], "seed": ["0"]})
    with pytest.raises(ValueError):
        load_system({"kind": "mahler", "p": "z", "A": ["1", "X1"], "seed": ["0"]})
    with pytest.raises(CharacteristicDivision) as err:
        solve_differential(load_system({**EXP, "char": 3}), 10)
    assert err.value.step == 3


def test_characteristic_p_differential_below_obstruction():
    F = solve_differential(load_system({**EXP, "char": 5}), 5)
    assert [c.v for c in F.series[0].coeffs] == [1, 1, 3, 1, 4]  # 1, 1, 1/2, 1/6, 1/24 mod 5


def test_cantor_runtime():
    t = time.perf_counter()
    solve_mahler(load_system(CANTOR), 256)
    assert time.perf_counter() - t < 1.0
