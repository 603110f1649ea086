from __future__ import annotations

import random
from fractions import Fraction

import pytest

from multlab.biring import BiPolynomial, FunctionalPoint, dehomogenize, evaluate, parse_poly, random_affine, random_bihomogeneous
from multlab.dynamics import (
    Derivation,
    GrowthConstants,
    MapSpec,
    MahlerPullback,
    affine_derivation,
    apply_map,
    derivation_from_system,
    growth_report,
    homogenization_defect,
    load_mapspec,
    mapspec_from_system,
    mapspec_to_json,
    pullback_from_system,
)
from multlab.errors import ArityMismatch, NotBiHomogeneous
from multlab.exactalg import QQ
from multlab.funceq import load_system, solve_differential, solve_mahler
from multlab.series import TruncatedSeries, ord_series

CANTOR = {"kind": "mahler", "n": 1, "p": "z^2", "A": ["1", "X1 - z"], "seed": ["0"]}
EXP = {"kind": "differential", "n": 1, "A": ["1", "X1"], "seed": ["1"]}
SINCOS = {"kind": "differential", "n": 2, "A": ["1", "X2", "-X1"], "seed": ["0", "1"]}


def bi(s, n=1):
    return parse_poly(s, kind="bi", n=n)


def cantor_map():
    return load_mapspec(
        {
            "kind": "mahler",
            "Aprime": ["X0'^2", "X1'^2"],
            "A": ["X0*X0'", "X1*X0' - X1'*X0"],
            "growth": {"mu": 1, "nu0": 2, "nu1": 1, "lambda": 2, "Klambda": 0},
        }
    )


def test_exp_derivation_images():
    D = derivation_from_system(load_system(EXP))
    phi = MapSpec(D)
    assert apply_map(phi, bi("X1")) == bi("X1")
    assert apply_map(phi, bi("X1'")) == bi("X0'")
    # dehomogenized: D(X1') = 1, the derivative of z
    assert dehomogenize(apply_map(phi, bi("X1'"))) == parse_poly("1")
    assert phi.structural_constants().mu == 1 and phi.structural_constants().nu1 == 0


def test_cantor_pullback_images():
    phi = cantor_map()
    assert apply_map(phi, bi("X1")) == bi("X1*X0' - X1'*X0")
    assert apply_map(phi, bi("X0")) == bi("X0*X0'")
    assert apply_map(phi, bi("X0 - X1")) == bi("X0'*(X0 - X1) + X1'*X0")


def test_pullback_from_system_matches_hand_map():
    T = pullback_from_system(load_system(CANTOR))
    assert T == cantor_map().kind
    c = MapSpec(T).structural_constants()
    assert (c.mu, c.nu0, c.nu1) == (1, 2, 1)


def test_identity_like_pullback():
    phi = load_mapspec({"kind": "mahler", "Aprime": ["X0'", "X1'"], "A": ["X0", "X1"]})
    rng = random.Random(4)
    for _ in range(10):
        Q = random_bihomogeneous(rng, 1, (2, 2))
        assert apply_map(phi, Q, 3) == Q
    c = phi.structural_constants()
    assert (c.mu, c.nu0, c.nu1) == (1, 1, 0)


def test_pullback_bidegree_law():
    phi = cantor_map()
    rng = random.Random(5)
    for _ in range(20):
        a, b = rng.randint(0, 3), rng.randint(0, 3)
        Q = random_bihomogeneous(rng, 1, (a, b))
        out = apply_map(phi, Q)
        if out.terms:
            assert out.is_bihomogeneous() and out.bidegree == (2 * a + b, b)


@pytest.mark.parametrize("desc", [EXP, SINCOS, {"kind": "differential", "n": 1, "A": ["1 - z^2", "z*X1^2 + 1"], "seed": ["0"]}])
def test_bihomogenization_identity_100_random(desc):
    S = load_system(desc)
    D = derivation_from_system(S)
    rng = random.Random(600)
    for _ in range(100):
        P = random_affine(rng, S.n, rng.randint(0, 3), rng.randint(0, 3))
        assert homogenization_defect(S, P, D).is_zero()
        assert dehomogenize(D(bihomogenize_natural(P))) == affine_derivation(S, P)


def bihomogenize_natural(P):
    from multlab.biring import bihomogenize

    return bihomogenize(P)


def test_derivation_output_is_bihomogeneous():
    D = derivation_from_system(load_system(SINCOS))
    rng = random.Random(1)
    for _ in range(20):
        Q = random_bihomogeneous(rng, 2, (rng.randint(0, 2), rng.randint(0, 2)))
        out = D(Q)
        assert out.is_zero() or out.is_bihomogeneous()


def test_growth_report_cantor():
    S = load_system(CANTOR)
    F = solve_mahler(S, 96)
    rep = growth_report(cantor_map(), F, samples=100, maxN=4, seed=2024)
    assert rep.degree_violations == []
    assert rep.lambda_violations == []
    assert rep.lambda_certified > 0
    assert rep.lambda_empirical >= 2
    assert not rep.flagged_below_declared


def test_order_identity_for_mutually_associated_pullback():
    # ord phi(Q)(f) = delta * ord Q(f) whenever ord Q(f) is finite and small
    S = load_system({"kind": "mahler", "n": 1, "p": "z^3", "A": ["1 + z", "X1^2 + X1 + z"], "seed": ["0"]})
    F = solve_mahler(S, 120)
    phi = mapspec_from_system(S)
    assert phi.growth.lam == 3
    rng = random.Random(3)
    from multlab.dynamics import sample_polynomial

    seen = 0
    for _ in range(40):
        Q = sample_polynomial(rng, F, (rng.randint(0, 2), rng.randint(0, 2)), QQ)
        o = ord_series(evaluate(Q, F))
        if o.exact and 3 * o.value < 120:
            assert ord_series(evaluate(phi.kind(Q), F)).value == 3 * o.value
            seen += 1
    assert seen > 10


def test_growth_report_derivation():
    S = load_system(EXP)
    F = solve_differential(S, 48)
    rep = growth_report(mapspec_from_system(S), F, samples=40, maxN=3, seed=7)
    assert rep.degree_violations == []
    assert rep.kind == "derivation" and rep.shift == (0, 0)


def test_errors():
    phi = cantor_map()
    with pytest.raises(ArityMismatch):
        apply_map(phi, bi("X2", n=2))
    with pytest.raises(NotBiHomogeneous):
        apply_map(phi, bi("X1 + X0'"))
    with pytest.raises(ValueError):
        GrowthConstants(0, 1)


def test_mapspec_json_round_trip():
    phi = cantor_map()
    again = load_mapspec(mapspec_to_json(phi))
    assert again == phi
    D = load_mapspec({"kind": "derivation", "A": ["1", "X1"]})
    assert D.kind.H == (bi("X0'"), bi("X1"))
    D2 = load_mapspec(mapspec_to_json(D))
    assert D2 == D
