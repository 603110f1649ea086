"""Acceptance suite: one test per criterion, summarized as PASS/FAIL lines.

Run with ``pytest tests/test_acceptance.py`` (or ``python tests/test_acceptance.py``);
the summary section at the end of the run lists every criterion.
"""

from __future__ import annotations

import itertools
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

from multlab.biring import dehomogenize, evaluate, parse_poly, random_affine, random_bihomogeneous
from multlab.bounds import c_n, explicit_constants
from multlab.dynamics import derivation_from_system, growth_report, homogenization_defect, load_mapspec
from multlab.errors import VanishesOnCycle
from multlab.estimates import aux_poly, max_finite_ord, monomial_count, multiplicity_scan
from multlab.exactalg import QQ
from multlab.funceq import load_system, solve_mahler, solve_system, verify_residual
from multlab.geometry import RationalPoint, SplitCycle, deg_weighted, liouville_check, projective_ord
from multlab.ideals import GeneratedIdeal, is_phi_stable
from multlab.series import Finite, TruncatedSeries, ord_series

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

criterion = pytest.mark.criterion


def system(name):
    return load_system(json.loads((CONFIGS / f"{name}.json").read_text()))


def point(name, N):
    return solve_system(system(name), N)


def bi(s, n=1):
    return parse_poly(s, kind="bi", n=n)


@criterion(1, "Cantor Mahler expansion to z^32, residual AtLeast, < 1 s")
def test_cantor_expansion():
    S = system("cantor")
    t0 = time.perf_counter()
    F = solve_mahler(S, 33)
    residual = verify_residual(S, F)
    elapsed = time.perf_counter() - t0
    powers = {1, 2, 4, 8, 16, 32}
    assert list(F.series[0].coeffs) == [Fraction(int(k in powers)) for k in range(33)]
    assert all(not r.exact and r.value >= 33 for r in residual)
    assert elapsed < 1.0


@criterion(2, "rank-profile Lambda equals finite-field enumeration, 0 mismatches, < 30 s")
def test_lambda_oracle_equivalence():
    cases = [("cantor", 2), ("cantor_gf2", 2), ("thue_morse", 3)]
    t0 = time.perf_counter()
    mismatches, cells, same_as_base = [], 0, 0
    for name, p in cases:
        F = point(name, 64)
        for a, b in itertools.product(range(3), repeat=2):
            if monomial_count(F.n, a, b) > 16:
                continue
            r = max_finite_ord(F, (a, b), 64, oracle="finite-field", prime=p)
            cells += 1
            same_as_base += r.oracle.agrees_with_base_field
            if r.oracle.enumerated != r.oracle.rank_profile_mod_p:
                mismatches.append((name, a, b))
            if F.field.characteristic == p and r.value != r.oracle.enumerated:
                mismatches.append((name, a, b, "base"))
    elapsed = time.perf_counter() - t0
    print(f"{cells} cells, {len(mismatches)} mismatches, {same_as_base} equal to the base-field value, {elapsed:.1f} s")
    assert cells == 27 and mismatches == []
    assert elapsed < 30


@criterion(3, "Cantor Lambda(1,1) = Finite(3), hand kernel, aux_poly ord exactly u-1")
def test_cantor_lambda_11():
    for N in (32, 64):
        F = point("cantor", N)
        r = max_finite_ord(F, (1, 1), N)
        assert r.value == Finite(3) and r.stabilized and r.kernel_dim_final == 0
        aux = aux_poly(F, (1, 1))
        assert aux.u == 4 and aux.ord == Finite(3)
        P = dehomogenize(aux.poly)
        target = parse_poly("X1 - z - z*X1")
        m = next(iter(target.terms))
        assert P == target * (P.terms[m] / target.terms[m])


@criterion(4, "aux_poly ord >= u-1 on every 4x4 cell for Cantor, Thue-Morse, exp")
def test_aux_poly_grid():
    checked = 0
    for name in ("cantor", "thue_morse", "exp"):
        F = point(name, 64)
        for a, b in itertools.product(range(4), repeat=2):
            res = aux_poly(F, (a, b))
            assert ord_series(evaluate(res.poly, F)) == res.ord
            assert res.ord.exact and res.ord.value >= res.u - 1
            checked += 1
    assert checked == 48


@criterion(5, "growth laws for the Cantor pullback, 100 samples, lambda >= 2, 0 violations")
def test_growth_laws_cantor():
    phi = load_mapspec(json.loads((CONFIGS / "cantor_map.json").read_text()))
    rep = growth_report(phi, point("cantor", 128), samples=100, maxN=4, seed=2024)
    assert rep.samples == 100 and rep.max_iterations <= 4
    assert rep.degree_checks > 0 and rep.degree_violations == []
    assert rep.lambda_certified > 0 and rep.lambda_violations == []
    assert rep.lambda_empirical >= 2


@criterion(6, "bi-homogenization commutes with the derivation, 100 random P per system")
def test_homogenization_identity():
    for name, seed in (("exp", 11), ("sincos", 12)):
        S = system(name)
        D = derivation_from_system(S)
        rng = random.Random(seed)
        for _ in range(100):
            P = random_affine(rng, S.n, rng.randint(0, 3), rng.randint(0, 3))
            assert homogenization_defect(S, P, D).is_zero()


def _liouville_corpus(rng, size):
    while size:
        pts = []
        for _ in range(rng.randint(1, 3)):
            coords = tuple(tuple(rng.randint(-4, 4) for _ in range(rng.randint(1, 4))) for _ in range(2))
            if any(any(c) for c in coords):
                pts.append(RationalPoint(QQ, coords))
        if not pts:
            continue
        Z = SplitCycle(tuple(pts), tuple(rng.randint(1, 3) for _ in pts))
        if Z.height > 6:
            continue
        if rng.random() < 0.7:
            Q = random_affine(rng, 1, rng.randint(0, 3), rng.randint(1, 3))
        else:
            Q = random_bihomogeneous(rng, 1, (rng.randint(0, 2), rng.randint(1, 3)))
        try:
            yield liouville_check(Q, Z)
        except VanishesOnCycle:
            continue
        size -= 1


@criterion(7, "Liouville inequality on 200 cycles with h(Z) <= 6, tight X1^2 case")
def test_liouville_corpus():
    results = list(_liouville_corpus(random.Random(77), 200))
    assert len(results) == 200 and all(r.holds for r in results)
    tight = liouville_check(parse_poly("X1^2"), SplitCycle((RationalPoint.parse(["1", "z"]),), (1,)))
    assert tight.holds and tight.slack == 0


@criterion(8, "constants c1, rho2, C_m and exact/log agreement within 2^-30")
def test_constants():
    assert c_n(1) == 26244
    pc = explicit_constants(1, 1, 1)
    assert pc.rho[2].exact == 17496 and pc.C_m.exact == 17496**3
    for mu, nu0 in ((1, 1), (2, 1), (3, 2)):
        exact = explicit_constants(1, mu, nu0, budget=2**22)
        logs = explicit_constants(1, mu, nu0, budget=0)
        for e, l in list(zip(exact.rho[2:], logs.rho[2:])) + [(exact.C_m, logs.C_m)]:
            le, ll = e.log2_interval(), l.log2_interval()
            assert abs(float(le.mid) - float(ll.mid)) <= 2**-30 * abs(float(le.mid))


def _series(rng, N, lead_max=5, unit=False):
    v = 0 if unit else rng.randint(0, lead_max)
    c = [0] * v + [rng.choice([-3, -2, -1, 1, 2, 3])] + [rng.randint(-3, 3) for _ in range(N - v - 1)]
    return TruncatedSeries(QQ, c, N)


@criterion(9, "valuation axioms (200 pairs), rescaling invariance (50), deg_weighted scaling (20)")
def test_valuation_axioms_and_invariance():
    rng = random.Random(99)
    N = 24
    for _ in range(200):
        x, y = _series(rng, N), _series(rng, N)
        ox, oy = ord_series(x), ord_series(y)
        s = ord_series(x + y)
        assert s.value >= min(ox.value, oy.value)
        if ox.value != oy.value:
            assert s == Finite(min(ox.value, oy.value))
        assert ord_series(x * y) == Finite(ox.value + oy.value)
        assert ord_series(-x) == ox
    for _ in range(50):
        xs = (TruncatedSeries.one(QQ, N), _series(rng, N), _series(rng, N))
        ys = (_series(rng, N, unit=True), _series(rng, N), _series(rng, N))
        base = projective_ord(xs, ys)
        u, v = _series(rng, N, unit=True), _series(rng, N, unit=True)
        assert projective_ord(tuple(s * u for s in xs), tuple(s * v for s in ys)) == base
        assert projective_ord(ys, xs) == base
    for _ in range(20):
        lam = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        d0, d1, dim = rng.randint(0, 5), rng.randint(0, 5), rng.randint(0, 4)
        a, b = Fraction(rng.randint(0, 12), rng.randint(1, 5)), Fraction(rng.randint(0, 12), rng.randint(1, 5))
        assert deg_weighted(d0, d1, dim, lam * a, lam * b) == lam**dim * deg_weighted(d0, d1, dim, a, b)


@criterion(10, "stability checker: <X1'> stable, <X0-X1> unstable with witness, <X1> stable under D")
def test_stability_checker():
    phi = load_mapspec(json.loads((CONFIGS / "cantor_map.json").read_text()))
    assert is_phi_stable(GeneratedIdeal((bi("X1'"),)), phi).stable
    res = is_phi_stable(GeneratedIdeal((bi("X0 - X1"),)), phi)
    assert not res.stable
    assert res.witness[1] == bi("X0'*(X0 - X1) + X1'*X0")
    D = load_mapspec({"kind": "derivation", "A": ["1", "0"]})
    assert is_phi_stable(GeneratedIdeal((bi("X1"),)), D).stable


@criterion(11, "Cantor 4x4 scan at N=128: finite, stabilized, monotone, lower bounds, < 2 min")
def test_cantor_scan():
    t0 = time.perf_counter()
    scan = multiplicity_scan(point("cantor", 128), 3, 3, 128)
    elapsed = time.perf_counter() - t0
    assert len(scan.cells) == 16
    assert scan.all_finite() and scan.all_stabilized()
    assert scan.monotone() and scan.lower_bounds_hold()
    K = scan.empirical_K()
    assert K is not None and K >= 0
    print(f"empirical K = {K}, {elapsed:.1f} s")
    assert elapsed < 120


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
