"""Maps phi on the bi-graded ring: derivations and Mahler pullbacks.

A derivation is stored through the images of the variables::

    D(X0') = D(X0) = 0,   D(X1') = H_0,   D(X_i) = H_i,

with ``H_0`` of bidegree ``(S+1, Q)`` and ``H_i`` of bidegree ``(S, Q+1)`` so
that ``D`` raises every bidegree by exactly ``(S, Q)``. For a differential
system ``A_0 f_i' = A_i`` the choice

    S = max(deg_z A_0 - 1, deg_z A_i),   Q = max(deg_X A_0, deg_X A_i - 1),
    H_0 = X0'^(S+1) X0^Q A_0(X1'/X0', X/X0),   H_i = X0'^S X0^(Q+1) A_i(...)

makes ``D`` the bi-homogeneous counterpart of ``A_0 d/dz + sum A_i d/dX_i``:
for ``P`` of degrees ``(a, b)`` the bi-homogenization of ``D(P)`` at
``(a+S, b+Q)`` equals ``D`` applied to the bi-homogenization of ``P``.

A Mahler pullback substitutes ``(A_0', A_1', A_0, ..., A_n)`` for
``(X0', X1', X0, ..., X_n)``, with the ``A'`` of degree ``r`` in ``X'`` and
the ``A_j`` of bidegree ``(s, q)``. It sends bidegree ``(a, b)`` to
``(r a + s b, q b)``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from .biring import (
    AffinePolynomial,
    BiPolynomial,
    FunctionalPoint,
    bihomogenize,
    evaluate,
    evaluation_rows,
    parse_poly,
    poly_from_vector,
    random_bihomogeneous,
)
from .errors import ArityMismatch, NotBiHomogeneous, ParseError, PrecisionExhausted
from .exactalg import QQ, ExactMatrix, Field, field_from_char, kernel_basis
from .funceq import DifferentialSystem, MahlerSystem, _zcoeffs
from .series import OrdValue, ord_series


@dataclass(frozen=True)
class GrowthConstants:
    """Declared degree and order growth of a map.

    Attributes:
        mu: bound ``deg_X phi(Q) <= mu deg_X Q``.
        nu0, nu1: bound ``deg_X' phi(Q) <= nu0 deg_X' Q + nu1 deg_X Q``.
        lam: order growth ``ord phi(Q)(f) >= lam ord Q(f)``.
        K_lambda: the order threshold above which ``lam`` is claimed.
    """

    mu: Fraction
    nu0: Fraction
    nu1: Fraction = Fraction(0)
    lam: Fraction = Fraction(1)
    K_lambda: int = 0

    def __post_init__(self):
        for name in ("mu", "nu0", "nu1", "lam"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.mu <= 0 or self.nu0 <= 0:
            raise ValueError("mu and nu0 must be positive")
        if self.nu1 < 0:
            raise ValueError("nu1 must be nonnegative")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.K_lambda < 0:
            raise ValueError("K_lambda must be nonnegative")

    @classmethod
    def from_json(cls, data: dict) -> GrowthConstants:
        return cls(
            Fraction(str(data["mu"])),
            Fraction(str(data["nu0"])),
            Fraction(str(data.get("nu1", 0))),
            Fraction(str(data.get("lambda", 1))),
            int(data.get("Klambda", 0)),
        )

    def to_json(self) -> dict:
        return {
            "mu": str(self.mu),
            "nu0": str(self.nu0),
            "nu1": str(self.nu1),
            "lambda": str(self.lam),
            "Klambda": self.K_lambda,
        }


@dataclass(frozen=True)
class Derivation:
    """Bi-homogeneous derivation given by ``D(X1') = H[0]`` and ``D(X_i) = H[i]``."""

    H: tuple[BiPolynomial, ...]
    shift: tuple[int, int]

    def __post_init__(self):
        S, Q = self.shift
        n = len(self.H) - 1
        if n < 1:
            raise ArityMismatch("a derivation needs H_0 and at least one H_i")
        if any(h.n != n for h in self.H):
            raise ArityMismatch("images of the variables use a different n")
        want = [(S + 1, Q)] + [(S, Q + 1)] * n
        for i, (h, bd) in enumerate(zip(self.H, want)):
            if h.terms and (not h.is_bihomogeneous() or h.bidegree != bd):
                raise NotBiHomogeneous(f"image {i} must be bi-homogeneous of bidegree {bd}, got {h}")

    @property
    def n(self) -> int:
        return len(self.H) - 1

    @property
    def field(self) -> Field:
        return self.H[0].field

    def __call__(self, Q: BiPolynomial) -> BiPolynomial:
        out = self.H[0] * Q.diff(1)
        for i in range(1, self.n + 1):
            out = out + self.H[i] * Q.diff(2 + i)
        return out


@dataclass(frozen=True)
class MahlerPullback:
    """Substitution ``Q -> Q(A'_0, A'_1, A_0, ..., A_n)``."""

    Aprime: tuple[BiPolynomial, BiPolynomial]
    A: tuple[BiPolynomial, ...]

    def __post_init__(self):
        n = len(self.A) - 1
        if n < 1 or len(self.Aprime) != 2:
            raise ArityMismatch("a pullback needs two X' images and n+1 >= 2 X images")
        if any(P.n != n for P in self.Aprime + self.A):
            raise ArityMismatch("images use a different n")
        r = {P.require_bihomogeneous() for P in self.Aprime if P.terms}
        if len(r) != 1 or next(iter(r))[1] != 0:
            raise NotBiHomogeneous("A'_0, A'_1 must be homogeneous of one degree in X' and free of X")
        sq = {P.require_bihomogeneous() for P in self.A if P.terms}
        if len(sq) != 1:
            raise NotBiHomogeneous("A_0..A_n must share one bidegree")

    @property
    def n(self) -> int:
        return len(self.A) - 1

    @property
    def field(self) -> Field:
        return self.A[0].field

    @property
    def r(self) -> int:
        return next(P for P in self.Aprime if P.terms).bidegree[0]

    @property
    def sq(self) -> tuple[int, int]:
        return next(P for P in self.A if P.terms).bidegree

    def __call__(self, Q: BiPolynomial) -> BiPolynomial:
        return Q.substitute(list(self.Aprime) + list(self.A))


@dataclass(frozen=True)
class MapSpec:
    """A map phi together with (optional) declared growth constants."""

    kind: Derivation | MahlerPullback
    growth: GrowthConstants | None = None

    @property
    def n(self) -> int:
        return self.kind.n

    @property
    def is_derivation(self) -> bool:
        return isinstance(self.kind, Derivation)

    def structural_constants(self) -> GrowthConstants:
        """``(mu, nu0, nu1)`` read off the bidegrees of the defining polynomials.

        For a pullback these are ``(q, r, s)``. For a derivation with shift
        ``(S, Q)`` they are ``(1 + Q, 1, S)``, valid on polynomials with
        ``deg_X >= 1`` only.
        """
        lam = self.growth.lam if self.growth else Fraction(1)
        K = self.growth.K_lambda if self.growth else 0
        if isinstance(self.kind, MahlerPullback):
            s, q = self.kind.sq
            return GrowthConstants(Fraction(max(q, 0)) or Fraction(1), Fraction(self.kind.r), Fraction(s), lam, K)
        S, Q = self.kind.shift
        return GrowthConstants(Fraction(1 + Q), Fraction(1), Fraction(max(S, 0)), lam, K)

    def constants(self) -> GrowthConstants:
        return self.growth if self.growth is not None else self.structural_constants()


def apply_map(phi: MapSpec, Q: BiPolynomial, iterations: int = 1) -> BiPolynomial:
    """``phi^iterations(Q)`` computed exactly."""
    if Q.n != phi.n:
        raise ArityMismatch(f"polynomial with n={Q.n}, map with n={phi.n}")
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    Q.require_bihomogeneous()
    for _ in range(iterations):
        Q = phi.kind(Q)
    return Q


# ---------------------------------------------------------------------------
# maps attached to functional systems


def derivation_from_system(S: DifferentialSystem) -> Derivation:
    """The bi-homogeneous derivation attached to ``A_0 f' = A``."""
    return _derivation_from_polys(S.A)


def affine_derivation(S: DifferentialSystem, P: AffinePolynomial) -> AffinePolynomial:
    """``A_0 dP/dz + sum_i A_i dP/dX_i``."""
    if P.n != S.n:
        raise ArityMismatch(f"polynomial with n={P.n}, system with n={S.n}")
    out = S.A[0] * P.diff_z()
    for i in range(1, S.n + 1):
        out = out + S.A[i] * P.diff_X(i)
    return out


def homogenization_defect(S: DifferentialSystem, P: AffinePolynomial, D: Derivation | None = None) -> BiPolynomial:
    """``D(hP) - h(D P)``, with ``h`` at the bidegree ``D`` assigns; zero when the identity holds."""
    D = D or derivation_from_system(S)
    a, b = max(P.deg_z, 0), max(P.deg_X, 0)
    lhs = D(bihomogenize(P, (a, b)))
    s, q = D.shift
    rhs = bihomogenize(affine_derivation(S, P), (a + s, b + q))
    return lhs - rhs


def pullback_from_system(S: MahlerSystem) -> MahlerPullback:
    """The morphism mutually associated with ``A_0 f(p) = A``.

    With ``p = num/den`` of degree ``r``, ``A'_0`` and ``A'_1`` are the
    degree-``r`` homogenizations of ``den`` and ``num``; each ``A_j`` is
    bi-homogenized at the common bidegree ``(max deg_z, max deg_X)``.
    """
    s = max(P.deg_z for P in S.A)
    q = max(P.deg_X for P in S.A)
    s, q = max(s, 0), max(q, 0)
    A = tuple(bihomogenize(P, (s, q)) for P in S.A)
    r = S.d
    n = S.n

    def xprime(P: AffinePolynomial) -> BiPolynomial:
        return BiPolynomial(n, S.field, {(r - k, k, 0) + (0,) * n: c for k, c in enumerate(_zcoeffs(P)) if c})

    return MahlerPullback((xprime(S.p_den), xprime(S.p_num)), A)


# ---------------------------------------------------------------------------
# empirical growth


@dataclass
class GrowthReport:
    """Outcome of :func:`growth_report`.

    ``degree_violations`` lists ``(sample, N, which)`` triples for which a
    degree inequality failed; ``lambda_violations`` lists samples with
    ``ord phi(Q)(f) < lam ord Q(f)`` although ``ord Q(f) >= K_lambda``.
    """

    kind: str
    structural: GrowthConstants
    declared: GrowthConstants | None
    shift: tuple[int, int] | None
    validity: str
    samples: int
    max_iterations: int
    degree_checks: int = 0
    degree_violations: list = dc_field(default_factory=list)
    lambda_certified: int = 0
    lambda_excluded: int = 0
    lambda_empirical: Fraction | None = None
    lambda_violations: list = dc_field(default_factory=list)
    flagged_below_declared: bool = False

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "structural": self.structural.to_json(),
            "declared": self.declared.to_json() if self.declared else None,
            "shift": list(self.shift) if self.shift else None,
            "validity": self.validity,
            "samples": self.samples,
            "max_iterations": self.max_iterations,
            "degree_checks": self.degree_checks,
            "degree_violations": [list(v) for v in self.degree_violations],
            "lambda_certified": self.lambda_certified,
            "lambda_excluded_at_least": self.lambda_excluded,
            "lambda_empirical": None if self.lambda_empirical is None else str(self.lambda_empirical),
            "lambda_violations": [list(v) for v in self.lambda_violations],
            "flagged_below_declared": self.flagged_below_declared,
        }


def _degree_bounds(c: GrowthConstants, a: int, b: int, N: int) -> tuple[Fraction, Fraction]:
    geo = sum(c.nu0 ** (N - i - 1) * c.mu ** i for i in range(N))
    return c.mu ** N * b, c.nu0 ** N * a + c.nu1 * geo * b


def sample_polynomial(rng: random.Random, F: FunctionalPoint, bidegree: tuple[int, int], field: Field) -> BiPolynomial:
    """Random bi-homogeneous polynomial, often forced to vanish to some order at ``F``.

    Half of the samples are unconstrained; the others are random combinations
    of polynomials whose first ``k`` Taylor coefficients at ``F`` vanish, for
    a random ``k``, so that the order hypothesis is exercised.
    """
    a, b = bidegree
    n = F.n
    if rng.random() < 0.5:
        return random_bihomogeneous(rng, n, bidegree, field)
    rows = evaluation_rows(F, a, b, min(F.precision, (a + 1) * 16))
    u = len(rows[0])
    k = rng.randint(1, max(1, u - 1))
    basis = kernel_basis(ExactMatrix.from_rows(rows[:k], F.field))
    if not basis:
        return random_bihomogeneous(rng, n, bidegree, field)
    v = [F.field.zero] * u
    for w in basis:
        c = rng.randint(-3, 3) or 1
        v = [x + c * y for x, y in zip(v, w)]
    if all(not x for x in v):
        v = list(basis[0])
    return poly_from_vector(v, n, a, b, F.field)


def growth_report(
    phi: MapSpec,
    F: FunctionalPoint,
    samples: int = 100,
    maxN: int = 4,
    seed: int = 0,
    max_bidegree: tuple[int, int] = (2, 2),
) -> GrowthReport:
    """Check the iterated degree bounds and the order growth on seeded samples.

    Degrees of ``phi^N(Q)`` for ``N = 1..maxN`` are compared with
    ``mu^N deg_X Q`` and ``nu0^N deg_X' Q + nu1 (sum nu0^(N-i-1) mu^i) deg_X Q``
    using the declared constants (structural ones if none were declared).
    For derivations the multiplicative constants are only claimed when
    ``deg_X Q >= 1``; other samples are checked against the additive shift.

    Order growth is tested for ``N = 1`` on samples with
    ``ord Q(f) >= max(K_lambda, 1)``. A sample counts as certified when
    ``ord phi(Q)(f)`` is finite or its lower bound already meets
    ``lam ord Q(f)``; other samples are excluded and counted.

    Raises:
        PrecisionExhausted: if no sample could be certified.
    """
    if F.n != phi.n:
        raise ArityMismatch(f"map with n={phi.n}, point with n={F.n}")
    rng = random.Random(seed)
    structural = phi.structural_constants()
    consts = phi.constants()
    shift = phi.kind.shift if phi.is_derivation else None
    validity = "deg_X Q >= 1 (additive shift otherwise)" if phi.is_derivation else "all bi-homogeneous Q"
    rep = GrowthReport(
        "derivation" if phi.is_derivation else "mahler",
        structural,
        phi.growth,
        shift,
        validity,
        samples,
        maxN,
    )
    fld = phi.kind.field
    ratios = []
    for t in range(samples):
        bd = (rng.randint(0, max_bidegree[0]), rng.randint(0, max_bidegree[1]))
        Q = sample_polynomial(rng, F, bd, fld)
        if Q.field != fld:
            Q = Q.change_field(fld)
        a, b = bd
        cur = Q
        for N in range(1, maxN + 1):
            cur = phi.kind(cur)
            if not cur.terms:
                break
            if not cur.is_bihomogeneous():
                rep.degree_violations.append((t, N, "not bi-homogeneous"))
                break
            dx_p, dx = cur.bidegree
            rep.degree_checks += 1
            if phi.is_derivation and b == 0:
                bx, bxp = b + N * shift[1], a + N * shift[0]
            else:
                bx, bxp = _degree_bounds(consts, a, b, N)
            if dx > bx:
                rep.degree_violations.append((t, N, "deg_X"))
            if dx_p > bxp:
                rep.degree_violations.append((t, N, "deg_X'"))
        oq = ord_series(evaluate(Q, F))
        if not oq.exact:
            rep.lambda_excluded += 1
            continue
        if oq.value < max(consts.K_lambda, 1):
            continue
        oq_phi = ord_series(evaluate(phi.kind(Q), F))
        need = consts.lam * oq.value
        if not oq_phi.exact and oq_phi.value < need:
            rep.lambda_excluded += 1
            continue
        rep.lambda_certified += 1
        if oq_phi.exact:
            ratios.append(Fraction(oq_phi.value, oq.value))
        if oq_phi.value < need:
            rep.lambda_violations.append((t, str(Q), oq.value, oq_phi.value))
    if rep.lambda_certified == 0 and rep.lambda_excluded > 0:
        raise PrecisionExhausted("no order-growth sample could be certified at this precision")
    if ratios:
        rep.lambda_empirical = min(ratios)
        if phi.growth is not None and rep.lambda_empirical < phi.growth.lam:
            rep.flagged_below_declared = True
    return rep


# ---------------------------------------------------------------------------
# JSON


def load_mapspec(data: dict | str, field: Field | None = None) -> MapSpec:
    """Build a map from ``{"kind", "Aprime", "A", "growth"}``.

    For ``"derivation"`` the entries of ``A`` are either the affine
    polynomials ``A_0..A_n`` of a differential system (written with ``z``)
    or directly the bi-homogeneous images ``H_0..H_n``.
    """
    if isinstance(data, str):
        data = json.loads(data)
    fld = field or field_from_char(int(data.get("char", 0)))
    growth = GrowthConstants.from_json(data["growth"]) if data.get("growth") else None
    kind = data.get("kind")
    A = data.get("A")
    if not A:
        raise ParseError("map descriptor lacks 'A'")
    n = int(data.get("n", len(A) - 1))
    if kind == "derivation":
        try:
            polys = [parse_poly(str(s), fld, "bi", n) for s in A]
            D = Derivation(tuple(polys), _derivation_shift(polys))
        except (ParseError, NotBiHomogeneous):
            D = _derivation_from_polys(tuple(parse_poly(str(s), fld, "affine", n) for s in A))
        return MapSpec(D, growth)
    if kind == "mahler":
        Ap = data.get("Aprime")
        if not Ap or len(Ap) != 2:
            raise ParseError("Mahler map descriptor needs two 'Aprime' entries")
        return MapSpec(
            MahlerPullback(
                tuple(parse_poly(str(s), fld, "bi", n) for s in Ap),
                tuple(parse_poly(str(s), fld, "bi", n) for s in A),
            ),
            growth,
        )
    raise ParseError(f"unknown map kind {kind!r}")


def _derivation_shift(H: Sequence[BiPolynomial]) -> tuple[int, int]:
    h0 = H[0]
    if h0.terms:
        a, b = h0.require_bihomogeneous()
        return (a - 1, b)
    for h in H[1:]:
        if h.terms:
            a, b = h.require_bihomogeneous()
            return (a, b - 1)
    return (0, 0)


def _derivation_from_polys(A: Sequence[AffinePolynomial]) -> Derivation:
    A0, rest = A[0], A[1:]
    s = max([A0.deg_z - 1] + [P.deg_z for P in rest] + [0])
    q = max([A0.deg_X] + [P.deg_X - 1 for P in rest] + [0])
    H = [bihomogenize(A0, (s + 1, q))] + [bihomogenize(P, (s, q + 1)) for P in rest]
    return Derivation(tuple(H), (s, q))


def mapspec_to_json(phi: MapSpec) -> dict:
    out: dict = {}
    if isinstance(phi.kind, Derivation):
        out = {"kind": "derivation", "A": [str(h) for h in phi.kind.H], "shift": list(phi.kind.shift)}
    else:
        out = {"kind": "mahler", "Aprime": [str(h) for h in phi.kind.Aprime], "A": [str(h) for h in phi.kind.A]}
    if phi.growth:
        out["growth"] = phi.growth.to_json()
    return out


def mapspec_from_system(S: MahlerSystem | DifferentialSystem) -> MapSpec:
    """Map attached to a system, with its structural growth constants declared.

    For a Mahler system ``lam = ord p``; the order identity behind it needs
    ``A_0(0, f(0)) != 0`` and a denominator of ``p`` that is a unit at 0, both
    enforced by :class:`MahlerSystem`. For a differential system the order of
    ``D(Q)(f) = A_0(z, f) (Q(f))'`` is ``ord Q(f) - 1`` in characteristic 0,
    so ``lam = 1/2`` is declared above ``K_lambda = 2``.
    """
    if isinstance(S, MahlerSystem):
        T = pullback_from_system(S)
        base = MapSpec(T).structural_constants()
        return MapSpec(T, GrowthConstants(base.mu, base.nu0, base.nu1, Fraction(S.delta), 0))
    D = derivation_from_system(S)
    base = MapSpec(D).structural_constants()
    return MapSpec(D, GrowthConstants(base.mu, base.nu0, base.nu1, Fraction(1, 2), 2))
