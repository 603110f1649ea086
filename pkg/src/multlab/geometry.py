"""Points and split 0-cycles over ``k(z)``: heights, degrees and distances.

A ``k(z)``-rational point of ``P^n`` is stored through coprime polynomial
coordinates; its height is then the largest coordinate degree, since the
only place with a negative contribution is the one at infinity. Distances to
the functional point ``(1 : z, 1 : f)`` are measured with the ``z``-adic
valuation:

    ord(x, y) = ord(x ^ y) - ord x - ord y,

where ``x ^ y`` collects the 2x2 minors ``x_i y_j - x_j y_i``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .biring import (
    AffinePolynomial,
    BiPolynomial,
    FunctionalPoint,
    affine_monomials,
    dehomogenize,
    evaluate,
    evaluation_rows,
    parse_poly,
    poly_from_vector,
)
from .errors import ArityMismatch, CapExceeded, FieldMismatch, PrecisionExhausted, VanishesOnCycle, ZeroVector
from .exactalg import QQ, ExactMatrix, Field, kernel_basis, rank_profile
from .ideals import default_window
from .series import Finite, OrdValue, TruncatedSeries, ord_max, ord_min, ord_series

# ---------------------------------------------------------------------------
# dense univariate polynomials in z, coefficient lists low degree first


def _trim(p: list) -> list:
    while p and not p[-1]:
        p.pop()
    return p


def _pmul(p: Sequence, q: Sequence, zero) -> list:
    if not p or not q:
        return []
    out = [zero] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if x:
            for j, y in enumerate(q):
                out[i + j] = out[i + j] + x * y
    return _trim(out)


def _padd(p: Sequence, q: Sequence, zero) -> list:
    out = [zero] * max(len(p), len(q))
    for i, x in enumerate(p):
        out[i] = x
    for i, y in enumerate(q):
        out[i] = out[i] + y
    return _trim(out)


def _pmod(p: list, q: list) -> list:
    p = list(p)
    lead = q[-1]
    while len(p) >= len(q):
        c = p[-1] / lead
        shift = len(p) - len(q)
        for i, y in enumerate(q):
            p[shift + i] = p[shift + i] - c * y
        _trim(p)
    return p


def _pgcd(p: list, q: list) -> list:
    while q:
        p, q = q, _pmod(p, q)
    return p


def _pdiv_exact(p: list, q: list, zero) -> list:
    p = list(p)
    out = [zero] * (len(p) - len(q) + 1)
    while p:
        c = p[-1] / q[-1]
        shift = len(p) - len(q)
        out[shift] = c
        for i, y in enumerate(q):
            p[shift + i] = p[shift + i] - c * y
        _trim(p)
    return out


def _zpoly(P: AffinePolynomial) -> list:
    if P.deg_X > 0:
        raise ValueError(f"{P} is not a polynomial in z alone")
    out = [P.field.zero] * (max(P.deg_z, -1) + 1)
    for e, c in P.terms.items():
        out[e[0]] = c
    return _trim(out)


# ---------------------------------------------------------------------------
# points and cycles


@dataclass(frozen=True)
class RationalPoint:
    """Point of ``P^n`` over ``k(z)`` with coprime polynomial coordinates.

    Construction divides out the gcd of the coordinates and scales so that the
    first nonzero coordinate has leading coefficient 1.
    """

    field: Field
    coords: tuple[tuple, ...]

    def __post_init__(self):
        coords = [_trim([self.field(c) for c in p]) for p in self.coords]
        if not any(coords):
            raise ZeroVector("all coordinates vanish")
        g = []
        for p in coords:
            if p:
                g = _pgcd(g, p) if g else p
        zero = self.field.zero
        coords = [_pdiv_exact(p, g, zero) if p else [] for p in coords]
        lead = next(p for p in coords if p)[-1]
        coords = [[c / lead for c in p] for p in coords]
        object.__setattr__(self, "coords", tuple(tuple(p) for p in coords))

    @classmethod
    def parse(cls, items: Sequence[str], field: Field = QQ) -> RationalPoint:
        return cls(field, tuple(_zpoly(parse_poly(str(s), field, "affine", 1)) for s in items))

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    @property
    def height(self) -> int:
        return max(len(p) - 1 for p in self.coords if p)

    def series(self, N: int) -> tuple[TruncatedSeries, ...]:
        return tuple(TruncatedSeries(self.field, p[:N], N) for p in self.coords)

    def __str__(self):
        zero = AffinePolynomial.zero(1, self.field)
        parts = []
        for p in self.coords:
            P = zero
            for k, c in enumerate(p):
                if c:
                    P = P + AffinePolynomial.monomial(1, (k, 0), c, self.field)
            parts.append(str(P))
        return "(" + " : ".join(parts) + ")"

    def to_json(self) -> list:
        return [s.strip() for s in str(self)[1:-1].split(" : ")]


@dataclass(frozen=True)
class BiPoint:
    """Point of ``P^1 x P^n``; the height is that of its Segre image."""

    first: RationalPoint
    second: RationalPoint

    def __post_init__(self):
        if self.first.n != 1:
            raise ArityMismatch("the first factor of a bi-projective point lies in P^1")
        if self.first.field != self.second.field:
            raise FieldMismatch("factors over different fields")

    @property
    def field(self) -> Field:
        return self.first.field

    @property
    def n(self) -> int:
        return self.second.n

    @property
    def height(self) -> int:
        return self.first.height + self.second.height

    def __str__(self):
        return f"({str(self.first)[1:-1]}, {str(self.second)[1:-1]})"

    def to_json(self) -> list:
        return [self.first.to_json(), self.second.to_json()]


def graph_point(second: RationalPoint) -> BiPoint:
    """Pair a point of ``P^n`` with the canonical ``(1 : z)`` in the first factor."""
    return BiPoint(RationalPoint(second.field, ((1,), (0, 1))), second)


@dataclass(frozen=True)
class SplitCycle:
    """Positive combination of ``k(z)``-rational points."""

    points: tuple
    mult: tuple[int, ...]

    def __post_init__(self):
        pts = tuple(self.points)
        mult = tuple(int(m) for m in self.mult) if self.mult else (1,) * len(pts)
        if not pts:
            raise ValueError("a cycle needs at least one point")
        if len(mult) != len(pts):
            raise ArityMismatch(f"{len(pts)} points with {len(mult)} multiplicities")
        if any(m <= 0 for m in mult):
            raise ValueError("multiplicities must be positive")
        if len({(type(p), p.n) for p in pts}) != 1:
            raise ArityMismatch("cycle points of different kinds or dimensions")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "mult", mult)

    @property
    def n(self) -> int:
        return self.points[0].n

    @property
    def field(self) -> Field:
        return self.points[0].field

    @property
    def degree(self) -> int:
        return sum(self.mult)

    @property
    def height(self) -> int:
        return sum(m * p.height for p, m in zip(self.points, self.mult))

    def to_json(self) -> dict:
        return {"points": [p.to_json() for p in self.points], "mult": list(self.mult)}


def _load_point(item, field: Field):
    if item and all(isinstance(x, list) for x in item):
        if len(item) != 2:
            raise ArityMismatch("a bi-projective point has two coordinate lists")
        return BiPoint(RationalPoint.parse(item[0], field), RationalPoint.parse(item[1], field))
    return RationalPoint.parse(item, field)


def load_cycle(data: dict | str, field: Field = QQ) -> SplitCycle:
    """``{"points": [["1", "z^2+1"], ...], "mult": [1, ...]}``.

    A bi-projective point is written as a pair of coordinate lists,
    ``[["1", "z"], ["1", "z"]]``.
    """
    if isinstance(data, str):
        data = json.loads(data)
    pts = tuple(_load_point(p, field) for p in data["points"])
    return SplitCycle(pts, tuple(data.get("mult") or ()))


def heights_and_degrees(x) -> tuple[int, int]:
    """``(deg, h)`` of a point (degree 1) or of a split cycle (with multiplicity)."""
    if isinstance(x, SplitCycle):
        return x.degree, x.height
    if isinstance(x, (RationalPoint, BiPoint)):
        return 1, x.height
    raise TypeError(f"no height for {type(x).__name__}")


# ---------------------------------------------------------------------------
# valuation distances


def vector_ord(xs: Sequence[TruncatedSeries]) -> OrdValue:
    """``min_i ord x_i``."""
    out = None
    for s in xs:
        o = ord_series(s)
        out = o if out is None else ord_min(out, o)
    return out


def projective_ord(xs: Sequence[TruncatedSeries], ys: Sequence[TruncatedSeries]) -> OrdValue:
    """``ord(x ^ y) - ord x - ord y`` over all index pairs ``i < j``.

    The value does not depend on the representatives. When every minor is
    zero to the known precision the result is an ``AtLeast`` bound.
    """
    if len(xs) != len(ys):
        raise ArityMismatch(f"points with {len(xs)} and {len(ys)} coordinates")
    wedge = None
    for i, j in itertools.combinations(range(len(xs)), 2):
        o = ord_series(xs[i] * ys[j] - xs[j] * ys[i])
        wedge = o if wedge is None else ord_min(wedge, o)
    return wedge - vector_ord(xs).require_finite() - vector_ord(ys).require_finite()


def _point_coords(F: FunctionalPoint) -> tuple[tuple, tuple]:
    N, fld = F.precision, F.field
    one = TruncatedSeries.one(fld, N)
    first = (one, TruncatedSeries.monomial(fld, 1, N))
    return first, (one,) + F.series


def _point_ord(F: FunctionalPoint, y) -> OrdValue:
    first, second = _point_coords(F)
    N = F.precision
    if isinstance(y, BiPoint):
        return ord_min(projective_ord(first, y.first.series(N)), projective_ord(second, y.second.series(N)))
    if isinstance(y, RationalPoint):
        return projective_ord(second, y.series(N))
    raise TypeError(f"not a point: {type(y).__name__}")


def ord_distance(F: FunctionalPoint, target, mode: str | None = None) -> OrdValue:
    """Valuation distance from ``(1 : z, 1 : f)`` to a point, cycle or hypersurface.

    Args:
        F: the functional point.
        target: a :class:`RationalPoint` (compared in ``P^n``), a
            :class:`BiPoint` (minimum over the two factors), a
            :class:`SplitCycle`, or a polynomial defining a hypersurface.
        mode: for cycles, ``"sum"`` (weighted by multiplicity, the default)
            or ``"max"``; for points only ``"min-pair"`` is meaningful.

    Raises:
        ArityMismatch: if the dimensions differ.
        PrecisionExhausted: if a representative's own order is not certified.
    """
    if isinstance(target, (AffinePolynomial, BiPolynomial)):
        if isinstance(target, BiPolynomial):
            target.require_bihomogeneous()
        # F(x) - deg F * ord x; the representative of x has ord 0
        return ord_series(evaluate(target, F))
    if isinstance(target, SplitCycle):
        if target.n != F.n:
            raise ArityMismatch(f"cycle in dimension {target.n}, point in dimension {F.n}")
        mode = mode or "sum"
        vals = [_point_ord(F, p) for p in target.points]
        if mode == "sum":
            out = Finite(0)
            for v, m in zip(vals, target.mult):
                out = out + v.scale(m)
            return out
        if mode == "max":
            out = vals[0]
            for v in vals[1:]:
                out = ord_max(out, v)
            return out
        raise ValueError(f"unknown cycle mode {mode!r}")
    if mode not in (None, "min-pair"):
        raise ValueError(f"mode {mode!r} applies to cycles only")
    if target.n != F.n:
        raise ArityMismatch(f"point in dimension {target.n}, functional point in dimension {F.n}")
    return _point_ord(F, target)


# ---------------------------------------------------------------------------
# Liouville inequality


@dataclass(frozen=True)
class LiouvilleResult:
    holds: bool
    slack: int
    lhs: int
    rhs: int
    orders: tuple[int, ...]

    def to_json(self) -> dict:
        return {"holds": self.holds, "slack": self.slack, "sum_of_orders": self.lhs, "bound": self.rhs, "orders": list(self.orders)}


def _homogeneous_in_X(Q) -> tuple[dict, int, int]:
    """``({(k, e0, e1..en): c}, deg_X, deg_z)`` for ``Q`` homogeneous in ``X0..Xn``."""
    if isinstance(Q, BiPolynomial):
        _, b = Q.require_bihomogeneous()
        A = dehomogenize(Q)
        terms = {}
        for e, c in Q.terms.items():
            key = (e[1],) + e[2:]
            terms[key] = terms.get(key, Q.field.zero) + c
        return {k: c for k, c in terms.items() if c}, b, max(A.deg_z, 0)
    b = max(Q.deg_X, 0)
    terms = {(e[0], b - sum(e[1:])) + e[1:]: c for e, c in Q.terms.items()}
    return terms, b, max(Q.deg_z, 0)


def _eval_at_point(terms: dict, beta: RationalPoint) -> list:
    zero = beta.field.zero
    cache: dict = {}

    def power(i, k):
        key = (i, k)
        if key not in cache:
            cache[key] = [beta.field.one] if k == 0 else _pmul(power(i, k - 1), list(beta.coords[i]), zero)
        return cache[key]

    acc: list = []
    for e, c in terms.items():
        term = [zero] * e[0] + [c]
        for i, k in enumerate(e[1:]):
            term = _pmul(term, power(i, k), zero)
        acc = _padd(acc, term, zero)
    return acc


def liouville_check(Q, Z: SplitCycle) -> LiouvilleResult:
    """``deg Q * h(Z) + h(Q) * deg Z >= |sum_beta m_beta ord_{z=0} Q(beta)|``.

    ``Q`` is a polynomial in ``z`` and ``X0..Xn`` homogeneous in ``X``: an
    affine polynomial is homogenized with ``X0`` to its ``X``-degree, and a
    bi-homogeneous one is read through ``(X0', X1') = (1, z)``. ``deg Q`` is
    its ``X``-degree and ``h(Q)`` its degree in ``z``.

    Raises:
        VanishesOnCycle: if ``Q`` vanishes identically at a point of ``Z``.
    """
    if any(not isinstance(p, RationalPoint) for p in Z.points):
        raise TypeError("the Liouville inequality is checked on cycles of P^n")
    if Q.n != Z.n:
        raise ArityMismatch(f"polynomial in {Q.n} X-variables, cycle in P^{Z.n}")
    terms, degQ, hQ = _homogeneous_in_X(Q)
    orders = []
    for beta in Z.points:
        val = _eval_at_point(terms, beta)
        if not val:
            raise VanishesOnCycle(f"{Q} vanishes at {beta}")
        orders.append(next(i for i, c in enumerate(val) if c))
    lhs = abs(sum(m * o for m, o in zip(Z.mult, orders)))
    rhs = degQ * Z.height + hQ * Z.degree
    return LiouvilleResult(lhs <= rhs, rhs - lhs, lhs, rhs, tuple(orders))


# ---------------------------------------------------------------------------
# degree bookkeeping


def bezout_bounds(deg1_p, deg0_p, r: int, r_p: int, a, b) -> tuple:
    """Degree bounds after cutting by ``r - r_p`` polynomials of bidegree ``<= (a, b)``.

    Returns ``(deg1_p b^k, k deg1_p a b^(k-1) + deg0_p b^k)`` with ``k = r - r_p``.
    """
    if not r >= r_p >= 0:
        raise ValueError(f"need r >= r_p >= 0, got r={r}, r_p={r_p}")
    k = r - r_p
    a, b = Fraction(a), Fraction(b)
    bk = b**k
    second = deg0_p * bk + (k * deg1_p * a * b ** (k - 1) if k else 0)
    return _simplify(deg1_p * bk), _simplify(second)


def deg_weighted(deg0_X, deg1_X, dimX: int, a, b):
    """``deg(X, a, b) = deg0 b^dim + dim deg1 a b^(dim-1)``."""
    if dimX < 0:
        raise ValueError("dimension must be nonnegative")
    a, b = Fraction(a), Fraction(b)
    out = deg0_X * b**dimX + (dimX * deg1_X * a * b ** (dimX - 1) if dimX else 0)
    return _simplify(out)


def _simplify(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


# ---------------------------------------------------------------------------
# delta pairs


@dataclass(frozen=True)
class DeltaPair:
    """Least bidegree carrying a polynomial that vanishes on a cycle but not at ``f``."""

    delta0: int
    delta1: int
    witness: BiPolynomial
    stabilized: bool
    searched: tuple[tuple[int, int], ...]

    def to_json(self) -> dict:
        return {
            "delta": [self.delta0, self.delta1],
            "witness": str(self.witness),
            "stabilized": self.stabilized,
            "searched": [list(x) for x in self.searched],
        }


def vanishing_rows(Z: SplitCycle, a: int, b: int) -> list[list]:
    """Linear conditions for a bidegree-``(a, b)`` polynomial to vanish on ``Z``.

    Columns follow :func:`affine_monomials`; each row is one coefficient in
    ``z`` of the value at one point. Points of ``P^n`` are paired with
    ``(1 : z)``.
    """
    fld = Z.field
    zero = fld.zero
    monos = affine_monomials(Z.n, a, b)
    rows = []
    for p in Z.points:
        bp = p if isinstance(p, BiPoint) else graph_point(p)
        alpha, beta = bp.first.coords, bp.second.coords
        vals = []
        for m in monos:
            k, e = m[0], m[1:]
            exps = ((alpha[0], a - k), (alpha[1], k), (beta[0], b - sum(e))) + tuple(zip(beta[1:], e))
            acc = [fld.one]
            for poly, d in exps:
                for _ in range(d):
                    acc = _pmul(acc, list(poly), zero)
            vals.append(acc)
        depth = max((len(v) for v in vals), default=0)
        for j in range(depth):
            rows.append([v[j] if j < len(v) else zero for v in vals])
    return rows


def delta_pair(Z: SplitCycle, F: FunctionalPoint, form=(1, 1), cap: int = 6, N: int | None = None) -> DeltaPair:
    """Search bidegrees by increasing ``c' a + c b`` (ties: smaller ``b``).

    A bidegree is a hit when some polynomial of that bidegree vanishes on
    every point of ``Z`` and lies outside the observed slice of the ideal of
    ``f`` (the kernel of the evaluation matrix at precision ``N``). The
    witness is the first such vector of the canonical kernel basis.

    Raises:
        PrecisionExhausted: if ``f`` cannot be certified to lie off ``Z``.
        CapExceeded: if no bidegree with ``a, b <= cap`` is a hit.
    """
    if Z.n != F.n:
        raise ArityMismatch(f"cycle in dimension {Z.n}, point in dimension {F.n}")
    if Z.field != F.field:
        raise FieldMismatch(f"cycle over {Z.field}, point over {F.field}")
    for p in Z.points:
        bp = p if isinstance(p, BiPoint) else graph_point(p)
        if not _point_ord(F, bp).exact:
            raise PrecisionExhausted(f"cannot certify that f differs from {p} at precision {F.precision}")
    c1, c0 = Fraction(form[0]), Fraction(form[1])
    if c1 < 0 or c0 < 0:
        raise ValueError("the linear form must have nonnegative coefficients")
    N = F.precision if N is None else N
    order = sorted(itertools.product(range(cap + 1), repeat=2), key=lambda ab: (c1 * ab[0] + c0 * ab[1], ab[1], ab[0]))
    searched = []
    for a, b in order:
        searched.append((a, b))
        rows = vanishing_rows(Z, a, b)
        u = len(affine_monomials(F.n, a, b))
        basis = kernel_basis(ExactMatrix.from_rows(rows, Z.field, u))
        if not basis:
            continue
        ev = evaluation_rows(F, a, b, N)
        M = ExactMatrix.from_rows(ev, F.field, u)
        for v in basis:
            if any(M.apply(v)):
                prof = rank_profile(M)
                w = default_window(u)
                stable = N >= w and prof[N - w] == prof[N]
                return DeltaPair(a, b, poly_from_vector(v, F.n, a, b, Z.field), stable, tuple(searched))
    raise CapExceeded(f"no bidegree with a, b <= {cap} separates the cycle from f")
