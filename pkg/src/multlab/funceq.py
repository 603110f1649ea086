"""Power-series solutions of Mahler and differential systems.

A Mahler system is ``A_0(z, f) f_i(p(z)) = A_i(z, f)`` for ``i = 1..n`` with
``ord p >= 2``; a differential system is ``A_0(z, f) f_i'(z) = A_i(z, f)``.
Both solvers determine the Taylor coefficients one index at a time. Products
``f^e`` needed by the polynomials ``A_j`` are maintained incrementally, so a
step costs a handful of dot products instead of a full re-expansion.

For a Mahler system the unknown coefficient vector ``c = f_m`` enters the
residual at order ``m`` only through the constant terms of the partial
derivatives, which yields the linear system ``M c = r`` with

    M_ij = dA_i/dX_j(0, f(0)) - f_i(0) dA_0/dX_j(0, f(0)).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .biring import AffinePolynomial, FunctionalPoint, evaluate, parse_poly
from .errors import (
    ArityMismatch,
    CharacteristicDivision,
    DegenerateA0,
    FieldMismatch,
    ParseError,
    SeedNotFixedPoint,
    SingularRecursion,
)
from .exactalg import QQ, ExactMatrix, Field, field_from_char, kernel_basis, parse_scalar, solve
from .series import OrdValue, TruncatedSeries, compose_series, mul_series, ord_series


@dataclass(frozen=True)
class MahlerSystem:
    """``A_0(z, f) f_i(p(z)) = A_i(z, f)`` with ``p = p_num / p_den``.

    Attributes:
        A: polynomials ``A_0..A_n`` in ``k[z][X1..Xn]``.
        p_num: numerator of ``p`` as a polynomial in z (an AffinePolynomial
            without X-variables in use).
        p_den: denominator of ``p``; must not vanish at 0.
        seed: ``f_1(0)..f_n(0)``.
        label: free-form name.
        t_f: declared transcendence degree of the solution, passed on to it.
    """

    A: tuple[AffinePolynomial, ...]
    p_num: AffinePolynomial
    seed: tuple
    p_den: AffinePolynomial | None = None
    label: str = ""
    t_f: int | None = None

    def __post_init__(self):
        n = len(self.A) - 1
        if n < 1:
            raise ArityMismatch("a Mahler system needs A_0 and at least one A_i")
        fld = self.field
        A = tuple(P.with_n(n) if P.n < n else P for P in self.A)
        if any(P.n != n for P in A):
            raise ArityMismatch("A_i use more X-variables than there are equations")
        if any(P.field != fld for P in A):
            raise ArityMismatch("A_i over different fields")
        object.__setattr__(self, "A", A)
        if len(self.seed) != n:
            raise ArityMismatch(f"{len(self.seed)} seed values for n={n}")
        object.__setattr__(self, "seed", tuple(fld(s) for s in self.seed))
        den = self.p_den if self.p_den is not None else AffinePolynomial.constant(self.p_num.n, 1, fld)
        object.__setattr__(self, "p_den", den)
        for q in (self.p_num, den):
            if q.deg_X > 0:
                raise ParseError("p must be a polynomial in z only")
        if not _zcoeffs(den)[0]:
            raise ValueError("the denominator of p must not vanish at z = 0")
        if self.delta < 2:
            raise ValueError(f"ord p must be at least 2, got {self.delta}")
        a0 = A[0].eval_z0(self.seed)
        if not a0:
            raise DegenerateA0("A_0(0, seed) = 0")
        for i in range(1, n + 1):
            if self.seed[i - 1] * a0 != A[i].eval_z0(self.seed):
                raise SeedNotFixedPoint(f"f_{i}(0) A_0(0, seed) != A_{i}(0, seed)")

    @property
    def n(self) -> int:
        return len(self.A) - 1

    @property
    def field(self) -> Field:
        return self.A[0].field

    @property
    def delta(self) -> int:
        """``ord p``."""
        c = _zcoeffs(self.p_num)
        return next((k for k, x in enumerate(c) if x), 10**9)

    @property
    def d(self) -> int:
        """``deg p`` (maximum of numerator and denominator degrees)."""
        return max(self.p_num.deg_z, self.p_den.deg_z)

    def p_series(self, N: int) -> TruncatedSeries:
        num = TruncatedSeries(self.field, _zcoeffs(self.p_num)[:N], N)
        den = TruncatedSeries(self.field, _zcoeffs(self.p_den)[:N], N)
        return mul_series(num, den.inverse())

    def jacobian(self) -> ExactMatrix:
        """The matrix ``M`` of the coefficient recursion."""
        n, s = self.n, self.seed
        d0 = [self.A[0].diff_X(j).eval_z0(s) for j in range(1, n + 1)]
        rows = []
        for i in range(1, n + 1):
            rows.append([self.A[i].diff_X(j).eval_z0(s) - s[i - 1] * d0[j - 1] for j in range(1, n + 1)])
        return ExactMatrix.from_rows(rows, self.field)


@dataclass(frozen=True)
class DifferentialSystem:
    """``A_0(z, f) f_i'(z) = A_i(z, f)`` with initial values ``f(0)``."""

    A: tuple[AffinePolynomial, ...]
    init: tuple
    label: str = ""
    t_f: int | None = None

    def __post_init__(self):
        n = len(self.A) - 1
        if n < 1:
            raise ArityMismatch("a differential system needs A_0 and at least one A_i")
        A = tuple(P.with_n(n) if P.n < n else P for P in self.A)
        if any(P.n != n for P in A):
            raise ArityMismatch("A_i use more X-variables than there are equations")
        object.__setattr__(self, "A", A)
        if len(self.init) != n:
            raise ArityMismatch(f"{len(self.init)} initial values for n={n}")
        object.__setattr__(self, "init", tuple(self.field(s) for s in self.init))
        if not A[0].eval_z0(self.init):
            raise DegenerateA0("A_0(0, f(0)) = 0")

    @property
    def n(self) -> int:
        return len(self.A) - 1

    @property
    def field(self) -> Field:
        return self.A[0].field


def _zcoeffs(P: AffinePolynomial) -> list:
    """Coefficients in z of a polynomial with no X-dependence."""
    out = [P.field.zero] * (max(P.deg_z, 0) + 1)
    for e, c in P.terms.items():
        out[e[0]] = out[e[0]] + c
    return out


class _PowerTable:
    """Incrementally grown coefficient arrays of the products ``f^e``."""

    def __init__(self, polys: Sequence[AffinePolynomial], n: int, field: Field):
        need = set()
        for P in polys:
            for e in P.terms:
                x = e[1:]
                while any(x) and x not in need:
                    need.add(x)
                    i = max(j for j, k in enumerate(x) if k)
                    x = x[:i] + (x[i] - 1,) + x[i + 1:]
        self.order = sorted(need, key=sum)
        self.parent = {}
        for x in self.order:
            i = max(j for j, k in enumerate(x) if k)
            self.parent[x] = (x[:i] + (x[i] - 1,) + x[i + 1:], i)
        self.field = field
        self.n = n
        self.f: list[list] = [[] for _ in range(n)]
        self.P: dict[tuple, list] = {x: [] for x in self.order}
        self.P[(0,) * n] = []
        # each A as a list of (z-shift, X-exponent, coeff)
        self.polys = [[(e[0], e[1:], c) for e, c in P.terms.items()] for P in polys]

    def coeff(self, x: tuple, k: int):
        if not any(x):
            return self.field.one if k == 0 else self.field.zero
        return self.P[x][k]

    def push(self, m: int, values: Sequence | None):
        """Fill index ``m`` of every product; ``values=None`` treats ``f_m`` as 0."""
        zero = self.field.zero
        for i in range(self.n):
            self.f[i].append(values[i] if values is not None else zero)
        for x in self.order:
            px, i = self.parent[x]
            fi = self.f[i]
            acc = zero
            for k in range(m + 1):
                a = fi[m - k]
                if a:
                    b = self.coeff(px, k)
                    if b:
                        acc = acc + a * b
            self.P[x].append(acc)

    def correct(self, m: int, c: Sequence):
        """Replace the provisional ``f_m = 0`` by ``c`` (exact since only constants multiply it)."""
        for i in range(self.n):
            self.f[i][m] = c[i]
        # d(f^x)[m] = sum_j x_j f(0)^(x - e_j) c_j, accumulated along the parent chain
        delta = {(0,) * self.n: self.field.zero}
        for x in self.order:
            px, i = self.parent[x]
            # f^x = f^px * f_i, so the change at order m is
            # delta(f^px) * f_i(0) + f^px(0) * c_i
            d = delta[px] * self.f[i][0] + self.coeff(px, 0) * c[i]
            delta[x] = d
            self.P[x][m] = self.P[x][m] + d

    def poly_coeff(self, j: int, m: int):
        """Coefficient of ``z^m`` in ``A_j(z, f)``."""
        acc = self.field.zero
        for s, x, c in self.polys[j]:
            if s <= m:
                v = self.coeff(x, m - s)
                if v:
                    acc = acc + c * v
        return acc


def solve_mahler(S: MahlerSystem, N: int) -> FunctionalPoint:
    """Expand the unique solution with ``f(0) = seed`` modulo ``z^N``.

    Raises:
        SingularRecursion: if the recursion matrix is singular; the solution
            (if any) must then be supplied externally and checked with
            :func:`verify_residual`.
    """
    if N < 1:
        raise ValueError("precision must be at least 1")
    n, fld = S.n, S.field
    M = S.jacobian()
    if kernel_basis(M):
        raise SingularRecursion("the linearized recursion matrix is singular")
    table = _PowerTable(S.A, n, fld)
    table.push(0, S.seed)
    p = S.p_series(N)
    # powers of p, needed for coefficients of f_i(p(z)) up to z^(N-1)
    kmax = (N - 1) // S.delta
    p_pow = [TruncatedSeries.one(fld, N)]
    for _ in range(kmax):
        p_pow.append(mul_series(p_pow[-1], p))
    A0F = [table.poly_coeff(0, 0)]
    fp = [[S.seed[i]] for i in range(n)]  # coefficients of f_i(p(z))
    for m in range(1, N):
        for i in range(n):
            acc = fld.zero
            for k in range(1, m // S.delta + 1):
                a = table.f[i][k]
                if a:
                    b = p_pow[k].coeffs[m]
                    if b:
                        acc = acc + a * b
            fp[i].append(acc + table.f[i][0] * p_pow[0].coeffs[m])
        table.push(m, None)
        a0m = table.poly_coeff(0, m)
        rhs = []
        for i in range(n):
            acc = a0m * fp[i][0]
            for k in range(m):
                acc = acc + A0F[k] * fp[i][m - k]
            rhs.append(acc - table.poly_coeff(i + 1, m))
        c = solve(M, rhs)
        table.correct(m, c)
        A0F.append(table.poly_coeff(0, m))
    series = tuple(TruncatedSeries(fld, table.f[i], N) for i in range(n))
    return FunctionalPoint(series, S.t_f, S.label)


def solve_differential(S: DifferentialSystem, N: int) -> FunctionalPoint:
    """Expand the solution with the given initial values modulo ``z^N``.

    Raises:
        CharacteristicDivision: when a step needs to divide by ``m + 1``
            and this vanishes in the base field.
    """
    n, fld = S.n, S.field
    table = _PowerTable(S.A, n, fld)
    table.push(0, S.init)
    A0F = []
    AF = [[] for _ in range(n)]
    for m in range(0, N - 1):
        A0F.append(table.poly_coeff(0, m))
        for i in range(n):
            AF[i].append(table.poly_coeff(i + 1, m))
        if fld.characteristic and (m + 1) % fld.characteristic == 0:
            raise CharacteristicDivision(
                f"coefficient {m + 1} requires dividing by {m + 1} in characteristic {fld.characteristic}", m + 1
            )
        nxt = []
        for i in range(n):
            acc = AF[i][m]
            for k in range(1, m + 1):
                if A0F[k]:
                    acc = acc - A0F[k] * (m - k + 1) * table.f[i][m - k + 1]
            nxt.append(acc / (A0F[0] * (m + 1)))
        table.push(m + 1, nxt)
    series = tuple(TruncatedSeries(fld, table.f[i], N) for i in range(n))
    return FunctionalPoint(series, S.t_f, S.label)


def verify_residual(S: MahlerSystem | DifferentialSystem, F: FunctionalPoint, N: int | None = None) -> list[OrdValue]:
    """Orders of the defining residuals of ``S`` at ``F`` (one per equation).

    ``AtLeast(N')`` for every equation certifies that ``F`` solves ``S``
    modulo ``z^N'``: ``N' = N`` for Mahler systems and ``N - 1`` for
    differential systems.
    """
    if F.n != S.n:
        raise ArityMismatch(f"system in n={S.n} unknowns, point with {F.n} coordinates")
    if N is not None:
        F = F.truncate(N)
    if F.field == S.field:
        A = list(S.A)
    elif S.field.characteristic == 0:
        A = [P.change_field(F.field) for P in S.A]
    else:
        raise FieldMismatch(f"system over {S.field}, point over {F.field}")
    a0 = evaluate(A[0], F)
    out = []
    if isinstance(S, MahlerSystem):
        p = S.p_series(F.precision)
        if p.field != F.field:
            p = TruncatedSeries(F.field, p.coeffs, p.precision)
        for i in range(S.n):
            fp = compose_series(F.series[i], p)
            out.append(ord_series(mul_series(a0, fp) - evaluate(A[i + 1], F)))
    else:
        for i in range(S.n):
            d = F.series[i].derivative()
            out.append(ord_series(mul_series(a0.truncate(d.precision), d) - evaluate(A[i + 1], F).truncate(d.precision)))
    return out


# ---------------------------------------------------------------------------
# JSON descriptors


def load_system(data: dict | str) -> MahlerSystem | DifferentialSystem:
    """Build a system from its JSON descriptor.

    Keys: ``kind`` (``"mahler"`` or ``"differential"``), ``n``, ``A`` (list of
    polynomial strings ``A_0..A_n``), ``seed`` (initial values as scalar
    strings), ``char`` (0 or a prime), optionally ``label`` and ``t_f``, and
    for Mahler systems ``p`` (a polynomial string, or ``[numerator,
    denominator]``).
    """
    if isinstance(data, str):
        data = json.loads(data)
    for key in ("kind", "A", "seed"):
        if key not in data:
            raise ParseError(f"system descriptor lacks {key!r}")
    fld = field_from_char(int(data.get("char", 0)))
    n = int(data.get("n", len(data["A"]) - 1))
    if len(data["A"]) != n + 1:
        raise ArityMismatch(f"{len(data['A'])} polynomials given, expected n+1 = {n + 1}")
    A = tuple(parse_poly(str(s), fld, "affine", n) for s in data["A"])
    seed = tuple(parse_scalar(str(s), fld) for s in data["seed"])
    label = str(data.get("label", ""))
    t_f = data.get("t_f")
    t_f = None if t_f is None else int(t_f)
    kind = data["kind"]
    if kind == "mahler":
        p = data.get("p")
        if p is None:
            raise ParseError("Mahler system descriptor lacks 'p'")
        if isinstance(p, list):
            num, den = (parse_poly(str(s), fld, "affine", n) for s in p)
        else:
            num, den = parse_poly(str(p), fld, "affine", n), None
        return MahlerSystem(A, num, seed, den, label, t_f)
    if kind == "differential":
        return DifferentialSystem(A, seed, label, t_f)
    raise ParseError(f"unknown system kind {kind!r}")


def solve_system(S: MahlerSystem | DifferentialSystem, N: int) -> FunctionalPoint:
    if isinstance(S, MahlerSystem):
        return solve_mahler(S, N)
    return solve_differential(S, N)
