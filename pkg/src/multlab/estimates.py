"""Auxiliary polynomials and measured maximal vanishing orders.

For a bidegree ``(a, b)`` let ``M_N`` be the ``N x u`` matrix whose column
for the monomial ``z^k X^e`` holds the first ``N`` Taylor coefficients of
``z^k f^e`` (``u = (a+1) C(b+n, n)``), and let ``K_r`` be the kernel of its
first ``r`` rows. A coefficient vector ``v`` outside ``K_N`` evaluates to a
series of order exactly ``j`` when ``v`` lies in ``K_j`` but not in
``K_{j+1}``. The largest such ``j`` is therefore the last row at which the
rank of the leading block increases:

    Lambda(a, b) = max { r : dim K_r > dim K_N }.

Vectors in ``K_N`` form the observed slice of the ideal of ``f`` and are
excluded, as they evaluate to zero as far as the truncation can tell.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import comb

import numpy as np

from .biring import BiPolynomial, FunctionalPoint, evaluation_rows, poly_from_vector
from .errors import AllInIdeal, CapExceeded, MissingParam, OracleMismatch, PrecisionExhausted
from .exactalg import GF, ExactMatrix, Field, kernel_basis, rank_profile
from .ideals import default_window
from .series import AtLeast, Finite, OrdValue, TruncatedSeries, ord_series

ENUMERATION_CAP = 2**20


def monomial_count(n: int, a: int, b: int) -> int:
    """``u = (a + 1) C(b + n, n)``."""
    return (a + 1) * comb(b + n, n)


@dataclass(frozen=True)
class AuxResult:
    """A polynomial of bidegree ``(a, b)`` built to vanish to order ``>= u - 1``."""

    poly: BiPolynomial
    ord: OrdValue
    u: int
    kernel_dim: int

    def to_json(self) -> dict:
        return {"poly": str(self.poly), "ord": self.ord.to_json(), "u": self.u, "kernel_dim_first_u_minus_1_rows": self.kernel_dim}


def _first_nonzero(values) -> int | None:
    return next((i for i, x in enumerate(values) if x), None)


def aux_poly(F: FunctionalPoint, bidegree: tuple[int, int], N: int | None = None) -> AuxResult:
    """Nonzero polynomial of bidegree ``(a, b)`` with ``ord P(f) >= u - 1``, not vanishing at ``f``.

    The ``u - 1`` linear conditions "coefficient ``j`` vanishes" on ``u``
    unknowns leave a kernel of dimension at least one. Its canonical basis is
    scanned in order and the first vector whose evaluation is nonzero within
    the known precision is returned. For ``u = 1`` there are no conditions
    and the answer is the lone monomial, of order 0.

    Raises:
        PrecisionExhausted: if fewer than ``u`` coefficients are known.
        AllInIdeal: if every kernel vector evaluates to zero to precision ``N``.
    """
    a, b = bidegree
    N = F.precision if N is None else N
    u = monomial_count(F.n, a, b)
    if N < u:
        raise PrecisionExhausted(f"need at least u = {u} coefficients, have {N}")
    rows = evaluation_rows(F, a, b, N)
    M = ExactMatrix.from_rows(rows, F.field, u)
    basis = kernel_basis(M.head(u - 1))
    for v in basis:
        j = _first_nonzero(M.apply(v))
        if j is not None:
            return AuxResult(poly_from_vector(v, F.n, a, b, F.field), Finite(j), u, len(basis))
    raise AllInIdeal(f"all {len(basis)} kernel vectors at bidegree {bidegree} vanish to order {N}")


@dataclass(frozen=True)
class OracleReport:
    """Cross-check of a rank-profile value by exhaustive enumeration over ``GF(p)``."""

    prime: int
    candidates: int
    enumerated: OrdValue
    rank_profile_mod_p: OrdValue
    agrees_with_base_field: bool

    def to_json(self) -> dict:
        return {
            "prime": self.prime,
            "candidates": self.candidates,
            "enumerated": self.enumerated.to_json(),
            "rank_profile_mod_p": self.rank_profile_mod_p.to_json(),
            "agrees_with_base_field": self.agrees_with_base_field,
        }


@dataclass(frozen=True)
class LambdaResult:
    """Measured maximal finite order at one bidegree with its diagnostics."""

    bidegree: tuple[int, int]
    value: OrdValue
    u: int
    precision: int
    window: int
    stabilized: bool
    kernel_dim_final: int
    rank_trace: tuple[int, ...]
    oracle: OracleReport | None = None

    @property
    def kernel_dims(self) -> list[int]:
        return [self.u - r for r in self.rank_trace]

    def to_json(self, trace: bool = True) -> dict:
        out = {
            "bidegree": list(self.bidegree),
            "lambda": self.value.to_json(),
            "u": self.u,
            "precision": self.precision,
            "window": self.window,
            "stabilized": self.stabilized,
            "kernel_dim_final": self.kernel_dim_final,
        }
        if trace:
            out["kernel_dim_trace"] = self.kernel_dims
        if self.oracle is not None:
            out["oracle"] = self.oracle.to_json()
        return out


def _lambda_from_profile(prof: list[int]) -> int | None:
    """Last row index at which the rank increases, or ``None`` if it never does."""
    for r in range(len(prof) - 1, 0, -1):
        if prof[r] > prof[r - 1]:
            return r - 1
    return None


def _reduce_rows(rows: list[list], p: int) -> np.ndarray:
    fld = GF(p)
    return np.array([[fld(x).v for x in r] for r in rows], dtype=np.int64)


def enumeration_lambda(rows_mod_p: np.ndarray, p: int, cap: int = ENUMERATION_CAP, chunk: int = 1 << 14) -> tuple[OrdValue | None, int]:
    """Maximal finite order over all nonzero coefficient vectors mod ``p``.

    Only vectors whose first nonzero entry is 1 are tried, since scaling does
    not change the order. Vectors evaluating to zero in all rows are skipped.

    Returns:
        ``(Finite(max order) or None when every vector vanishes, candidates)``.
    """
    N, u = rows_mod_p.shape
    total = p**u
    if total > cap:
        raise CapExceeded(f"{p}^{u} = {total} candidate vectors exceed the cap {cap}")
    mt = rows_mod_p.T.copy()
    powers = p ** np.arange(u - 1, -1, -1, dtype=np.int64)
    best = -1
    count = 0
    for start in range(1, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % p
        lead = digits[np.arange(len(idx)), np.argmax(digits != 0, axis=1)]
        digits = digits[lead == 1]
        count += len(digits)
        vals = (digits @ mt) % p
        nz = vals != 0
        has = nz.any(axis=1)
        if has.any():
            first = np.argmax(nz[has], axis=1)
            best = max(best, int(first.max()))
    return (Finite(best) if best >= 0 else None), count


def max_finite_ord(
    F: FunctionalPoint,
    bidegree: tuple[int, int],
    N: int | None = None,
    oracle: str = "off",
    prime: int | None = None,
    window: int | None = None,
    strict: bool = True,
) -> LambdaResult:
    """Measured ``Lambda(a, b)`` from the rank profile of ``M_N``.

    Args:
        F: the functional point.
        bidegree: ``(a, b)``.
        N: number of Taylor coefficients (default: the point's precision).
        oracle: ``"off"`` or ``"finite-field"``; the latter re-derives the
            value by enumerating all coefficient vectors over ``GF(prime)``.
        prime: prime for the oracle; defaults to the characteristic of a
            finite base field, else 2.
        window: stabilization window (default ``max(8, u)``).
        strict: raise instead of returning ``AtLeast`` when not stabilized.

    Raises:
        PrecisionExhausted: kernel not stable over the trailing window (strict).
        AllInIdeal: every polynomial vanishes to the known precision.
        OracleMismatch: enumeration and rank profile over ``GF(prime)`` disagree.
    """
    a, b = bidegree
    N = F.precision if N is None else N
    u = monomial_count(F.n, a, b)
    w = default_window(u) if window is None else window
    rows = evaluation_rows(F, a, b, N)
    prof = rank_profile(ExactMatrix.from_rows(rows, F.field, u))
    lam = _lambda_from_profile(prof)
    if lam is None:
        raise AllInIdeal(f"every polynomial of bidegree {bidegree} vanishes to order {N}")
    stabilized = N >= w and prof[N - w] == prof[N]
    if not stabilized and strict:
        raise PrecisionExhausted(f"kernel at bidegree {bidegree} still changing within the last {w} of {N} rows")
    value = Finite(lam) if stabilized else AtLeast(lam)
    report = None
    if oracle == "finite-field":
        p = prime or (F.field.characteristic or 2)
        red = _reduce_rows(rows, p)
        enum, count = enumeration_lambda(red, p)
        prof_p = rank_profile(ExactMatrix.from_rows(red.tolist(), GF(p), u))
        lam_p = _lambda_from_profile(prof_p)
        by_rank = Finite(lam_p) if lam_p is not None else None
        if enum != by_rank:
            raise OracleMismatch(f"bidegree {bidegree} mod {p}: enumeration {enum}, rank profile {by_rank}")
        report = OracleReport(p, count, enum, by_rank, lam_p == lam)
    elif oracle != "off":
        raise ValueError(f"unknown oracle mode {oracle!r}")
    return LambdaResult((a, b), value, u, N, w, stabilized, u - prof[N], tuple(prof), report)


# ---------------------------------------------------------------------------
# grid scans

SHAPES = {
    "(a+1)(b+1)^t": lambda a, b, t: (a + 1) * (b + 1) ** t,
    "(a+b+1)(b+1)^t": lambda a, b, t: (a + b + 1) * (b + 1) ** t,
}


@dataclass
class ScanCell:
    result: LambdaResult
    lower_bound: int
    ratio: Fraction
    error: str | None = None

    @property
    def value(self) -> OrdValue:
        return self.result.value


@dataclass
class OrdScanResult:
    """Grid of measured ``Lambda(a, b)`` with diagnostics and fitted ratios."""

    amax: int
    bmax: int
    precision: int
    shape: str
    t: int
    cells: dict = dc_field(default_factory=dict)

    def all_finite(self) -> bool:
        return all(c.value.exact for c in self.cells.values())

    def all_stabilized(self) -> bool:
        return all(c.result.stabilized for c in self.cells.values())

    def monotone(self) -> bool:
        """``Lambda`` nondecreasing in ``a`` and in ``b`` over finite cells."""
        for (a, b), c in self.cells.items():
            for nb in ((a + 1, b), (a, b + 1)):
                d = self.cells.get(nb)
                if d is not None and c.value.exact and d.value.exact and d.value.value < c.value.value:
                    return False
        return True

    def lower_bounds_hold(self) -> bool:
        """``Lambda >= u - 1 - dim K_N`` cellwise."""
        return all(c.value.value >= c.lower_bound - c.result.kernel_dim_final for c in self.cells.values())

    def empirical_K(self) -> Fraction | None:
        ratios = [c.ratio for c in self.cells.values() if c.value.exact]
        return max(ratios) if ratios else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "b", "lambda_kind", "lambda_value", "kernel_dim_final", "stabilized", "lower_bound_u_minus_1", "ratio"])
        for (a, b) in sorted(self.cells):
            c = self.cells[(a, b)]
            w.writerow(
                [
                    a,
                    b,
                    "finite" if c.value.exact else "at_least",
                    c.value.value,
                    c.result.kernel_dim_final,
                    str(c.result.stabilized).lower(),
                    c.lower_bound,
                    str(c.ratio),
                ]
            )
        return buf.getvalue()

    def to_json(self) -> dict:
        K = self.empirical_K()
        return {
            "amax": self.amax,
            "bmax": self.bmax,
            "precision": self.precision,
            "shape": self.shape,
            "t": self.t,
            "all_finite": self.all_finite(),
            "all_stabilized": self.all_stabilized(),
            "monotone": self.monotone(),
            "lower_bounds_hold": self.lower_bounds_hold(),
            "empirical_K": None if K is None else str(K),
            "cells": [
                dict(self.cells[k].result.to_json(), lower_bound_u_minus_1=self.cells[k].lower_bound, ratio=str(self.cells[k].ratio))
                for k in sorted(self.cells)
            ],
        }


def _cell(args):
    F, a, b, N, oracle, prime, window = args
    return (a, b), max_finite_ord(F, (a, b), N, oracle, prime, window, strict=False)


def thread_count() -> int:
    """Parallelism cap from ``MULTLAB_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("MULTLAB_THREADS", "1")))
    except ValueError:
        return 1


def multiplicity_scan(
    F: FunctionalPoint,
    amax: int,
    bmax: int,
    N: int | None = None,
    shape: str = "(a+b+1)(b+1)^t",
    t: int | None = None,
    oracle: str = "off",
    prime: int | None = None,
    window: int | None = None,
    workers: int | None = None,
) -> OrdScanResult:
    """Measure ``Lambda`` on the grid ``0 <= a <= amax, 0 <= b <= bmax``.

    Cells whose kernel does not stabilize are recorded as ``AtLeast`` rather
    than aborting the scan. Cells may run in worker processes; the result is
    assembled by cell key and does not depend on completion order.
    """
    if t is None:
        t = F.t_f
    if t is None:
        raise MissingParam("the exponent t was not given and the point declares no transcendence degree")
    if shape not in SHAPES:
        raise ValueError(f"unknown shape {shape!r}; choose from {sorted(SHAPES)}")
    N = F.precision if N is None else N
    jobs = [(F, a, b, N, oracle, prime, window) for a in range(amax + 1) for b in range(bmax + 1)]
    workers = thread_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = dict(ex.map(_cell, jobs))
    else:
        results = dict(map(_cell, jobs))
    out = OrdScanResult(amax, bmax, N, shape, t)
    fshape = SHAPES[shape]
    for (a, b), res in sorted(results.items()):
        out.cells[(a, b)] = ScanCell(res, res.u - 1, Fraction(res.value.value, fshape(a, b, t)))
    return out
