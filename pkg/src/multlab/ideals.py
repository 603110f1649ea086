"""Bi-homogeneous ideals handled one graded slice at a time.

The bidegree-``(a, b)`` piece of ``<g_1, ..., g_k>`` is spanned by the
products ``m g_j`` with ``m`` running over monomials of bidegree
``(a, b) - bideg(g_j)``. Membership, stability under a map and the observed
slice of the ideal of a functional point are all finite linear algebra on
these pieces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .biring import (
    BiPolynomial,
    FunctionalPoint,
    bihomogeneous_monomials,
    evaluation_rows,
    parse_poly,
    poly_from_vector,
)
from .dynamics import MapSpec, apply_map
from .errors import ArityMismatch, FieldMismatch, NotBiHomogeneous, PrecisionExhausted
from .exactalg import QQ, ExactMatrix, Field, kernel_basis, rank_profile, solve

STABILITY_CAVEAT = (
    "generators only: phi(sum h_j g_j) stays in the ideal because a derivation obeys "
    "the Leibniz rule and a pullback is a ring morphism"
)


@dataclass(frozen=True)
class GeneratedIdeal:
    """Ideal generated by nonzero bi-homogeneous polynomials of one ring."""

    generators: tuple[BiPolynomial, ...]

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("an ideal needs at least one generator")
        object.__setattr__(self, "generators", gens)
        for g in gens:
            if not g.terms:
                raise ValueError("generators must be nonzero")
            g.require_bihomogeneous()
            if g.n != gens[0].n:
                raise ArityMismatch("generators with different n")
            if g.field != gens[0].field:
                raise FieldMismatch("generators over different fields")

    @property
    def n(self) -> int:
        return self.generators[0].n

    @property
    def field(self) -> Field:
        return self.generators[0].field

    def slice_spanning_set(self, a: int, b: int) -> list[tuple[int, tuple, BiPolynomial]]:
        """Products ``(j, m, m g_j)`` spanning the bidegree-``(a, b)`` piece."""
        out = []
        for j, g in enumerate(self.generators):
            ga, gb = g.bidegree
            if ga > a or gb > b:
                continue
            for m in bihomogeneous_monomials(self.n, a - ga, b - gb):
                out.append((j, m, BiPolynomial.monomial(self.n, m, 1, self.field) * g))
        return out

    def to_json(self) -> dict:
        return {"generators": [str(g) for g in self.generators]}


@dataclass(frozen=True)
class Membership:
    """Result of :func:`slice_membership`.

    ``cofactors[j]`` is the multiplier of generator ``j``; when ``member`` is
    true, ``sum cofactors[j] * generators[j]`` reproduces the polynomial.
    """

    member: bool
    bidegree: tuple[int, int]
    cofactors: tuple[BiPolynomial, ...] | None = None

    def recombine(self, ideal: GeneratedIdeal) -> BiPolynomial:
        acc = BiPolynomial.zero(ideal.n, ideal.field)
        for h, g in zip(self.cofactors, ideal.generators):
            acc = acc + h * g
        return acc


def slice_membership(I: GeneratedIdeal, P: BiPolynomial) -> Membership:
    """Decide ``P in I`` inside the graded piece of ``P``'s bidegree."""
    if P.n != I.n:
        raise ArityMismatch(f"polynomial with n={P.n}, ideal with n={I.n}")
    if P.field != I.field:
        raise FieldMismatch(f"polynomial over {P.field}, ideal over {I.field}")
    if not P.terms:
        return Membership(True, (0, 0), tuple(BiPolynomial.zero(I.n, I.field) for _ in I.generators))
    a, b = P.require_bihomogeneous()
    span = I.slice_spanning_set(a, b)
    if not span:
        return Membership(False, (a, b))
    monos = bihomogeneous_monomials(I.n, a, b)
    zero = I.field.zero
    rows = [[prod.terms.get(mono, zero) for (_, _, prod) in span] for mono in monos]
    rhs = [P.terms.get(mono, zero) for mono in monos]
    x = solve(ExactMatrix.from_rows(rows, I.field, len(span)), rhs)
    if x is None:
        return Membership(False, (a, b))
    cof = [dict() for _ in I.generators]
    for (j, m, _), c in zip(span, x):
        if c:
            cof[j][m] = c
    return Membership(True, (a, b), tuple(BiPolynomial(I.n, I.field, t) for t in cof))


@dataclass(frozen=True)
class StabilityResult:
    """Outcome of :func:`is_phi_stable`; ``witness`` is ``(g, phi(g))`` on failure."""

    stable: bool
    witness: tuple[BiPolynomial, BiPolynomial] | None
    certificates: tuple[Membership, ...]
    caveat: str = STABILITY_CAVEAT

    def to_json(self) -> dict:
        return {
            "stable": self.stable,
            "witness": None if self.witness is None else {"generator": str(self.witness[0]), "image": str(self.witness[1])},
            "caveat": self.caveat,
        }


def is_phi_stable(I: GeneratedIdeal, phi: MapSpec) -> StabilityResult:
    """``phi(I) subset I``, checked on the generators."""
    if phi.n != I.n:
        raise ArityMismatch(f"map with n={phi.n}, ideal with n={I.n}")
    certs = []
    for g in I.generators:
        image = apply_map(phi, g)
        m = slice_membership(I, image)
        if not m.member:
            return StabilityResult(False, (g, image), tuple(certs))
        certs.append(m)
    return StabilityResult(True, None, tuple(certs))


@dataclass(frozen=True)
class SliceBasis:
    """Observed bidegree-``(a, b)`` slice of the ideal of a functional point.

    Attributes:
        bidegree: ``(a, b)``.
        basis: canonical basis of the kernel of the evaluation map.
        precision: number of Taylor coefficients used.
        window: rows over which the kernel had to stay unchanged.
        stabilized: whether it did.
        rank_trace: ranks of the leading row blocks (length ``precision + 1``).
    """

    bidegree: tuple[int, int]
    basis: tuple[BiPolynomial, ...]
    precision: int
    window: int
    stabilized: bool
    rank_trace: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_json(self) -> dict:
        return {
            "bidegree": list(self.bidegree),
            "dim": self.dim,
            "basis": [str(p) for p in self.basis],
            "precision": self.precision,
            "window": self.window,
            "stabilized": self.stabilized,
        }


def default_window(u: int) -> int:
    """Stabilization window: ``max(8, number of monomial columns)``."""
    return max(8, u)


def pf_slice(
    F: FunctionalPoint,
    bidegree: tuple[int, int],
    N: int | None = None,
    window: int | None = None,
    strict: bool = True,
) -> SliceBasis:
    """Kernel of the evaluation map on polynomials of bidegree ``(a, b)``.

    The kernel over the first ``N`` Taylor coefficients is reported as
    stabilized when it did not change over the last ``window`` rows.

    Raises:
        PrecisionExhausted: if ``strict`` and the kernel has not stabilized.
    """
    a, b = bidegree
    N = F.precision if N is None else N
    rows = evaluation_rows(F, a, b, N)
    u = len(rows[0]) if rows else len(bihomogeneous_monomials(F.n, a, b))
    w = default_window(u) if window is None else window
    M = ExactMatrix.from_rows(rows, F.field, u)
    prof = rank_profile(M)
    stabilized = N >= w and prof[N - w] == prof[N]
    if strict and not stabilized:
        raise PrecisionExhausted(
            f"kernel at bidegree {bidegree} still changing within the last {w} of {N} coefficients"
        )
    basis = tuple(poly_from_vector(v, F.n, a, b, F.field) for v in kernel_basis(M))
    return SliceBasis((a, b), basis, N, w, stabilized, tuple(prof))


def load_ideal(data: dict | str, field: Field = QQ, n: int | None = None) -> GeneratedIdeal:
    """``{"generators": ["X1*X0' - X1'*X0", ...]}``."""
    if isinstance(data, str):
        data = json.loads(data)
    gens = data["generators"]
    if n is None:
        n = max(parse_poly(str(g), field, "bi").n for g in gens)
    return GeneratedIdeal(tuple(parse_poly(str(g), field, "bi", n) for g in gens))
