"""Truncated formal power series with explicit precision and valuations.

A :class:`TruncatedSeries` with precision ``N`` stands for every power series
that agrees with it modulo ``z^N``. Each operation states how the precision of
its result is derived from its inputs, and valuations are three-valued: a
series either has a certified order ``Finite(k)`` or is only known to vanish
to order ``AtLeast(N)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import FieldMismatch, InnerNotPositiveValuation, PrecisionExhausted
from .exactalg import QQ, Field, GF, common_field, format_scalar, parse_scalar


@dataclass(frozen=True, order=False)
class OrdValue:
    """Order of vanishing at ``z = 0``.

    ``exact`` is true for ``Finite(value)``: coefficient ``value`` is nonzero
    and all lower ones vanish. Otherwise ``AtLeast(value)``: every known
    coefficient (indices below ``value``) vanishes.
    """

    value: int
    exact: bool

    @property
    def is_finite(self) -> bool:
        return self.exact

    def __str__(self):
        return f"{'Finite' if self.exact else 'AtLeast'}({self.value})"

    __repr__ = __str__

    def __add__(self, other):
        if isinstance(other, int):
            return OrdValue(self.value + other, self.exact)
        if isinstance(other, OrdValue):
            return OrdValue(self.value + other.value, self.exact and other.exact)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            return OrdValue(self.value - other, self.exact)
        if isinstance(other, OrdValue):
            if not other.exact:
                raise PrecisionExhausted(f"cannot subtract the lower bound {other}")
            return OrdValue(self.value - other.value, self.exact)
        return NotImplemented

    def scale(self, k: int) -> OrdValue:
        return OrdValue(self.value * k, self.exact or k == 0)

    def require_finite(self) -> int:
        if not self.exact:
            raise PrecisionExhausted(f"order only known as {self}")
        return self.value

    def to_json(self) -> dict:
        return {"kind": "finite" if self.exact else "at_least", "value": self.value}


def Finite(k: int) -> OrdValue:
    return OrdValue(k, True)


def AtLeast(n: int) -> OrdValue:
    return OrdValue(n, False)


def ord_min(a: OrdValue, b: OrdValue) -> OrdValue:
    """Best certified statement about ``min(ord x, ord y)``."""
    if a.exact and b.exact:
        return a if a.value <= b.value else b
    if a.exact:
        return a if a.value <= b.value else b
    if b.exact:
        return b if b.value <= a.value else a
    return AtLeast(min(a.value, b.value))


def ord_max(a: OrdValue, b: OrdValue) -> OrdValue:
    """Best certified statement about ``max(ord x, ord y)``."""
    if a.exact and b.exact:
        return a if a.value >= b.value else b
    return AtLeast(max(a.value, b.value))


class TruncatedSeries:
    """Power series over an exact field known modulo ``z^precision``.

    Args:
        field: base field (``QQ`` or ``GF(p)``).
        coeffs: coefficients of ``z^0, z^1, ...``; padded with zeros or cut to
            ``precision``.
        precision: truncation order ``N >= 1``; defaults to ``len(coeffs)``.
    """

    __slots__ = ("field", "coeffs", "precision")

    def __init__(self, field: Field, coeffs: Iterable, precision: int | None = None):
        c = [field(x) for x in coeffs]
        if precision is None:
            precision = len(c)
        if precision < 1:
            raise ValueError("precision must be at least 1")
        if len(c) < precision:
            c.extend([field.zero] * (precision - len(c)))
        self.field = field
        self.coeffs = tuple(c[:precision])
        self.precision = precision

    @classmethod
    def from_coeffs(cls, coeffs: Sequence, precision: int | None = None, field: Field | None = None):
        if field is None:
            field = common_field(coeffs)
        return cls(field, coeffs, precision)

    @classmethod
    def zero(cls, field: Field, precision: int) -> TruncatedSeries:
        return cls(field, [], precision)

    @classmethod
    def one(cls, field: Field, precision: int) -> TruncatedSeries:
        return cls(field, [1], precision)

    @classmethod
    def monomial(cls, field: Field, k: int, precision: int, c=1) -> TruncatedSeries:
        out = [field.zero] * precision
        if k < precision:
            out[k] = field(c)
        return cls(field, out, precision)

    def __getitem__(self, k: int):
        return self.coeffs[k]

    def __len__(self):
        return self.precision

    def _check(self, other: TruncatedSeries):
        if other.field != self.field:
            raise FieldMismatch(f"series over {self.field} and {other.field}")

    def truncate(self, n: int) -> TruncatedSeries:
        """Same series with precision lowered to ``min(n, precision)``."""
        return TruncatedSeries(self.field, self.coeffs, min(n, self.precision))

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            self._check(other)
            n = min(self.precision, other.precision)
            return TruncatedSeries(self.field, [a + b for a, b in zip(self.coeffs[:n], other.coeffs[:n])], n)
        return self + TruncatedSeries(self.field, [other], self.precision)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.field, [-a for a in self.coeffs], self.precision)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return mul_series(self, other)
        c = self.field(other)
        return TruncatedSeries(self.field, [a * c for a in self.coeffs], self.precision)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = TruncatedSeries.one(self.field, self.precision)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.field == other.field and self.precision == other.precision and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.field, self.coeffs))

    def ord(self) -> OrdValue:
        return ord_series(self)

    def derivative(self) -> TruncatedSeries:
        """Term-wise derivative, known modulo ``z^(N-1)``."""
        if self.precision < 2:
            raise PrecisionExhausted("derivative of a series known only modulo z")
        return TruncatedSeries(self.field, [k * self.coeffs[k] for k in range(1, self.precision)], self.precision - 1)

    def shift(self, k: int) -> TruncatedSeries:
        """Multiply by ``z^k``; the product is known modulo ``z^(N+k)``."""
        return TruncatedSeries(self.field, [self.field.zero] * k + list(self.coeffs), self.precision + k)

    def is_monomial(self) -> tuple[int, object] | None:
        """``(k, c)`` if the known part is exactly ``c z^k`` with ``c != 0``."""
        nz = [(i, c) for i, c in enumerate(self.coeffs) if c]
        return nz[0] if len(nz) == 1 else None

    def inverse(self) -> TruncatedSeries:
        """Multiplicative inverse of a unit series at the same precision."""
        c0 = self.coeffs[0]
        if not c0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        inv0 = 1 / c0
        out = [inv0]
        for m in range(1, self.precision):
            acc = self.field.zero
            for k in range(1, m + 1):
                if self.coeffs[k]:
                    acc = acc + self.coeffs[k] * out[m - k]
            out.append(-acc * inv0)
        return TruncatedSeries(self.field, out, self.precision)

    def to_json(self) -> dict:
        return {
            "field": self.field.name,
            "coeffs": [format_scalar(c) for c in self.coeffs],
            "precision": self.precision,
        }

    @classmethod
    def from_json(cls, data: dict | str) -> TruncatedSeries:
        if isinstance(data, str):
            data = json.loads(data)
        coeffs = [parse_scalar(str(c)) for c in data["coeffs"]]
        name = data.get("field")
        if name:
            field = parse_field(name)
        else:
            field = common_field(coeffs)
        return cls(field, coeffs, int(data["precision"]))

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                cs = format_scalar(c) if not self.field.characteristic else str(c.v)
                terms.append(cs if k == 0 else f"{cs}*z^{k}")
        body = " + ".join(terms) if terms else "0"
        return f"TruncatedSeries({body} + O(z^{self.precision}) over {self.field.name})"


def parse_field(name: str) -> Field:
    """``"QQ"`` or ``"GF(p)"`` into a field object."""
    name = name.strip()
    if name in ("QQ", "Q", "0"):
        return QQ
    if name.startswith("GF(") and name.endswith(")"):
        return GF(int(name[3:-1]))
    if name.isdigit():
        return GF(int(name))
    raise ValueError(f"unknown field {name!r}")


def mul_series(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product, truncated to the smaller precision."""
    a._check(b)
    n = min(a.precision, b.precision)
    ac, bc = a.coeffs, b.coeffs
    zero = a.field.zero
    out = [zero] * n
    nz_b = [(j, bc[j]) for j in range(n) if bc[j]]
    for i in range(n):
        x = ac[i]
        if not x:
            continue
        for j, y in nz_b:
            if i + j >= n:
                break
            out[i + j] = out[i + j] + x * y
    return TruncatedSeries(a.field, out, n)


def ord_series(a: TruncatedSeries) -> OrdValue:
    for k, c in enumerate(a.coeffs):
        if c:
            return Finite(k)
    return AtLeast(a.precision)


def compose_series(a: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """Substitute ``g`` into ``a``.

    The result is correct modulo ``z^min(N_a * v, N_g)`` where ``v`` is the
    certified lower bound on the valuation of ``g``. A ``g`` whose known part
    vanishes entirely is treated as having valuation at least ``N_g``.

    Raises:
        InnerNotPositiveValuation: if ``g`` has a nonzero constant term, or
            ``g`` is known only modulo ``z``.
    """
    a._check(g)
    v = ord_series(g)
    if v.value == 0:
        raise InnerNotPositiveValuation("inner series has a nonzero constant term")
    if g.precision < 2 and not v.exact:
        raise InnerNotPositiveValuation("valuation of the inner series cannot be certified positive")
    n = min(a.precision * v.value, g.precision)
    fld = a.field
    mono = g.is_monomial()
    if mono is not None and mono[1] == fld.one:
        k = mono[0]
        out = [fld.zero] * n
        for i, c in enumerate(a.coeffs):
            if i * k >= n:
                break
            out[i * k] = c
        return TruncatedSeries(fld, out, n)
    gt = g.truncate(n)
    # Horner evaluation with terms of a that can influence the result
    top = min(a.precision - 1, (n - 1) // v.value)
    acc = TruncatedSeries(fld, [a.coeffs[top]], n)
    for i in range(top - 1, -1, -1):
        acc = mul_series(acc, gt) + a.coeffs[i]
    return acc


def series_from_polynomial_coeffs(field: Field, coeffs: Sequence, precision: int) -> TruncatedSeries:
    """A polynomial in ``z`` given by its coefficient list, as a series."""
    return TruncatedSeries(field, list(coeffs)[:precision], precision)
