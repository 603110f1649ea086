"""Exact scalars (rationals and prime fields) and dense exact linear algebra.

Rationals are :class:`fractions.Fraction`. Elements of a prime field are
:class:`Mod` values that carry their modulus, so accidental mixing of two
fields is caught at the operation that would combine them. Plain ``int``
operands are accepted everywhere and coerced into the other operand's field.

Elimination over the rationals is fraction-free: rows are first cleared of
denominators, then reduced with Bareiss' exact-division update, which keeps
every intermediate entry a minor of the input. Over a prime field plain
Gaussian elimination is used. Pivots are always the first usable entry,
scanning columns left to right and rows in their given order.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

from sympy import isprime

from .errors import FieldMismatch, ParseError


class Mod:
    """Residue class modulo a prime ``p``, stored as a value in ``[0, p)``."""

    __slots__ = ("v", "p")

    def __init__(self, v: int, p: int):
        self.v = v % p
        self.p = p

    def _other(self, other) -> int | None:
        if isinstance(other, Mod):
            if other.p != self.p:
                raise FieldMismatch(f"cannot combine GF({self.p}) and GF({other.p}) scalars")
            return other.v
        if isinstance(other, int) and not isinstance(other, bool):
            return other
        if isinstance(other, Fraction):
            raise FieldMismatch(f"cannot combine GF({self.p}) and rational scalars")
        return None

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is None else Mod(self.v + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is None else Mod(self.v - o, self.p)

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is None else Mod(o - self.v, self.p)

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is None else Mod(self.v * o, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if o % self.p == 0:
            raise ZeroDivisionError(f"division by zero in GF({self.p})")
        return Mod(self.v * pow(o, -1, self.p), self.p)

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return Mod(o, self.p) / self

    def __pow__(self, k: int):
        if k < 0:
            return Mod(1, self.p) / Mod(pow(self.v, -k, self.p), self.p)
        return Mod(pow(self.v, k, self.p), self.p)

    def __neg__(self):
        return Mod(-self.v, self.p)

    def __pos__(self):
        return self

    def __bool__(self):
        return self.v != 0

    def __eq__(self, other):
        if isinstance(other, Mod):
            return self.p == other.p and self.v == other.v
        if isinstance(other, int) and not isinstance(other, bool):
            return (self.v - other) % self.p == 0
        return NotImplemented

    def __hash__(self):
        return hash(("Mod", self.v, self.p))

    def __int__(self):
        return self.v

    def __repr__(self):
        return f"{self.v} mod {self.p}"

    __str__ = __repr__


class Field:
    """Common interface of the two supported base fields."""

    characteristic: int = 0
    name: str = ""

    def __call__(self, x):
        raise NotImplementedError

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def contains(self, x) -> bool:
        raise NotImplementedError

    def format(self, x) -> str:
        raise NotImplementedError

    def parse(self, text: str):
        return self(parse_scalar(text, self))

    def __repr__(self):
        return self.name


class RationalField(Field):
    """The field of rational numbers, elements are ``Fraction``."""

    characteristic = 0
    name = "QQ"

    def __call__(self, x) -> Fraction:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int) and not isinstance(x, bool):
            return Fraction(x)
        if isinstance(x, Mod):
            raise FieldMismatch(f"cannot coerce a GF({x.p}) scalar into QQ")
        if isinstance(x, str):
            return parse_scalar(x, self)
        raise TypeError(f"cannot coerce {type(x).__name__} into QQ")

    def contains(self, x) -> bool:
        return isinstance(x, Fraction)

    def format(self, x) -> str:
        x = self(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")


class PrimeField(Field):
    """The finite field with ``p`` elements."""

    def __init__(self, p: int):
        if not isinstance(p, int) or p < 2 or not isprime(p):
            raise ValueError(f"GF(p) needs a prime modulus, got {p!r}")
        self.p = p
        self.characteristic = p
        self.name = f"GF({p})"

    def __call__(self, x) -> Mod:
        if isinstance(x, Mod):
            if x.p != self.p:
                raise FieldMismatch(f"cannot coerce a GF({x.p}) scalar into GF({self.p})")
            return x
        if isinstance(x, int) and not isinstance(x, bool):
            return Mod(x, self.p)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise FieldMismatch(f"{x} has no image in GF({self.p})")
            return Mod(x.numerator * pow(x.denominator, -1, self.p), self.p)
        if isinstance(x, str):
            return self(parse_scalar(x, self))
        raise TypeError(f"cannot coerce {type(x).__name__} into GF({self.p})")

    def contains(self, x) -> bool:
        return isinstance(x, Mod) and x.p == self.p

    def format(self, x) -> str:
        return f"{self(x).v} mod {self.p}"

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))


QQ = RationalField()


@lru_cache(maxsize=None)
def GF(p: int) -> PrimeField:
    """Return the (cached) prime field with ``p`` elements."""
    return PrimeField(p)


def field_from_char(char: int) -> Field:
    """``0`` gives ``QQ``; a prime gives ``GF(char)``."""
    return QQ if char == 0 else GF(char)


def field_of(x) -> Field | None:
    """Field of a scalar, or ``None`` for a bare ``int`` (which fits anywhere)."""
    if isinstance(x, Mod):
        return GF(x.p)
    if isinstance(x, Fraction):
        return QQ
    if isinstance(x, int):
        return None
    raise TypeError(f"not a field scalar: {x!r}")


def common_field(values: Iterable, default: Field | None = None) -> Field:
    """The single field shared by ``values``; raises FieldMismatch on a mix."""
    found = None
    for v in values:
        f = field_of(v)
        if f is None:
            continue
        if found is None:
            found = f
        elif f != found:
            raise FieldMismatch(f"entries from {found} and {f}")
    if found is None:
        found = default if default is not None else QQ
    return found


_SCALAR_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?(?:\s+mod\s+(\d+))?\s*$")


def parse_scalar(text: str, field: Field | None = None):
    """Parse ``"3/2"``, ``"-5"`` or ``"4 mod 7"`` into an exact scalar.

    If ``field`` is given the result is coerced into it, and an explicit
    ``mod p`` suffix must agree with it.
    """
    m = _SCALAR_RE.match(text)
    if not m:
        raise ParseError(f"malformed scalar {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) else 1
    if den == 0:
        raise ParseError(f"zero denominator in {text!r}")
    if m.group(3):
        fld = GF(int(m.group(3)))
        if field is not None and field != fld:
            raise FieldMismatch(f"{text!r} is not an element of {field}")
        return fld(Fraction(num, den))
    value = Fraction(num, den)
    return value if field is None else field(value)


def format_scalar(x) -> str:
    """Inverse of :func:`parse_scalar`."""
    if isinstance(x, Mod):
        return repr(x)
    return QQ.format(x)


@dataclass(frozen=True)
class ExactMatrix:
    """Dense matrix over ``QQ`` or a prime field, stored row-major.

    Attributes:
        field: the base field shared by all entries.
        rows: number of rows.
        cols: number of columns.
        entries: tuple of ``rows * cols`` field elements.
    """

    field: Field
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0 or len(self.entries) != self.rows * self.cols:
            raise ValueError(f"{len(self.entries)} entries do not fill a {self.rows}x{self.cols} matrix")
        for e in self.entries:
            if not self.field.contains(e):
                raise FieldMismatch(f"entry {e!r} is not an element of {self.field}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], field: Field | None = None, cols: int | None = None) -> ExactMatrix:
        """Build a matrix from nested sequences, inferring the field if omitted."""
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        flat = [e for r in rows for e in r]
        if field is None:
            field = common_field(flat)
        else:
            common_field(flat, field)
            for e in flat:
                f = field_of(e)
                if f is not None and f != field:
                    raise FieldMismatch(f"entry {e!r} is not an element of {field}")
        return cls(field, len(rows), cols, tuple(field(e) for e in flat))

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[list]:
        return [list(self.row(i)) for i in range(self.rows)]

    def head(self, r: int) -> ExactMatrix:
        """Submatrix of the first ``r`` rows."""
        return ExactMatrix(self.field, r, self.cols, self.entries[:r * self.cols])

    def stack(self, other: ExactMatrix) -> ExactMatrix:
        if other.field != self.field:
            raise FieldMismatch(f"cannot stack {self.field} over {other.field}")
        if other.cols != self.cols:
            raise ValueError("column counts differ")
        return ExactMatrix(self.field, self.rows + other.rows, self.cols, self.entries + other.entries)

    def transpose(self) -> ExactMatrix:
        ent = tuple(self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows))
        return ExactMatrix(self.field, self.cols, self.rows, ent)

    def apply(self, v: Sequence) -> tuple:
        """Matrix-vector product ``M v``."""
        if len(v) != self.cols:
            raise ValueError("vector length does not match column count")
        v = [self.field(x) for x in v]
        zero = self.field.zero
        out = []
        for i in range(self.rows):
            acc = zero
            for a, b in zip(self.row(i), v):
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return tuple(out)


# ---------------------------------------------------------------------------
# integer / modular working representations


def _integer_rows(m: ExactMatrix) -> list[list[int]]:
    """Rational rows scaled by the lcm of their denominators."""
    out = []
    for i in range(m.rows):
        r = m.row(i)
        den = 1
        for x in r:
            den = math.lcm(den, x.denominator)
        out.append([x.numerator * (den // x.denominator) for x in r])
    return out


def _modular_rows(m: ExactMatrix) -> list[list[int]]:
    return [[x.v for x in m.row(i)] for i in range(m.rows)]


def _bareiss_echelon(a: list[list[int]], ncols: int) -> list[int]:
    """Fraction-free row echelon form in place; returns the pivot columns."""
    nrows = len(a)
    prev = 1
    r = 0
    pivots = []
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            a[r], a[piv] = a[piv], a[r]
        pr = a[r]
        pv = pr[c]
        for i in range(r + 1, nrows):
            ri = a[i]
            f = ri[c]
            if f:
                for j in range(c + 1, ncols):
                    ri[j] = (pv * ri[j] - f * pr[j]) // prev
            else:
                for j in range(c + 1, ncols):
                    if ri[j]:
                        ri[j] = (pv * ri[j]) // prev
            ri[c] = 0
        prev = pv
        pivots.append(c)
        r += 1
    return pivots


def _modular_rref(a: list[list[int]], ncols: int, p: int) -> list[int]:
    """Reduced row echelon form modulo ``p`` in place; returns pivot columns."""
    nrows = len(a)
    r = 0
    pivots = []
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if a[i][c] % p), None)
        if piv is None:
            continue
        if piv != r:
            a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], -1, p)
        pr = [(x * inv) % p for x in a[r]]
        a[r] = pr
        for i in range(nrows):
            if i != r:
                f = a[i][c] % p
                if f:
                    ri = a[i]
                    for j in range(c, ncols):
                        if pr[j]:
                            ri[j] = (ri[j] - f * pr[j]) % p
        pivots.append(c)
        r += 1
    return pivots


def _rational_rref(m: ExactMatrix) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced echelon rows (pivot 1) of a rational matrix via Bareiss."""
    a = _integer_rows(m)
    pivots = _bareiss_echelon(a, m.cols)
    rows = [[Fraction(x) for x in a[i]] for i in range(len(pivots))]
    for i in reversed(range(len(pivots))):
        c = pivots[i]
        pv = rows[i][c]
        rows[i] = [x / pv for x in rows[i]]
        for k in range(i):
            f = rows[k][c]
            if f:
                rows[k] = [x - f * y for x, y in zip(rows[k], rows[i])]
    return rows, pivots


def rref(m: ExactMatrix) -> tuple[list[list], list[int]]:
    """Nonzero rows of the reduced row echelon form and the pivot columns."""
    if m.field.characteristic == 0:
        rows, pivots = _rational_rref(m)
        return rows, pivots
    p = m.field.characteristic
    a = _modular_rows(m)
    pivots = _modular_rref(a, m.cols, p)
    return [[Mod(x, p) for x in a[i]] for i in range(len(pivots))], pivots


def kernel_basis(m: ExactMatrix) -> list[tuple]:
    """Canonical basis of the right null space of ``m``.

    The basis is returned in reduced echelon form: each vector's first
    nonzero entry is 1, these leading positions strictly increase, and every
    other vector is zero at each leading position. This form depends only on
    the null space, not on the elimination path.
    """
    rows, pivots = rref(m)
    fld = m.field
    free = [c for c in range(m.cols) if c not in set(pivots)]
    vecs = []
    for f in free:
        v = [fld.zero] * m.cols
        v[f] = fld.one
        for i, c in enumerate(pivots):
            if rows[i][f]:
                v[c] = -rows[i][f]
        vecs.append(v)
    if not vecs:
        return []
    basis, _ = rref(ExactMatrix.from_rows(vecs, fld))
    return [tuple(v) for v in basis]


def rank(m: ExactMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    if m.field.characteristic == 0:
        return len(_bareiss_echelon(_integer_rows(m), m.cols))
    return len(_modular_rref(_modular_rows(m), m.cols, m.field.characteristic))


def rank_profile(m: ExactMatrix) -> list[int]:
    """Ranks of the leading row blocks: entry ``r`` is the rank of rows ``0..r-1``.

    Computed as the pivot columns of an echelon form of the transpose, whose
    columns are scanned in the original row order.
    """
    if m.rows == 0:
        return [0]
    t = m.transpose()
    if m.field.characteristic == 0:
        # scaling a row of m is scaling a column of the transpose
        scaled = _integer_rows(m)
        a = [[scaled[i][j] for i in range(m.rows)] for j in range(m.cols)]
        pivots = _bareiss_echelon(a, m.rows)
    else:
        pivots = _modular_rref(_modular_rows(t), m.rows, m.field.characteristic)
    inc = set(pivots)
    out = [0]
    for i in range(m.rows):
        out.append(out[-1] + (1 if i in inc else 0))
    return out


def solve(m: ExactMatrix, rhs: Sequence) -> tuple | None:
    """One solution ``x`` of ``m x = rhs`` (free variables set to 0), or ``None``."""
    if len(rhs) != m.rows:
        raise ValueError("right-hand side length does not match row count")
    aug = ExactMatrix.from_rows([list(m.row(i)) + [rhs[i]] for i in range(m.rows)], m.field, m.cols + 1)
    rows, pivots = rref(aug)
    if pivots and pivots[-1] == m.cols:
        return None
    x = [m.field.zero] * m.cols
    for i, c in enumerate(pivots):
        x[c] = rows[i][m.cols]
    return tuple(x)


Scalar = Union[Fraction, Mod]
