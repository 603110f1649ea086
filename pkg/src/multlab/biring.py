"""Polynomials in k[z][X1..Xn] and in the bi-graded ring k[X0',X1'][X0..Xn].

Both rings use the same sparse representation: a dictionary from exponent
tuples to nonzero field elements. Affine exponents are ``(e_z, e_1, ..., e_n)``
and bi-graded exponents are ``(e_0', e_1', e_0, e_1, ..., e_n)``.

The bridge between the two is the bi-homogenization at bidegree ``(a, b)``::

    z^k X^e  ->  X0'^(a-k) X1'^k X0^(b-|e|) X^e

with inverse the dehomogenization ``(X0', X1', X0) = (1, z, 1)``. A functional
point is evaluated at the representative ``(1, z, 1, f_1(z), ..., f_n(z))``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .errors import ArityMismatch, FieldMismatch, NotBiHomogeneous, ParseError
from .exactalg import QQ, Field, Mod, common_field, field_of
from .series import TruncatedSeries, mul_series


class _Poly:
    """Shared sparse arithmetic for the two polynomial rings."""

    __slots__ = ("n", "field", "terms", "_hash")
    _offset = 0  # number of leading non-X exponent slots

    def __init__(self, n: int, field: Field, terms: dict | Iterable = (), *, _clean: bool = False):
        if n < 0:
            raise ValueError("n must be nonnegative")
        self.n = n
        self.field = field
        width = self._offset + n + (1 if isinstance(self, BiPolynomial) else 0)
        if _clean:
            self.terms = terms
        else:
            out = {}
            items = terms.items() if isinstance(terms, dict) else terms
            for e, c in items:
                e = tuple(e)
                if len(e) != width:
                    raise ArityMismatch(f"exponent {e} has length {len(e)}, expected {width}")
                if any(x < 0 for x in e):
                    raise ValueError(f"negative exponent in {e}")
                c = _coerce(field, c)
                if c:
                    s = out.get(e)
                    s = c if s is None else s + c
                    if s:
                        out[e] = s
                    else:
                        out.pop(e)
            self.terms = out
        self._hash = None

    # construction helpers -------------------------------------------------
    @classmethod
    def _width(cls, n: int) -> int:
        return cls._offset + n + (1 if cls is BiPolynomial else 0)

    @classmethod
    def var_names(cls, n: int) -> list[str]:
        raise NotImplementedError

    @classmethod
    def zero(cls, n: int, field: Field = QQ):
        return cls(n, field, {}, _clean=True)

    @classmethod
    def constant(cls, n: int, c, field: Field = QQ):
        return cls(n, field, {(0,) * cls._width(n): c})

    @classmethod
    def gen(cls, n: int, index: int, field: Field = QQ):
        """The variable in slot ``index`` of the exponent tuple."""
        e = [0] * cls._width(n)
        e[index] = 1
        return cls(n, field, {tuple(e): 1})

    @classmethod
    def monomial(cls, n: int, exps: Sequence[int], c=1, field: Field = QQ):
        return cls(n, field, {tuple(exps): c})

    def _new(self, terms: dict):
        return self.__class__(self.n, self.field, terms, _clean=True)

    def _coerce_other(self, other):
        if isinstance(other, _Poly):
            if other.__class__ is not self.__class__:
                raise TypeError(f"cannot combine {self.__class__.__name__} with {other.__class__.__name__}")
            if other.field != self.field:
                raise FieldMismatch(f"polynomials over {self.field} and {other.field}")
            if other.n != self.n:
                raise ArityMismatch(f"polynomials in n={self.n} and n={other.n} variables")
            return other
        if isinstance(other, (int, Fraction, Mod)) and not isinstance(other, bool):
            return self.__class__.constant(self.n, other, self.field)
        return None

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for e, c in o.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Mod)) and not isinstance(other, bool):
            c = _coerce(self.field, other)
            if not c:
                return self._new({})
            return self._new({e: v * c for e, v in self.terms.items()})
        o = self._coerce_other(other)
        if o is None:
            return NotImplemented
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e)
                out[e] = c1 * c2 if s is None else s + c1 * c2
        return self._new({e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = self.__class__.constant(self.n, 1, self.field)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, _Poly):
            return (
                other.__class__ is self.__class__
                and self.n == other.n
                and self.field == other.field
                and self.terms == other.terms
            )
        if isinstance(other, (int, Fraction, Mod)) and not isinstance(other, bool):
            return self == self.__class__.constant(self.n, other, self.field)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.__class__.__name__, self.n, self.field, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def diff(self, index: int):
        """Partial derivative with respect to the variable in slot ``index``."""
        out = {}
        for e, c in self.terms.items():
            k = e[index]
            if k:
                d = c * k
                if d:
                    e2 = list(e)
                    e2[index] = k - 1
                    out[tuple(e2)] = d
        return self._new(out)

    def substitute(self, images: Sequence[_Poly]):
        """Replace each variable by the corresponding polynomial in ``images``.

        All images must live in one ring; the result lives there too.
        """
        if len(images) != self._width(self.n):
            raise ArityMismatch(f"{len(images)} images for {self._width(self.n)} variables")
        target = images[0]
        result = target.__class__.zero(target.n, target.field)
        powers: dict[tuple[int, int], _Poly] = {}

        def power(i: int, k: int):
            key = (i, k)
            if key not in powers:
                powers[key] = images[i] if k == 1 else power(i, k - 1) * images[i]
            return powers[key]

        for e, c in self.terms.items():
            term = target.__class__.constant(target.n, _coerce(target.field, c), target.field)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            result = result + term
        return result

    def change_field(self, field: Field):
        """Coefficients mapped into ``field`` (e.g. reduction of rationals mod p)."""
        return self.__class__(self.n, field, {e: field(c) for e, c in self.terms.items()})

    def with_n(self, n: int):
        """Same polynomial viewed in a ring with ``n >= self.n`` X-variables."""
        if n < self.n:
            raise ArityMismatch(f"cannot drop variables: {self.n} -> {n}")
        pad = (0,) * (n - self.n)
        return self.__class__(n, self.field, {e + pad: c for e, c in self.terms.items()}, _clean=True)

    def sorted_terms(self) -> list[tuple[tuple, object]]:
        return sorted(self.terms.items(), key=lambda t: self._order_key(t[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        names = self.var_names(self.n)
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            neg, mag = _split_sign(c)
            if not mono:
                body = mag
            elif mag == "1":
                body = mono
            else:
                body = f"{mag}*{mono}"
            if not parts:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f" - {body}" if neg else f" + {body}")
        return "".join(parts)

    def __repr__(self):
        return f"{self.__class__.__name__}({str(self)!r}, n={self.n}, field={self.field.name})"

    def to_json(self) -> str:
        return str(self)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)


def _coerce(field: Field, c):
    f = field_of(c)
    if f is not None and f != field and not (f == QQ and field.characteristic):
        raise FieldMismatch(f"{c!r} is not an element of {field}")
    return field(c)


def _split_sign(c) -> tuple[bool, str]:
    if isinstance(c, Mod):
        return False, str(c.v)
    if c < 0:
        c = -c
        return True, str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return False, str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class AffinePolynomial(_Poly):
    """Polynomial in ``k[z][X1..Xn]``; exponents are ``(e_z, e_1, ..., e_n)``.

    Its height is ``deg_z``.
    """

    __slots__ = ()
    _offset = 1

    @classmethod
    def var_names(cls, n: int) -> list[str]:
        return ["z"] + [f"X{i}" for i in range(1, n + 1)]

    @staticmethod
    def _order_key(e):
        return (-e[0], -sum(e[1:])) + tuple(-x for x in e[1:])

    @classmethod
    def z(cls, n: int, field: Field = QQ):
        return cls.gen(n, 0, field)

    @classmethod
    def X(cls, n: int, i: int, field: Field = QQ):
        if not 1 <= i <= n:
            raise ArityMismatch(f"X{i} is not a variable of k[z][X1..X{n}]")
        return cls.gen(n, i, field)

    @property
    def deg_z(self) -> int:
        return max((e[0] for e in self.terms), default=-1)

    @property
    def deg_X(self) -> int:
        return max((sum(e[1:]) for e in self.terms), default=-1)

    @property
    def height(self) -> int:
        return self.deg_z

    def is_homogeneous_in_X(self) -> bool:
        return len({sum(e[1:]) for e in self.terms}) <= 1

    def coefficient_polys(self) -> dict[tuple, list]:
        """Map X-exponent ``e`` to the coefficient list of its polynomial in z."""
        out: dict[tuple, list] = {}
        for e, c in self.terms.items():
            lst = out.setdefault(e[1:], [])
            if len(lst) <= e[0]:
                lst.extend([self.field.zero] * (e[0] + 1 - len(lst)))
            lst[e[0]] = c
        return out

    def eval_z0(self, values: Sequence) -> object:
        """Value at ``z = 0`` and ``X = values``."""
        acc = self.field.zero
        vals = [self.field(v) for v in values]
        for e, c in self.terms.items():
            if e[0]:
                continue
            t = c
            for v, k in zip(vals, e[1:]):
                if k:
                    t = t * v ** k
            acc = acc + t
        return acc

    def diff_X(self, i: int) -> AffinePolynomial:
        return self.diff(i)

    def diff_z(self) -> AffinePolynomial:
        return self.diff(0)


class BiPolynomial(_Poly):
    """Polynomial in ``k[X0',X1'][X0..Xn]``; exponents ``(e_0', e_1', e_0, ..., e_n)``."""

    __slots__ = ()
    _offset = 2

    @classmethod
    def var_names(cls, n: int) -> list[str]:
        return ["X0'", "X1'"] + [f"X{i}" for i in range(0, n + 1)]

    @staticmethod
    def _order_key(e):
        return (-(e[0] + e[1]), -e[0], -sum(e[2:])) + tuple(-x for x in e[2:])

    @classmethod
    def Xp(cls, n: int, i: int, field: Field = QQ):
        """``X0'`` (i=0) or ``X1'`` (i=1)."""
        if i not in (0, 1):
            raise ArityMismatch(f"X{i}' is not a variable")
        return cls.gen(n, i, field)

    @classmethod
    def X(cls, n: int, i: int, field: Field = QQ):
        if not 0 <= i <= n:
            raise ArityMismatch(f"X{i} is not a variable of the ring with n={n}")
        return cls.gen(n, 2 + i, field)

    @property
    def deg_Xprime(self) -> int:
        return max((e[0] + e[1] for e in self.terms), default=-1)

    @property
    def deg_X(self) -> int:
        return max((sum(e[2:]) for e in self.terms), default=-1)

    @property
    def bidegree(self) -> tuple[int, int]:
        """``(deg_X', deg_X)``; ``(-1, -1)`` for the zero polynomial."""
        return (self.deg_Xprime, self.deg_X)

    def is_bihomogeneous(self) -> bool:
        return len({(e[0] + e[1], sum(e[2:])) for e in self.terms}) <= 1

    def require_bihomogeneous(self) -> tuple[int, int]:
        if not self.is_bihomogeneous():
            raise NotBiHomogeneous(f"{self} is not bi-homogeneous")
        return self.bidegree


# ---------------------------------------------------------------------------
# monomial bases


def x_monomials(n: int, b: int, exact: bool = False) -> list[tuple[int, ...]]:
    """Exponents ``(e_1..e_n)`` with ``|e| <= b`` (or ``== b``), lowest degree first."""
    out = []
    for d in ([b] if exact else range(b + 1)):
        for e in itertools.product(range(d + 1), repeat=n):
            if sum(e) == d:
                out.append(e)
    out.sort(key=lambda e: (sum(e),) + tuple(-x for x in e))
    return out


def affine_monomials(n: int, a: int, b: int) -> list[tuple[int, ...]]:
    """Affine exponents ``(k, e)`` with ``k <= a``, ``|e| <= b``.

    Ordered by X-monomial first, then by the power of z. There are
    ``(a+1) * C(b+n, n)`` of them, one per monomial of bidegree ``(a, b)``.
    """
    return [(k,) + e for e in x_monomials(n, b) for k in range(a + 1)]


def bihomogeneous_monomials(n: int, a: int, b: int) -> list[tuple[int, ...]]:
    """Bi-graded exponents of bidegree exactly ``(a, b)``, matching :func:`affine_monomials`."""
    return [(a - m[0], m[0], b - sum(m[1:])) + m[1:] for m in affine_monomials(n, a, b)]


# ---------------------------------------------------------------------------
# homogenization


def bihomogenize(P: AffinePolynomial, bidegree: tuple[int, int] | None = None) -> BiPolynomial:
    """Bi-homogenization of ``P`` at ``bidegree`` (default ``(deg_z P, deg_X P)``)."""
    a, b = bidegree if bidegree is not None else (max(P.deg_z, 0), max(P.deg_X, 0))
    if P.terms and (P.deg_z > a or P.deg_X > b):
        raise ValueError(f"bidegree {(a, b)} is below the degrees {(P.deg_z, P.deg_X)} of {P}")
    out = {}
    for e, c in P.terms.items():
        k, x = e[0], e[1:]
        out[(a - k, k, b - sum(x)) + x] = c
    return BiPolynomial(P.n, P.field, out, _clean=True)


def dehomogenize(Q: BiPolynomial) -> AffinePolynomial:
    """Specialize ``(X0', X1', X0) = (1, z, 1)``."""
    out: dict = {}
    for e, c in Q.terms.items():
        key = (e[1],) + e[3:]
        s = out.get(key)
        s = c if s is None else s + c
        if s:
            out[key] = s
        else:
            out.pop(key, None)
    return AffinePolynomial(Q.n, Q.field, out, _clean=True)


# ---------------------------------------------------------------------------
# functional points and evaluation


@dataclass(frozen=True)
class FunctionalPoint:
    """The point ``(1, z, 1, f_1(z), ..., f_n(z))`` given by truncated series.

    Attributes:
        series: the coordinate series ``f_1..f_n``; shared field and precision.
        t_f: declared transcendence degree of ``k(z)(f)`` over ``k(z)``, if known.
        label: free-form name used in reports.
    """

    series: tuple[TruncatedSeries, ...]
    t_f: int | None = None
    label: str = ""
    _cache: dict = dc_field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if not self.series:
            raise ArityMismatch("a functional point needs at least one coordinate")
        object.__setattr__(self, "series", tuple(self.series))
        f0 = self.series[0]
        for s in self.series[1:]:
            if s.field != f0.field:
                raise FieldMismatch("coordinate series over different fields")
            if s.precision != f0.precision:
                raise ValueError("coordinate series with different precisions")

    @property
    def n(self) -> int:
        return len(self.series)

    @property
    def field(self) -> Field:
        return self.series[0].field

    @property
    def precision(self) -> int:
        return self.series[0].precision

    def truncate(self, N: int) -> FunctionalPoint:
        return FunctionalPoint(tuple(s.truncate(N) for s in self.series), self.t_f, self.label)

    def change_field(self, field: Field) -> FunctionalPoint:
        return FunctionalPoint(
            tuple(TruncatedSeries(field, s.coeffs, s.precision) for s in self.series), self.t_f, self.label
        )

    def power_product(self, e: Sequence[int]) -> TruncatedSeries:
        """``f^e = prod f_i^e_i``, memoized per point."""
        e = tuple(e)
        cache = self._cache
        if e in cache:
            return cache[e]
        if not any(e):
            out = TruncatedSeries.one(self.field, self.precision)
        else:
            i = max(j for j, k in enumerate(e) if k)
            prev = list(e)
            prev[i] -= 1
            out = mul_series(self.power_product(prev), self.series[i])
        cache[e] = out
        return out

    def values_at_zero(self) -> tuple:
        return tuple(s.coeffs[0] for s in self.series)


def _poly_times_series(coeffs: Sequence, s: TruncatedSeries) -> TruncatedSeries:
    """Multiply a series by an exact polynomial in z given by its coefficients."""
    N = s.precision
    out = [s.field.zero] * N
    sc = s.coeffs
    for k, c in enumerate(coeffs):
        if not c or k >= N:
            continue
        for j in range(N - k):
            if sc[j]:
                out[j + k] = out[j + k] + c * sc[j]
    return TruncatedSeries(s.field, out, N)


def evaluate(P: AffinePolynomial | BiPolynomial, F: FunctionalPoint) -> TruncatedSeries:
    """``P(1, z, 1, f_1, ..., f_n)`` as a series at the precision of ``F``."""
    if isinstance(P, BiPolynomial):
        P = dehomogenize(P)
    if P.n > F.n:
        raise ArityMismatch(f"polynomial in {P.n} X-variables at a point with {F.n} coordinates")
    fld = F.field
    if P.field != fld:
        if P.field.characteristic == 0 and fld.characteristic:
            P = P.change_field(fld)
        else:
            raise FieldMismatch(f"cannot evaluate a polynomial over {P.field} at a point over {fld}")
    pad = (0,) * (F.n - P.n)
    acc = TruncatedSeries.zero(fld, F.precision)
    for e, cz in P.coefficient_polys().items():
        acc = acc + _poly_times_series(cz, F.power_product(e + pad))
    return acc


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|(z)|X(\d+)(')?|([-+*^/()]))")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int
    index: int = -1
    prime: bool = False


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", position=pos)
        start = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
        if m.group(1):
            toks.append(_Tok("num", m.group(1), start))
        elif m.group(2):
            if m.end() < len(text) and (text[m.end()].isalnum() or text[m.end()] == "_"):
                raise ParseError("unknown identifier", position=start)
            toks.append(_Tok("var", "z", start))
        elif m.group(3) is not None:
            toks.append(_Tok("var", m.group(0).strip(), start, int(m.group(3)), bool(m.group(4))))
        else:
            toks.append(_Tok("op", m.group(5), start))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


def parse_poly(text: str, field: Field = QQ, kind: str = "auto", n: int | None = None):
    """Parse a polynomial written with ``z, X0', X1', X0..Xn``, numbers, ``+ - * / ^`` and parentheses.

    Args:
        text: the expression.
        field: coefficient field.
        kind: ``"affine"``, ``"bi"`` or ``"auto"``. Auto picks the bi-graded ring
            when ``X0'``, ``X1'`` or ``X0`` occur, the affine ring otherwise.
        n: number of X-variables; defaults to the largest index used (at least 1).

    Raises:
        ParseError: on syntax errors or when ``z`` is mixed with ``X0'``, ``X1'``
            or ``X0``.
    """
    toks = _tokenize(text)
    has_z = any(t.kind == "var" and t.text == "z" for t in toks)
    homog = [t for t in toks if t.kind == "var" and (t.prime or t.text == "X0")]
    for t in toks:
        if t.kind == "var" and t.prime and t.index > 1:
            raise ParseError(f"{t.text} is not a variable (only X0' and X1')", position=t.pos)
    if has_z and homog:
        raise ParseError("mixed affine (z) and bi-homogeneous (X0', X1', X0) variables", position=homog[0].pos)
    if kind == "auto":
        kind = "bi" if homog else "affine"
    if kind == "affine" and homog:
        raise ParseError(f"{homog[0].text} is not allowed in an affine polynomial", position=homog[0].pos)
    if kind == "bi" and has_z:
        pos = next(t.pos for t in toks if t.text == "z")
        raise ParseError("z is not allowed in a bi-homogeneous polynomial", position=pos)
    if kind not in ("affine", "bi"):
        raise ValueError(f"unknown polynomial kind {kind!r}")
    max_index = max((t.index for t in toks if t.kind == "var" and not t.prime and t.text != "z"), default=0)
    if n is None:
        n = max(max_index, 1)
    elif max_index > n:
        raise ArityMismatch(f"X{max_index} used but n={n}")
    cls = AffinePolynomial if kind == "affine" else BiPolynomial
    return _Parser(toks, cls, n, field).parse()


class _Parser:
    def __init__(self, toks, cls, n, field):
        self.toks = toks
        self.i = 0
        self.cls = cls
        self.n = n
        self.field = field

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def parse(self):
        p = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ParseError(f"unexpected {t.text!r}", position=t.pos)
        return p

    def expr(self):
        p = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self):
        p = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            t = self.take()
            q = self.unary()
            if t.text == "*":
                p = p * q
            else:
                if any(any(e) for e in q.terms) or not q.terms:
                    raise ParseError("division only by nonzero constants", position=t.pos)
                c = next(iter(q.terms.values()))
                p = p * (1 / c)
        return p

    def unary(self):
        t = self.peek()
        if t.kind == "op" and t.text in "+-":
            self.take()
            p = self.unary()
            return -p if t.text == "-" else p
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            t = self.take()
            if t.kind != "num":
                raise ParseError("exponent must be a nonnegative integer literal", position=t.pos)
            return base ** int(t.text)
        return base

    def atom(self):
        t = self.take()
        if t.kind == "num":
            return self.cls.constant(self.n, int(t.text), self.field)
        if t.kind == "var":
            if t.text == "z":
                return self.cls.gen(self.n, 0, self.field)
            if t.prime:
                return self.cls.gen(self.n, t.index, self.field)
            if self.cls is BiPolynomial:
                return self.cls.gen(self.n, 2 + t.index, self.field)
            return self.cls.gen(self.n, t.index, self.field)
        if t.kind == "op" and t.text == "(":
            p = self.expr()
            close = self.take()
            if close.kind != "op" or close.text != ")":
                raise ParseError("expected ')'", position=close.pos)
            return p
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", position=t.pos)


# ---------------------------------------------------------------------------
# random generation


def random_affine(rng, n: int, deg_z: int, deg_X: int, field: Field = QQ, density: float = 0.5, coeff: int = 3) -> AffinePolynomial:
    """Random nonzero affine polynomial with ``deg_z <= deg_z`` and ``deg_X <= deg_X``."""
    monos = affine_monomials(n, deg_z, deg_X)
    while True:
        terms = {m: rng.randint(-coeff, coeff) for m in monos if rng.random() < density}
        P = AffinePolynomial(n, field, terms)
        if P.terms:
            return P


def random_bihomogeneous(rng, n: int, bidegree: tuple[int, int], field: Field = QQ, density: float = 0.5, coeff: int = 3) -> BiPolynomial:
    """Random nonzero bi-homogeneous polynomial of exactly the given bidegree."""
    monos = bihomogeneous_monomials(n, *bidegree)
    while True:
        terms = {m: rng.randint(-coeff, coeff) for m in monos if rng.random() < density}
        Q = BiPolynomial(n, field, terms)
        if Q.terms:
            return Q


def evaluation_rows(F: FunctionalPoint, a: int, b: int, N: int | None = None) -> list[list]:
    """Taylor coefficients of the monomials ``z^k f^e`` (``k <= a``, ``|e| <= b``).

    Row ``m`` holds the coefficient of ``z^m``; column order follows
    :func:`affine_monomials`. A coefficient vector ``v`` of a polynomial of
    bidegree ``(a, b)`` evaluates to the series whose first ``N`` coefficients
    are ``M v``.
    """
    N = F.precision if N is None else N
    if N > F.precision:
        raise ValueError(f"requested {N} rows but the point is known to precision {F.precision}")
    zero = F.field.zero
    cols = []
    for e in x_monomials(F.n, b):
        s = F.power_product(e).coeffs
        for k in range(a + 1):
            cols.append([zero] * k + list(s[: N - k]) if k < N else [zero] * N)
    return [[c[m] for c in cols] for m in range(N)]


def poly_from_vector(v: Sequence, n: int, a: int, b: int, field: Field) -> BiPolynomial:
    """Bi-homogeneous polynomial of bidegree ``(a, b)`` with coefficient vector ``v``."""
    monos = bihomogeneous_monomials(n, a, b)
    if len(v) != len(monos):
        raise ArityMismatch(f"{len(v)} coefficients for {len(monos)} monomials")
    return BiPolynomial(n, field, {m: c for m, c in zip(monos, v) if c})


def vector_from_poly(Q: BiPolynomial, a: int, b: int) -> list:
    """Inverse of :func:`poly_from_vector`; ``Q`` must have bidegree ``(a, b)`` or be zero."""
    if Q.terms and Q.require_bihomogeneous() != (a, b):
        raise NotBiHomogeneous(f"{Q} does not have bidegree {(a, b)}")
    return [Q.terms.get(m, Q.field.zero) for m in bihomogeneous_monomials(Q.n, a, b)]
