"""Explicit constants and threshold right-hand sides.

Most of these numbers are exponent towers. :class:`BigOrLog` keeps a value
exact while it fits a bit budget and otherwise keeps a rigorous interval
enclosure of an iterated base-2 logarithm of it. Arithmetic on such values
works in log space, so no intermediate result is ever materialized beyond the
budget.
"""

from __future__ import annotations

import sys
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction

from mpmath.ctx_iv import MPIntervalContext

from .errors import MissingParam, PrecisionExhausted

DEFAULT_BIT_BUDGET = 2**20
WORKING_PREC = 192
_BIG = 2**64  # level-0 intervals above this move one level up

IV = MPIntervalContext()
IV.prec = WORKING_PREC
_LN2 = IV.log(2)


def _ivq(q: Fraction):
    q = Fraction(q)
    return IV.mpf(q.numerator) / IV.mpf(q.denominator)


def _iv_log2(x):
    return IV.log(x) / _LN2


def _iv_exp2(x):
    return IV.mpf(2) ** x


def _lo(x):
    return x.a


def _hi(x):
    return x.b


def _bits(q: Fraction) -> int:
    return max(q.numerator.bit_length(), q.denominator.bit_length())


@contextmanager
def _unlimited_digits():
    get = getattr(sys, "get_int_max_str_digits", None)
    if get is None:
        yield
        return
    old = get()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(old)


@dataclass(frozen=True)
class BigOrLog:
    """A nonnegative real given exactly or as an iterated logarithm.

    Exactly one of the two representations is used:

    * ``exact`` is a :class:`~fractions.Fraction` (``level == 0``);
    * ``x`` is an interval and the value is ``2^2^...^x`` with ``level``
      exponentiations (``level == 0`` means the interval encloses the value).

    ``budget`` is the largest bit size kept exact.
    """

    level: int
    exact: Fraction | None = None
    x: object = None
    budget: int = DEFAULT_BIT_BUDGET

    # -- construction -------------------------------------------------------

    @classmethod
    def of(cls, v, budget: int = DEFAULT_BIT_BUDGET) -> BigOrLog:
        q = Fraction(v)
        if q < 0:
            raise ValueError("only nonnegative values are represented")
        if _bits(q) > budget:
            return cls(0, None, _ivq(q), budget)._normalize()
        return cls(0, q, None, budget)

    def _with(self, level: int, x) -> BigOrLog:
        return BigOrLog(level, None, x, self.budget)._normalize()

    def _normalize(self) -> BigOrLog:
        level, x = self.level, self.x
        if x is None:
            return self
        while True:
            if _lo(x) >= _BIG:
                x, level = _iv_log2(x), level + 1
            elif level >= 1 and _hi(x) < 64:
                x, level = _iv_exp2(x), level - 1
            else:
                break
        return BigOrLog(level, None, x, self.budget)

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def _as_interval(self):
        """Level-0 interval, available when ``level <= 1``."""
        if self.exact is not None:
            return _ivq(self.exact)
        if self.level == 0:
            return self.x
        if self.level == 1:
            return _iv_exp2(self.x)
        raise OverflowError("value too large to materialize")

    # -- log-space primitives ------------------------------------------------

    def log2(self) -> BigOrLog:
        if self.exact is not None:
            if self.exact <= 0:
                raise ValueError("log2 of zero")
            q = self.exact
            if q.denominator == 1 and q.numerator & (q.numerator - 1) == 0:
                return BigOrLog.of(q.numerator.bit_length() - 1, self.budget)
            return self._with(0, _iv_log2(_ivq(q)))
        if self.level == 0:
            return self._with(0, _iv_log2(self.x))
        return self._with(self.level - 1, self.x)

    def exp2(self) -> BigOrLog:
        if self.exact is not None and self.exact.denominator == 1 and abs(self.exact) <= self.budget:
            e = self.exact.numerator
            return BigOrLog.of(Fraction(2) ** e, self.budget)
        if self.exact is not None:
            return self._with(1, _ivq(self.exact))
        return self._with(self.level + 1, self.x)

    def _widen_up(self) -> BigOrLog:
        """Enclosure of ``log2(2^self + 2^b)`` for any ``b <= self`` when ``self >= 2^60``."""
        return BigOrLog(self.level, None, self.x + IV.mpf([0, 2.0**-50]), self.budget)

    def _large(self) -> bool:
        return self.exact is None and self.level >= 1

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other) -> BigOrLog:
        other = _coerce(other, self.budget)
        if self.exact is not None and other.exact is not None:
            return BigOrLog.of(self.exact + other.exact, self.budget)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.level <= 1 and other.level <= 1:
            return self._with(0, self._as_interval() + other._as_interval())
        a, b = self.log2(), other.log2()
        m = a.max(b)
        if m._large() and _lo(m.x) >= 60:
            return m._widen_up().exp2()
        return (a + b).exp2()  # unreachable for normalized inputs

    __radd__ = __add__

    def __mul__(self, other) -> BigOrLog:
        other = _coerce(other, self.budget)
        if self.exact is not None and other.exact is not None:
            if _bits(self.exact) + _bits(other.exact) <= self.budget:
                return BigOrLog.of(self.exact * other.exact, self.budget)
        if self.is_zero() or other.is_zero():
            return BigOrLog.of(0, self.budget)
        if self.level == 0 and other.level == 0:
            return self._with(0, self._as_interval() * other._as_interval())
        return (self.log2() + other.log2()).exp2()

    __rmul__ = __mul__

    def __pow__(self, k: int) -> BigOrLog:
        if k < 0:
            raise ValueError("only nonnegative integer powers")
        if k == 0:
            return BigOrLog.of(1, self.budget)
        if self.exact is not None and _bits(self.exact) * k <= self.budget:
            return BigOrLog.of(self.exact**k, self.budget)
        if self.is_zero():
            return self
        return (self.log2() * k).exp2()

    def power_of(self, base) -> BigOrLog:
        """``base ** self`` for a rational ``base >= 1``."""
        base = Fraction(base)
        if base < 1:
            raise ValueError("the base of a tower must be at least 1")
        if base == 1:
            return BigOrLog.of(1, self.budget)
        if self.exact is not None and self.exact.denominator == 1 and self.exact * _bits(base) <= self.budget:
            return BigOrLog.of(base ** self.exact.numerator, self.budget)
        return (self * BigOrLog.of(base, self.budget).log2()).exp2()

    def max(self, other) -> BigOrLog:
        other = _coerce(other, self.budget)
        if self.exact is not None and other.exact is not None:
            return self if self.exact >= other.exact else other
        if self.level == 0 and other.level == 0:
            a, b = self._as_interval(), other._as_interval()
            if _lo(a) >= _hi(b):
                return self
            if _lo(b) >= _hi(a):
                return other
            return self._with(0, IV.mpf([max(_lo(a), _lo(b)), max(_hi(a), _hi(b))]))
        if self.level != other.level:
            return self if self.level > other.level else other
        a, b = self.log2(), other.log2()
        m = a.max(b)
        return self if m is a else other if m is b else m.exp2()

    def is_zero(self) -> bool:
        return self.exact == 0

    # -- reporting ------------------------------------------------------------

    def log2_interval(self):
        """Enclosure of ``log2`` of the value (``level <= 2``)."""
        if self.exact is not None:
            return _iv_log2(_ivq(self.exact))
        if self.level == 0:
            return _iv_log2(self.x)
        if self.level == 1:
            return self.x
        if self.level == 2:
            return _iv_exp2(self.x)
        raise OverflowError("log2 of this value is itself a tower")

    def to_json(self) -> dict:
        if self.exact is not None:
            with _unlimited_digits():
                return {"kind": "exact", "exact": str(self.exact)}
        if self.level <= 1:
            x = self.log2_interval()
            return {"kind": "log2", "log2": _fmt(x.mid), "error": _fmt(x.delta / 2)}
        return {"kind": "iterated_log2", "depth": self.level, "value": _fmt(self.x.mid), "error": _fmt(self.x.delta / 2)}

    def __str__(self):
        if self.exact is not None:
            with _unlimited_digits():
                return str(self.exact)
        if self.level <= 1:
            return f"2^{_fmt(self.log2_interval().mid, 20)}"
        return "2^" * self.level + f"{_fmt(self.x.mid, 20)}"


def _fmt(x, digits: int = 30) -> str:
    return IV.nstr(x, digits).strip("[]").split(",")[0].strip()


def _coerce(v, budget: int) -> BigOrLog:
    return v if isinstance(v, BigOrLog) else BigOrLog.of(v, budget)


# ---------------------------------------------------------------------------
# named constants


def c_n(n: int) -> int:
    """``2^(n+1) (n+2)^((n+1)(n+3))``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return 2 ** (n + 1) * (n + 2) ** ((n + 1) * (n + 3))


def tower_base(n: int) -> int:
    """``E = 6^(n+2) (n+2)^((n+1)^2)``, the factor shared by the rho recursion and C_m."""
    return 6 ** (n + 2) * (n + 2) ** ((n + 1) ** 2)


def rho_sequence(n: int, mu, nu0, upto: int | None = None, budget: int = DEFAULT_BIT_BUDGET) -> list[BigOrLog]:
    """``rho_0 = 0``, ``rho_1 = 1``, ``rho_(i+1) = E rho_i^(n+2) M^(E rho_i^(n+1))``, ``M = max(mu, nu0)``."""
    upto = n + 1 if upto is None else upto
    M = max(Fraction(mu), Fraction(nu0))
    if M < 1:
        raise ValueError("max(mu, nu0) must be at least 1")
    E = BigOrLog.of(tower_base(n), budget)
    rho = [BigOrLog.of(0, budget), BigOrLog.of(1, budget)]
    while len(rho) <= upto:
        r = rho[-1]
        rho.append(E * r ** (n + 2) * (E * r ** (n + 1)).power_of(M))
    return rho[: upto + 1]


@dataclass(frozen=True)
class ExplicitConstants:
    n: int
    mu: Fraction
    nu0: Fraction
    c_n: int
    rho: tuple[BigOrLog, ...]
    C_m: BigOrLog
    C_iso: Fraction | None = None
    ord_isotrivial: int | None = None

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "mu": str(self.mu),
            "nu0": str(self.nu0),
            "c_n": str(self.c_n),
            "rho": [r.to_json() for r in self.rho],
            "C_m": self.C_m.to_json(),
        }
        for i, r in enumerate(self.rho):
            if r.is_exact:
                out[f"rho{i}"] = str(r)
        if self.C_iso is not None:
            out["C_iso"] = str(self.C_iso)
            out["Ord_f_wedge_f0"] = self.ord_isotrivial
        return out


def isotrivial_ord(F) -> int:
    """``Ord(f ^ f(0))`` for the point ``(1 : f)`` against its constant term."""
    from .geometry import projective_ord
    from .series import TruncatedSeries

    N, fld = F.precision, F.field
    x = (TruncatedSeries.one(fld, N),) + F.series
    y = (TruncatedSeries.one(fld, N),) + tuple(TruncatedSeries(fld, [c], N) for c in F.values_at_zero())
    o = projective_ord(x, y)
    if not o.exact:
        raise PrecisionExhausted(f"f agrees with f(0) to the known precision ({o})")
    return o.value


def explicit_constants(n: int, mu, nu0, F=None, ord_value: int | None = None, budget: int = DEFAULT_BIT_BUDGET) -> ExplicitConstants:
    """``c_n``, ``rho_0..rho_(n+1)``, ``C_m`` and, given ``F`` or the order, ``C_iso``.

    ``C_m = E rho_(n+1)^(n+1)`` and ``C_iso = ((c_n Ord(f ^ f(0)) + 1) / min(nu0, mu))^n``.
    """
    mu, nu0 = Fraction(mu), Fraction(nu0)
    if mu <= 0 or nu0 <= 0:
        raise ValueError("mu and nu0 must be positive")
    cn = c_n(n)
    rho = rho_sequence(n, mu, nu0, budget=budget)
    Cm = BigOrLog.of(tower_base(n), budget) * rho[n + 1] ** (n + 1)
    iso = None
    if ord_value is None and F is not None:
        ord_value = isotrivial_ord(F)
    if ord_value is not None:
        iso = ((cn * Fraction(ord_value) + 1) / min(nu0, mu)) ** n
    return ExplicitConstants(n, mu, nu0, cn, tuple(rho), Cm, iso, ord_value)


# ---------------------------------------------------------------------------
# thresholds

THRESHOLD_PARAMS = {
    "transference": ("C", "t", "mu", "nu0", "nu1", "hP", "degP"),
    "lmgp_rhs": ("K", "mu", "nu0", "nu1", "n", "t", "degXp", "degX"),
    "stability_rhs": ("K0", "deg0_q", "deg1_q"),
    "estimationP": ("n", "t", "mu", "nu0", "nu1", "lambda", "degXp", "degX", "ord_f"),
}
TRANSFERENCE_CONDITION_PARAMS = ("n", "C_f", "h_pf", "deg_pf")


@dataclass(frozen=True)
class ThresholdResult:
    kind: str
    value: object
    conditions: dict

    def to_json(self) -> dict:
        v = self.value.to_json() if isinstance(self.value, BigOrLog) else {"kind": "exact", "exact": str(self.value)}
        return {"kind": self.kind, "value": v, "conditions": self.conditions}


def _require(params: dict, names) -> dict:
    missing = [k for k in names if k not in params]
    if missing:
        raise MissingParam(f"missing parameter(s): {', '.join(missing)}")
    return {k: Fraction(params[k]) for k in names}


def _int(q: Fraction, name: str) -> int:
    if q.denominator != 1 or q < 0:
        raise ValueError(f"{name} must be a nonnegative integer")
    return q.numerator


def threshold(kind: str, params: dict, budget: int = DEFAULT_BIT_BUDGET) -> ThresholdResult:
    """Exact right-hand side of one of the named inequalities.

    Kinds and their parameters are listed in :data:`THRESHOLD_PARAMS`.
    ``transference`` also reports the two lower bounds on ``C`` when ``n``,
    ``C_f``, ``h_pf`` and ``deg_pf`` are supplied.

    Raises:
        MissingParam: a required symbol is absent.
    """
    if kind not in THRESHOLD_PARAMS:
        raise ValueError(f"unknown threshold {kind!r}; choose from {sorted(THRESHOLD_PARAMS)}")
    p = _require(params, THRESHOLD_PARAMS[kind])
    if kind == "transference":
        t = _int(p["t"], "t")
        mu, deg = p["mu"], p["degP"]
        value = p["C"] * t * ((p["nu0"] + mu) * (p["hP"] + 1) + (p["nu1"] + mu) * deg) * mu ** (t - 1) * (deg + 1) ** t
        conds: dict = {}
        if all(k in params for k in TRANSFERENCE_CONDITION_PARAMS):
            q = _require(params, TRANSFERENCE_CONDITION_PARAMS)
            C, nu0 = p["C"], p["nu0"]
            first = Fraction(c_n(_int(q["n"], "n"))) ** t * q["C_f"] ** (t + 1) / max(1, nu0, mu) ** (t + 1)
            second = (q["h_pf"] + q["deg_pf"]) * max(Fraction(1), 1 / nu0, 1 / mu)
            conds = {
                "C_lower_bound_1": str(first),
                "C_ge_bound_1": C >= first,
                "C_to_t_plus_1_lower_bound_2": str(second),
                "C_ge_bound_2": C ** (t + 1) >= second,
            }
        else:
            conds = {"evaluated": False, "needs": list(TRANSFERENCE_CONDITION_PARAMS)}
        return ThresholdResult(kind, value, conds)
    if kind == "lmgp_rhs":
        n, t = _int(p["n"], "n"), _int(p["t"], "t")
        mu = p["mu"]
        value = p["K"] * ((mu + p["nu0"]) * (p["degXp"] + 1) + p["nu1"] * p["degX"]) * mu ** (n - 1) * (p["degX"] + 1) ** t
        return ThresholdResult(kind, value, {})
    if kind == "stability_rhs":
        return ThresholdResult(kind, p["K0"] * (p["deg0_q"] + p["deg1_q"]), {})
    # estimationP
    n, t = _int(p["n"], "n"), _int(p["t"], "t")
    mu, nu0, lam = p["mu"], p["nu0"], p["lambda"]
    if lam <= 0:
        raise ValueError("lambda must be positive")
    rho = rho_sequence(n, mu, nu0, budget=budget)[n + 1]
    first = BigOrLog.of(t / min(nu0, mu) ** t, budget)
    second = (rho * 2) ** t * BigOrLog.of(Fraction(c_n(n)) ** t / (min(Fraction(1), lam) ** t * min(Fraction(1), mu) ** t), budget)
    shape = ((mu + nu0) * (p["degXp"] + 1) + p["nu1"] * p["degX"]) * mu ** (t - 1) * (p["degX"] + 1) ** t
    tail = p["ord_f"] * p["degX"] + p["degXp"]
    m = first.max(second)
    branch = "first" if m is first else "second" if m is second else "undecided"
    return ThresholdResult(kind, m * shape + tail, {"max_branch": branch})
