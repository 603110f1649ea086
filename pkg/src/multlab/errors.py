"""Typed error hierarchy shared by every module.

Every domain failure raised by the library derives from :class:`MultlabError`,
so the command-line front end can report it by class name and exit with a
domain-error status.
"""

from __future__ import annotations


class MultlabError(Exception):
    """Base class for all domain errors."""


class FieldMismatch(MultlabError, TypeError):
    """Scalars or containers from two different fields were combined."""


class InnerNotPositiveValuation(MultlabError):
    """An inner series in a composition does not have positive valuation."""


class ArityMismatch(MultlabError):
    """Variable counts of a polynomial, point or map do not agree."""


class SingularRecursion(MultlabError):
    """The linear system driving a Mahler coefficient recursion is singular."""


class SeedNotFixedPoint(MultlabError):
    """Initial values of a Mahler system are not a fixed point at z = 0."""


class DegenerateA0(MultlabError):
    """The leading polynomial A0 vanishes at the initial point."""


class CharacteristicDivision(MultlabError):
    """A differential recursion needs to divide by a multiple of the characteristic."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class PrecisionExhausted(MultlabError):
    """A quantity cannot be certified at the available truncation order."""


class AllInIdeal(MultlabError):
    """Every candidate polynomial vanishes at the point to the known precision."""


class OracleMismatch(MultlabError):
    """Two independent computations of the same quantity disagree."""


class NotBiHomogeneous(MultlabError):
    """A polynomial required to be bi-homogeneous is not."""


class ZeroVector(MultlabError):
    """A projective point was given with all coordinates zero."""


class VanishesOnCycle(MultlabError):
    """A polynomial vanishes identically at some point of a cycle."""


class CapExceeded(MultlabError):
    """A bounded search ended without finding a solution."""


class MissingParam(MultlabError):
    """A formula evaluator was called without one of its symbols."""


class ParseError(MultlabError, ValueError):
    """Malformed polynomial, scalar or configuration text.

    Attributes:
        position: zero-based character offset of the offending token, if known.
        line: one-based line number inside a configuration file, if known.
    """

    def __init__(self, message: str, position: int | None = None, line: int | None = None):
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"position {position}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
