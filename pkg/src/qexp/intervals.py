"""Outward-rounded interval helpers on top of :mod:`mpmath.iv`."""

from __future__ import annotations

import decimal
import os
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction

from mpmath import iv, mp
from mpmath.libmp import from_rational, round_ceiling, round_floor, to_rational

DEFAULT_PRECISION = 256
DEFAULT_PRECISION_CAP = 8192


def precision_cap() -> int:
    """Escalation cap in bits; ``QEXP_PRECISION_CAP`` overrides the default."""
    raw = os.environ.get("QEXP_PRECISION_CAP")
    return int(raw) if raw else DEFAULT_PRECISION_CAP


@contextmanager
def working_precision(bits: int):
    """Temporarily set the interval context precision."""
    saved = iv.prec
    iv.prec = int(bits)
    try:
        yield
    finally:
        iv.prec = saved


def rat(x) -> "iv.mpf":
    """Tightest interval at the current precision containing the rational ``x``."""
    x = Fraction(x)
    prec = iv.prec
    lo = from_rational(x.numerator, x.denominator, prec, round_floor)
    hi = from_rational(x.numerator, x.denominator, prec, round_ceiling)
    return iv.mpf([mp.make_mpf(lo), mp.make_mpf(hi)])


def mpf_to_fraction(x) -> Fraction:
    """Exact value of an mpf (or a degenerate interval endpoint)."""
    raw = x._mpf_ if hasattr(x, "_mpf_") else x
    p, q = to_rational(raw)
    return Fraction(int(p), int(q))


def iv_lower(x) -> Fraction:
    """Exact lower endpoint of an interval as a rational."""
    return mpf_to_fraction(x._mpi_[0])


def iv_upper(x) -> Fraction:
    return mpf_to_fraction(x._mpi_[1])


@dataclass(frozen=True)
class Enclosure:
    """Closed interval ``[lower, upper]`` known to contain a real number."""

    lower: object
    upper: object

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("enclosure with lower > upper")

    @classmethod
    def from_iv(cls, x) -> "Enclosure":
        lo, hi = x._mpi_
        return cls(mp.make_mpf(lo), mp.make_mpf(hi))

    @classmethod
    def exact(cls, x, bits: int = DEFAULT_PRECISION) -> "Enclosure":
        with working_precision(bits):
            return cls.from_iv(rat(x))

    @classmethod
    def between(cls, lower, upper, bits: int = DEFAULT_PRECISION) -> "Enclosure":
        """Outward-rounded enclosure of the rational interval ``[lower, upper]``."""
        lower, upper = Fraction(lower), Fraction(upper)
        lo = from_rational(lower.numerator, lower.denominator, bits, round_floor)
        hi = from_rational(upper.numerator, upper.denominator, bits, round_ceiling)
        return cls(mp.make_mpf(lo), mp.make_mpf(hi))

    def to_iv(self):
        return iv.mpf([self.lower, self.upper])

    @property
    def lower_fraction(self) -> Fraction:
        return mpf_to_fraction(self.lower)

    @property
    def upper_fraction(self) -> Fraction:
        return mpf_to_fraction(self.upper)

    def width(self) -> Fraction:
        return self.upper_fraction - self.lower_fraction

    def mid(self) -> Fraction:
        return (self.lower_fraction + self.upper_fraction) / 2

    def magnitude_lower(self) -> Fraction:
        """Lower bound on ``|x|``."""
        lo, hi = self.lower_fraction, self.upper_fraction
        if lo <= 0 <= hi:
            return Fraction(0)
        return min(abs(lo), abs(hi))

    def magnitude_upper(self) -> Fraction:
        return max(abs(self.lower_fraction), abs(self.upper_fraction))

    def relative_width(self) -> Fraction:
        """Width divided by ``|mid|``; infinite-like sentinel when mid is 0."""
        m = abs(self.mid())
        if m == 0:
            return Fraction(10**9)
        return self.width() / m

    def contains(self, x) -> bool:
        if isinstance(x, Enclosure):
            return self.lower <= x.lower and x.upper <= self.upper
        x = Fraction(x)
        return self.lower_fraction <= x <= self.upper_fraction

    def intersects(self, other: "Enclosure") -> bool:
        return not (self.upper < other.lower or other.upper < self.lower)

    def intersect(self, other: "Enclosure") -> "Enclosure":
        if not self.intersects(other):
            raise ValueError("disjoint enclosures")
        lo = self.lower if self.lower >= other.lower else other.lower
        hi = self.upper if self.upper <= other.upper else other.upper
        return Enclosure(lo, hi)

    def __str__(self):
        return f"[{mp.nstr(self.lower, 20)}, {mp.nstr(self.upper, 20)}]"


def decimal_string(x, digits: int = 40, rounding: str = "nearest") -> str:
    """Decimal rendering of an exact value with a chosen rounding direction.

    ``rounding`` is one of ``"up"``, ``"down"`` or ``"nearest"``; ``x`` may be
    an mpf or anything :class:`~fractions.Fraction` accepts.
    """
    f = x if isinstance(x, Fraction) else (
        mpf_to_fraction(x) if hasattr(x, "_mpf_") else Fraction(x))
    mode = {
        "up": decimal.ROUND_CEILING,
        "down": decimal.ROUND_FLOOR,
        "nearest": decimal.ROUND_HALF_EVEN,
    }[rounding]
    ctx = decimal.Context(prec=digits, rounding=mode, Emax=10**9, Emin=-10**9)
    val = ctx.divide(decimal.Decimal(f.numerator), decimal.Decimal(f.denominator))
    return format(val, "E") if val and abs(val.adjusted()) > 20 else format(val, "f")
