"""Rigorous high-precision values of E_q(t) and Diophantine probes of them.

Two independent routes evaluate ``E_q(t)``: the power series
``sum_k t^k / (q;q)_k`` and the infinite product ``prod_k 1/(1 - q^k t)``.
Both fold an explicit tail bound into an outward-rounded interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Optional, Sequence

from mpmath import iv, mp

from .errors import DomainError, EvaluationError, PrecisionExhausted
from .intervals import (
    DEFAULT_PRECISION,
    Enclosure,
    iv_upper,
    precision_cap,
    rat,
    working_precision,
)

GUARD_BITS = 32


def _check_args(q: Fraction, t: Fraction) -> None:
    if not (0 < abs(q) <= Fraction(1, 2)):
        raise DomainError(f"need 0 < |q| <= 1/2, got q={q}")
    if not (0 < abs(t) < 1):
        raise DomainError(f"need 0 < |t| < 1, got t={t}")


def eval_series(q, t, precision: int = DEFAULT_PRECISION) -> Enclosure:
    """Enclose ``sum_{k>=0} t^k / (q;q)_k`` with a geometric tail bound."""
    q, t = Fraction(q), Fraction(t)
    _check_args(q, t)
    target = Fraction(1, 2 ** (precision + 16))
    with working_precision(precision + GUARD_BITS):
        qi, ti = rat(q), rat(t)
        total = iv.mpf(1)
        term = iv.mpf(1)
        qk = iv.mpf(1)
        aq, at = abs(q), abs(t)
        aqk = Fraction(1)
        k = 0
        while True:
            k += 1
            qk = qk * qi
            aqk *= aq
            term = term * ti / (1 - qk)
            total = total + term
            # ratio of consecutive later terms: |t| / |1 - q^j| <= |t| / (1 - |q|^{k+1})
            rho = at / (1 - aqk * aq)
            if rho >= 1:
                continue
            tmag = iv_upper(abs(term))
            if tmag * rho / (1 - rho) < target:
                tail = rat(tmag * rho / (1 - rho))
                total = total + iv.mpf([-1, 1]) * tail
                return Enclosure.from_iv(total)


def eval_product(q, t, precision: int = DEFAULT_PRECISION) -> Enclosure:
    """Enclose ``prod_{k>=0} 1/(1 - q^k t)`` with a logarithmic tail bound."""
    q, t = Fraction(q), Fraction(t)
    _check_args(q, t)
    target = Fraction(1, 2 ** (precision + 16))
    aq, at = abs(q), abs(t)
    with working_precision(precision + GUARD_BITS):
        qi, ti = rat(q), rat(t)
        prod = iv.mpf(1)
        x = ti
        m = 0
        aqm = Fraction(1)
        while True:
            prod = prod / (1 - x)
            x = x * qi
            m += 1
            aqm *= aq
            # |log prod_{k>=m} 1/(1-x_k)| <= sum |x_k|/(1-|x_k|)
            eps = at * aqm / ((1 - aq) * (1 - at * aqm))
            if eps < target:
                e = rat(eps)
                return Enclosure.from_iv(prod * iv.exp(iv.mpf([-1, 1]) * e))


def eval_eq(q, t, precision: int = DEFAULT_PRECISION) -> Enclosure:
    """Intersection of the series and product enclosures.

    Raises :class:`EvaluationError` when the two routes disagree.  Results are
    memoised per ``(q, t, precision)``.
    """
    return _eval_eq_cached(Fraction(q), Fraction(t), int(precision))


@lru_cache(maxsize=256)
def _eval_eq_cached(q: Fraction, t: Fraction, precision: int) -> Enclosure:
    a = eval_series(q, t, precision)
    b = eval_product(q, t, precision)
    if not a.intersects(b):
        raise EvaluationError(f"series {a} and product {b} enclosures are disjoint")
    return a.intersect(b)


@dataclass(frozen=True)
class Convergent:
    M: int
    N: int
    distance: Enclosure

    @property
    def value(self) -> Fraction:
        return Fraction(self.M, self.N)


def _partial_quotients(x: Fraction):
    """Yield ``(a_k, remainder_nonzero)`` for the regular continued fraction of ``x``."""
    while True:
        a = math.floor(x)
        frac = x - a
        yield a, frac != 0
        if frac == 0:
            return
        x = 1 / frac


def _distance(lo: Fraction, hi: Fraction, M: int, N: int, bits: int) -> Enclosure:
    r = Fraction(M, N)
    d_lo, d_hi = abs(lo - r), abs(hi - r)
    lower = Fraction(0) if lo <= r <= hi else min(d_lo, d_hi)
    upper = max(d_lo, d_hi)
    return Enclosure.between(lower, upper, bits)


def convergents_of_interval(lo: Fraction, hi: Fraction, max_N: int, bits: int):
    """Convergents shared by every real in ``[lo, hi]`` up to denominator ``max_N``.

    Returns ``(list, complete)``; ``complete`` is False when the endpoints'
    expansions split before the denominator bound was passed.
    """
    out = []
    h0, h1 = 1, 0
    k0, k1 = 0, 1
    ga, gb = _partial_quotients(lo), _partial_quotients(hi)
    while True:
        try:
            a, more_a = next(ga)
            b, more_b = next(gb)
        except StopIteration:
            return out, False
        if a != b or not (more_a and more_b):
            return out, False
        h0, h1 = a * h0 + h1, h0
        k0, k1 = a * k0 + k1, k0
        if k0 > max_N:
            return out, True
        out.append(Convergent(h0, k0, _distance(lo, hi, h0, k0, bits)))


def convergents(
    value: Enclosure,
    max_N: int,
    refine: Optional[Callable[[int], Enclosure]] = None,
    precision: int = DEFAULT_PRECISION,
) -> List[Convergent]:
    """Continued-fraction convergents ``M/N`` with ``N <= max_N`` of an enclosed real.

    Partial quotients are accepted only while both endpoints agree on them, so
    every returned convergent is a convergent of the true value.  When the
    enclosure is too wide and ``refine`` is given it is called with doubled
    precision until the list is complete or the cap is reached.
    """
    bits = precision
    cap = precision_cap()
    while True:
        lo, hi = value.lower_fraction, value.upper_fraction
        out, complete = convergents_of_interval(lo, hi, max_N, bits)
        if complete:
            return out
        if refine is None or bits * 2 > cap:
            raise PrecisionExhausted(
                f"enclosure too wide to fix convergents up to N={max_N} at {bits} bits")
        bits *= 2
        value = refine(bits)


def eq_convergents(q, t, max_N: int, precision: int = DEFAULT_PRECISION) -> List[Convergent]:
    """Convergents of ``E_q(t)`` with automatic precision escalation."""
    return convergents(eval_eq(q, t, precision), max_N,
                       refine=lambda b: eval_eq(q, t, b), precision=precision)


def empirical_exponent(convs: Sequence[Convergent], tail_fraction: float = 0.5) -> float:
    """Largest local exponent ``-log|x - M/N| / log N`` over the tail of the list.

    Only the last ``tail_fraction`` of the convergents is used because small
    denominators give meaningless local exponents.  Reported, not certified.
    """
    if len(convs) < 10:
        raise ValueError(f"need at least 10 convergents, got {len(convs)}")
    start = min(int(len(convs) * (1 - tail_fraction)), len(convs) - 1)
    best = -math.inf
    with mp.workprec(64):
        for c in convs[start:]:
            if c.N < 2:
                continue
            d = (c.distance.lower + c.distance.upper) / 2
            if d <= 0:
                continue
            best = max(best, float(-mp.log(d) / mp.log(c.N)))
    return best


@dataclass(frozen=True)
class RestrictedPair:
    s: int
    N: int
    distance: Enclosure


def restricted_scan(inst, s_range, precision: int = DEFAULT_PRECISION) -> List[RestrictedPair]:
    """Close approximations ``d^s / N`` to ``tau = E_q(t)``.

    For each ``s`` the candidates are ``round(d^s / tau)`` and its neighbours;
    a pair is kept when ``d^s N > 0`` and ``|tau - d^s/N| < 1/|N|`` holds
    rigorously.
    """
    q, t, d = inst.q, inst.t, inst.d
    s_values = list(s_range)
    top = max((abs(d) ** s for s in s_values), default=1)
    bits = max(precision, 2 * top.bit_length() + 64)
    tau = eval_eq(q, t, bits)
    lo, hi = tau.lower_fraction, tau.upper_fraction
    out = []
    for s in s_values:
        M = d**s
        centre = round(M / tau.mid())
        for N in (centre - 1, centre, centre + 1):
            if N == 0 or M * N <= 0:
                continue
            dist = _distance(lo, hi, M, N, bits)
            if dist.upper_fraction < Fraction(1, abs(N)):
                out.append(RestrictedPair(s, N, dist))
    return out
