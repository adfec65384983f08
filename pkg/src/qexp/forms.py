"""Accelerated numerical linear forms ``q_{n,K} E_q(t) - p_{n,K} = r_{n,K}``.

The shift ``t -> q t`` together with ``E_q(qt) = (1 - t) E_q(t)`` applied ``K``
times turns the Pade identity into
``(t)_K B_n(q^K t) E_q(t) - A_n(q^K t) = S_n(q^K t)``.  Multiplying by the
denominator bound ``v^{n+K} |d|^delta`` gives the forms used downstream.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Optional, Tuple

from mpmath import iv

from .errors import DenominatorError, DomainError, EvaluationError, PrecisionExhausted
from .intervals import (
    DEFAULT_PRECISION,
    Enclosure,
    iv_lower,
    precision_cap,
    rat,
    working_precision,
)
from .oracle import eval_eq
from .pade import PadeSystem, TailPrefactor, build_pade
from .qcore import BiPoly, q_pochhammer

DEFAULT_MARGIN = 64


class CaseTag(enum.Enum):
    GENERAL_A = "a"
    RESTRICTED_B = "b"

    @classmethod
    def parse(cls, value) -> "CaseTag":
        if isinstance(value, cls):
            return value
        return {"a": cls.GENERAL_A, "b": cls.RESTRICTED_B}[str(value).lower()]


@dataclass(frozen=True)
class ProblemInstance:
    """``q = 1/d`` and ``t = u/v`` with the approximation case."""

    d: int
    u: int
    v: int
    case: CaseTag = CaseTag.GENERAL_A

    def __post_init__(self):
        object.__setattr__(self, "case", CaseTag.parse(self.case))
        if abs(self.d) < 2:
            raise DomainError(f"|d| must be at least 2, got d={self.d}")
        if self.v < 1:
            raise DomainError(f"v must be positive, got v={self.v}")
        if math.gcd(self.u, self.v) != 1:
            raise DomainError(f"gcd(u, v) must be 1, got u={self.u}, v={self.v}")
        if not (0 < abs(self.u) < self.v):
            raise DomainError(f"need 0 < |u/v| < 1, got {self.u}/{self.v}")

    @property
    def q(self) -> Fraction:
        return Fraction(1, self.d)

    @property
    def t(self) -> Fraction:
        return Fraction(self.u, self.v)

    def with_case(self, case) -> "ProblemInstance":
        return ProblemInstance(self.d, self.u, self.v, CaseTag.parse(case))


@dataclass(frozen=True)
class ShiftedSystem:
    """``A_n(q^K t)``, ``(t)_K B_n(q^K t)`` and the shifted tail ``S_n(q^K t)``."""

    n: int
    K: int
    A: BiPoly
    B: BiPoly
    tail_prefactor: TailPrefactor

    def tail_enclosure(self, q, t, bits: int) -> Enclosure:
        """Rigorous enclosure of ``S_n(q^K t)`` at rational ``q``, ``t``."""
        return Enclosure.from_iv(_tail_iv(self.n, Fraction(q), Fraction(q) ** self.K * Fraction(t), bits))


def shift_accelerate(sys: PadeSystem, K: int) -> ShiftedSystem:
    if K < 0:
        raise DomainError("K must be non-negative")
    tk = q_pochhammer(BiPoly.t(), K)
    return ShiftedSystem(sys.n, K, sys.A.scale_t(K), tk * sys.B.scale_t(K), sys.tail_prefactor)


def _tail_iv(n: int, q: Fraction, x: Fraction, bits: int):
    """Interval for ``S_n(x)`` summed with a ratio-based geometric tail bound."""
    pref = build_pade(n).tail_prefactor.value(q) * x ** (2 * n + 1)
    with working_precision(bits + 32):
        qi, xi = rat(q), rat(x)
        ax = abs(xi)
        target = iv.ldexp(iv.mpf(1), -(bits + 16))
        total = iv.mpf(1)
        term = iv.mpf(1)
        # q^(k+1), q^(n+1+k), q^(2n+2+k) for the current k
        p1, p2, p3 = qi, qi ** (n + 1), qi ** (2 * n + 2)
        k = 0
        while True:
            term = term * xi * (1 - p2) / ((1 - p1) * (1 - p3))
            total = total + term
            k += 1
            p1, p2, p3 = p1 * qi, p2 * qi, p3 * qi
            # later ratios are bounded by this one, which only shrinks with k
            rho = ax * (1 + abs(p2)) / ((1 - abs(p1)) * (1 - abs(p3)))
            if rho.b >= 1:
                continue
            tail = abs(term) * rho / (1 - rho)
            if 0 in total:
                continue
            if tail.b < (target * abs(total)).a:
                total = total + iv.mpf([-tail.b, tail.b])
                return rat(pref) * total
            if k > 100000:
                raise PrecisionExhausted("tail series failed to converge")


@dataclass(frozen=True)
class DeltaExponents:
    """Denominator exponent ``delta`` and remainder decay exponent ``omega``.

    ``omega = omega_rational - omega_log_weight * log v / log|d|``.
    """

    n: int
    K: int
    delta: int
    omega_rational: Fraction
    omega_log_weight: int
    case: CaseTag
    branch: str

    def omega(self, d: int, v: int, bits: int = 128):
        with working_precision(bits):
            return iv.mpf(self.omega_rational.numerator) / self.omega_rational.denominator - (
                self.omega_log_weight * iv.log(v) / iv.log(abs(d)))


def s_threshold(n: int, K: int) -> Fraction:
    """Smallest admissible ``s`` for the restricted case when ``K > n``."""
    return Fraction(K * (K - 1) - n * (n + 1), 2)


def delta_exponent(n: int, K: int, case, s: Optional[int] = None) -> DeltaExponents:
    case = CaseTag.parse(case)
    if n < 1 or K < 0:
        raise DomainError(f"need n >= 1 and K >= 0, got n={n}, K={K}")
    tri = (K * K - K) // 2
    if K <= n:
        delta = tri + (3 * n * n + n) // 2
        omega = Fraction(4 * n * K - K * K, 2)
        branch = "K<=n"
    elif case is CaseTag.GENERAL_A:
        delta = tri + (n * n - n) // 2 + n * K
        omega = Fraction(2 * n * n + 2 * n * K - K * K, 2)
        branch = "K>n"
    else:
        if s is None or s < s_threshold(n, K):
            raise DomainError(
                f"restricted case with K={K} > n={n} needs s >= {s_threshold(n, K)}, got s={s}")
        delta = n * n + n * K
        omega = Fraction(n * n + 2 * n * K, 2)
        branch = "K>n"
    return DeltaExponents(n, K, delta, omega, n + K, case, branch)


@lru_cache(maxsize=4096)
def _pade_at(n: int, q: Fraction) -> Tuple[Dict[int, Fraction], Dict[int, Fraction]]:
    return build_pade(n).at_q(q)


def _eval_t(coeffs: Dict[int, Fraction], x: Fraction) -> Fraction:
    return sum((c * x**j for j, c in coeffs.items()), Fraction(0))


@lru_cache(maxsize=65536)
def shifted_values(n: int, K: int, q: Fraction, t: Fraction) -> Tuple[Fraction, Fraction]:
    """Exact ``(A_n(q^K t), (t)_K B_n(q^K t))`` at rational ``q``, ``t``."""
    a, b = _pade_at(n, q)
    x = q**K * t
    return _eval_t(a, x), q_pochhammer(t, K, q) * _eval_t(b, x)


def true_denominator(inst: ProblemInstance, n: int, K: int) -> int:
    """Least common denominator of ``A_n(q^K t)`` and ``(t)_K B_n(q^K t)``."""
    a, b = shifted_values(n, K, inst.q, inst.t)
    return math.lcm(a.denominator, b.denominator)


def exact_form(inst: ProblemInstance, n: int, K: int, s: Optional[int] = None):
    """``(DeltaExponents, scaler, p, q_coef)`` with exact rational ``p`` and ``q_coef``."""
    de = delta_exponent(n, K, inst.case, s)
    scaler = inst.v ** (n + K) * abs(inst.d) ** de.delta
    a, b = shifted_values(n, K, inst.q, inst.t)
    return de, scaler, scaler * a, scaler * b


def form_determinant(inst: ProblemInstance, n: int, K: int, K_next: Optional[int] = None,
                     s: Optional[int] = None) -> Fraction:
    """``q_{n,K} p_{n+1,K'} - p_{n,K} q_{n+1,K'}`` exactly (``K' = K`` by default)."""
    K_next = K if K_next is None else K_next
    _, _, p0, q0 = exact_form(inst, n, K, s)
    _, _, p1, q1 = exact_form(inst, n + 1, K_next, s)
    return q0 * p1 - p0 * q1


@dataclass(frozen=True)
class LinearForm:
    n: int
    K: int
    case: CaseTag
    s: Optional[int]
    exponents: DeltaExponents
    scaler: int
    p: Fraction
    q_coef: Fraction
    r_enclosure: Enclosure
    r_from_oracle: Enclosure
    r_from_tail: Enclosure
    precision: int

    @property
    def integral(self) -> bool:
        """Whether ``D = p N - q_coef M`` is guaranteed integral."""
        return self.case is CaseTag.GENERAL_A or self.K <= self.n or (
            self.s is not None and self.s >= s_threshold(self.n, self.K))


def _bits_of(x: Fraction) -> int:
    x = abs(x)
    if x == 0:
        return 0
    return x.numerator.bit_length() - x.denominator.bit_length() + 1


def numeric_form(inst: ProblemInstance, n: int, K: int, s: Optional[int] = None,
                 precision: int = DEFAULT_PRECISION, margin: int = DEFAULT_MARGIN) -> LinearForm:
    """Exact ``p``, ``q_coef`` and a doubly-checked enclosure of ``r``.

    ``r`` is enclosed once as ``q_coef * E_q(t) - p`` (oracle route, subject to
    cancellation) and once as ``scaler * S_n(q^K t)`` (tail route).  Precision is
    doubled until both have relative width at most ``2**-margin``; the result
    is their intersection.
    """
    de, scaler, p, qc = exact_form(inst, n, K, s)
    if inst.case is CaseTag.GENERAL_A and (p.denominator != 1 or qc.denominator != 1):
        raise DenominatorError(f"p or q not integral at n={n}, K={K} for {inst}")
    q, t = inst.q, inst.t
    x = q**K * t
    cap = precision_cap()
    bits = precision
    first = _tail_iv(n, q, x, bits)
    # cancellation in q*E - p costs about log2|q| - log2|r| bits
    need = (_bits_of(qc) - _bits_of(scaler) - _bits_of(iv_lower(abs(first)) or Fraction(1))
            + margin + 32)
    while bits < need and bits * 2 <= cap:
        bits *= 2
    bound = Fraction(1, 2**margin)
    while True:
        with working_precision(bits + 32):
            tail = Enclosure.from_iv(rat(scaler) * _tail_iv(n, q, x, bits))
            e = eval_eq(q, t, bits).to_iv()
            direct = Enclosure.from_iv(rat(qc) * e - rat(p))
        if tail.relative_width() <= bound and direct.relative_width() <= bound:
            break
        if bits * 2 > cap:
            raise PrecisionExhausted(f"r_{{{n},{K}}} not resolved within {cap} bits")
        bits *= 2
    if not tail.intersects(direct):
        raise EvaluationError(f"r_{{{n},{K}}}: oracle {direct} and tail {tail} enclosures are disjoint")
    return LinearForm(n, K, inst.case, s, de, scaler, p, qc, tail.intersect(direct), direct, tail, bits)


def integer_form_Dn(form: LinearForm, M: int, N: int, inst: Optional[ProblemInstance] = None):
    """``D = p N - q_coef M``: a numeric enclosure and the exact value.

    The enclosure comes from ``q_coef (N tau - M) - N r`` and must contain the
    exact value.  When integrality is guaranteed a non-integral exact value
    raises :class:`DenominatorError`.  The exact value is returned as ``int``
    when integral, otherwise as a Fraction.
    """
    exact = form.p * N - form.q_coef * M
    if form.integral and exact.denominator != 1:
        raise DenominatorError(f"D_{{{form.n},{form.K}}} = {exact} is not an integer")
    if inst is not None:
        bits = form.precision + max(abs(N), abs(M), 1).bit_length() + 32
        with working_precision(bits + 32):
            tau = eval_eq(inst.q, inst.t, bits).to_iv()
            enc = Enclosure.from_iv(rat(form.q_coef) * (rat(N) * tau - rat(M))
                                    - rat(N) * form.r_enclosure.to_iv())
        if not enc.contains(exact):
            raise EvaluationError(f"exact D={exact} outside its enclosure {enc}")
    else:
        enc = Enclosure.exact(exact)
    return enc, (int(exact) if exact.denominator == 1 else exact)
