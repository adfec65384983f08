"""Explicit Pade approximants of E_q(t) and exact checks of their identities.

``B_n(t) E_q(t) - A_n(t) = S_n(t)`` where

* ``B_n(t) = sum_k [n,k] q^{k(k-1)/2} (q^{n+1})_{n-k} (-t)^k``
* ``A_n(t) = sum_k [n,k] q^{kn} (q^{n+1})_{n-k} t^k``
* ``S_n(t) = (-1)^n t^{2n+1} q^{(3n^2+n)/2} (q)_n/(q)_{2n+1}
  * sum_k (q^{n+1})_k / ((q)_k (q^{2n+2})_k) t^k``
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Tuple

from .errors import ConstructionError, DomainError
from .qcore import BiPoly, QPoly, q_binomial, q_pochhammer, qpoch_q, qpoch_shift

SYMBOLIC_LIMIT = 6


@dataclass(frozen=True)
class TailPrefactor:
    """``sign * t^t_power * q^q_power * (q)_n / (q)_{2n+1}`` kept symbolically."""

    n: int
    sign: int
    t_power: int
    q_power: int

    def value(self, q) -> Fraction:
        """The t-free part evaluated at a rational ``q``."""
        q = Fraction(q)
        return (self.sign * q**self.q_power * q_pochhammer(q, self.n, q)
                / q_pochhammer(q, 2 * self.n + 1, q))


@dataclass(frozen=True)
class PadeSystem:
    n: int
    A: BiPoly
    B: BiPoly
    tail_prefactor: TailPrefactor

    def tail_terms(self, q) -> Iterator[Fraction]:
        """Coefficients ``(q^{n+1})_k / ((q)_k (q^{2n+2})_k)`` for ``k = 0, 1, ...``."""
        q = Fraction(q)
        n = self.n
        c = Fraction(1)
        k = 0
        while True:
            yield c
            c = c * (1 - q ** (n + 1 + k)) / ((1 - q ** (k + 1)) * (1 - q ** (2 * n + 2 + k)))
            k += 1

    def at_q(self, q) -> Tuple[Dict[int, Fraction], Dict[int, Fraction]]:
        """``(A, B)`` as t-coefficient maps with ``q`` specialised."""
        return self.A.at_q(q), self.B.at_q(q)


@lru_cache(maxsize=None)
def build_pade(n: int) -> PadeSystem:
    if n < 0:
        raise DomainError("Pade order must be non-negative")
    a_coeffs: Dict[int, QPoly] = {}
    b_coeffs: Dict[int, QPoly] = {}
    for k in range(n + 1):
        common = q_binomial(n, k) * qpoch_shift(n + 1, n - k)
        a_coeffs[k] = common.shift(k * n)
        b_coeffs[k] = common.shift(k * (k - 1) // 2) * (-1) ** k
    pref = TailPrefactor(n=n, sign=(-1) ** n, t_power=2 * n + 1, q_power=(3 * n * n + n) // 2)
    return PadeSystem(n, BiPoly.from_t_coeffs(a_coeffs), BiPoly.from_t_coeffs(b_coeffs), pref)


def eq_series_coeffs(q, order: int) -> List[Fraction]:
    """First ``order`` coefficients ``1/(q)_k`` of ``E_q(t)`` in powers of ``t``."""
    q = Fraction(q)
    out = []
    c = Fraction(1)
    for k in range(order):
        if k:
            c /= 1 - q**k
        out.append(c)
    return out


def _dense(coeffs: Dict[int, Fraction], length: int) -> List[Fraction]:
    return [coeffs.get(j, Fraction(0)) for j in range(length)]


def pade_residual(sys: PadeSystem, q, order: int) -> List[Fraction]:
    """Coefficients of ``B_n E_q - A_n`` through ``t^{order-1}`` at rational ``q``."""
    a, b = sys.at_q(q)
    e = eq_series_coeffs(q, order)
    bd = _dense(b, min(order, sys.n + 1))
    res = []
    for m in range(order):
        s = sum((bd[j] * e[m - j] for j in range(min(m, len(bd) - 1) + 1)), Fraction(0))
        res.append(s - a.get(m, Fraction(0)))
    return res


def verify_pade_identity(sys: PadeSystem, q, order: int | None = None) -> Fraction:
    """Exact formal-series check of the Pade identity at a rational ``q``.

    Coefficients of ``t^0 .. t^{2n}`` must vanish and every later coefficient
    through ``t^{order-1}`` must match prefactor times tail term.  Returns the
    coefficient of ``t^{2n+1}``.
    """
    q = Fraction(q)
    n = sys.n
    if not (0 < abs(q) < 1):
        raise DomainError(f"need 0 < |q| < 1, got {q}")
    if order is None:
        order = 2 * n + 8
    if order < 2 * n + 2:
        raise DomainError(f"order must be at least 2n+2 = {2 * n + 2}")
    res = pade_residual(sys, q, order)
    for m in range(2 * n + 1):
        if res[m] != 0:
            raise ConstructionError(f"n={n}, q={q}: coefficient of t^{m} is {res[m]}, not 0")
    pref = sys.tail_prefactor.value(q)
    for k, c in zip(range(order - 2 * n - 1), sys.tail_terms(q)):
        m = 2 * n + 1 + k
        if res[m] != pref * c:
            raise ConstructionError(
                f"n={n}, q={q}: coefficient of t^{m} is {res[m]}, expected {pref * c}")
    return res[2 * n + 1]


def verify_pade_identity_symbolic(sys: PadeSystem, order: int | None = None) -> QPoly:
    """The same check with ``q`` symbolic, after clearing by ``(q)_{order-1}``.

    Returns ``(q)_{order-1}`` times the ``t^{2n+1}`` coefficient.  Restricted to
    ``n <= 6`` for cost.
    """
    n = sys.n
    if n > SYMBOLIC_LIMIT:
        raise DomainError(f"symbolic verification limited to n <= {SYMBOLIC_LIMIT}")
    if order is None:
        order = 2 * n + 4
    m_top = order - 1
    clear = qpoch_q(m_top)
    # (q)_m * E_q truncated: coefficient of t^k is (q^{k+1})_{m-k}
    e = [qpoch_shift(k + 1, m_top - k) for k in range(order)]
    a, b = sys.A.t_coeffs(), sys.B.t_coeffs()
    out = None
    for m in range(order):
        s = QPoly()
        for j, bj in b.items():
            if j <= m:
                s = s + bj * e[m - j]
        s = s - a.get(m, QPoly()) * clear
        if m <= 2 * n:
            if not s.is_zero():
                raise ConstructionError(f"n={n}: symbolic coefficient of t^{m} is nonzero")
            continue
        k = m - 2 * n - 1
        # (q)_m * prefactor * tail_k = sign q^{..} (q^{k+1})_n (q^{2n+2+k})_{m-2n-1-k}
        expected = (qpoch_shift(k + 1, n) * qpoch_shift(2 * n + 2 + k, m_top - 2 * n - 1 - k)
                    ).shift(sys.tail_prefactor.q_power) * sys.tail_prefactor.sign
        if s != expected:
            raise ConstructionError(f"n={n}: symbolic coefficient of t^{m} mismatches the tail")
        if k == 0:
            out = s
    return out


def cn_closed_form(n: int) -> QPoly:
    """``(q^{n+2})_{n+1} (-1)^n q^{(3n^2+n)/2} (q)_n / (q)_{2n+1}`` by exact division."""
    num = (qpoch_shift(n + 2, n + 1) * qpoch_q(n)).shift((3 * n * n + n) // 2) * (-1) ** n
    return num.exact_div(qpoch_q(2 * n + 1))


def _poly_mul(a: Dict[int, Fraction], b: Dict[int, Fraction]) -> Dict[int, Fraction]:
    out: Dict[int, Fraction] = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, Fraction(0)) + x * y
    return out


def determinant(n: int, q=None):
    """``B_n A_{n+1} - B_{n+1} A_n`` checked against ``C_n t^{2n+1}``.

    With ``q`` omitted the check is an exact identity in ``Z[q, t]`` and ``C_n``
    is returned as a :class:`QPoly`; with a rational ``q`` it is an identity of
    polynomials in ``t`` over the rationals and ``C_n`` is a Fraction.  Returns
    ``(C_n, True)``; a mismatch raises :class:`ConstructionError`.
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    s0, s1 = build_pade(n), build_pade(n + 1)
    if q is None:
        delta = s0.B * s1.A - s1.B * s0.A
        cn = cn_closed_form(n)
        expected = BiPoly({(i, 2 * n + 1): c for i, c in cn.items()})
        if delta != expected:
            raise ConstructionError(f"determinant identity fails symbolically at n={n}")
        if cn.is_zero():
            raise ConstructionError(f"C_{n} vanishes identically")
        return cn, True
    q = Fraction(q)
    a0, b0 = s0.at_q(q)
    a1, b1 = s1.at_q(q)
    d1, d2 = _poly_mul(b0, a1), _poly_mul(b1, a0)
    delta = {j: d1.get(j, 0) - d2.get(j, 0) for j in set(d1) | set(d2)}
    delta = {j: v for j, v in delta.items() if v}
    cn = (q_pochhammer(q ** (n + 2), n + 1, q) * (-1) ** n * q ** ((3 * n * n + n) // 2)
          * q_pochhammer(q, n, q) / q_pochhammer(q, 2 * n + 1, q))
    expected = {2 * n + 1: cn} if cn else {}
    if delta != expected:
        raise ConstructionError(f"determinant identity fails at n={n}, q={q}")
    return cn, True


def deg_q_coefficient_closed_form(n: int, k: int, K: int = 0) -> int:
    """q-degree of the ``t^k`` coefficient of ``A_n(q^K t)`` (no cancellation occurs)."""
    return (3 * n * n + n - k * k - k) // 2 + k * K


def deg_q_bound_A(n: int, K: int) -> int:
    """Upper bound on ``deg_q A_n(q^K t)``."""
    if K <= n:
        return (K * K - K) // 2 + (3 * n * n + n) // 2
    return n * n + n * K


def deg_q_bound_B(n: int, K: int) -> int:
    """Upper bound on ``deg_q (t)_K B_n(q^K t)``."""
    if K <= n:
        return (K * K - K) // 2 + (3 * n * n + n) // 2
    return (K * K - K) // 2 + (n * n - n) // 2 + n * K
