"""Exact arithmetic: sparse polynomials in q and in (q, t), and q-analogues.

Rationals are plain :class:`fractions.Fraction` values.  Polynomials are
immutable sparse maps from exponents to Python integers, so coefficient size
is unbounded and exponents never overflow.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from numbers import Rational as _RationalABC
from typing import Dict, Mapping, Tuple, Union

Rational = Fraction
Number = Union[int, Fraction]


class QPoly:
    """Polynomial in ``q`` with integer coefficients, stored sparsely."""

    __slots__ = ("_c", "_hash")

    def __init__(self, coeffs: Mapping[int, int] | None = None):
        c = {}
        for e, v in (coeffs or {}).items():
            if e < 0:
                raise ValueError(f"negative q-exponent {e}")
            if v:
                c[int(e)] = int(v)
        self._c = c
        self._hash = None

    @classmethod
    def constant(cls, c: int) -> "QPoly":
        return cls({0: c})

    @classmethod
    def monomial(cls, e: int, c: int = 1) -> "QPoly":
        return cls({e: c})

    @property
    def coeffs(self) -> Dict[int, int]:
        return dict(self._c)

    def items(self):
        return self._c.items()

    def coeff(self, e: int) -> int:
        return self._c.get(e, 0)

    def is_zero(self) -> bool:
        return not self._c

    @property
    def degree(self) -> int:
        """Largest stored exponent; -1 for the zero polynomial."""
        return max(self._c) if self._c else -1

    @property
    def valuation(self) -> int:
        return min(self._c) if self._c else -1

    def __len__(self):
        return len(self._c)

    def __eq__(self, other):
        if isinstance(other, int):
            other = QPoly.constant(other)
        if not isinstance(other, QPoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._c.items()))
        return self._hash

    def __neg__(self):
        return QPoly({e: -c for e, c in self._c.items()})

    def __add__(self, other):
        if isinstance(other, int):
            other = QPoly.constant(other)
        if not isinstance(other, QPoly):
            return NotImplemented
        out = dict(self._c)
        for e, c in other._c.items():
            out[e] = out.get(e, 0) + c
        return QPoly(out)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            other = QPoly.constant(other)
        if not isinstance(other, QPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return QPoly({e: c * other for e, c in self._c.items()})
        if not isinstance(other, QPoly):
            return NotImplemented
        out: Dict[int, int] = {}
        for e1, c1 in self._c.items():
            for e2, c2 in other._c.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return QPoly(out)

    __rmul__ = __mul__

    def shift(self, k: int) -> "QPoly":
        """Multiply by ``q**k``."""
        return QPoly({e + k: c for e, c in self._c.items()})

    def __call__(self, q: Number) -> Fraction:
        q = Fraction(q)
        return sum((c * q**e for e, c in self._c.items()), Fraction(0))

    def exact_div(self, other: "QPoly") -> "QPoly":
        """Quotient of an exact division in Z[q]; raises if not exact."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = dict(self._c)
        dd = other.degree
        lead = other.coeff(dd)
        quot: Dict[int, int] = {}
        while rem:
            top = max(rem)
            if top < dd:
                break
            c = rem[top]
            if c % lead:
                break
            f = c // lead
            s = top - dd
            quot[s] = f
            for e, oc in other._c.items():
                v = rem.get(e + s, 0) - f * oc
                if v:
                    rem[e + s] = v
                else:
                    rem.pop(e + s, None)
        if rem:
            raise ArithmeticError("polynomial division is not exact")
        return QPoly(quot)

    def __repr__(self):
        if not self._c:
            return "QPoly(0)"
        terms = " + ".join(f"{c}*q^{e}" for e, c in sorted(self._c.items()))
        return f"QPoly({terms})"


class BiPoly:
    """Polynomial in ``(q, t)`` with integer coefficients.

    Keys are ``(q_exponent, t_exponent)`` pairs.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[Tuple[int, int], int] | None = None):
        c = {}
        for (i, j), v in (coeffs or {}).items():
            if i < 0 or j < 0:
                raise ValueError(f"negative exponent in {(i, j)}")
            if v:
                c[(int(i), int(j))] = int(v)
        self._c = c

    @classmethod
    def constant(cls, c: int) -> "BiPoly":
        return cls({(0, 0): c})

    @classmethod
    def t(cls) -> "BiPoly":
        return cls({(0, 1): 1})

    @classmethod
    def from_t_coeffs(cls, coeffs: Mapping[int, QPoly]) -> "BiPoly":
        return cls({(i, j): c for j, p in coeffs.items() for i, c in p.items()})

    @property
    def coeffs(self) -> Dict[Tuple[int, int], int]:
        return dict(self._c)

    def items(self):
        return self._c.items()

    def is_zero(self) -> bool:
        return not self._c

    @property
    def deg_t(self) -> int:
        return max((j for _, j in self._c), default=-1)

    @property
    def deg_q(self) -> int:
        return max((i for i, _ in self._c), default=-1)

    def t_coeffs(self) -> Dict[int, QPoly]:
        """Coefficients of powers of ``t`` as polynomials in ``q``."""
        acc: Dict[int, Dict[int, int]] = {}
        for (i, j), c in self._c.items():
            acc.setdefault(j, {})[i] = c
        return {j: QPoly(d) for j, d in acc.items()}

    def t_coeff(self, j: int) -> QPoly:
        return QPoly({i: c for (i, jj), c in self._c.items() if jj == j})

    def __eq__(self, other):
        if isinstance(other, int):
            other = BiPoly.constant(other)
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __neg__(self):
        return BiPoly({k: -c for k, c in self._c.items()})

    def __add__(self, other):
        if isinstance(other, int):
            other = BiPoly.constant(other)
        if isinstance(other, QPoly):
            other = BiPoly({(i, 0): c for i, c in other.items()})
        if not isinstance(other, BiPoly):
            return NotImplemented
        out = dict(self._c)
        for k, c in other._c.items():
            out[k] = out.get(k, 0) + c
        return BiPoly(out)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, QPoly)):
            return self + (-other)
        if not isinstance(other, BiPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return BiPoly({k: c * other for k, c in self._c.items()})
        if isinstance(other, QPoly):
            other = BiPoly({(i, 0): c for i, c in other.items()})
        if not isinstance(other, BiPoly):
            return NotImplemented
        out: Dict[Tuple[int, int], int] = {}
        for (i1, j1), c1 in self._c.items():
            for (i2, j2), c2 in other._c.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0) + c1 * c2
        return BiPoly(out)

    __rmul__ = __mul__

    def shift_q(self, k: int) -> "BiPoly":
        """Multiply by ``q**k``."""
        return BiPoly({(i + k, j): c for (i, j), c in self._c.items()})

    def scale_t(self, K: int) -> "BiPoly":
        """Substitute ``t -> q**K * t``."""
        return BiPoly({(i + K * j, j): c for (i, j), c in self._c.items()})

    def at_q(self, q: Number) -> Dict[int, Fraction]:
        """Specialise ``q``; returns the t-coefficients as rationals."""
        q = Fraction(q)
        out: Dict[int, Fraction] = {}
        for (i, j), c in self._c.items():
            out[j] = out.get(j, Fraction(0)) + c * q**i
        return {j: v for j, v in out.items() if v}

    def __call__(self, q: Number, t: Number) -> Fraction:
        q, t = Fraction(q), Fraction(t)
        return sum((c * q**i * t**j for (i, j), c in self._c.items()), Fraction(0))

    def __repr__(self):
        if not self._c:
            return "BiPoly(0)"
        terms = " + ".join(f"{c}*q^{i}*t^{j}" for (i, j), c in sorted(self._c.items()))
        return f"BiPoly({terms})"


def _is_numeric(x) -> bool:
    return isinstance(x, (int, _RationalABC))


def q_pochhammer(a, n: int, q=None):
    """The q-shifted factorial ``(a; q)_n = prod_{j<n} (1 - a q^j)``.

    With ``q`` omitted the product is formed symbolically in ``q``: ``a`` is
    a :class:`QPoly` or :class:`BiPoly` and the result lives in the same ring.
    With a rational ``q`` both arguments are numbers and the result is a
    :class:`~fractions.Fraction`.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if q is None:
        if isinstance(a, int):
            a = QPoly.constant(a)
        one = BiPoly.constant(1) if isinstance(a, BiPoly) else QPoly.constant(1)
        out = one
        for j in range(n):
            out = out * (one - a.shift_q(j) if isinstance(a, BiPoly) else one - a.shift(j))
        return out
    if not (_is_numeric(a) and _is_numeric(q)):
        raise TypeError("numeric q requires a numeric a")
    a, q = Fraction(a), Fraction(q)
    out = Fraction(1)
    qj = Fraction(1)
    for _ in range(n):
        out *= 1 - a * qj
        qj *= q
    return out


@lru_cache(maxsize=None)
def qpoch_q(n: int) -> QPoly:
    """``(q; q)_n`` as a polynomial."""
    return q_pochhammer(QPoly.monomial(1), n)


@lru_cache(maxsize=None)
def qpoch_shift(m: int, n: int) -> QPoly:
    """``(q^m; q)_n`` as a polynomial."""
    return q_pochhammer(QPoly.monomial(m), n)


@lru_cache(maxsize=None)
def q_binomial(n: int, k: int) -> QPoly:
    """Gaussian binomial coefficient via the Pascal recurrence."""
    if n < 0 or k < 0:
        raise ValueError("n and k must be non-negative")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    if k == 0 or k == n:
        return QPoly.constant(1)
    return q_binomial(n - 1, k - 1) + q_binomial(n - 1, k).shift(k)


def q_binomial_by_division(n: int, k: int) -> QPoly:
    """Same coefficient from ``(q)_n / ((q)_k (q)_{n-k})`` by exact division."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    return qpoch_q(n).exact_div(qpoch_q(k) * qpoch_q(n - k))


def pochhammer_bounds_check(q: Number, kmax: int) -> bool:
    """Check the uniform bounds on ``(q)_k`` for ``q = 1/d``, ``|d| >= 2``.

    For positive ``q``: ``1/4 < (q)_k <= 1``; for negative: ``1 <= (q)_k <= 3/2``.
    The upper bound is attained at ``k = 1`` when ``q = -1/2``.
    """
    q = Fraction(q)
    if q == 0 or q.numerator not in (1, -1) or abs(q.denominator) < 2:
        raise ValueError(f"q must be 1/d with |d| >= 2, got {q}")
    val = Fraction(1)
    for k in range(kmax + 1):
        if k:
            val *= 1 - q**k
        if q > 0:
            if not (Fraction(1, 4) < val <= 1):
                return False
        elif not (1 <= val <= Fraction(3, 2)):
            return False
    return True

