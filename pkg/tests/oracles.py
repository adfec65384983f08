"""Independent reference computations used to cross-check the package.

Nothing here imports from ``qexp``; each routine takes a different road to
the same quantity (product formulas instead of recurrences, linear algebra
instead of closed forms, plain mpmath instead of interval sums).
"""

from fractions import Fraction
import math

import mpmath


def gauss_binomial(n, k, q):
    """``[n, k]_q`` at rational ``q`` from the product formula."""
    if k < 0 or k > n:
        return Fraction(0)
    q = Fraction(q)
    out = Fraction(1)
    for i in range(k):
        out *= (1 - q ** (n - i)) / (1 - q ** (i + 1))
    return out


def poch(a, n, q):
    out = Fraction(1)
    for j in range(n):
        out *= 1 - Fraction(a) * Fraction(q) ** j
    return out


def _solve(mat, rhs):
    """Gaussian elimination over the rationals."""
    n = len(mat)
    a = [row[:] + [r] for row, r in zip(mat, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


def pade_by_linear_algebra(n, q):
    """Diagonal ``[n/n]`` Pade pair of ``E_q(t)`` at rational ``q``.

    ``B`` is normalised so that ``B(0) = (q^{n+1}; q)_n``; coefficient lists
    are returned lowest degree first.
    """
    q = Fraction(q)
    e = [1 / poch(q, k, q) for k in range(2 * n + 1)]
    b0 = poch(q ** (n + 1), n, q)
    # sum_j b_j e_{m-j} = 0 for m = n+1..2n with b_0 fixed
    mat = [[e[m - j] for j in range(1, n + 1)] for m in range(n + 1, 2 * n + 1)]
    rhs = [-b0 * e[m] for m in range(n + 1, 2 * n + 1)]
    b = [b0] + (_solve(mat, rhs) if n else [])
    a = [sum(b[j] * e[m - j] for j in range(m + 1)) for m in range(n + 1)]
    return a, b


def eq_mpmath(q, t, dps=120):
    """``E_q(t)`` as a plain mpmath float via the infinite product."""
    with mpmath.workdps(dps):
        q, t = mpmath.mpf(Fraction(q).numerator) / Fraction(q).denominator, \
            mpmath.mpf(Fraction(t).numerator) / Fraction(t).denominator
        return mpmath.qp(t, q) ** -1


def best_approximation(x, N):
    """Closest fraction to ``x`` with denominator at most ``N``."""
    return Fraction(x).limit_denominator(N)


def profile_ratio_float(gamma, case):
    """``a(gamma)/b(gamma)`` in floating point, straight from the piecewise formulas."""
    g = float(gamma)
    if g <= 1:
        return (g * g / 2 + 1.5) / (2 * g - g * g / 2)
    if case == "a":
        return (g * g / 2 + g + 0.5) / (1 + g - g * g / 2)
    return (1 + g) / (0.5 + g)


def log_2n2_float(gamma, tau, d):
    return 2 * (gamma - 1) / ((gamma + 1) * math.log(abs(d))) * math.log(4 / tau) ** 2


def to_fraction(x):
    """Exact rational value of an mpmath float."""
    if not isinstance(x, mpmath.mpf):
        x = mpmath.mpf(x)
    man, exp = int(x.man), int(x.exp)
    sign = -1 if x < 0 else 1
    return sign * (Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp))
