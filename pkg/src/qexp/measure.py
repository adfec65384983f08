"""Growth envelopes, lower-bound constants and irrationality-measure certificates.

A family of linear forms with ``|p_n|, |q_n| <= exp(a n^2 + a1 n + a2)`` and
``|r_n| <= exp(-b n^2 + b1 n + b2)`` yields

    |Phi - M/N| > exp(-c3) * (2|N|)^-(1 + a/b + c2 / sqrt(b log 2|N|))

with ``c1 = (b1 + sqrt(b1^2 + 4 b b2)) / 2b``, ``c2 = 2 a c1 + 4a + a1`` and
``c3 = c1 (a c1 + 4a + a1) + 4a + 2 a1 + a2``.  Everything below is evaluated
in outward-rounded interval arithmetic; certificates use the endpoint that
makes the stated bound smaller.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Tuple

from mpmath import iv

from .errors import ConstructionError, DomainError, EnvelopeViolation
from .forms import CaseTag, ProblemInstance, numeric_form, s_threshold
from .intervals import Enclosure, iv_lower, iv_upper, rat, working_precision
from .oracle import eval_eq
from .qcore import q_pochhammer

CONST_BITS = 128
GAMMA_TOL = Fraction(1, 10**9)


def _iv(x):
    if isinstance(x, Enclosure):
        return x.to_iv()
    if hasattr(x, "_mpi_"):
        return x
    return rat(x)


@lru_cache(maxsize=None)
def tk_product_bound(bits: int = CONST_BITS) -> Enclosure:
    """Enclosure of ``prod_{k>=0} (1 + 2^-k)``, truncated at ``k = 200``.

    The omitted factors lie in ``[1, exp(2^-200)]``.
    """
    with working_precision(bits + 32):
        p = iv.mpf(1)
        for k in range(201):
            p = p * (1 + iv.ldexp(iv.mpf(1), -k))
        p = p * iv.exp(iv.mpf([0, 1]) * iv.ldexp(iv.mpf(1), -200))
        return Enclosure.from_iv(p)


def sqrt3_cap(bits: int = CONST_BITS) -> Fraction:
    """A rational just below ``1 + sqrt(3)``."""
    with working_precision(bits):
        return iv_lower(1 + iv.sqrt(3))


def asymptotic_restricted_exponent(bits: int = CONST_BITS) -> Enclosure:
    """``2 + 1/(3 + 2 sqrt 3)``."""
    with working_precision(bits):
        return Enclosure.from_iv(2 + 1 / (3 + 2 * iv.sqrt(3)))


# Piecewise slope profiles, normalised by log|d|.  gamma is an exact rational.

def a_profile(gamma, case) -> Fraction:
    """``a(gamma) / log|d|``."""
    case, g = CaseTag.parse(case), Fraction(gamma)
    if g <= 0:
        raise DomainError("gamma must be positive")
    if g <= 1:
        return g * g / 2 + Fraction(3, 2)
    if case is CaseTag.GENERAL_A:
        return g * g / 2 + g + Fraction(1, 2)
    return 1 + g


def b_profile(gamma, case) -> Fraction:
    """``b(gamma) / log|d|``; rejects slopes where it is not positive."""
    case, g = CaseTag.parse(case), Fraction(gamma)
    if g <= 0:
        raise DomainError("gamma must be positive")
    if g <= 1:
        val = 2 * g - g * g / 2
    elif case is CaseTag.GENERAL_A:
        val = 1 + g - g * g / 2
    else:
        val = Fraction(1, 2) + g
    if val <= 0:
        raise DomainError(f"b(gamma) <= 0 at gamma={g}: outside 0 < gamma < 1+sqrt(3)")
    return val


def exponent_ratio(gamma, case) -> Fraction:
    """``a(gamma) / b(gamma)``, exact for rational ``gamma``."""
    return a_profile(gamma, case) / b_profile(gamma, case)


@dataclass(frozen=True)
class GrowthParams:
    gamma: Fraction
    case: CaseTag
    a: Enclosure
    a1: Enclosure
    a2: Enclosure
    b: Enclosure
    b1: Enclosure
    b2: Enclosure
    n0: int
    a_over_log_d: Fraction
    b_over_log_d: Fraction

    def K_of(self, n: int) -> int:
        return math.floor(self.gamma * n)

    def log_Q(self, n: int):
        return self.a.to_iv() * n * n + self.a1.to_iv() * n + self.a2.to_iv()

    def log_R(self, n: int):
        return -self.b.to_iv() * n * n + self.b1.to_iv() * n + self.b2.to_iv()

    def r_below_one_from(self) -> int:
        """First ``n >= 1`` from which ``R(n) < 1`` certainly holds for all larger ``n``."""
        with working_precision(CONST_BITS):
            b, b1, b2 = self.b.to_iv(), self.b1.to_iv(), self.b2.to_iv()
            root = (b1 + iv.sqrt(b1 * b1 + 4 * b * b2)) / (2 * b)
            return max(1, math.floor(iv_upper(root)) + 1)


def _tau_lower(inst: ProblemInstance, tau) -> Fraction:
    if tau is None:
        return eval_eq(inst.q, inst.t, 256).lower_fraction
    if isinstance(tau, Enclosure):
        return tau.lower_fraction
    return Fraction(tau)


def growth_params(inst: ProblemInstance, gamma, tau=None, bits: int = CONST_BITS) -> GrowthParams:
    """Envelope constants at slope ``gamma = K/n`` for the instance's case.

    ``tau`` (a lower bound or enclosure of ``E_q(t)``) is only used to set
    ``n0`` in the restricted case; the oracle supplies it when omitted.
    """
    case = inst.case
    g = Fraction(gamma)
    ap, bp = a_profile(g, case), b_profile(g, case)
    with working_precision(bits):
        L = iv.log(abs(inst.d))
        lv = iv.log(inst.v)
        gi = rat(g)
        a = rat(ap) * L
        b = rat(bp) * L
        if g <= 1:
            a1 = (1 - gi) / 2 * L + (gi + 1) * lv
        else:
            a1 = (gi + 1) * lv
        a2 = iv.log(8 * tk_product_bound(bits).to_iv())
        b1 = (1 + gi) * lv
        b2 = iv.log(8)
        n0 = 1
        if case is CaseTag.RESTRICTED_B:
            tl = _tau_lower(inst, tau)
            if tl < 4:
                need = 2 / (1 + gi) * iv.log(4 / rat(tl)) / L
                n0 = max(1, math.ceil(iv_upper(need)))
        E = Enclosure.from_iv
        return GrowthParams(g, case, E(a), E(a1), E(a2), E(b), E(b1), E(b2), n0, ap, bp)


def lemma1_constants(params: GrowthParams, bits: int = CONST_BITS) -> Tuple[Enclosure, Enclosure, Enclosure]:
    with working_precision(bits):
        a, a1, a2 = params.a.to_iv(), params.a1.to_iv(), params.a2.to_iv()
        b, b1, b2 = params.b.to_iv(), params.b1.to_iv(), params.b2.to_iv()
        if iv_lower(b) <= 0:
            raise DomainError("b must be positive")
        c1 = (b1 + iv.sqrt(b1 * b1 + 4 * b * b2)) / (2 * b)
        c2 = 2 * a * c1 + 4 * a + a1
        c3 = c1 * (a * c1 + 4 * a + a1) + 4 * a + 2 * a1 + a2
        return Enclosure.from_iv(c1), Enclosure.from_iv(c2), Enclosure.from_iv(c3)


def n0_threshold(params: GrowthParams, bits: int = CONST_BITS) -> int:
    """``ceil(exp(b n0^2 - b1 n0 - b2) / 2)``, at least 1."""
    n0 = params.n0
    with working_precision(bits):
        val = iv.exp(params.b.to_iv() * n0 * n0 - params.b1.to_iv() * n0 - params.b2.to_iv()) / 2
        return max(1, math.ceil(iv_upper(val)))


@dataclass(frozen=True)
class Certificate:
    """Claim ``|E_q(t) - M/N| >= exp(-K) (2|N|)^-(mu + e / sqrt(log 2|N|))``.

    ``K`` is ``constant_log``, ``mu`` is ``main_exponent`` and ``e`` is
    ``error_coefficient``; both enclosures are used at their upper endpoint.
    The claim covers ``|N| >= N_threshold``.
    """

    case: CaseTag
    main_exponent: Fraction
    error_coefficient: Enclosure
    constant_log: Enclosure
    N_threshold: int
    gamma_used: Fraction
    c1: Optional[Enclosure] = None
    c2: Optional[Enclosure] = None
    c3: Optional[Enclosure] = None
    c4: Optional[Enclosure] = None
    params: Optional[GrowthParams] = None
    asymptotic_exponent: Optional[Enclosure] = None
    epsilon2: Optional[Enclosure] = None
    N0: Optional[int] = None
    N2: Optional[int] = None
    instance: Optional[ProblemInstance] = None
    notes: Tuple[str, ...] = field(default=())


def theorem1_certificate(inst: ProblemInstance, bits: int = CONST_BITS) -> Certificate:
    """Explicit exponent-7/3 measure for arbitrary ``M/N`` (slope ``gamma = 1``)."""
    if inst.case is not CaseTag.GENERAL_A:
        raise DomainError("the exponent-7/3 certificate needs a general-case instance")
    params = growth_params(inst, 1, bits=bits)
    c1, c2, c3 = lemma1_constants(params, bits)
    with working_precision(bits):
        L, lv = iv.log(abs(inst.d)), iv.log(inst.v)
        root = iv.sqrt(iv.log(4) * L)
        c4 = (14 * lv / (3 * L) * (rat(Fraction(4, 3)) * lv + root) + 8 * root
              + 7 * iv.log(2) + rat(Fraction(44, 3)) * lv + 8 * L
              + iv.log(tk_product_bound(bits).to_iv()))
        coeff = (rat(Fraction(22, 3)) * lv + 8 * L + 4 * root) / iv.sqrt(rat(Fraction(3, 2)) * L)
        lemma_coeff = c2.to_iv() / iv.sqrt(params.b.to_iv())
        if iv_lower(c4) < c3.upper_fraction:
            raise ConstructionError("closed-form c4 does not dominate c3")
        if iv_lower(coeff) < iv_upper(lemma_coeff):
            raise ConstructionError("closed-form error coefficient does not dominate c2/sqrt(b)")
        c4e, coeffe = Enclosure.from_iv(c4), Enclosure.from_iv(coeff)
    N0 = n0_threshold(params, bits)
    notes = []
    if N0 > 1:
        notes.append(f"lower-bound threshold N0={N0} exceeds 1; bound certified only for |N| >= N0")
    return Certificate(
        case=CaseTag.GENERAL_A,
        main_exponent=1 + exponent_ratio(1, CaseTag.GENERAL_A),
        error_coefficient=coeffe,
        constant_log=c4e,
        N_threshold=N0,
        gamma_used=Fraction(1),
        c1=c1, c2=c2, c3=c3, c4=c4e,
        params=params,
        N0=N0,
        instance=inst,
        notes=tuple(notes),
    )


def bound_enclosure(cert: Certificate, N: int, bits: int = CONST_BITS) -> Enclosure:
    """Enclosure of the certified bound at ``N`` (constants at their upper endpoints)."""
    if abs(N) < cert.N_threshold:
        raise DomainError(f"|N|={abs(N)} below the certificate threshold {cert.N_threshold}")
    with working_precision(bits):
        lg = iv.log(2 * abs(N))
        expo = rat(cert.main_exponent) + rat(cert.error_coefficient.upper_fraction) / iv.sqrt(lg)
        return Enclosure.from_iv(iv.exp(-rat(cert.constant_log.upper_fraction) - expo * lg))


def lower_bound_at(cert: Certificate, N: int, bits: int = CONST_BITS):
    """The certified lower bound at ``N``, rounded downward (an mpf)."""
    return bound_enclosure(cert, N, bits).lower


def log_lower_bound_at(cert: Certificate, N: int, bits: int = CONST_BITS) -> Fraction:
    """Rational lower bound on ``log`` of the certified bound."""
    if abs(N) < cert.N_threshold:
        raise DomainError(f"|N|={abs(N)} below the certificate threshold {cert.N_threshold}")
    with working_precision(bits):
        lg = iv.log(2 * abs(N))
        expo = rat(cert.main_exponent) + rat(cert.error_coefficient.upper_fraction) / iv.sqrt(lg)
        return iv_lower(-rat(cert.constant_log.upper_fraction) - expo * lg)


def lemma1_certificate(inst: ProblemInstance, gamma, bits: int = CONST_BITS) -> Certificate:
    """General-case measure at a fixed slope, straight from the lemma's constants."""
    if inst.case is not CaseTag.GENERAL_A:
        raise DomainError("fixed-slope certificate needs a general-case instance")
    g = Fraction(gamma)
    if g == 1:
        return theorem1_certificate(inst, bits)
    params = growth_params(inst, g, bits=bits)
    c1, c2, c3 = lemma1_constants(params, bits)
    with working_precision(bits):
        coeff = Enclosure.from_iv(c2.to_iv() / iv.sqrt(params.b.to_iv()))
    N0 = n0_threshold(params, bits)
    return Certificate(
        case=CaseTag.GENERAL_A,
        main_exponent=1 + exponent_ratio(g, inst.case),
        error_coefficient=coeff,
        constant_log=c3,
        N_threshold=N0,
        gamma_used=g,
        c1=c1, c2=c2, c3=c3,
        params=params,
        N0=N0,
        instance=inst,
        notes=("constant_log is c3 and error_coefficient is c2/sqrt(b) at this slope",),
    )


# Restricted approximations d^s / N.

def restricted_xT(inst: ProblemInstance, N: int):
    """``x = log v / log|d|`` and ``T = 2 log|N| / log|d|`` as intervals."""
    L = iv.log(abs(inst.d))
    return iv.log(inst.v) / L, 2 * iv.log(abs(N)) / L


def gamma_condition(gamma, x, T) -> bool:
    """Rigorous check of the feasibility inequality for slope ``gamma``.

    ``sqrt(g^2-1) (2 + x + (4+x) g + sqrt((1+g)^2 x^2 + (1+2g)(6+T))) <= (1+2g) sqrt(T)``
    """
    g = _iv(gamma)
    lhs = iv.sqrt(g * g - 1) * (2 + x + (4 + x) * g + iv.sqrt((1 + g) ** 2 * x * x + (1 + 2 * g) * (6 + T)))
    rhs = (1 + 2 * g) * iv.sqrt(T)
    return iv_upper(lhs) <= iv_lower(rhs)


def feasible_gamma(inst: ProblemInstance, N: int, tol: Fraction = GAMMA_TOL,
                   bits: int = CONST_BITS) -> Fraction:
    """Largest dyadic ``gamma`` in ``(1, 1+sqrt 3)`` satisfying the feasibility inequality.

    Bisection keeps the feasible endpoint, so the result errs downward.
    Returns 1 when no ``gamma > 1`` is certified feasible.
    """
    with working_precision(bits):
        x, T = restricted_xT(inst, N)
        cap = sqrt3_cap(bits)
        lo, hi = Fraction(1), Fraction(math.floor(cap * 2**40), 2**40)
        if gamma_condition(hi, x, T):
            return hi
        while hi - lo > tol:
            mid = (lo + hi) / 2
            if gamma_condition(mid, x, T):
                lo = mid
            else:
                hi = mid
        return lo


def n2_threshold(gamma, tau, d: int, bits: int = CONST_BITS) -> Tuple[Enclosure, int]:
    """``log(2 N2) = 2 (g-1) / ((g+1) log|d|) * log(4/tau)^2`` and ``N2 = ceil(exp(.)/2)``.

    ``gamma`` may be rational or an interval (e.g. ``1 + sqrt 3``); ``tau`` is
    a lower bound on ``E_q(t)``.
    """
    with working_precision(bits):
        g = _iv(gamma)
        val = 2 * (g - 1) / ((g + 1) * iv.log(abs(d))) * iv.log(4 / _iv(tau)) ** 2
        n2 = math.ceil(iv_upper(iv.exp(val) / 2))
        return Enclosure.from_iv(val), n2


def reference_N2(bits: int = CONST_BITS) -> Tuple[Enclosure, int]:
    """N2 with ``gamma = 1 + sqrt 3``, ``tau = 1/5``, ``|d| = 2``."""
    with working_precision(bits):
        return n2_threshold(1 + iv.sqrt(3), Fraction(1, 5), 2, bits)


@dataclass(frozen=True)
class RestrictedContext:
    s: int
    N: int
    gamma: Fraction
    x: Enclosure
    T: Enclosure
    n_bar: int
    n2: Enclosure
    N2: int
    gamma_condition: bool
    nbar_condition: bool
    member: bool


def restricted_membership(inst: ProblemInstance, gamma, s: int, N: int, tau_enclosure: Enclosure,
                          bits: int = CONST_BITS) -> RestrictedContext:
    """Decide whether ``(d^s, N)`` lies in the set where the lower-bound lemma applies."""
    g = Fraction(gamma)
    if g <= 1:
        raise DomainError("restricted membership needs gamma > 1")
    M = inst.d**s
    if M * N <= 0:
        raise DomainError("need d^s * N > 0")
    r = Fraction(M, N)
    lo, hi = tau_enclosure.lower_fraction, tau_enclosure.upper_fraction
    if max(abs(lo - r), abs(hi - r)) >= Fraction(1, abs(N)):
        raise DomainError("need |tau - d^s/N| < 1/|N|")
    with working_precision(bits):
        x, T = restricted_xT(inst, N)
        gi = rat(g)
        expr = ((1 + gi) * x + iv.sqrt((1 + gi) ** 2 * x * x + (1 + 2 * gi) * (6 + T))) / (1 + 2 * gi)
        n_bar = math.floor(iv_upper(expr))
        n2 = iv.sqrt(T / (gi * gi - 1))
        cond = gamma_condition(g, x, T)
        nbar_ok = n_bar + 2 <= iv_lower(n2)
        xe, Te, n2e = Enclosure.from_iv(x), Enclosure.from_iv(T), Enclosure.from_iv(n2)
    _, N2 = n2_threshold(g, lo, inst.d, bits)
    params = growth_params(inst.with_case("b"), g, tau=lo, bits=bits)
    member = (cond and abs(N) >= N2 and abs(N) >= 2 / lo and n_bar >= params.n0
              and abs(N) >= n0_threshold(params, bits))
    return RestrictedContext(s, N, g, xe, Te, n_bar, n2e, N2, cond, nbar_ok, member)


def theorem2_certificate(inst: ProblemInstance, N: int, tau: Optional[Enclosure] = None,
                         bits: int = CONST_BITS, gamma=None) -> Certificate:
    """Measure for ``d^s / N`` approximations, valid for all ``|N'| >= |N|``.

    The slope is the largest feasible ``gamma(N)``; the main exponent
    ``1 + a/b`` at that slope exceeds the asymptotic ``2 + 1/(3+2 sqrt 3)`` by
    a gap folded, together with the lemma's error term, into ``epsilon2``.
    An explicit ``gamma`` replaces the search but must itself be feasible.
    """
    if inst.case is not CaseTag.RESTRICTED_B:
        raise DomainError("the restricted certificate needs a restricted-case instance")
    if tau is None:
        tau = eval_eq(inst.q, inst.t, 256)
    tl = tau.lower_fraction
    if gamma is None:
        g = feasible_gamma(inst, N, bits=bits)
    else:
        g = Fraction(gamma)
        with working_precision(bits):
            x, T = restricted_xT(inst, N)
            if g <= 1 or g >= sqrt3_cap(bits) or not gamma_condition(g, x, T):
                raise DomainError(f"gamma={g} is not feasible at |N|={abs(N)}")
    fallback_reason = None
    if g <= 1:
        fallback_reason = f"no feasible slope gamma > 1 at |N|={abs(N)}"
    else:
        params = growth_params(inst, g, tau=tl, bits=bits)
        N0 = n0_threshold(params, bits)
        _, N2 = n2_threshold(g, tl, inst.d, bits)
        floor_N = max(N0, N2, math.ceil(2 / tl))
        with working_precision(bits):
            x, T = restricted_xT(inst, N)
            gi = rat(g)
            expr = ((1 + gi) * x + iv.sqrt((1 + gi) ** 2 * x * x + (1 + 2 * gi) * (6 + T))) / (1 + 2 * gi)
            n_bar_low = math.floor(iv_lower(expr))
        if abs(N) < floor_N or n_bar_low < params.n0:
            fallback_reason = f"|N|={abs(N)} outside the restricted domain (needs >= {floor_N})"
    if fallback_reason:
        warnings.warn(fallback_reason + "; falling back to the general certificate")
        return theorem1_certificate(inst.with_case("a"), bits)
    c1, c2, c3 = lemma1_constants(params, bits)
    realized = 1 + exponent_ratio(g, inst.case)
    with working_precision(bits):
        b = params.b.to_iv()
        coeff = c2.to_iv() / iv.sqrt(b)
        asym = asymptotic_restricted_exponent(bits).to_iv()
        eps2 = (rat(realized) - asym) + coeff / iv.sqrt(iv.log(2 * abs(N)))
        coeffe, eps2e = Enclosure.from_iv(coeff), Enclosure.from_iv(eps2)
    _, ref_n2 = reference_N2(bits)
    return Certificate(
        case=CaseTag.RESTRICTED_B,
        main_exponent=realized,
        error_coefficient=coeffe,
        constant_log=c3,
        N_threshold=abs(N),
        gamma_used=g,
        c1=c1, c2=c2, c3=c3,
        params=params,
        asymptotic_exponent=asymptotic_restricted_exponent(bits),
        epsilon2=eps2e,
        N0=N0,
        N2=N2,
        instance=inst,
        notes=(
            "epsilon2 = (1 + a/b at gamma(N)) - (2 + 1/(3+2*sqrt(3))) + c2/sqrt(b*log(2|N|))",
            f"reference threshold for |d|=2, tau>=1/5: N2={ref_n2}",
        ),
    )


@dataclass
class EnvelopeRow:
    n: int
    K: int
    log_pq: Fraction
    log_Q: Optional[Fraction]
    log_r: Fraction
    log_R: Optional[Fraction]
    coeff_ok: bool
    remainder_ok: bool
    growth_ok: bool
    decay_ok: bool

    @property
    def ok(self) -> bool:
        return self.coeff_ok and self.remainder_ok and self.growth_ok and self.decay_ok


@dataclass
class EnvelopeReport:
    instance: ProblemInstance
    gamma: Fraction
    rows: List[EnvelopeRow]
    skipped: List[int]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def min_margins(self) -> Tuple[Optional[Fraction], Optional[Fraction]]:
        """Smallest ``log Q - log max(|p|,|q|)`` and ``log R - log |r|`` (lower bounds)."""
        rows = [r for r in self.rows if r.log_Q is not None]
        if not rows:
            return None, None
        return (min(r.log_Q - r.log_pq for r in rows),
                min(r.log_R - r.log_r for r in rows))


def coefficient_envelope(inst: ProblemInstance, K: int, scaler: int) -> Fraction:
    """``8 max(1, |(t)_K|) * scaler``."""
    return 8 * max(Fraction(1), abs(q_pochhammer(inst.t, K, inst.q))) * scaler


def remainder_envelope_holds(inst: ProblemInstance, form, r_upper: Fraction) -> bool:
    """Exact test of ``|r| <= 8 |d|^-omega`` by squaring out the half-integer power."""
    ex = form.exponents
    two_omega = 2 * ex.omega_rational
    assert two_omega.denominator == 1
    lhs = r_upper**2 * Fraction(abs(inst.d)) ** int(two_omega)
    return lhs <= 64 * Fraction(inst.v) ** (2 * ex.omega_log_weight)


def audit_form(inst: ProblemInstance, form, params: Optional[GrowthParams] = None) -> EnvelopeRow:
    """Check one form against the per-form envelopes and, if given, the smooth ones."""
    n, K = form.n, form.K
    big = max(abs(form.p), abs(form.q_coef))
    r_up = form.r_enclosure.magnitude_upper()
    coeff_ok = big <= coefficient_envelope(inst, K, form.scaler)
    rem_ok = remainder_envelope_holds(inst, form, r_up)
    with working_precision(CONST_BITS):
        lpq = iv.log(rat(big))
        lr = iv.log(rat(r_up))
        lQf = lRf = None
        gq = dr = True
        if params is not None:
            lQf, lRf = iv_lower(params.log_Q(n)), iv_lower(params.log_R(n))
            gq = iv_upper(lpq) <= lQf
            dr = iv_upper(lr) <= lRf
        return EnvelopeRow(n, K, iv_upper(lpq), lQf, iv_upper(lr), lRf, coeff_ok, rem_ok, gq, dr)


def envelope_audit(inst: ProblemInstance, params: GrowthParams, n_max: int,
                   precision: int = 512, s: Optional[int] = None) -> EnvelopeReport:
    """Verify the growth and decay envelopes on ``n0 <= n <= n_max`` with ``K = floor(gamma n)``.

    Forms with ``K = 0`` are outside the estimates' hypotheses and are listed
    as skipped.  Any violation raises :class:`EnvelopeViolation` carrying the
    report.
    """
    if n_max < params.n0:
        raise DomainError(f"n_max={n_max} below n0={params.n0}")
    rows, skipped = [], []
    for n in range(params.n0, n_max + 1):
        K = params.K_of(n)
        if K < 1:
            skipped.append(n)
            continue
        s_used = s
        if inst.case is CaseTag.RESTRICTED_B and K > n and s_used is None:
            s_used = max(1, math.ceil(s_threshold(n, K)))
        form = numeric_form(inst, n, K, s=s_used, precision=precision)
        rows.append(audit_form(inst, form, params))
    report = EnvelopeReport(inst, params.gamma, rows, skipped)
    if not report.ok:
        bad = [(r.n, r.K) for r in rows if not r.ok]
        raise EnvelopeViolation(f"envelope violated at (n, K) in {bad}", report)
    return report
