import dataclasses
import math
from fractions import Fraction

import mpmath
import pytest

from qexp.errors import DomainError, EnvelopeViolation
from qexp.forms import CaseTag, ProblemInstance
from qexp.intervals import Enclosure, working_precision
from qexp.measure import (
    Certificate,
    a_profile,
    asymptotic_restricted_exponent,
    b_profile,
    bound_enclosure,
    envelope_audit,
    exponent_ratio,
    feasible_gamma,
    gamma_condition,
    growth_params,
    lemma1_certificate,
    lemma1_constants,
    log_lower_bound_at,
    lower_bound_at,
    n0_threshold,
    n2_threshold,
    reference_N2,
    restricted_membership,
    restricted_xT,
    sqrt3_cap,
    theorem1_certificate,
    theorem2_certificate,
    tk_product_bound,
)
from qexp.oracle import eval_eq, restricted_scan

from oracles import log_2n2_float, profile_ratio_float

A, B = CaseTag.GENERAL_A, CaseTag.RESTRICTED_B
INST = ProblemInstance(2, 1, 2)
INST_B = ProblemInstance(2, 1, 2, "b")


def f(enc):
    return float(enc.mid())


class TestProfiles:
    def test_optimum_and_restricted_example(self):
        assert exponent_ratio(1, A) == Fraction(4, 3)
        assert exponent_ratio(2, B) == Fraction(6, 5)
        assert a_profile(1, A) == 2 and b_profile(1, A) == Fraction(3, 2)

    @pytest.mark.parametrize("case", [A, B])
    def test_continuous_at_one(self, case):
        eps = Fraction(1, 10**30)
        for prof in (a_profile, b_profile):
            assert abs(prof(1 + eps, case) - prof(1, case)) < 10 * eps

    @pytest.mark.parametrize("g", [Fraction(1, 7), Fraction(2, 3), Fraction(5, 4), Fraction(5, 2)])
    def test_against_float_formulas(self, g):
        for case, tag in ((A, "a"), (B, "b")):
            assert float(exponent_ratio(g, case)) == pytest.approx(profile_ratio_float(g, tag), rel=1e-14)

    def test_admissible_range(self):
        with pytest.raises(DomainError):
            b_profile(Fraction(11, 4), A)
        assert b_profile(Fraction(11, 4), B) > 0
        with pytest.raises(DomainError):
            a_profile(0, A)

    def test_restricted_limit(self):
        cap = sqrt3_cap()
        assert abs(float(exponent_ratio(cap, B)) - (1 + 1 / (3 + 2 * math.sqrt(3)))) < 1e-12
        assert f(asymptotic_restricted_exponent()) == pytest.approx(2.1547005383792515, abs=1e-15)


class TestGrowthParams:
    def test_reference_instance(self):
        p = growth_params(INST, 1)
        assert p.a_over_log_d == 2 and p.b_over_log_d == Fraction(3, 2)
        assert f(p.a) == pytest.approx(2 * math.log(2))
        assert f(p.a1) == pytest.approx(2 * math.log(2))
        assert f(p.b1) == pytest.approx(2 * math.log(2))
        assert f(p.b2) == pytest.approx(math.log(8))
        assert f(p.a2) == pytest.approx(math.log(8 * 4.768462), rel=1e-7)
        assert p.n0 == 1

    def test_product_constant(self):
        with mpmath.workdps(50):
            ref = mpmath.qp(-1, mpmath.mpf(1) / 2)
            enc = tk_product_bound()
            assert enc.lower <= ref <= enc.upper
        assert abs(f(enc) - 4.768462) < 1e-6

    def test_small_slope_a1_branch(self):
        p = growth_params(ProblemInstance(3, 1, 2), Fraction(1, 2))
        expect = 0.25 * math.log(3) + 1.5 * math.log(2)
        assert f(p.a1) == pytest.approx(expect)

    def test_restricted_n0(self):
        p = growth_params(INST_B, 2, tau=Fraction(1, 5))
        expect = math.ceil(2 / 3 * math.log(20) / math.log(2))
        assert p.n0 == expect
        assert growth_params(INST_B, 2).n0 == 1

    def test_r_below_one(self):
        p = growth_params(INST, 1)
        n = p.r_below_one_from()
        with working_precision(128):
            assert all(p.log_R(m).b < 0 for m in range(n, n + 20))


class TestLemmaConstants:
    def test_quadratic_root(self):
        p = growth_params(ProblemInstance(3, 2, 5), Fraction(3, 2))
        c1, c2, c3 = lemma1_constants(p)
        with working_precision(128):
            b, b1, b2 = p.b.to_iv(), p.b1.to_iv(), p.b2.to_iv()
            resid = b * c1.to_iv() ** 2 - b1 * c1.to_iv() - b2
            assert 0 in resid + mpmath.iv.mpf([-1e-30, 1e-30])
            assert c1.upper <= (b1 / b + mpmath.iv.sqrt(b2 / b)).b

    def test_degenerate(self):
        p = growth_params(INST, 1)
        zero = Enclosure.exact(0)
        p0 = dataclasses.replace(p, b1=zero, b2=zero)
        c1, c2, c3 = lemma1_constants(p0)
        assert c1.upper == 0
        assert f(c2) == pytest.approx(4 * f(p.a) + f(p.a1))
        assert f(c3) == pytest.approx(4 * f(p.a) + 2 * f(p.a1) + f(p.a2))

    def test_nonpositive_b_rejected(self):
        p = dataclasses.replace(growth_params(INST, 1), b=Enclosure.exact(0))
        with pytest.raises(DomainError):
            lemma1_constants(p)


class TestGeneralCertificate:
    def test_certificate(self):
        c = theorem1_certificate(INST)
        assert c.main_exponent == Fraction(7, 3)
        L = math.log(2)
        coeff = (22 / 3 * L + 8 * L + 4 * math.sqrt(math.log(4) * L)) / math.sqrt(1.5 * L)
        assert f(c.error_coefficient) == pytest.approx(coeff, rel=1e-14)
        assert f(c.error_coefficient) == pytest.approx(14.268667597105735, rel=1e-14)
        assert f(c.c4) == pytest.approx(38.85490913058258, rel=1e-14)
        assert c.c4.lower >= c.c3.upper
        assert c.N_threshold == 1

    @pytest.mark.parametrize("d,u,v", [(3, 1, 2), (2, 1, 3), (-2, 1, 2), (5, -2, 7)])
    def test_other_instances(self, d, u, v):
        c = theorem1_certificate(ProblemInstance(d, u, v))
        assert c.main_exponent == Fraction(7, 3)
        assert c.c4.lower >= c.c3.upper
        assert c.N_threshold == n0_threshold(c.params)

    def test_wrong_case(self):
        with pytest.raises(DomainError):
            theorem1_certificate(INST_B)

    def test_bound_values(self):
        c = theorem1_certificate(INST)
        N = 10**6
        eps1 = f(c.error_coefficient) / math.sqrt(math.log(2 * N))
        assert eps1 == pytest.approx(3.7456, abs=1e-3)
        val = lower_bound_at(c, N)
        assert 0 < val < 1e-14
        expect = -f(c.c4) - (7 / 3 + eps1) * math.log(2 * N)
        assert float(mpmath.log(val)) == pytest.approx(expect, rel=1e-12)
        assert float(log_lower_bound_at(c, N)) == pytest.approx(expect, rel=1e-12)
        enc = bound_enclosure(c, N)
        assert enc.lower == val and enc.upper >= val

    def test_bound_monotone(self):
        c = theorem1_certificate(INST)
        vals = [lower_bound_at(c, n) for n in (1, 2, 10, 10**3, 10**6, 10**12, -10**12 - 1)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_threshold_enforced(self):
        c = dataclasses.replace(theorem1_certificate(INST), N_threshold=100)
        with pytest.raises(DomainError):
            lower_bound_at(c, 99)
        assert lower_bound_at(c, -100) > 0

    def test_generic_slope(self):
        assert lemma1_certificate(INST, 1).c4 is not None
        c = lemma1_certificate(INST, Fraction(3, 2))
        assert c.main_exponent == 1 + exponent_ratio(Fraction(3, 2), A) > Fraction(7, 3)


class TestRestricted:
    def test_reference_n2(self):
        enc, n2 = reference_N2()
        assert 12.0176 <= f(enc) <= 12.0178
        assert n2 == 82836
        assert f(enc) == pytest.approx(log_2n2_float(1 + math.sqrt(3), 0.2, 2), rel=1e-13)

    def test_n2_rational_gamma(self):
        enc, n2 = n2_threshold(Fraction(3, 2), Fraction(1, 5), 3)
        assert f(enc) == pytest.approx(log_2n2_float(1.5, 0.2, 3))
        assert n2 == math.ceil(math.exp(f(enc)) / 2)

    def test_tau_lower_bound(self):
        for d in (2, 3, -2, -3, 7):
            for t in (Fraction(1, 2), Fraction(-1, 2), Fraction(-2, 3), Fraction(1, 9)):
                assert eval_eq(Fraction(1, d), t).lower_fraction > Fraction(1, 5)

    def test_feasible_gamma_monotone(self):
        gs = [feasible_gamma(INST_B, N) for N in (10**3, 82836, 10**10, 10**40, 10**400)]
        assert all(b >= a for a, b in zip(gs, gs[1:]))
        assert gs[1] > 1
        # T grows like log N, so the cap is approached slowly
        assert float(gs[-1]) > 2.3
        assert gs[-1] < 1 + math.sqrt(3)
        with working_precision(128):
            x, T = restricted_xT(INST_B, 82836)
            assert gamma_condition(gs[1], x, T)
            assert not gamma_condition(gs[1] + Fraction(2, 10**9), x, T)

    def test_membership(self):
        tau = eval_eq(INST_B.q, INST_B.t, 512)
        pairs = restricted_scan(INST_B, range(1, 61), 512)
        big = [p for p in pairs if p.s >= 50]
        ctx = restricted_membership(INST_B, Fraction(3, 2), big[0].s, big[0].N, tau)
        assert ctx.member and ctx.gamma_condition and ctx.nbar_condition
        small = [p for p in pairs if p.s <= 3]
        ctx = restricted_membership(INST_B, Fraction(5, 2), small[0].s, small[0].N, tau)
        assert not ctx.member
        with pytest.raises(DomainError):
            restricted_membership(INST_B, 1, big[0].s, big[0].N, tau)
        with pytest.raises(DomainError):
            restricted_membership(INST_B, 2, big[0].s, big[0].N + 5, tau)

    def test_restricted_certificate(self):
        c = theorem2_certificate(INST_B, 82836)
        assert c.case is B and c.gamma_used > 1
        assert c.main_exponent == 1 + exponent_ratio(c.gamma_used, B)
        asym = f(c.asymptotic_exponent)
        assert c.main_exponent > asym
        assert f(c.epsilon2) == pytest.approx(
            float(c.main_exponent) - asym + f(c.error_coefficient) / math.sqrt(math.log(2 * 82836)))
        later = theorem2_certificate(INST_B, 10**60)
        assert later.epsilon2.upper < c.epsilon2.lower
        assert later.gamma_used > c.gamma_used

    def test_restricted_explicit_gamma(self):
        c = theorem2_certificate(INST_B, 10**7, gamma=Fraction(7, 5))
        assert c.gamma_used == Fraction(7, 5)
        for bad in (Fraction(3, 2), Fraction(27, 10), 1):
            with pytest.raises(DomainError):
                theorem2_certificate(INST_B, 10**7, gamma=bad)

    def test_restricted_fallback(self):
        with pytest.warns(UserWarning, match="falling back"):
            c = theorem2_certificate(INST_B, 1)
        assert c.case is A and c.main_exponent == Fraction(7, 3)

    def test_restricted_wrong_case(self):
        with pytest.raises(DomainError):
            theorem2_certificate(INST, 10**6)


class TestEnvelopeAudit:
    def test_reference_grid(self):
        report = envelope_audit(INST, growth_params(INST, 1), 12)
        assert report.ok and len(report.rows) == 12
        g, d = report.min_margins()
        assert g > 0 and d > 0

    def test_restricted_slope(self):
        report = envelope_audit(INST_B, growth_params(INST_B, 2), 8)
        assert report.ok

    def test_small_slope_skips_zero_shift(self):
        report = envelope_audit(INST, growth_params(INST, Fraction(1, 3)), 6)
        assert report.skipped == [1, 2]

    def test_violation_raises_with_report(self):
        p = dataclasses.replace(growth_params(INST, 1), a2=Enclosure.exact(-20))
        with pytest.raises(EnvelopeViolation) as info:
            envelope_audit(INST, p, 4)
        assert info.value.report is not None and not info.value.report.ok

    def test_n_max_below_n0(self):
        p = dataclasses.replace(growth_params(INST, 1), n0=3)
        with pytest.raises(DomainError):
            envelope_audit(INST, p, 2)


def test_certificate_is_immutable():
    c = theorem1_certificate(INST)
    with pytest.raises(dataclasses.FrozenInstanceError):
        c.N_threshold = 5
    assert isinstance(c, Certificate)
