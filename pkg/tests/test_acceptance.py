"""Acceptance criteria 1-8, one test per criterion.

Each test records a single PASS/FAIL line; ``conftest.py`` repeats them in
the terminal summary so they are visible without ``-s``.
"""

import functools
import math
import time
from fractions import Fraction

from qexp.cli import main
from qexp.forms import ProblemInstance, delta_exponent, exact_form, numeric_form, s_threshold, true_denominator
from qexp.measure import (
    asymptotic_restricted_exponent,
    audit_form,
    bound_enclosure,
    exponent_ratio,
    reference_N2,
    sqrt3_cap,
    theorem1_certificate,
    theorem2_certificate,
)
from qexp.oracle import eq_convergents, restricted_scan
from qexp.pade import build_pade, cn_closed_form, determinant, verify_pade_identity

from oracles import poch

RESULTS = []

GRID_D = (2, 3, -2)
GRID_V = (2, 3)


def _grid_instances(case):
    for d in GRID_D:
        for v in GRID_V:
            for u in range(-v + 1, v):
                if u and math.gcd(u, v) == 1:
                    yield ProblemInstance(d, u, v, case)


def criterion(num, title):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                detail = fn(*args, **kwargs) or ""
            except BaseException as exc:
                line = f"criterion {num} FAIL  {title}: {type(exc).__name__}: {str(exc)[:160]}"
                RESULTS.append(line)
                print(line)
                raise
            line = f"criterion {num} PASS  {title} ({detail}; {time.perf_counter() - t0:.1f}s)"
            RESULTS.append(line)
            print(line)
        return wrapper
    return deco


@criterion(1, "Pade identity, exact")
def test_c1_pade_identity():
    t0 = time.perf_counter()
    checks = 0
    for n in range(11):
        sys_n = build_pade(n)
        for q in (Fraction(1, 2), Fraction(1, 3), Fraction(-1, 2)):
            lead = verify_pade_identity(sys_n, q)
            expected = (-1) ** n * q ** ((3 * n * n + n) // 2) * poch(q, n, q) / poch(q, 2 * n + 1, q)
            assert lead == expected
            checks += 1
    elapsed = time.perf_counter() - t0
    assert elapsed < 30
    return f"{checks} (n, q) pairs"


@criterion(2, "determinant identity, exact")
def test_c2_determinant():
    qs = (Fraction(1, 2), Fraction(1, 3), Fraction(-1, 2), Fraction(1, 5), Fraction(-1, 7), Fraction(2, 9))
    for n in range(9):
        cn, ok = determinant(n)
        assert ok and cn == cn_closed_form(n)
        for q in qs:
            cq, _ = determinant(n, q)
            assert cq == cn(q) and cq != 0
    return f"n <= 8, {len(qs)} rational q"


@criterion(3, "denominator lemma audit")
def test_c3_denominators():
    count = 0
    for inst in _grid_instances("a"):
        for n in range(1, 9):
            for K in range(13):
                de = delta_exponent(n, K, "a")
                bound = inst.v ** (n + K) * abs(inst.d) ** de.delta
                assert bound % true_denominator(inst, n, K) == 0, (inst, n, K)
                count += 1
    for inst in _grid_instances("b"):
        for n in range(1, 9):
            for K in range(13):
                s0 = max(1, math.ceil(s_threshold(n, K))) if K > n else 1
                for s in (s0, s0 + 1):
                    _, _, p, qc = exact_form(inst, n, K, s)
                    for N in (1, -3, 82836, 10**12 + 39):
                        D = p * N - qc * inst.d**s
                        assert D.denominator == 1, (inst, n, K, s, N)
                        count += 1
    return f"{count} exact checks"


@criterion(4, "per-form envelopes Q1 and R at 512 bits")
def test_c4_envelopes():
    count = 0
    for case in ("a", "b"):
        for inst in _grid_instances(case):
            for n in range(1, 9):
                for K in range(13):
                    s = max(1, math.ceil(s_threshold(n, K))) if case == "b" and K > n else None
                    form = numeric_form(inst, n, K, s=s, precision=512)
                    row = audit_form(inst, form)
                    assert row.coeff_ok, ("Q1", inst, n, K)
                    assert row.remainder_ok, ("R", inst, n, K)
                    count += 1
    return f"{count} forms"


@criterion(5, "reference constants")
def test_c5_constants():
    assert exponent_ratio(1, "a") == Fraction(4, 3)
    cert = theorem1_certificate(ProblemInstance(2, 1, 2))
    assert cert.main_exponent == Fraction(7, 3)
    asym = asymptotic_restricted_exponent()
    assert abs(float(asym.mid()) - 2.15470) < 1e-5
    assert abs(float(exponent_ratio(sqrt3_cap(), "b")) + 1 - float(asym.mid())) < 1e-10
    enc, n2 = reference_N2()
    assert Fraction(120176, 10**4) <= enc.lower_fraction and enc.upper_fraction <= Fraction(120178, 10**4)
    assert n2 == 82836
    return f"log(2 N2) = {float(enc.mid()):.6f}, N2 = {n2}"


@criterion(6, "soundness sweep")
def test_c6_soundness():
    checked = 0
    worst = math.inf
    for d, u, v in ((2, 1, 2), (2, 1, 3), (3, 1, 2)):
        inst = ProblemInstance(d, u, v)
        cert = theorem1_certificate(inst)
        for c in eq_convergents(inst.q, inst.t, 10**9, 512):
            if c.N < cert.N_threshold:
                continue
            bound = bound_enclosure(cert, c.N)
            assert c.distance.lower >= bound.upper, (inst, c)
            worst = min(worst, float(c.distance.lower_fraction / bound.upper_fraction))
            checked += 1
    inst = ProblemInstance(2, 1, 2, "b")
    cert = theorem2_certificate(inst, 82836)
    assert cert.case.value == "b"
    restricted = 0
    for pair in restricted_scan(inst, range(1, 61), 512):
        if abs(pair.N) < 82836:
            continue
        for cc in (cert, theorem2_certificate(inst, abs(pair.N))):
            bound = bound_enclosure(cc, pair.N)
            assert pair.distance.lower >= bound.upper, (pair, cc.gamma_used)
            worst = min(worst, float(pair.distance.lower_fraction / bound.upper_fraction))
        restricted += 1
    assert restricted > 0
    return f"{checked} convergents + {restricted} restricted pairs, min ratio {worst:.3e}"


@criterion(7, "monotonicity of a/b")
def test_c7_monotonicity():
    cap = sqrt3_cap()
    pts = [cap * Fraction(i, 1000) for i in range(1, 1000)]
    below = [g for g in pts if g < 1]
    above = [g for g in pts if g > 1]
    ra = [exponent_ratio(g, "a") for g in below]
    rb = [exponent_ratio(g, "a") for g in above]
    assert all(y < x for x, y in zip(ra, ra[1:]))
    assert all(y > x for x, y in zip(rb, rb[1:]))
    assert min(ra + rb) > Fraction(4, 3) == exponent_ratio(1, "a")
    gb = [Fraction(i, 20) for i in range(1, 1001)]
    rr = [exponent_ratio(g, "b") for g in gb]
    assert all(y < x for x, y in zip(rr, rr[1:]))
    return f"{len(pts)} + {len(gb)} sample points"


@criterion(8, "certify determinism")
def test_c8_determinism(tmp_path):
    for case in ("a", "b"):
        outs = []
        for i in range(2):
            path = tmp_path / f"{case}{i}.json"
            assert main(["certify", "--case", case, "--n-max", "8", "--out", str(path)]) == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]
    return "byte-identical for cases a and b"
