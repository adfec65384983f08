"""Command-line entry point: ``qexp <subcommand> [options]``.

Exit codes: 0 success, 1 a check failed, 2 bad configuration, 3 precision
exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Any, Dict, List, Optional

from . import __version__
from .errors import EnvelopeViolation, PrecisionExhausted, QexpError
from .forms import CaseTag, ProblemInstance
from .intervals import DEFAULT_PRECISION, Enclosure, decimal_string, working_precision
from .measure import (
    CONST_BITS,
    Certificate,
    EnvelopeReport,
    bound_enclosure,
    envelope_audit,
    growth_params,
    lemma1_certificate,
    restricted_membership,
    theorem2_certificate,
)
from .oracle import eq_convergents, eval_eq, eval_product, eval_series, restricted_scan

SCHEMA = "qexp-cert/1"
DIGITS = 40

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_PRECISION = 0, 1, 2, 3


class ConfigError(QexpError):
    pass


@dataclass(frozen=True)
class RunConfig:
    d: int = 2
    u: int = 1
    v: int = 2
    case: CaseTag = CaseTag.GENERAL_A
    precision: int = DEFAULT_PRECISION
    n_max: int = 10
    k_max: int = 12
    gamma: Optional[Fraction] = None
    s_max: int = 60
    n_bound: Optional[int] = None
    output_path: Optional[str] = None
    format: str = "json"

    def instance(self) -> ProblemInstance:
        try:
            return ProblemInstance(self.d, self.u, self.v, self.case)
        except (ValueError, QexpError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        if ns.precision < 53:
            raise ConfigError("--precision must be at least 53 bits")
        if ns.n_max < 0 or ns.k_max < 0 or ns.s_max < 0 or (ns.n_bound is not None and ns.n_bound < 1):
            raise ConfigError("grid limits must be non-negative (and --n-bound positive)")
        gamma = None
        if ns.gamma is not None:
            try:
                gamma = Fraction(ns.gamma)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"bad --gamma {ns.gamma!r}") from exc
            if gamma <= 0:
                raise ConfigError("--gamma must be positive")
        cfg = cls(ns.d, ns.u, ns.v, CaseTag.parse(ns.case), ns.precision, ns.n_max, ns.k_max,
                  gamma, ns.s_max, ns.n_bound, ns.out, ns.format)
        cfg.instance()
        return cfg


# -- serialisation -----------------------------------------------------------

def _interval(enc: Enclosure) -> Dict[str, str]:
    return {
        "lower": decimal_string(enc.lower, DIGITS, "down"),
        "upper": decimal_string(enc.upper, DIGITS, "up"),
        "rounding": "outward",
    }


def _upper(enc: Enclosure) -> Dict[str, str]:
    return {"value": decimal_string(enc.upper, DIGITS, "up"), "rounding": "up"}


def _lower(x) -> Dict[str, str]:
    return {"value": decimal_string(x, DIGITS, "down"), "rounding": "down"}


def _instance_json(inst: ProblemInstance) -> Dict[str, Any]:
    return {"d": inst.d, "u": inst.u, "v": inst.v, "case": inst.case.value,
            "q": str(inst.q), "t": str(inst.t)}


def audit_json(report: EnvelopeReport) -> Dict[str, Any]:
    growth, decay = report.min_margins()
    rows = []
    for r in report.rows:
        rows.append({
            "n": r.n, "K": r.K,
            "log_max_pq_upper": decimal_string(r.log_pq, 12, "up"),
            "log_Q_lower": decimal_string(r.log_Q, 12, "down"),
            "log_abs_r_upper": decimal_string(r.log_r, 12, "up"),
            "log_R_lower": decimal_string(r.log_R, 12, "down"),
            "coefficient_envelope": r.coeff_ok, "remainder_envelope": r.remainder_ok,
            "growth": r.growth_ok, "decay": r.decay_ok,
        })
    return {
        "ok": report.ok,
        "gamma": str(report.gamma),
        "n_range": [min((r.n for r in report.rows), default=None),
                    max((r.n for r in report.rows), default=None)],
        "skipped_n": report.skipped,
        "min_growth_margin": None if growth is None else decimal_string(growth, 12, "down"),
        "min_decay_margin": None if decay is None else decimal_string(decay, 12, "down"),
        "rows": rows,
    }


def certificate_json(cert: Certificate, audit: Optional[EnvelopeReport], precision: int) -> Dict[str, Any]:
    constants: Dict[str, Any] = {}
    if cert.params is not None:
        p = cert.params
        for name in ("a", "a1", "a2", "b", "b1", "b2"):
            constants[name] = _interval(getattr(p, name))
        constants["n0"] = p.n0
    for name in ("c1", "c2", "c3", "c4"):
        val = getattr(cert, name)
        constants[name] = None if val is None else _interval(val)
    out = {
        "schema": SCHEMA,
        "generator": f"qexp {__version__}",
        "instance": _instance_json(cert.instance) if cert.instance else None,
        "theorem": "general" if cert.case is CaseTag.GENERAL_A else "restricted",
        "claim": "|E_q(t) - M/N| >= exp(-constant_log) * (2|N|)^-(main_exponent + "
                 "error_coefficient/sqrt(log(2|N|))) for |N| >= N_threshold"
                 + ("" if cert.case is CaseTag.GENERAL_A else ", M = d^s, s >= 1, d^s N > 0"),
        "gamma_used": str(cert.gamma_used),
        "main_exponent": str(cert.main_exponent),
        "main_exponent_decimal": decimal_string(cert.main_exponent, DIGITS, "nearest"),
        "error_coefficient": _upper(cert.error_coefficient),
        "constant_log": _upper(cert.constant_log),
        "constants": constants,
        "thresholds": {"N_threshold": cert.N_threshold, "N0": cert.N0, "N2": cert.N2},
        "asymptotic_exponent": None,
        "epsilon2": None,
        "precision": {"constant_bits": CONST_BITS, "oracle_bits": precision,
                      "decimal_digits": DIGITS},
        "envelope_audit": audit_json(audit) if audit is not None else None,
        "notes": list(cert.notes),
    }
    if cert.asymptotic_exponent is not None:
        out["asymptotic_exponent"] = {"expression": "2+1/(3+2*sqrt(3))",
                                      **_interval(cert.asymptotic_exponent)}
    if cert.epsilon2 is not None:
        out["epsilon2"] = {"N": cert.N_threshold, **_upper(cert.epsilon2)}
    return out


def load_certificate(data: Dict[str, Any]) -> Certificate:
    """Rebuild the parts of a certificate needed to evaluate its bound."""
    if data.get("schema") != SCHEMA:
        raise ConfigError(f"unsupported certificate schema {data.get('schema')!r}")
    try:
        i = data["instance"]
        inst = ProblemInstance(int(i["d"]), int(i["u"]), int(i["v"]), i["case"])
        theorem = data["theorem"]
        coeff = Fraction(Decimal(data["error_coefficient"]["value"]))
        const = Fraction(Decimal(data["constant_log"]["value"]))
        return Certificate(
            case=CaseTag.GENERAL_A if theorem == "general" else CaseTag.RESTRICTED_B,
            main_exponent=Fraction(data["main_exponent"]),
            error_coefficient=Enclosure.between(coeff, coeff, 256),
            constant_log=Enclosure.between(const, const, 256),
            N_threshold=int(data["thresholds"]["N_threshold"]),
            gamma_used=Fraction(data["gamma_used"]),
            instance=inst,
        )
    except (KeyError, TypeError, ValueError, ArithmeticError) as exc:
        raise ConfigError(f"malformed certificate: {exc}") from exc


def _render_text(payload: Dict[str, Any]) -> str:
    lines = []

    def walk(prefix: str, obj: Any):
        if isinstance(obj, dict):
            if set(obj) >= {"lower", "upper"}:
                lines.append(f"{prefix:<40} [{obj['lower']}, {obj['upper']}]")
                return
            if set(obj) >= {"value", "rounding"} and len(obj) <= 3:
                lines.append(f"{prefix:<40} {obj['value']} ({obj['rounding']})")
                return
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else k, obj[k])
        elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
            keys = list(obj[0])
            lines.append(prefix)
            lines.append("  " + " ".join(f"{k:>14}" for k in keys))
            for row in obj:
                lines.append("  " + " ".join(f"{str(row[k]):>14}" for k in keys))
        else:
            lines.append(f"{prefix:<40} {obj}")

    walk("", payload)
    return "\n".join(lines) + "\n"


def render(payload: Dict[str, Any], fmt: str) -> str:
    if fmt == "text":
        return _render_text(payload)
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_output(text: str, path: Optional[str]) -> None:
    """Write to ``path`` atomically (temp file + rename), or to stdout."""
    if not path:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".qexp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- subcommands -------------------------------------------------------------

def cmd_verify_pade(cfg: RunConfig, inject_fault: bool = False):
    from .pade import (
        PadeSystem, build_pade, deg_q_bound_A, deg_q_bound_B,
        deg_q_coefficient_closed_form, determinant, verify_pade_identity,
        verify_pade_identity_symbolic, SYMBOLIC_LIMIT,
    )
    from .qcore import BiPoly, q_pochhammer

    inst = cfg.instance()
    failures: List[Dict[str, Any]] = []
    identities, determinants, degrees = [], [], []
    qs = sorted({inst.q, Fraction(1, 2), Fraction(1, 3), Fraction(-1, 2)})
    for n in range(cfg.n_max + 1):
        sys_n = build_pade(n)
        if inject_fault and n == min(1, cfg.n_max):
            sys_n = PadeSystem(n, sys_n.A + BiPoly({(0, n): 1}), sys_n.B, sys_n.tail_prefactor)
        for q in qs:
            try:
                lead = verify_pade_identity(sys_n, q)
                identities.append({"n": n, "q": str(q), "t^(2n+1) coefficient": str(lead)})
            except QexpError as exc:
                failures.append({"n": n, "K": None, "check": "pade-identity", "detail": str(exc)})
        if n <= SYMBOLIC_LIMIT:
            try:
                verify_pade_identity_symbolic(sys_n)
            except QexpError as exc:
                failures.append({"n": n, "K": None, "check": "pade-identity-symbolic", "detail": str(exc)})
        if n <= min(cfg.n_max - 1, 8):
            try:
                cn, _ = determinant(n)
                cq, _ = determinant(n, inst.q)
                if cq == 0:
                    raise QexpError(f"C_{n} vanishes at q={inst.q}")
                determinants.append({
                    "n": n,
                    "C_n_q_valuation": cn.valuation,
                    "C_n_q_degree": cn.degree,
                    "C_n_lowest_coefficient": cn.coeff(cn.valuation),
                    "C_n_at_q": str(cq),
                })
            except QexpError as exc:
                failures.append({"n": n, "K": None, "check": "determinant", "detail": str(exc)})
        if n >= 1:
            for K in range(cfg.k_max + 1):
                A = sys_n.A.scale_t(K)
                B = q_pochhammer(BiPoly.t(), K) * sys_n.B.scale_t(K)
                ok = A.deg_q <= deg_q_bound_A(n, K) and B.deg_q <= deg_q_bound_B(n, K)
                for k, c in A.t_coeffs().items():
                    if c.degree != deg_q_coefficient_closed_form(n, k, K):
                        ok = False
                degrees.append({"n": n, "K": K, "deg_q_A": A.deg_q, "bound_A": deg_q_bound_A(n, K),
                                "deg_q_B": B.deg_q, "bound_B": deg_q_bound_B(n, K)})
                if not ok:
                    failures.append({"n": n, "K": K, "check": "degree-bound", "detail": "bound exceeded"})
    payload = {
        "schema": "qexp-pade-report/1",
        "instance": _instance_json(inst),
        "n_max": cfg.n_max,
        "k_max": cfg.k_max,
        "ok": not failures,
        "failures": failures,
        "determinants": determinants,
        "identity_checks": len(identities),
        "degree_checks": len(degrees),
    }
    return payload, (EXIT_OK if not failures else EXIT_FAIL)


def _audit(inst: ProblemInstance, cert: Certificate, cfg: RunConfig) -> EnvelopeReport:
    gamma = cfg.gamma if cfg.gamma is not None else cert.gamma_used
    params = cert.params
    if params is None or params.gamma != gamma or params.case is not inst.case:
        params = growth_params(inst.with_case(cert.case), gamma)
    audit_inst = inst.with_case(cert.case)
    return envelope_audit(audit_inst, params, max(cfg.n_max, params.n0), precision=max(cfg.precision, 512))


def build_certificate(cfg: RunConfig) -> Certificate:
    inst = cfg.instance()
    if inst.case is CaseTag.GENERAL_A:
        return lemma1_certificate(inst, cfg.gamma if cfg.gamma is not None else 1)
    n = cfg.n_bound or 10**7
    return theorem2_certificate(inst, n, gamma=cfg.gamma)


def cmd_certify(cfg: RunConfig):
    inst = cfg.instance()
    cert = build_certificate(cfg)
    try:
        report = _audit(inst, cert, cfg)
    except EnvelopeViolation as exc:
        payload = {"schema": SCHEMA, "ok": False, "error": str(exc),
                   "envelope_audit": audit_json(exc.report) if exc.report else None}
        return payload, EXIT_FAIL
    return certificate_json(cert, report, cfg.precision), EXIT_OK


def cmd_validate(cfg: RunConfig, cert_data: Dict[str, Any], fault_exponent: Optional[Fraction] = None):
    cert = load_certificate(cert_data)
    inst = cert.instance
    if fault_exponent is not None:
        zero = Enclosure.between(0, 0)
        cert = Certificate(cert.case, Fraction(fault_exponent), zero, zero, cert.N_threshold,
                           cert.gamma_used, instance=inst)
    bits = max(cfg.precision, 256)
    checked, worst, violations = 0, None, []

    def record(kind: str, M: int, N: int, dist: Enclosure, extra: Dict[str, Any]):
        nonlocal checked, worst
        bound = bound_enclosure(cert, N)
        with working_precision(bits):
            ratio = Enclosure.from_iv(dist.to_iv() / bound.to_iv())
        checked += 1
        if worst is None or ratio.lower < worst[0].lower:
            worst = (ratio, kind, M, N)
        if dist.lower < bound.upper:
            violations.append({"kind": kind, "M": str(M), "N": str(N), **extra,
                               "distance_lower": decimal_string(dist.lower, 20, "down"),
                               "bound_upper": decimal_string(bound.upper, 20, "up")})

    if cert.case is CaseTag.GENERAL_A:
        for c in eq_convergents(inst.q, inst.t, cfg.n_bound or 10**9, bits):
            if c.N >= cert.N_threshold:
                record("convergent", c.M, c.N, c.distance, {})
    else:
        for pair in restricted_scan(inst, range(1, cfg.s_max + 1), bits):
            if abs(pair.N) >= cert.N_threshold:
                record("restricted", inst.d**pair.s, pair.N, pair.distance, {"s": pair.s})
    payload = {
        "schema": "qexp-validation/1",
        "instance": _instance_json(inst),
        "theorem": "general" if cert.case is CaseTag.GENERAL_A else "restricted",
        "fault_injected": fault_exponent is not None,
        "checked": checked,
        "violations": violations,
        "min_ratio": None if worst is None else {
            **_lower(worst[0].lower), "kind": worst[1], "M": str(worst[2]), "N": str(worst[3])},
        "ok": not violations,
    }
    return payload, (EXIT_OK if not violations else EXIT_FAIL)


def cmd_scan_restricted(cfg: RunConfig):
    inst = cfg.instance().with_case("b")
    bits = max(cfg.precision, 256)
    tau = eval_eq(inst.q, inst.t, bits)
    rows = []
    for pair in restricted_scan(inst, range(1, cfg.s_max + 1), bits):
        row: Dict[str, Any] = {"s": pair.s, "N": str(pair.N),
                               "distance_lower": decimal_string(pair.distance.lower, 20, "down")}
        gamma = cfg.gamma
        if gamma is None:
            from .measure import feasible_gamma
            gamma = feasible_gamma(inst, pair.N)
        if gamma > 1:
            ctx = restricted_membership(inst, gamma, pair.s, pair.N, tau)
            row.update({"gamma": decimal_string(gamma, 12, "down"), "n_bar": ctx.n_bar,
                        "N2": ctx.N2, "member": ctx.member})
        else:
            row.update({"gamma": None, "n_bar": None, "N2": None, "member": False})
        rows.append(row)
    payload = {"schema": "qexp-restricted-scan/1", "instance": _instance_json(inst),
               "s_max": cfg.s_max, "tau": _interval(tau), "pairs": rows}
    return payload, EXIT_OK


def cmd_eval(cfg: RunConfig):
    from .oracle import empirical_exponent

    inst = cfg.instance()
    series = eval_series(inst.q, inst.t, cfg.precision)
    product = eval_product(inst.q, inst.t, cfg.precision)
    both = eval_eq(inst.q, inst.t, cfg.precision)
    convs = eq_convergents(inst.q, inst.t, cfg.n_bound or 10**9, cfg.precision)
    payload: Dict[str, Any] = {
        "schema": "qexp-eval/1",
        "instance": _instance_json(inst),
        "precision_bits": cfg.precision,
        "series": _interval(series),
        "product": _interval(product),
        "value": _interval(both),
        "convergents": [{"M": str(c.M), "N": str(c.N),
                         "distance_lower": decimal_string(c.distance.lower, 12, "down")}
                        for c in convs],
        "empirical_exponent": None,
    }
    if len(convs) >= 10:
        payload["empirical_exponent"] = decimal_string(
            Fraction(empirical_exponent(convs)), 12, "nearest")
    return payload, EXIT_OK


# -- argument parsing --------------------------------------------------------

def _int(text: str) -> int:
    """Integers, also written as ``1e9`` or ``10**9``."""
    try:
        if "**" in text:
            base, exp = text.split("**")
            return int(base) ** int(exp)
        if "e" in text.lower():
            return int(Decimal(text))
        return int(text)
    except (ValueError, ArithmeticError) as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", type=int, default=2, help="q = 1/d (|d| >= 2)")
    common.add_argument("--u", type=int, default=1, help="numerator of t = u/v")
    common.add_argument("--v", type=int, default=2, help="denominator of t = u/v")
    common.add_argument("--case", choices=["a", "b"], default="a",
                        help="a: arbitrary M/N; b: restricted approximations d^s/N")
    common.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="working bits")
    common.add_argument("--n-max", type=int, default=10, help="largest Pade order checked")
    common.add_argument("--k-max", type=int, default=12, help="largest shift K checked")
    common.add_argument("--gamma", default=None, help="slope K/n as a rational, e.g. 3/2")
    common.add_argument("--s-max", type=int, default=60, help="largest s in restricted scans")
    common.add_argument("--n-bound", type=_int, default=None,
                        help="denominator bound for eval/validate (default 1e9); "
                             "for certify --case b the N of the certificate (default 1e7)")
    common.add_argument("--format", choices=["json", "text"], default="json")
    common.add_argument("--out", default=None, help="output file (written atomically)")

    parser = argparse.ArgumentParser(prog="qexp", description="Irrationality-measure certificates for E_q(t).")
    parser.add_argument("--version", action="version", version=f"qexp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("verify-pade", parents=[common], help="exact Pade/determinant/degree checks")
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    sub.add_parser("certify", parents=[common], help="emit a measure certificate")
    p = sub.add_parser("validate", parents=[common], help="check a certificate against the oracle")
    p.add_argument("--cert", required=True, help="certificate JSON file")
    p.add_argument("--fault-exponent", default=None, help=argparse.SUPPRESS)
    sub.add_parser("scan-restricted", parents=[common], help="list close approximations d^s/N")
    sub.add_parser("eval", parents=[common], help="enclose E_q(t) and list convergents")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(ns)
        if ns.command == "verify-pade":
            payload, code = cmd_verify_pade(cfg, ns.inject_fault)
        elif ns.command == "certify":
            payload, code = cmd_certify(cfg)
        elif ns.command == "validate":
            try:
                with open(ns.cert, encoding="utf-8") as fh:
                    data = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read certificate: {exc}") from exc
            fault = Fraction(ns.fault_exponent) if ns.fault_exponent is not None else None
            payload, code = cmd_validate(cfg, data, fault)
        elif ns.command == "scan-restricted":
            payload, code = cmd_scan_restricted(cfg)
        else:
            payload, code = cmd_eval(cfg)
    except PrecisionExhausted as exc:
        print(f"qexp: precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (ConfigError, ValueError) as exc:
        print(f"qexp: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QexpError as exc:
        print(f"qexp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    write_output(render(payload, cfg.format), cfg.output_path)
    return code


if __name__ == "__main__":
    sys.exit(main())
