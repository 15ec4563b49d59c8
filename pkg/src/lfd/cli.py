"""Command-line orchestration: catalog, reports, cross-validation.

Commands:  lfd catalog | check | bernstein | spectrum | report | selftest.
Targets are built-in catalog names (A1..A6, star3, bracelet) or paths to
UTF-8 JSON divisor files with fields {name, variables, h, f?, operator?}.

Exit codes: 0 all hard checks pass; 2 mathematical check failure (routes
disagree or a theorem check is false); 3 invalid input; 4 out of scope.

Every mathematical value in a JSON report is a "p/q" string; the only
non-deterministic entries are the integer-millisecond timings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from . import brieskorn, defalg, freediv
from .bfunctional import DualOperator, bernstein_via_functional
from .errors import (
    CalibrationError,
    InputTooLargeError,
    LfdError,
    UnknownCatalogEntryError,
)
from .exactalg import MPoly, parse_poly, poly_to_string
from .freediv import poly_matrix_det

SOFT_MONOMIAL_LIMIT = 20_000
HARD_MONOMIAL_LIMIT = 5_000_000


@dataclass(frozen=True)
class DivisorSpecFile:
    """Input description of a divisor run."""

    name: str
    variables: tuple
    h_text: str
    f_text: str = None
    operator_text: str = None

    def parse_h(self):
        return parse_poly(self.h_text, self.variables)

    def parse_f(self):
        if self.f_text is None:
            return None
        return parse_poly(self.f_text, self.variables)

    def parse_operator(self):
        if self.operator_text is None:
            return None
        dual_names = ["d%s" % v for v in self.variables]
        return DualOperator(parse_poly(self.operator_text, dual_names))


# ---------------------------------------------------------------------------
# built-in catalog
# ---------------------------------------------------------------------------


def bracelet_polynomial():
    """Binary-cubic discriminant, derived rather than typed: the resultant
    of the two partial derivatives of a*u^3 + b*u^2*v + c*u*v^2 + d*v^3,
    normalized to integer content 1 with positive leading coefficient.
    The catalog tests certify it against the classical expansion and the
    Saito criterion."""
    names = ["a", "b", "c", "d"]
    a, b, c, d = (MPoly.variable(4, i) for i in range(4))
    zero = MPoly.zero(4)

    def k(v):
        return MPoly.const(4, v)

    # u-coefficients of the dehomogenized partials (v = 1)
    sylvester = [
        [a.scale(3), b.scale(2), c, zero],
        [zero, a.scale(3), b.scale(2), c],
        [b, c.scale(2), d.scale(3), zero],
        [zero, b, c.scale(2), d.scale(3)],
    ]
    det = poly_matrix_det(sylvester)
    nums = [coeff.numerator for coeff in det.terms.values()]
    dens = [coeff.denominator for coeff in det.terms.values()]
    from math import gcd, lcm

    content = Fraction(gcd(*nums), lcm(*dens)) if nums else Fraction(1)
    normalized = det.scale(1 / content)
    if normalized.leading_term()[1] < 0:
        normalized = -normalized
    del names, k
    return normalized


def bracelet_dual_operator(h):
    """Dual operator in the natural cubic coordinates: the middle
    coefficients carry weight 3 from the binomial factors of the invariant
    Hermitian norm on binary cubics (the coordinates are not unitary)."""
    terms = {exp: c * Fraction(3) ** (exp[1] + exp[2]) for exp, c in h.terms.items()}
    return DualOperator(MPoly(4, terms))


def _an_entry(n):
    variables = tuple("x%d" % i for i in range(1, n + 1))
    return DivisorSpecFile(
        name="A%d" % n,
        variables=variables,
        h_text="*".join(variables),
    )


def _catalog_specs():
    specs = {}
    for n in range(1, 7):
        specs["A%d" % n] = _an_entry(n)
    specs["star3"] = DivisorSpecFile(
        name="star3",
        variables=tuple("abcdef"),
        h_text="(a*e-b*d)*(a*f-c*d)*(b*f-c*e)",
    )
    bh = bracelet_polynomial()
    specs["bracelet"] = DivisorSpecFile(
        name="bracelet",
        variables=("a", "b", "c", "d"),
        h_text=poly_to_string(bh, ["a", "b", "c", "d"]),
        operator_text=poly_to_string(
            bracelet_dual_operator(bh).symbol, ["da", "db", "dc", "dd"]
        ),
    )
    return specs


_CATALOG = None


def catalog(name=None):
    """The divisor catalog; with a name, return that entry or raise."""
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = _catalog_specs()
    if name is None:
        return dict(_CATALOG)
    if name not in _CATALOG:
        raise UnknownCatalogEntryError(
            "unknown catalog entry %r (available: %s)" % (name, ", ".join(sorted(_CATALOG)))
        )
    return _CATALOG[name]


def load_spec(target):
    """Resolve a CLI target: catalog name first, then JSON file path."""
    cat = catalog()
    if target in cat:
        return cat[target]
    if not os.path.exists(target):
        raise UnknownCatalogEntryError(
            "%r is neither a catalog entry nor an existing file" % target
        )
    with open(target, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise LfdError("invalid JSON in %s: %s" % (target, exc)) from exc
    if not isinstance(raw, dict):
        raise LfdError("divisor file must contain a JSON object")
    for key in ("name", "variables", "h"):
        if key not in raw:
            raise LfdError("divisor file is missing the %r field" % key)
    variables = raw["variables"]
    if not isinstance(variables, list) or not all(isinstance(v, str) for v in variables):
        raise LfdError("'variables' must be a list of names")
    return DivisorSpecFile(
        name=str(raw["name"]),
        variables=tuple(variables),
        h_text=str(raw["h"]),
        f_text=str(raw["f"]) if raw.get("f") is not None else None,
        operator_text=str(raw["operator"]) if raw.get("operator") is not None else None,
    )


def _size_guard(spec, allow_large):
    n = len(spec.variables)
    estimate = comb(2 * n - 1, n) if n >= 1 else 0
    if estimate > HARD_MONOMIAL_LIMIT:
        raise InputTooLargeError(
            "estimated %d monomials in degree %d exceeds the hard bound %d"
            % (estimate, n, HARD_MONOMIAL_LIMIT)
        )
    if estimate > SOFT_MONOMIAL_LIMIT and not allow_large:
        raise InputTooLargeError(
            "estimated %d monomials in degree %d; rerun with --allow-large"
            % (estimate, n)
        )


# ---------------------------------------------------------------------------
# pipeline with caching
# ---------------------------------------------------------------------------

_PAIR_CACHE = {}


def _materialize(spec):
    """Build (divisor, pair, f_description); catalog entries are cached."""
    key = spec if spec.f_text is None else None
    if key is not None and key in _PAIR_CACHE:
        return _PAIR_CACHE[key]
    h = spec.parse_h()
    divisor = freediv.build_divisor(h)
    f = spec.parse_f()
    if f is not None:
        pair = defalg.build_pair(divisor, f)
        description = "supplied in the input"
        if not pair.generic:
            raise LfdError(
                "the supplied linear form is not generic "
                "(first failing degree %s)" % pair.witness["failing_degree"],
                witness=pair.witness,
            )
    else:
        pair, description = defalg.choose_generic_form(divisor)
    result = (divisor, pair, description)
    if key is not None:
        _PAIR_CACHE[key] = result
    return result


# ---------------------------------------------------------------------------
# calibration self-test (mandatory at CLI startup)
# ---------------------------------------------------------------------------


def calibration_selftest():
    """Pin the sign and normalization conventions against fixed values:
    A1 gives (s+1) on both routes, A3 has spectra (0, 1, 2), and star3 has
    spectral numbers {1, 2, 2, 3, 3, 4}.  Raises CalibrationError on any
    mismatch; the conventions are code, not configuration."""
    one = Fraction(1)

    _, pair1, _ = _materialize(catalog("A1"))
    b1 = brieskorn.bernstein_via_spectral(pair1)
    if b1.factors != [(Fraction(-1), 1)]:
        raise CalibrationError("A1 spectral route returned %s" % b1.to_string())
    f1, _ = bernstein_via_functional(pair1.h)
    if f1.factors != [(Fraction(-1), 1)]:
        raise CalibrationError("A1 functional route returned %s" % f1.to_string())
    if not brieskorn.verify_cyclic_equation(pair1).ok:
        raise CalibrationError("A1 cyclic functional equation failed")

    _, pair3, _ = _materialize(catalog("A3"))
    expected3 = (Fraction(0), one, Fraction(2))
    if brieskorn.spectrum_at_zero(pair3).values != expected3:
        raise CalibrationError("A3 spectrum at zero is miscalibrated")
    if brieskorn.spectrum_at_infinity(pair3).values != expected3:
        raise CalibrationError("A3 spectrum at infinity is miscalibrated")

    _, pair_star, _ = _materialize(catalog("star3"))
    expected_star = tuple(Fraction(v) for v in (1, 2, 2, 3, 3, 4))
    if brieskorn.spectrum_at_infinity(pair_star).values != expected_star:
        raise CalibrationError("star3 spectral numbers are miscalibrated")
    return True


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------


def frac_str(value):
    f = Fraction(value)
    return "%d/%d" % (f.numerator, f.denominator)


def factored_json(bpoly):
    return [
        {"root": frac_str(root), "multiplicity": mult}
        for root, mult in sorted(bpoly.factors, key=lambda t: t[0])
    ]


def spectrum_json(spectrum):
    return [
        {"value": frac_str(v), "multiplicity": m}
        for v, m in sorted(spectrum.multiplicities().items())
    ]


def _threads_setting():
    raw = os.environ.get("LFD_THREADS")
    if raw is None:
        return 1, None
    try:
        value = int(raw)
        if value < 1:
            raise ValueError
    except ValueError:
        return 1, "ignored invalid LFD_THREADS=%r" % raw
    return value, None


class _Timings:
    def __init__(self):
        self.entries = {}

    def stage(self, name):
        return _Stage(self, name)


class _Stage:
    def __init__(self, timings, name):
        self.timings = timings
        self.name = name

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.timings.entries[self.name] = int((time.perf_counter() - self.start) * 1000)
        return False


def run_report(spec, verify=False, allow_large=False):
    """Execute the full pipeline and assemble the report dictionary.

    Hard errors propagate as exceptions; mathematical check failures are
    recorded in the report and reflected in its "ok" field.
    """
    _size_guard(spec, allow_large)
    timings = _Timings()
    warnings = []
    threads, thread_warning = _threads_setting()
    if thread_warning:
        warnings.append(thread_warning)

    with timings.stage("divisor"):
        divisor, pair, f_description = _materialize(spec)
    with timings.stage("reductivity"):
        reductivity = freediv.reductivity_probe(divisor.all_fields)

    if pair.c == 0:
        warnings.append("normal-form constant c is zero")

    with timings.stage("spectral_route"):
        b_spectral = brieskorn.bernstein_via_spectral(pair)
        conn = brieskorn._connection(pair)

    functional_entry = None
    b_functional = None
    with timings.stage("functional_route"):
        operator = spec.parse_operator()
        b_functional, lead = bernstein_via_functional(pair.h, operator)
        functional_entry = {
            "factors": factored_json(b_functional),
            "leading_constant": frac_str(lead),
            "operator": "default h(d)" if operator is None else "supplied",
        }

    agree = b_spectral == b_functional

    with timings.stage("spectra"):
        spec_zero = brieskorn.spectrum_at_zero(pair)
        spec_inf = brieskorn.spectrum_at_infinity(pair)
    with timings.stage("checks"):
        checks = brieskorn.theorem_checks(pair)
        cyclic = brieskorn.verify_cyclic_equation(pair)

    if not checks.conjecture_zero_symmetric:
        warnings.append("spectrum at zero is not symmetric about (n-1)/2 (conjecture)")

    verification = None
    if verify:
        with timings.stage("verification"):
            candidates = defalg.generic_form_candidates(divisor.n)
            second = None
            for coeffs, _desc in candidates:
                f2 = MPoly(
                    divisor.n,
                    {
                        tuple(1 if j == i else 0 for j in range(divisor.n)): c
                        for i, c in enumerate(coeffs)
                        if c != 0
                    },
                )
                if f2 == pair.f:
                    continue
                trial = defalg.build_pair(divisor, f2)
                if trial.generic:
                    second = f2
                    break
            independence = (
                brieskorn.f_independence_check(divisor, pair.f, second)
                if second is not None
                else None
            )
            graded = brieskorn.verify_graded_dimensions(pair, divisor.n)
            verification = {
                "f_independence": independence,
                "graded_dimensions_certified": graded["certified"],
            }

    hard_ok = agree and checks.hard_checks_pass() and cyclic.ok
    if verification is not None:
        hard_ok = hard_ok and verification["graded_dimensions_certified"]
        if verification["f_independence"] is not None:
            hard_ok = hard_ok and verification["f_independence"]

    report = {
        "divisor": {
            "name": spec.name,
            "variables": list(spec.variables),
            "n": divisor.n,
            "h": poly_to_string(divisor.h, list(spec.variables)),
        },
        "environment": {"threads": threads},
        "freeness": {
            "ok": True,
            "saito_unit": frac_str(divisor.saito_unit),
            "linear_field_dimension": len(divisor.all_fields),
        },
        "reductivity": {
            "reductive": reductivity.reductive,
            "bracket_closed": reductivity.bracket_closed,
            "center_dimension": reductivity.center_dimension,
            "derived_dimension": reductivity.derived_dimension,
            "decomposition_holds": reductivity.decomposition_holds,
            "trace_form_nondegenerate": reductivity.trace_form_nondegenerate,
            "caveat": reductivity.caveat,
        },
        "f": {
            "text": poly_to_string(pair.f, list(spec.variables)),
            "source": f_description,
            "genericity_dimensions": pair.witness["dimensions"],
        },
        "c": frac_str(pair.c),
        "bernstein": {
            "spectral": factored_json(b_spectral),
            "functional": functional_entry,
            "agree": agree,
        },
        "spectra": {
            "zero": spectrum_json(spec_zero),
            "infinity": spectrum_json(spec_inf),
        },
        "checks": {
            "roots_in_interval": checks.roots_in_interval,
            "symmetric_about_minus_one": checks.symmetric_about_minus_one,
            "minus_one_only_integer_root": checks.minus_one_only_integer_root,
            "infinity_symmetry": checks.infinity_symmetry,
            "integer_block_present": checks.integer_block_present,
            "integer_block_k": checks.integer_block_k,
            "residue_trace_zero": checks.residue_trace_zero,
            "residue_roots_match": checks.residue_roots_match,
            "conjecture_zero_symmetric": checks.conjecture_zero_symmetric,
            "cyclic_equation": {"ok": cyclic.ok, "kappa": frac_str(cyclic.kappa)},
        },
        "alpha": [frac_str(a) for a in conn.alpha],
        "warnings": warnings,
        "ok": hard_ok,
        "timings_ms": timings.entries,
    }
    if verification is not None:
        report["verification"] = verification
    return report


def report_exit_code(report):
    return 0 if report["ok"] else 2


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------


def _print_factored(label, factors_json, stream):
    text = "".join(
        "(s %s %s)%s"
        % (
            "+" if Fraction(entry["root"]) < 0 else "-",
            abs(Fraction(entry["root"])),
            "^%d" % entry["multiplicity"] if entry["multiplicity"] > 1 else "",
        )
        if Fraction(entry["root"]) != 0
        else ("s" + ("^%d" % entry["multiplicity"] if entry["multiplicity"] > 1 else ""))
        for entry in factors_json
    )
    print("%s %s" % (label, text), file=stream)


def _cmd_catalog(args, out):
    entries = catalog()
    for name in sorted(entries, key=lambda s: (len(s), s)):
        spec = entries[name]
        print(
            "%-9s n=%d  h = %s" % (name, len(spec.variables), spec.h_text),
            file=out,
        )
    return 0


def _cmd_check(args, out):
    spec = load_spec(args.target)
    _size_guard(spec, args.allow_large)
    divisor, pair, f_description = _materialize(spec)
    reductivity = freediv.reductivity_probe(divisor.all_fields)
    print("divisor %s: linear free (Saito unit %s)" % (spec.name, divisor.saito_unit), file=out)
    print(
        "reductive Lie algebra: %s (%s)"
        % ("yes" if reductivity.reductive else "no", reductivity.caveat),
        file=out,
    )
    print("generic form: %s (%s)" % (poly_to_string(pair.f, list(spec.variables)), f_description), file=out)
    print("c = %s" % pair.c, file=out)
    return 0


def _cmd_bernstein(args, out):
    spec = load_spec(args.target)
    _size_guard(spec, args.allow_large)
    divisor, pair, _ = _materialize(spec)
    code = 0
    results = {}
    if args.method in ("spectral", "both"):
        results["spectral"] = brieskorn.bernstein_via_spectral(pair)
        print("spectral:   b_h(s) = %s" % results["spectral"].to_string(), file=out)
    if args.method in ("functional", "both"):
        operator = spec.parse_operator()
        b_func, lead = bernstein_via_functional(pair.h, operator)
        results["functional"] = b_func
        print(
            "functional: b_h(s) = %s   (leading constant %s)" % (b_func.to_string(), lead),
            file=out,
        )
    if len(results) == 2:
        agree = results["spectral"] == results["functional"]
        print("routes agree: %s" % agree, file=out)
        if not agree:
            code = 2
    return code


def _cmd_spectrum(args, out):
    spec = load_spec(args.target)
    _size_guard(spec, args.allow_large)
    divisor, pair, _ = _materialize(spec)
    if args.at == "zero":
        result = brieskorn.spectrum_at_zero(pair)
    else:
        result = brieskorn.spectrum_at_infinity(pair)
    print(
        "spectrum at %s: (%s)" % (args.at, ", ".join(str(v) for v in result.values)),
        file=out,
    )
    return 0


def _cmd_report(args, out):
    spec = load_spec(args.target)
    report = run_report(spec, verify=args.verify, allow_large=args.allow_large)
    if args.json_path:
        payload = json.dumps(report, indent=2) + "\n"
        if args.json_path == "-":
            out.write(payload)
        else:
            with open(args.json_path, "w", encoding="utf-8") as fh:
                fh.write(payload)
    _print_human_report(report, out)
    return report_exit_code(report)


def _pretty_frac(text):
    return str(Fraction(text))


def _print_human_report(report, out):
    div = report["divisor"]
    print("=== %s (n = %d) ===" % (div["name"], div["n"]), file=out)
    print("h = %s" % div["h"], file=out)
    print(
        "linear free: yes (Saito unit %s); reductive: %s"
        % (
            _pretty_frac(report["freeness"]["saito_unit"]),
            "yes" if report["reductivity"]["reductive"] else "no",
        ),
        file=out,
    )
    print("f = %s  [%s]" % (report["f"]["text"], report["f"]["source"]), file=out)
    print("c = %s" % _pretty_frac(report["c"]), file=out)
    _print_factored("b_h (spectral):  ", report["bernstein"]["spectral"], out)
    if report["bernstein"]["functional"]:
        _print_factored("b_h (functional):", report["bernstein"]["functional"]["factors"], out)
    print("routes agree: %s" % report["bernstein"]["agree"], file=out)
    for which in ("zero", "infinity"):
        values = []
        for entry in report["spectra"][which]:
            values.extend([_pretty_frac(entry["value"])] * entry["multiplicity"])
        print("spectrum at %s: (%s)" % (which, ", ".join(values)), file=out)
    checks = report["checks"]
    flags = [
        ("roots in (-2,0)", checks["roots_in_interval"]),
        ("symmetric about -1", checks["symmetric_about_minus_one"]),
        ("-1 only integer root", checks["minus_one_only_integer_root"]),
        ("infinity symmetry", checks["infinity_symmetry"]),
        ("integer block (k=%s)" % checks["integer_block_k"], checks["integer_block_present"]),
        ("cyclic equation", checks["cyclic_equation"]["ok"]),
        ("conjecture (reported)", checks["conjecture_zero_symmetric"]),
    ]
    print(
        "checks: "
        + "; ".join("%s: %s" % (name, "ok" if val else "FAIL") for name, val in flags),
        file=out,
    )
    for warning in report["warnings"]:
        print("warning: %s" % warning, file=out)
    print("overall: %s" % ("ok" if report["ok"] else "MATHEMATICAL CHECK FAILURE"), file=out)


def _cmd_selftest(args, out):
    calibration_selftest()
    print("calibration self-test passed (A1, A3, star3 conventions pinned)", file=out)
    return 0


def build_arg_parser():
    parser = argparse.ArgumentParser(
        prog="lfd",
        description="Bernstein polynomials and spectra of reductive linear free divisors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", help="list built-in divisors")

    def add_target(p):
        p.add_argument("target", help="catalog name or JSON divisor file")
        p.add_argument("--allow-large", action="store_true", help="permit stretch-size inputs")

    p_check = sub.add_parser("check", help="freeness and reductivity certificate")
    add_target(p_check)

    p_bern = sub.add_parser("bernstein", help="compute the Bernstein polynomial")
    p_bern.add_argument(
        "--method", choices=("spectral", "functional", "both"), default="both"
    )
    add_target(p_bern)

    p_spec = sub.add_parser("spectrum", help="compute a lattice spectrum")
    p_spec.add_argument("--at", choices=("zero", "infinity"), required=True)
    add_target(p_spec)

    p_rep = sub.add_parser("report", help="full cross-validated report")
    p_rep.add_argument("--json", dest="json_path", metavar="OUT", default=None)
    p_rep.add_argument("--verify", action="store_true")
    add_target(p_rep)

    sub.add_parser("selftest", help="run the calibration self-test and exit")
    return parser


_COMMANDS = {
    "catalog": _cmd_catalog,
    "check": _cmd_check,
    "bernstein": _cmd_bernstein,
    "spectrum": _cmd_spectrum,
    "report": _cmd_report,
    "selftest": _cmd_selftest,
}

_NEEDS_CALIBRATION = {"check", "bernstein", "spectrum", "report"}


def main(argv=None):
    parser = build_arg_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    try:
        if args.command in _NEEDS_CALIBRATION:
            calibration_selftest()
        return _COMMANDS[args.command](args, out)
    except LfdError as exc:
        print("error [%s]: %s" % (exc.code, exc), file=sys.stderr)
        return exc.exit_class


if __name__ == "__main__":
    sys.exit(main())
