"""Command-line interface: ``entfloor VERB ...``.

Exit codes: 0 success, 1 numerical non-convergence, 2 infeasible or invalid
input (one-line diagnosis on stderr), 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

from . import certificates as certs
from .errors import ConvergenceError, InfeasibleError
from .floors import REGION_I
from .jsonio import dump_state, load_state, to_plain
from .multipartite import GhzDiagonal, random_robustness, tri_ppt_delta
from .qstate import (
    SampleFamily,
    check_density,
    connected_czz,
    correlations,
    entropy,
    is_ppt,
    log_negativity,
    mutual_information,
    n_qubits,
    purity,
    purity_P,
    twirl,
)
from .scan import (
    CHECKS,
    FLOOR_KINDS,
    PRESETS,
    ScanSpec,
    check_violations,
    evaluate_floor,
    format_number,
    grid_scan,
    montecarlo_cloud,
)

EXIT_OK = 0
EXIT_NONCONVERGED = 1
EXIT_INFEASIBLE = 2
EXIT_USAGE = 64

_DECIMAL = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class UsageError(Exception):
    pass


def decimal_float(text: str) -> float:
    """Plain decimal or scientific notation; no ``inf``, ``nan`` or underscores."""
    if not _DECIMAL.match(text.strip()):
        raise argparse.ArgumentTypeError(f"not a decimal number: {text!r}")
    return float(text)


def float_list(text: str) -> list[float]:
    return [decimal_float(t) for t in text.split(",") if t.strip()]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# --- floor parameters per kind, named as on the command line ---

_FLAG_HELP = {
    "cxx": "<xx>", "cyy": "<yy>", "czz": "<zz> (connected for purity-czz)",
    "p": "rescaled purity P in [0, 1]", "i": "mutual information (bits)",
    "s": "entropy (bits)", "z1": "<z1>", "z2": "<1z>", "cxxx": "<xxx>",
    "c1zz": "<1zz>", "czz1": "<zz1>", "tol": "multi-start agreement tolerance",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="emit a single JSON document on stdout")

    parser = _Parser(prog="entfloor", description="Minimal entanglement compatible with measured data.",
                     parents=[common])
    verbs = parser.add_subparsers(dest="verb", metavar="VERB", parser_class=_Parser)
    verbs.required = True

    floor = verbs.add_parser("floor", help="evaluate a closed-form floor")
    kinds = floor.add_subparsers(dest="kind", metavar="KIND", parser_class=_Parser)
    kinds.required = True
    for name, spec in FLOOR_KINDS.items():
        sub = kinds.add_parser(name, parents=[common], help=f"floor from {', '.join(spec.params)}")
        for p in spec.params:
            sub.add_argument(f"--{p}", type=decimal_float, required=True, help=_FLAG_HELP[p])
        for p, default in spec.optional:
            sub.add_argument(f"--{p}", type=decimal_float, default=default, help=_FLAG_HELP[p])
        sub.add_argument("--witness", metavar="PATH", help="write the witness state as JSON")

    certify = verbs.add_parser("certify", parents=[common], help="verify a dual certificate")
    src = certify.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", choices=certs.BUILTINS)
    src.add_argument("--file", metavar="PATH")
    certify.add_argument("--values", type=float_list, metavar="a0,a1,...",
                         help="expectation values aligned with the observables")

    mc = verbs.add_parser("montecarlo", parents=[common], help="sample states and tabulate functionals")
    mc.add_argument("--family", required=True, choices=SampleFamily.KINDS)
    mc.add_argument("--n", type=int, required=True)
    mc.add_argument("--seed", type=int, required=True)
    mc.add_argument("--check", choices=tuple(CHECKS))
    mc.add_argument("--no-table", action="store_true", help="print only the summary")

    scan = verbs.add_parser("scan", parents=[common], help="tabulate floors on a grid")
    which = scan.add_mutually_exclusive_group(required=True)
    which.add_argument("--preset", choices=tuple(PRESETS))
    which.add_argument("--spec", metavar="PATH")

    report = verbs.add_parser("state-report", parents=[common], help="functionals of a state")
    report.add_argument("--file", required=True, metavar="PATH")
    return parser


# --- output helpers ---


def _emit_fields(fields: dict, out) -> None:
    for key, value in fields.items():
        print(f"{key}: {format_number(value)}", file=out)


def _emit_json(obj, out) -> None:
    json.dump(to_plain(obj), out, indent=2, allow_nan=False)
    out.write("\n")


# --- verbs ---


def _cmd_floor(args, out) -> int:
    spec = FLOOR_KINDS[args.kind]
    values = {p: getattr(args, p) for p in spec.params}
    values.update({p: getattr(args, p) for p, _ in spec.optional})
    res = evaluate_floor(args.kind, **values)
    if args.witness and res.witness is not None:
        dump_state(res.witness, args.witness)
    if args.json:
        _emit_json({"floor": args.kind, "inputs": values, **res.to_dict()}, out)
        return EXIT_OK
    if args.kind == "purity-czz":
        _emit_fields({"region": res.region, "conjectured": res.value,
                      "lower_bound": res.lower_bound, "status": res.status}, out)
    else:
        _emit_fields({"value": res.value, "status": res.status}, out)
    return EXIT_OK


def _cmd_certify(args, out) -> int:
    if args.builtin:
        cert = certs.builtin_certificate(args.builtin, args.values)
    else:
        cert = certs.load_certificate(args.file)
    report = certs.verify_certificate(cert)
    fields = {"operator_norm": report.operator_norm, "min_eig_slack": report.min_eig_slack,
              "valid": report.valid}
    if args.values is not None and report.valid:
        fields["bound"] = certs.bound_from_certificate(cert, args.values)
        if cert.two_copy:
            fields["two_copy_bound"] = certs.two_copy_value(cert, args.values)
    if args.json:
        _emit_json({**fields, "certificate": certs.certificate_to_dict(cert)}, out)
    else:
        _emit_fields(fields, out)
    if not report.valid:
        print("invalid certificate: slack or norm check failed", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_montecarlo(args, out) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    table = montecarlo_cloud(args.family, args.n, args.seed)
    k = check_violations(table, args.check) if args.check else None
    if args.json:
        doc = {"family": args.family, "n": args.n, "seed": args.seed}
        if not args.no_table:
            doc["table"] = table.to_json_obj()
        if args.check:
            doc.update({"check": args.check, "violations": k})
        _emit_json(doc, out)
        return EXIT_OK
    if not args.no_table:
        out.write(table.to_csv())
    if args.check:
        print(f"violations: {k} / {args.n}", file=out)
    return EXIT_OK


def _cmd_scan(args, out) -> int:
    spec = PRESETS[args.preset] if args.preset else ScanSpec.load(args.spec)
    table = grid_scan(spec)
    if args.json:
        _emit_json(table.to_json_obj(), out)
    else:
        out.write(table.to_csv())
    return EXIT_OK


_TWO_QUBIT_WORDS = ["1x", "1y", "1z", "x1", "y1", "z1"] + [a + b for a in "xyz" for b in "xyz"]


def state_report(rho) -> dict:
    """Every functional the package knows for a two- or three-qubit state."""
    rho = check_density(rho, "state")
    n = n_qubits(rho)
    report = {"n_qubits": n, "purity_Q": purity(rho), "entropy": entropy(rho)}
    if n == 2:
        report.update({
            "purity_P": purity_P(rho),
            "log_negativity": log_negativity(rho),
            "ppt": is_ppt(rho),
            "connected_czz": connected_czz(rho),
            "mutual_information": mutual_information(rho),
            "correlations": dict(zip(_TWO_QUBIT_WORDS, correlations(rho, _TWO_QUBIT_WORDS))),
        })
    elif n == 3:
        words = ["xxx", "1zz", "zz1", "z1z"]
        s = GhzDiagonal.from_matrix(twirl(rho, "ghz-symmetrize"))
        report.update({
            "log_negativity": {f"cut{k}": log_negativity(rho, k) for k in range(3)},
            "tri_ppt": all(is_ppt(rho, k) for k in range(3)),
            "correlations": dict(zip(words, correlations(rho, words))),
            "ghz_twirled": {"delta": tri_ppt_delta(s), "random_robustness": random_robustness(s)},
        })
    else:
        raise UsageError("state-report handles two or three qubits")
    return report


def _cmd_state_report(args, out) -> int:
    try:
        rho = load_state(args.file)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {args.file}: {exc}") from None
    report = state_report(rho)
    if args.json:
        _emit_json(report, out)
        return EXIT_OK
    for key, value in report.items():
        if isinstance(value, dict):
            for sub, v in value.items():
                print(f"{key}.{sub}: {format_number(v)}", file=out)
        else:
            print(f"{key}: {format_number(value)}", file=out)
    return EXIT_OK


_COMMANDS = {
    "floor": _cmd_floor,
    "certify": _cmd_certify,
    "montecarlo": _cmd_montecarlo,
    "scan": _cmd_scan,
    "state-report": _cmd_state_report,
}


def run(argv=None, out=None) -> int:
    """Parse ``argv`` and execute; returns the process exit code."""
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not hasattr(args, "json"):
        args.json = False
    try:
        return _COMMANDS[args.verb](args, out)
    except InfeasibleError as exc:
        reason = "Region I" if exc.region == REGION_I else str(exc)
        print(f"infeasible: {reason}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConvergenceError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"entfloor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
