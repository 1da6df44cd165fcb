"""Command-line interface.

Exit status: 0 on success, 1 when a verification fails, 2 for usage or
input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .codes import (
    QuantumCode,
    build_bipartite_code,
    build_multipartite_code,
    discrimination_pvm,
    embed_errors,
    kl_check,
)
from .errors import DecompositionError, KingcodeError
from .model import (
    ErrorModel,
    IndexSets,
    MeasurementFamily,
    SchmidtState,
    example_error_model,
    example_index_sets,
    standard_qubit_measurements,
)
from .numerics import Tolerance
from .protocol import GameConfig, run_exhaustive, run_montecarlo
from .solution import (
    SolutionPair,
    decompose_families,
    derive_error_operators,
    derive_index_sets,
    gram_check,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_plain)


def _load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _write(path, text: str):
    if path is None or str(path) == "-":
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n")


def _families_from_json(obj) -> list[MeasurementFamily]:
    items = obj["families"] if isinstance(obj, dict) else obj
    return [MeasurementFamily.from_json(f) for f in items]


def _table(sets: IndexSets) -> str:
    """Index sets laid out as one (J, i, X) column group per family."""
    fams = sets.families()
    outs = sorted({i for (_, i) in sets.sets})
    header = " | ".join(" J  i  X^(J,i)   " for _ in fams)
    rows = [header, "-" * len(header)]
    for i in outs:
        cells = []
        for J in fams:
            ks = sets.sets.get((J, i))
            x = "{" + ",".join(map(str, ks)) + "}" if ks else "-"
            cells.append(f"{J:2d} {i:2d}  {x:<10}")
        rows.append(" | ".join(cells))
    return "\n".join(rows)


# verify-example ---------------------------------------------------------------


def verify_example(tol: Tolerance, error_model=None, index_sets=None, families=None) -> dict:
    """Run every check on the built-in qubit example and collect the results."""
    err = example_error_model() if error_model is None else error_model
    sets = example_index_sets() if index_sets is None else index_sets
    fams = standard_qubit_measurements() if families is None else families
    state = SchmidtState.maximally_entangled(2)
    checks = {}

    completeness = float(np.linalg.norm(err.completeness() - np.eye(err.dim)))
    checks["completeness"] = {"residual": completeness, "pass": completeness <= tol.eps_eq}

    decomp = {}
    for fam in fams:
        for i, M in enumerate(fam.ops, start=1):
            ks = sets.sets.get((fam.label, i), ())
            approx = sum((sets.coeffs[(fam.label, i, k)] * err[k] for k in ks), np.zeros_like(M))
            decomp[f"{fam.label},{i}"] = float(np.max(np.abs(M - approx)))
    worst = max(decomp.values())
    checks["decompositions"] = {"residuals": decomp, "max": worst, "pass": worst <= tol.eps_eq}

    try:
        derived = derive_index_sets(state, err, fams, tol)
        same = derived == sets
        checks["index_sets"] = {"derived": derived.to_json()["sets"], "matches_table": same, "pass": same}
    except KingcodeError as exc:
        checks["index_sets"] = {"error": str(exc), "pass": False}

    gram = gram_check(state, err, tol)
    gram_dev = float(np.max(np.abs(gram.gram - np.eye(len(err)) / 4)))
    checks["gram"] = {"max_deviation_from_quarter_identity": gram_dev, "pass": gram.passed and gram_dev <= tol.eps_eq}

    code = build_bipartite_code(state, 2, tol=tol)
    kl = kl_check(code, embed_errors(err, 2, code.ambient_dims), True, tol)
    lam_dev = max(abs(x - 0.25) for x in kl.lambdas)
    checks["kl_bell_code"] = {
        "lambdas": kl.lambdas,
        "max_residual": kl.max_residual,
        "pass": kl.passed and lam_dev <= tol.eps_eq,
    }

    if kl.passed:
        report = run_exhaustive(GameConfig(code, fams, err, sets, king_slot=2), tol)
        checks["protocol"] = {
            "min_success": report.min_success,
            "failures": len(report.failures),
            "pass": report.passed,
        }
    else:
        checks["protocol"] = {"min_success": None, "pass": False, "error": "Knill-Laflamme check failed"}

    return {
        "checks": checks,
        "index_sets_table": sets.to_json()["sets"],
        "min_success": checks["protocol"]["min_success"],
        "pass": all(c["pass"] for c in checks.values()),
    }


def cmd_verify_example(args, tol: Tolerance) -> int:
    result = verify_example(tol)
    if args.format == "json":
        _write(args.out, dumps(result))
    else:
        lines = ["Index sets", _table(example_index_sets()), ""]
        for name, check in result["checks"].items():
            lines.append(f"{'PASS' if check['pass'] else 'FAIL'}  {name}")
        lines.append(f"min_success = {result['min_success']}")
        _write(args.out, "\n".join(lines))
    return EXIT_OK if result["pass"] else EXIT_FAIL


# code builders ----------------------------------------------------------------


def _eta_and_model(path):
    """Schmidt data and error model from an optional JSON file."""
    if path is None:
        return SchmidtState.maximally_entangled(2), example_error_model()
    obj = _load_json(path)
    try:
        state = SchmidtState(obj["eta"])
        err = ErrorModel.from_json(obj) if "kraus" in obj else example_error_model()
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed eta file {path}: {exc}") from exc
    except KingcodeError as exc:
        raise UsageError(f"invalid eta file {path}: {exc}") from exc
    return state, err


def _code_summary(code: QuantumCode, err: ErrorModel, slot: int, tol: Tolerance) -> dict:
    errs = embed_errors(err, slot, code.ambient_dims)
    kl = kl_check(code, errs, True, tol)
    out = {"n": code.dim, "k": code.code_dim, "ambient_dims": list(code.ambient_dims), "kl": kl.to_json()}
    if kl.passed:
        pvm = discrimination_pvm(code, errs, tol)
        out["pvm_ranks"] = [int(round(np.trace(p).real)) for p in pvm.projectors]
        out["residual_rank"] = int(round(np.trace(pvm.residual).real))
    return out


def _emit_code(args, code: QuantumCode, summary: dict, extra_text: str = "") -> None:
    if args.out:
        Path(args.out).write_text(dumps(code.to_json()) + "\n")
    if args.format == "json":
        _write(args.report, dumps(summary))
    else:
        kl = summary["kl"]
        lines = [
            f"({summary['n']}, {summary['k']}) code on dims {tuple(summary['ambient_dims'])}",
            f"Knill-Laflamme: {'PASS' if kl['pass'] else 'FAIL'} "
            f"(residual {kl['max_residual']:.2e}, lambdas {[round(x, 12) for x in kl['lambdas']]})",
        ]
        if "residual_rank" in summary:
            lines.append(f"discrimination PVM ranks {summary['pvm_ranks']}, residual rank {summary['residual_rank']}")
        if extra_text:
            lines.append(extra_text)
        _write(args.report, "\n".join(lines))


def cmd_build_bipartite(args, tol: Tolerance) -> int:
    state, err = _eta_and_model(args.eta_file)
    if args.dA < state.d:
        raise UsageError(f"--dA {args.dA} must be at least d={state.d}")
    code = build_bipartite_code(state, args.dA, tol=tol)
    summary = _code_summary(code, err, 2, tol)
    _emit_code(args, code, summary)
    return EXIT_OK if summary["kl"]["pass"] else EXIT_FAIL


def cmd_build_ghz(args, tol: Tolerance) -> int:
    if args.n < 3:
        raise UsageError(
            f"--n {args.n}: at least 3 subsystems are needed; with n=2 only one state survives "
            "and the code is not higher-dimensional"
        )
    if not 1 <= args.slot <= args.n:
        raise UsageError(f"--slot must be in 1..{args.n}")
    state, err = _eta_and_model(args.eta_file)
    code = build_multipartite_code(state.eta, state.basis_k, args.n, args.slot, err, args.mode, tol)
    summary = _code_summary(code, err, args.slot, tol)
    summary["g"] = code.code_dim
    summary["tuples"] = [list(t) for t in code.labels]
    summary["mode"] = args.mode
    _emit_code(args, code, summary, f"g = {code.code_dim} ({args.mode}), tuples {code.labels}")
    return EXIT_OK if summary["kl"]["pass"] else EXIT_FAIL


# simulate -----------------------------------------------------------------------


def cmd_simulate(args, tol: Tolerance) -> int:
    try:
        code = QuantumCode.from_json(_load_json(args.code), tol)
        err = ErrorModel.from_json(_load_json(args.error_model)) if args.error_model else example_error_model()
        fams = (
            _families_from_json(_load_json(args.measurements))
            if args.measurements
            else standard_qubit_measurements()
        )
        sets = IndexSets.from_json(_load_json(args.index_sets)) if args.index_sets else example_index_sets()
        slot = args.slot if args.slot is not None else len(code.ambient_dims)
        cfg = GameConfig(code, fams, err, sets, slot, rng_seed=args.seed, n_random_states=args.n_random)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed input: {exc}") from exc
    except KingcodeError as exc:
        raise UsageError(str(exc)) from exc

    kl = kl_check(code, cfg.embedded_errors(), True, tol)
    if not kl.passed:
        _write(args.out, dumps({"error": "Knill-Laflamme precondition failed", "kl": kl.to_json()}))
        return EXIT_FAIL
    report = run_exhaustive(cfg, tol)
    out = report.to_json(include_branches=not args.summary)
    out["slot"] = slot
    out["seed"] = args.seed
    if args.trials:
        out["montecarlo"] = run_montecarlo(cfg, args.trials, tol).to_json()
    if args.format == "json":
        _write(args.out, dumps(out))
    else:
        lines = [
            f"({code.dim}, {code.code_dim}) code, king on slot {slot}",
            f"min_success = {report.min_success}",
            f"failures = {len(report.failures)}",
        ]
        if args.trials:
            lines.append(f"montecarlo rate = {out['montecarlo']['rate']} over {args.trials} trials")
        _write(args.out, "\n".join(lines))
    return EXIT_OK if report.passed else EXIT_FAIL


# derive -------------------------------------------------------------------------


def cmd_derive(args, tol: Tolerance) -> int:
    try:
        sol = SolutionPair.from_json(_load_json(args.solution_file), tol)
        fams = _families_from_json(_load_json(args.measurements_file))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed input: {exc}") from exc
    except KingcodeError as exc:
        raise UsageError(str(exc)) from exc

    err = derive_error_operators(sol, tol)
    gram = gram_check(sol.state, err, tol)
    out = {"kraus": err.to_json()["kraus"], "gram": gram.to_json()}
    status = EXIT_OK
    try:
        sets = derive_index_sets(sol.state, err, fams, tol)
        out["index_sets"] = sets.to_json()
    except DecompositionError as exc:
        out["error"] = str(exc)
        out["offending"] = [list(x) for x in exc.offending]
        out["decomposition"] = decompose_families(sol.state, err, fams, tol).to_json()
        status = EXIT_FAIL
    if args.out:
        Path(args.out).write_text(dumps(out) + "\n")
    if args.format == "text":
        text = "Index sets\n" + _table(sets) if status == EXIT_OK else f"not decomposable: {out['error']}"
        _write(None, text)
    elif not args.out:
        _write(None, dumps(out))
    return status


# entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="equality tolerance eps_eq (default 1e-9)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(prog="kingcode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-example", parents=[common], help="check the built-in qubit example")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify_example)

    p = sub.add_parser("build-bipartite", parents=[common], help="build a bipartite code")
    p.add_argument("--dA", type=int, required=True)
    p.add_argument("--eta-file", default=None, help='JSON with "eta" and optionally "kraus"')
    p.add_argument("--out", default=None, help="where to write the code JSON")
    p.add_argument("--report", default=None, help="where to write the report (default stdout)")
    p.set_defaults(func=cmd_build_bipartite)

    p = sub.add_parser("build-ghz", parents=[common], help="build a multipartite GHZ-type code")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--slot", type=int, default=1)
    p.add_argument("--mode", choices=("greedy", "exact"), default="greedy")
    p.add_argument("--eta-file", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_build_ghz)

    p = sub.add_parser("simulate", parents=[common], help="certify the guessing game on a code")
    p.add_argument("--code", required=True)
    p.add_argument("--slot", type=int, default=None, help="king's subsystem (default: last)")
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo games in addition to enumeration")
    p.add_argument("--n-random", type=int, default=20, help="random code states to enumerate")
    p.add_argument("--error-model", default=None)
    p.add_argument("--measurements", default=None)
    p.add_argument("--index-sets", default=None)
    p.add_argument("--summary", action="store_true", help="omit per-branch transcripts")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("derive", parents=[common], help="derive error operators and index sets")
    p.add_argument("--solution-file", required=True)
    p.add_argument("--measurements-file", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_derive)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = Tolerance.from_env() if args.tol is None else Tolerance.from_env(eps_eq=args.tol)
        return args.func(args, tol)
    except UsageError as exc:
        print(f"kingcode {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KingcodeError as exc:
        print(f"kingcode {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
