"""Command-line front end: model ingestion, orchestration, report emission.

Model files are JSON documents with keys ``m``, ``alphabet_sizes``, ``pmf``
(flat row-major, last coordinate fastest), ``functions`` (list of
``{"index": k, "table": [...]}``), ``case`` ("1" | "2" | "3"), and either
``m0`` (cases 1-2) or ``recovery_sets`` (case 3).  An optional
``bss_delta`` preset replaces ``pmf`` with the binary symmetric pair law.

Reports are emitted as JSON (machine readable, reproducible except for the
timestamp field) or TSV (one metric per row).

Exit codes: 0 securely computable, 1 not securely computable, 2 boundary
or bound-only, 10 parse error, 11 invalid spec, 12 enumeration cap
exceeded, 13 other library error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from importlib.metadata import PackageNotFoundError, version as _pkg_version

import numpy as np

from .coloring import failure_rate_experiment, security_gap, uniform_instance
from .errors import (
    ArgumentOutOfRange,
    DeltaOutOfRange,
    EnumerationCapExceeded,
    IndexOutOfRange,
    InvalidSpec,
    MassSumOutOfTolerance,
    NegativeMass,
    ParseError,
    RateVectorInfeasible,
    RecoverySetContainsSelf,
    SecompError,
    ShapeMismatch,
    WrongCaseTag,
    WrongShape,
)
from .protocol import ProtocolConfig, simulate
from .rateregion import (
    BOUNDARY,
    BOUND_ONLY,
    NOT_SECURELY_COMPUTABLE,
    SECURELY_COMPUTABLE,
    analyze,
    bss_verdict_table,
)
from .sources import FunctionSpec, JointSource, make_bss, make_function_spec, validate

try:
    VERSION = _pkg_version("secomp")
except PackageNotFoundError:  # running from a source tree
    VERSION = "0.1.0"

_VERDICT_EXIT = {SECURELY_COMPUTABLE: 0, NOT_SECURELY_COMPUTABLE: 1,
                 BOUNDARY: 2, BOUND_ONLY: 2}

_INVALID_SPEC = (InvalidSpec, DeltaOutOfRange, ShapeMismatch, NegativeMass,
                 MassSumOutOfTolerance, RecoverySetContainsSelf, WrongCaseTag,
                 IndexOutOfRange, ArgumentOutOfRange, WrongShape,
                 RateVectorInfeasible)


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------

def _require(doc: dict, key: str, kind) -> object:
    if key not in doc:
        raise ParseError(f"field '{key}': missing")
    value = doc[key]
    if kind is int and isinstance(value, bool):
        raise ParseError(f"field '{key}': expected integer")
    if not isinstance(value, kind):
        raise ParseError(f"field '{key}': expected {kind.__name__}")
    return value


def load_model(path: str) -> tuple[JointSource, FunctionSpec]:
    """Parse a model file into a validated source and function spec."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read model file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level: expected a JSON object")

    m = _require(doc, "m", int)
    sizes = _require(doc, "alphabet_sizes", list)
    if len(sizes) != m:
        raise ParseError(f"field 'alphabet_sizes': length {len(sizes)} != m = {m}")
    if not all(isinstance(a, int) and not isinstance(a, bool) for a in sizes):
        raise ParseError("field 'alphabet_sizes': entries must be integers")

    if "bss_delta" in doc:
        delta = doc["bss_delta"]
        if not isinstance(delta, (int, float)) or isinstance(delta, bool):
            raise ParseError("field 'bss_delta': expected number")
        if m != 2 or sizes != [2, 2]:
            raise ParseError("field 'bss_delta': preset requires m=2 and "
                             "alphabet_sizes [2, 2]")
        src = make_bss(float(delta))
    else:
        pmf = _require(doc, "pmf", list)
        expected = int(np.prod(sizes))
        if len(pmf) != expected:
            raise ParseError(f"field 'pmf': length {len(pmf)} != product of "
                             f"alphabet sizes {expected}")
        src = validate(pmf, sizes)

    case_raw = doc.get("case")
    if case_raw is None:
        raise ParseError("field 'case': missing")
    try:
        case = int(case_raw)
    except (TypeError, ValueError):
        raise ParseError(f"field 'case': expected '1', '2' or '3', got {case_raw!r}")

    functions = _require(doc, "functions", list)
    tables: dict[int, list] = {}
    for pos, entry in enumerate(functions):
        if not isinstance(entry, dict) or "index" not in entry or "table" not in entry:
            raise ParseError(f"field 'functions[{pos}]': expected an object "
                             "with 'index' and 'table'")
        idx = entry["index"]
        if not isinstance(idx, int) or isinstance(idx, bool):
            raise ParseError(f"field 'functions[{pos}].index': expected integer")
        table = entry["table"]
        if not isinstance(table, list):
            raise ParseError(f"field 'functions[{pos}].table': expected list")
        tables[idx] = table

    m0 = doc.get("m0")
    recovery = doc.get("recovery_sets")
    if case in (1, 2) and m0 is None:
        raise ParseError("field 'm0': required for cases 1 and 2")
    if case == 3 and recovery is None:
        raise ParseError("field 'recovery_sets': required for case 3")
    fns = make_function_spec(src, tables, case=case, m0=m0,
                             recovery_sets=recovery)
    return src, fns


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

def _flatten(prefix: str, value, rows: list[tuple[str, str]]) -> None:
    if isinstance(value, dict):
        for k in value:
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], rows)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, repr(value) if isinstance(value, float) else str(value)))


def emit(kind: str, result: dict, fmt: str, seed: int | None = None) -> None:
    report = {
        "tool": "secomp",
        "version": VERSION,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "seed": seed,
        "kind": kind,
        "result": result,
    }
    if fmt == "json":
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        rows: list[tuple[str, str]] = []
        _flatten("", report, rows)
        for name, value in rows:
            sys.stdout.write(f"{name}\t{value}\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    src, fns = load_model(args.model)
    report = analyze(src, fns)
    emit("analysis", report.to_dict(), args.format)
    return _VERDICT_EXIT[report.verdict]


def cmd_table(args) -> int:
    rows = bss_verdict_table(args.delta)
    emit("table", {"delta": args.delta, "rows": [r.to_dict() for r in rows]},
         args.format)
    return 0


def cmd_simulate(args) -> int:
    src, fns = load_model(args.model)
    cfg = ProtocolConfig(n=args.n, seed=args.seed, trials=args.trials,
                         slack=args.slack)
    run = simulate(src, fns, cfg)
    emit("simulation", run.report.to_dict(), args.format, seed=args.seed)
    return 0


def cmd_coloring(args) -> int:
    inst = uniform_instance(args.u_size, args.r, args.rprime, args.lam,
                            args.seed)
    experiment = failure_rate_experiment(inst, args.trials, args.seed)
    gap = security_gap(inst)
    result = {"experiment": experiment.to_dict(), "first_coloring_gap": gap.to_dict()}
    emit("coloring", result, args.format, seed=args.seed)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secomp",
        description="Secure computability analysis and protocol simulation "
                    "over finite multiterminal sources.")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap worker threads (overridden by SECOMP_THREADS; "
                             "the current implementation is single-threaded)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="verdict for a model file")
    p.add_argument("model")
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("table", help="four canonical binary-source rows")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("simulate", help="finite-blocklength protocol run")
    p.add_argument("model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--slack", type=float, default=0.15)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("coloring", help="random-coloring failure experiment")
    p.add_argument("--u-size", dest="u_size", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--rprime", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.set_defaults(func=cmd_coloring)
    return parser


def resolve_threads(args) -> int | None:
    env = os.environ.get("SECOMP_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParseError(f"SECOMP_THREADS: expected integer, got {env!r}")
    if args.threads is not None:
        return max(1, args.threads)
    return None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        resolve_threads(args)  # validated; execution is vectorized single-thread
        return args.func(args)
    except ParseError as exc:
        print(f"secomp: parse error: {exc}", file=sys.stderr)
        return 10
    except EnumerationCapExceeded as exc:
        print(f"secomp: {exc}", file=sys.stderr)
        return 12
    except _INVALID_SPEC as exc:
        name = type(exc).__name__
        print(f"secomp: invalid spec ({name}): {exc}", file=sys.stderr)
        return 11
    except SecompError as exc:
        print(f"secomp: error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 13


if __name__ == "__main__":
    sys.exit(main())
