"""lineal-lab command line: parse, check, reduce, trace, sample,
compare-oracle and a line-oriented repl.

Exit codes: 0 ok, 1 parse or dialect error, 2 type error, 3 fuel exhausted,
4 degenerate measurement, 5 oracle deviation >= 1e-9, 6 unreadable normal form.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import numpy as np

from . import corpus
from .errors import (
    DegenerateMeasurement,
    FuelExhausted,
    LinealError,
    OracleError,
    ParseError,
    ReadbackError,
    TypeCheckError,
)
from .execute import sample
from .lambda_s import typecheck
from .odot import odot_typecheck
from .oracle import deviation, parse_circuit, read_vector, run_circuit, StateVector
from .rewrite import FUEL_EXHAUSTED, EngineConfig, normalize
from .syntax import parse, pretty
from .terms import DIALECTS, LAMBDA_S, LINEAL, ODOT, App, Meas, Term
from .typesys import show_type

EXIT_OK, EXIT_PARSE, EXIT_TYPE, EXIT_FUEL, EXIT_DEGENERATE, EXIT_DEVIATION, EXIT_READBACK = range(7)
DEFAULT_FUEL = 10_000
TOLERANCE = 1e-9
READBACK = {LINEAL: "church", LAMBDA_S: "constants", ODOT: "odot"}


class Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _default_fuel() -> int:
    value = os.environ.get("LINEAL_LAB_FUEL")
    return int(value) if value else DEFAULT_FUEL


def _load(args) -> tuple[Term, str]:
    try:
        program = corpus.resolve(args.file)
    except (FileNotFoundError, ValueError) as exc:
        raise Failure(EXIT_PARSE, f"cannot read {args.file}: {exc}") from None
    dialect = args.dialect or program.dialect
    try:
        return parse(program.source, dialect), dialect
    except ParseError as exc:
        raise Failure(EXIT_PARSE, f"{args.file}:{exc}") from None


def _config(args, dialect: str) -> EngineConfig:
    return EngineConfig(dialect=dialect, restriction=args.restriction == "on", fuel=args.fuel)


def infer(t: Term, dialect: str) -> Optional[str]:
    """Printed type of ``t``, or None for the untyped dialect."""
    if dialect == LAMBDA_S:
        return show_type(typecheck(t))
    if dialect == ODOT:
        return show_type(odot_typecheck(t))
    return None


def _trace(t: Term, args, dialect: str):
    if dialect == LAMBDA_S:
        infer(t, dialect)
    trace = normalize(t, _config(args, dialect), rng=np.random.default_rng(args.seed))
    return trace


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload) if args.json else text)


def cmd_parse(args) -> int:
    t, dialect = _load(args)
    _emit(args, {"term": pretty(t, dialect), "dialect": dialect}, pretty(t, dialect))
    return EXIT_OK


def cmd_check(args) -> int:
    t, dialect = _load(args)
    ty = infer(t, dialect)
    text = ty if ty is not None else "untyped (lineal terms carry no types)"
    _emit(args, {"type": ty, "dialect": dialect}, text)
    return EXIT_OK


def cmd_reduce(args) -> int:
    t, dialect = _load(args)
    trace = _trace(t, args, dialect)
    final = pretty(trace.final, dialect)
    if trace.outcome == FUEL_EXHAUSTED:
        raise Failure(EXIT_FUEL, f"FuelExhausted after {trace.fuel_used} steps; last term: {final}")
    _emit(args, {"term": final, "steps": trace.fuel_used, "outcome": trace.outcome}, final)
    return EXIT_OK


def cmd_trace(args) -> int:
    t, dialect = _load(args)
    trace = _trace(t, args, dialect)
    if trace.steps:
        print(trace.to_jsonl(dialect))
    if trace.outcome == FUEL_EXHAUSTED:
        raise Failure(EXIT_FUEL, f"FuelExhausted after {trace.fuel_used} steps")
    return EXIT_OK


def cmd_sample(args) -> int:
    t, dialect = _load(args)
    if dialect == LAMBDA_S:
        infer(t, dialect)
    counts = sample(t, args.shots, args.seed, _config(args, dialect))
    rows = [(pretty(term, dialect), n, n / args.shots) for term, n in counts]
    if args.json:
        outcomes = [{"term": s, "count": n, "freq": f} for s, n, f in rows]
        print(json.dumps({"shots": args.shots, "seed": args.seed, "outcomes": outcomes}))
    else:
        width = max(len(s) for s, _, _ in rows)
        for s, n, f in rows:
            print(f"{s:<{width}}  {n:>{len(str(args.shots))}}  {f:.6f}")
    return EXIT_OK


def _strip_measurement(t: Term) -> Term:
    if isinstance(t, App) and isinstance(t.fun, Meas):
        return t.arg
    return t


def cmd_compare_oracle(args) -> int:
    t, dialect = _load(args)
    trace = normalize(_strip_measurement(t), _config(args, dialect))
    if trace.outcome == FUEL_EXHAUSTED:
        raise Failure(EXIT_FUEL, f"FuelExhausted after {trace.fuel_used} steps")
    try:
        n, ops = parse_circuit(args.circuit, args.qubits)
    except OracleError as exc:
        raise Failure(EXIT_PARSE, str(exc)) from None
    expected = run_circuit(ops, n)
    try:
        got = read_vector(trace.final, READBACK[dialect], n)
    except (ReadbackError, OracleError) as exc:
        raise Failure(EXIT_READBACK, f"unreadable normal form: {exc}") from None
    dev = deviation(expected, StateVector(n, got, check=False))
    _emit(
        args,
        {
            "deviation": dev,
            "term": [[a.real, a.imag] for a in got],
            "oracle": [[a.real, a.imag] for a in expected.amps],
        },
        f"max amplitude deviation: {dev:.3e}",
    )
    return EXIT_OK if dev < TOLERANCE else EXIT_DEVIATION


def cmd_repl(args) -> int:
    """Each line is reduced; ':check t' types it, ':dialect d' switches."""
    dialect = args.dialect or LINEAL
    interactive = sys.stdin.isatty()
    while True:
        if interactive:
            print(f"{dialect}> ", end="", flush=True)
        line = sys.stdin.readline()
        if not line:
            return EXIT_OK
        line = line.strip()
        if not line or line.startswith("--"):
            continue
        if line in (":q", ":quit"):
            return EXIT_OK
        try:
            if line.startswith(":dialect"):
                choice = line.split(maxsplit=1)[1].strip() if " " in line else ""
                if choice not in DIALECTS:
                    print(f"error: dialect must be one of {', '.join(DIALECTS)}")
                else:
                    dialect = choice
                continue
            if line.startswith(":check"):
                ty = infer(parse(line[len(":check") :], dialect), dialect)
                print(ty if ty is not None else "untyped")
                continue
            trace = _trace(parse(line, dialect), args, dialect)
            suffix = "  -- fuel exhausted" if trace.outcome == FUEL_EXHAUSTED else ""
            print(pretty(trace.final, dialect) + suffix)
        except LinealError as exc:
            print(f"error: {exc}")


COMMANDS = {
    "parse": cmd_parse,
    "check": cmd_check,
    "reduce": cmd_reduce,
    "trace": cmd_trace,
    "sample": cmd_sample,
    "compare-oracle": cmd_compare_oracle,
    "repl": cmd_repl,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dialect", choices=DIALECTS, help="default: from the file extension")
    common.add_argument("--fuel", type=int, default=None, help="step budget (default 10000)")
    common.add_argument("--restriction", choices=("on", "off"), default="on")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true")

    parser = argparse.ArgumentParser(prog="lineal-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("parse", "check", "reduce", "trace"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("file")
    p = sub.add_parser("sample", parents=[common])
    p.add_argument("file")
    p.add_argument("--shots", type=int, default=1000)
    p = sub.add_parser("compare-oracle", parents=[common])
    p.add_argument("file")
    p.add_argument("--circuit", required=True, help='gate list such as "H,X:1,CNOT:0:1"')
    p.add_argument("--qubits", type=int, default=None)
    sub.add_parser("repl", parents=[common])
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.fuel is None:
        args.fuel = _default_fuel()
    if args.fuel < 1:
        print("error: --fuel must be positive", file=sys.stderr)
        return EXIT_PARSE
    if getattr(args, "shots", 1) < 1:
        print("error: --shots must be positive", file=sys.stderr)
        return EXIT_PARSE
    try:
        return COMMANDS[args.command](args)
    except Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TypeCheckError as exc:
        print(f"type error: {exc}", file=sys.stderr)
        return EXIT_TYPE
    except FuelExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FUEL
    except DegenerateMeasurement as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ReadbackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_READBACK


if __name__ == "__main__":
    sys.exit(main())
