"""Command-line front end.

Exit codes: 0 pass or certified, 1 violation or refuted, 2 invalid input,
3 inconclusive (including points that cannot be localized).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import jsonio
from .bruteforce import enumerate_report
from .cone import FiniteDiscrete, PLLine, rational
from .errors import (BudgetExhausted, InvalidInput, NormAddError, NotLocalizable, OracleFailure,
                     RecoveryError)
from .fixtures import FIXTURE_NAMES, NEGATIVE_CONTROLS, make_fixture
from .operators import as_oracle, invert, random_op
from .recovery import RecoveryConfig, certify, check_duality, recover, recover_inverse
from .verification import Sampler, replay, run_all_checks

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage already; keep that but route through us
    def error(self, message):
        raise UsageError(message)


# -- argument parsing helpers -----------------------------------------------

def parse_space(text):
    """``discrete:N``, ``discrete:a,b,c``, ``pl`` or ``pl:RESOLUTION``."""
    kind, _, arg = text.partition(":")
    if kind == "discrete":
        if not arg:
            raise InvalidInput("discrete space needs a size or point list")
        if arg.isdigit():
            n = int(arg)
            if n < 1:
                raise InvalidInput("discrete space needs at least one point")
            return FiniteDiscrete.of_size(n)
        return FiniteDiscrete(tuple(arg.split(",")))
    if kind in ("pl", "line"):
        return PLLine(float(arg)) if arg else PLLine()
    raise InvalidInput(f"unknown space {text!r}")


def parse_range(text, discrete):
    lo, sep, hi = text.partition(":")
    if not sep:
        raise InvalidInput(f"range must look like lo:hi, got {text!r}")
    if discrete:
        return rational(lo), rational(hi)
    return float(lo), float(hi)


def parse_grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidInput("grid must look like lo:hi:count")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 2 or not hi > lo:
        raise InvalidInput("grid needs lo < hi and at least 2 points")
    return tuple(float(v) for v in np.linspace(lo, hi, n))


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: malformed JSON ({exc})") from exc


def _global_flags(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0), help="seed for all random choices")
    parser.add_argument("--tol", type=float, default=d(None),
                        help="tolerance (default: exact on discrete spaces)")
    parser.add_argument("--trials", type=int, default=d(None), help="random trials per property")
    parser.add_argument("--parallel", action="store_true", default=d(False),
                        help="evaluate thread-safe oracles concurrently")
    parser.add_argument("--out", default=d(None), help="write the JSON report here instead of stdout")


def build_parser():
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)

    oracle = _Parser(add_help=False)
    src = oracle.add_mutually_exclusive_group(required=True)
    src.add_argument("--op", help="operator JSON file (from `gen`)")
    src.add_argument("--fixture", choices=FIXTURE_NAMES, help="named in-tree oracle")
    oracle.add_argument("--space", default="discrete:3", help="space for --fixture (default discrete:3)")
    oracle.add_argument("--replay", metavar="WITNESS",
                        help="re-evaluate a witness (or the first witness in a report) instead")
    oracle.add_argument("--figures", metavar="DIR", help="render PNG figures into DIR")

    p = _Parser(prog="normadd", description="Norm-additive maps between positive cones: "
                "generate, check, recover and certify weighted composition operators.")
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="write a random operator")
    g.add_argument("--space", default="discrete:4")
    g.add_argument("--h-range", default=None, help="weight range lo:hi (default 1/10:10)")
    g.add_argument("--reversing", action="store_true", help="decreasing tau on the line")

    sub.add_parser("check", parents=[common, oracle], help="run the property checks").add_argument(
        "--tuple-sizes", default="2,3", help="disjoint tuple sizes for the biseparating check")

    r = sub.add_parser("recover", parents=[common, oracle], help="recover tau and h, then certify")
    r.add_argument("--budget", type=int, default=None, help="oracle queries per localized point")
    r.add_argument("--grid", default=None, help="line sample grid lo:hi:count (default -4:4:32)")
    r.add_argument("--with-inverse", action="store_true",
                   help="also recover the inverse and check the duality relations")

    c = sub.add_parser("certify", parents=[common, oracle], help="certify a stored recovery result")
    c.add_argument("--result", help="recovery JSON (from `recover`)")

    f = sub.add_parser("fuzz", parents=[common], help="run the negative controls")
    f.add_argument("--fixture", action="append", choices=FIXTURE_NAMES,
                   help="fixture to run (repeatable; default: all negative controls)")
    f.add_argument("--space", default="discrete:3")
    f.add_argument("--figures", metavar="DIR")

    e = sub.add_parser("enumerate", parents=[common], help="brute-force search on a grid cone")
    e.add_argument("--points", type=int, required=True)
    e.add_argument("--max", type=int, required=True, dest="max_value")
    e.add_argument("--cap", type=int, default=16, help="largest allowed number of grid elements")
    e.add_argument("--mode", choices=("backtrack", "exhaustive"), default="backtrack")
    e.add_argument("--figures", metavar="DIR")
    return p


# -- oracle resolution ------------------------------------------------------

def _resolve(args):
    """(oracle, inverse_oracle, operator_or_None, label)."""
    if args.op:
        op = jsonio.op_from_json(_load_json(args.op))
        return as_oracle(op, "operator"), as_oracle(invert(op), "inverse"), op, args.op
    space = parse_space(args.space)
    oracle, inverse = make_fixture(args.fixture, space)
    return oracle, inverse, None, args.fixture


def _trials(args, default):
    n = args.trials if args.trials is not None else default
    if n < 1:
        raise InvalidInput("--trials must be >= 1")
    return n


def _tol(args):
    if args.tol is not None and args.tol < 0:
        raise InvalidInput("--tol must be nonnegative")
    return args.tol


# -- commands ---------------------------------------------------------------

def cmd_gen(args):
    space = parse_space(args.space)
    discrete = isinstance(space, FiniteDiscrete)
    h_range = parse_range(args.h_range, discrete) if args.h_range else (rational("1/10"), rational(10))
    if not discrete:
        h_range = tuple(float(v) for v in h_range)
    op = random_op(args.seed, space, space, h_range, reversing=args.reversing)
    kind = "permutation" if discrete else ("decreasing" if args.reversing else "increasing") + " PL"
    print(f"tau: {kind}; h_min={jsonio.number(op.h_min)} h_max={jsonio.number(op.h_max)}",
          file=sys.stderr)
    return jsonio.op_to_json(op), EXIT_OK


def _replay(args, oracle):
    raw = jsonio.find_witness(_load_json(args.replay))
    if raw is None:
        raise InvalidInput(f"{args.replay}: no witness found")
    w = jsonio.witness_from_json(raw)
    tol = _tol(args)
    if tol is None and w.property_name in ("representation", "inverse"):
        # certification tolerances are absolute, unlike the relative check default
        tol = 0 if isinstance(w.space, FiniteDiscrete) else 1e-7
    again, ok = replay(w, oracle, tol)
    fresh = jsonio.witness_to_json(again)
    report = {"command": "replay", "witness": raw, "replayed": fresh, "reproduced": not ok,
              "identical_discrepancy": fresh["discrepancy"] == raw.get("discrepancy")}
    return report, (EXIT_OK if ok else EXIT_FAIL)


def cmd_check(args):
    oracle, inverse, op, label = _resolve(args)
    if args.replay:
        return _replay(args, oracle)
    trials = _trials(args, 50)
    try:
        sizes = tuple(int(s) for s in args.tuple_sizes.split(",") if s)
    except ValueError as exc:
        raise InvalidInput(f"bad --tuple-sizes: {args.tuple_sizes}") from exc
    sampler = Sampler(oracle.domain, seed=args.seed)
    known = op.h_max if op is not None else None
    start = time.perf_counter()
    reports = run_all_checks(oracle, sampler, trials, inverse_oracle=inverse, known_bound=known,
                             tol=_tol(args), parallel=args.parallel, tuple_sizes=sizes)
    props = [jsonio.check_report_to_json(r) for r in reports]
    failed = [r["property"] for r in props if r["verdict"] == "fail"]
    out = {"command": "check", "oracle": label, "seed": args.seed, "trials": trials,
           "verdict": "fail" if failed else "pass", "failed": failed, "properties": props,
           "elapsed": time.perf_counter() - start}
    if args.figures:
        from .plotting import check_figure
        out["figures"] = [check_figure(props, args.figures)]
    return out, (EXIT_FAIL if failed else EXIT_OK)


def _config(args, trials_default=200):
    if getattr(args, "budget", None) is not None and args.budget < 1:
        raise InvalidInput("--budget must be >= 1")
    kw = dict(trials=_trials(args, trials_default), tol=_tol(args), seed=args.seed,
              parallel=args.parallel, budget=getattr(args, "budget", None))
    if getattr(args, "grid", None):
        kw["grid"] = parse_grid(args.grid)
    return RecoveryConfig(**kw)


def _verdict_code(verdict):
    return {"certified": EXIT_OK, "refuted": EXIT_FAIL}.get(verdict, EXIT_INCONCLUSIVE)


def _recovery_failure(exc, label):
    code = EXIT_INCONCLUSIVE if isinstance(exc, (NotLocalizable, BudgetExhausted)) else EXIT_FAIL
    out = {"oracle": label, "verdict": "inconclusive" if code == EXIT_INCONCLUSIVE else "refuted",
           "error": type(exc).__name__, "message": str(exc), "refutes": exc.refutes}
    if isinstance(exc, NotLocalizable):
        out["reason"] = exc.reason
    return out, code


def cmd_recover(args):
    oracle, inverse, op, label = _resolve(args)
    if args.replay:
        return _replay(args, oracle)
    config = _config(args)
    start = time.perf_counter()
    try:
        result = recover(oracle, oracle.codomain, config)
    except RecoveryError as exc:
        out, code = _recovery_failure(exc, label)
        out["command"] = "recover"
        return out, code
    out = {"command": "recover", "oracle": label, **jsonio.recovery_to_json(result)}
    code = _verdict_code(result.verdict)
    if args.with_inverse:
        if inverse is None:
            raise InvalidInput(f"no inverse oracle available for {label}")
        try:
            back = recover_inverse(inverse, inverse.codomain, config)
        except RecoveryError as exc:
            out["inverse"], inv_code = _recovery_failure(exc, label)
            code = max(code, inv_code)
        else:
            dual = check_duality(result, back)
            out["inverse"] = jsonio.recovery_to_json(back)
            out["duality"] = {"ok": dual.ok, "max_weight_error": dual.max_weight_error,
                              "max_point_error": dual.max_point_error, "failures": dual.failures}
            if not dual.ok or back.verdict == "refuted":
                code = EXIT_FAIL
            elif code == EXIT_OK and back.verdict != "certified":
                code = EXIT_INCONCLUSIVE
    out["elapsed"] = time.perf_counter() - start
    if args.figures:
        from .plotting import recovery_figure
        out["figures"] = [recovery_figure(result, args.figures, truth=op)]
    return out, code


def cmd_certify(args):
    oracle, _, _, label = _resolve(args)
    if args.replay:
        return _replay(args, oracle)
    if not args.result:
        raise InvalidInput("certify needs --result (or --replay)")
    stored = jsonio.recovery_from_json(_load_json(args.result))
    if stored.domain != oracle.domain or stored.codomain != oracle.codomain:
        raise InvalidInput("the stored result and the oracle live on different spaces")
    config = _config(args)
    from .recovery import _certify_sampler
    start = time.perf_counter()
    result = certify(oracle, stored, _certify_sampler(stored, config.seed), config.trials,
                     config.tolerance(stored.codomain), config.parallel)
    out = {"command": "certify", "oracle": label, **jsonio.recovery_to_json(result),
           "elapsed": time.perf_counter() - start}
    return out, _verdict_code(result.verdict)


def cmd_fuzz(args):
    space = parse_space(args.space)
    names = args.fixture or list(NEGATIVE_CONTROLS)
    trials = _trials(args, 50)
    start = time.perf_counter()
    rows = []
    for name in names:
        oracle, inverse = make_fixture(name, space)
        reports = run_all_checks(oracle, Sampler(space, seed=args.seed), trials,
                                 inverse_oracle=inverse, tol=_tol(args), parallel=args.parallel,
                                 tuple_sizes=(2,))
        props = [jsonio.check_report_to_json(r) for r in reports]
        failed = [r for r in props if r["verdict"] == "fail"]
        rows.append({"fixture": name, "rejected": bool(failed),
                     "rejected_by": [r["property"] for r in failed],
                     "witness": failed[0]["witness"] if failed else None})
    missed = [r["fixture"] for r in rows if not r["rejected"]]
    out = {"command": "fuzz", "space": jsonio.space_to_json(space), "seed": args.seed,
           "trials": trials, "fixtures": rows, "missed": missed,
           "verdict": "pass" if not missed else "fail", "elapsed": time.perf_counter() - start}
    if args.figures:
        from .plotting import check_figure
        out["figures"] = [check_figure([{"property": r["fixture"], "verdict":
                                         "pass" if r["rejected"] else "fail",
                                         "max_discrepancy": r["witness"]["discrepancy"]
                                         if r["witness"] else 0, "constants": {}}
                                        for r in rows], args.figures, "fuzz.png")]
    return out, (EXIT_OK if not missed else EXIT_FAIL)


def cmd_enumerate(args):
    report = enumerate_report(args.points, args.max_value, cap=args.cap, mode=args.mode)
    out = {"command": "enumerate", **report}
    if args.figures:
        from .plotting import enumerate_figure
        out["figures"] = [enumerate_figure(report, args.figures)]
    return out, EXIT_OK


COMMANDS = {"gen": cmd_gen, "check": cmd_check, "recover": cmd_recover, "certify": cmd_certify,
            "fuzz": cmd_fuzz, "enumerate": cmd_enumerate}


def _emit(report, path):
    text = jsonio.dumps(report)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"normadd: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_INVALID
    try:
        report, code = COMMANDS[args.command](args)
    except OracleFailure as exc:
        report, code = {"command": args.command, "error": "OracleFailure", "message": str(exc)}, \
            EXIT_INCONCLUSIVE
    except (NormAddError, ValueError, OSError, KeyError, TypeError) as exc:
        print(f"normadd: error: {exc}", file=sys.stderr)
        report = {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
        code = EXIT_INVALID
    try:
        _emit(report, args.out)
    except OSError as exc:
        print(f"normadd: cannot write report: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return code


__all__ = ["main", "build_parser", "parse_space"]
