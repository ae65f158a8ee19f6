"""Command-line front end: ``expand``, ``table`` and ``audit``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .engine import FINITE, PERIODIC, ExpansionResult, expand, parse_algorithm
from .exact import MINUS, PLUS, PrimeCtx, Surd, digits, is_square, vp
from .oracle import (
    AuditReport,
    audit_bounds,
    rational_digit_oracle,
    reconstruct_rational,
    verify_period,
)
from .sweep import (
    SweepConfig,
    _pmap,
    admissible,
    read_config_file,
    resolve_config,
    run_sweep,
)

SCHEMA = "padicfrac/1"

EXIT_OK, EXIT_AUDIT_FAILED, EXIT_BAD_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


def render(result: ExpansionResult) -> str:
    """Bracket notation; the repeating block is wrapped in ``overline(...)``."""
    qs = [str(b) for b in result.quotients]
    if result.kind == PERIODIC:
        pre, cyc = qs[: result.preperiod], qs[result.preperiod:]
        head = ", ".join(pre)
        body = f"overline({', '.join(cyc)})"
        return f"[{head}; {body}]" if head else f"[; {body}]"
    if result.kind == FINITE:
        return "[" + ", ".join(qs) + "]"
    return "[" + ", ".join(qs + ["..."]) + "]"


def result_to_dict(result: ExpansionResult) -> Dict[str, object]:
    a = result.alpha
    return {
        "p": a.p,
        "input": {"P": str(a.P), "Q": str(a.Q), "D": a.D,
                  "branch": "plus" if a.branch == PLUS else "minus"},
        "algorithm": str(result.algorithm),
        "kind": result.kind,
        "steps": result.steps,
        "preperiod": result.preperiod,
        "period": result.period,
        "value_repeat": list(result.value_repeat) if result.value_repeat else None,
        "quotients": [str(b) for b in result.quotients],
        "rendered": render(result),
        "states": [[P, Q] for P, Q in result.states],
        "diagnostics": [
            {"vp_alpha": _num(d.vp_alpha), "vp_b": _num(d.vp_b), "abs_P": d.abs_P,
             "abs_Q": d.abs_Q, "vp_B": _num(d.vp_B)}
            for d in result.diagnostics
        ],
    }


def _num(v):
    # JSON has no infinity
    return "inf" if v == float("inf") else v


def envelope(kind: str, payload: Dict[str, object]) -> str:
    doc = {"schema": SCHEMA, "kind": kind}
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=False)


def _fraction(text: str, what: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{what}: not a rational number: {text!r}")


def build_input(args) -> Surd:
    try:
        ctx = PrimeCtx(args.p)
    except ValueError as exc:
        raise InputError(str(exc))
    branch = PLUS if args.branch == "plus" else MINUS
    modes = [args.num is not None, args.sqrt is not None,
             any(x is not None for x in (args.P, args.Q, args.D))]
    if sum(modes) != 1:
        raise InputError("give exactly one of --num/--den, --sqrt, or --P/--Q/--D")
    try:
        if args.num is not None:
            den = _fraction(args.den, "--den")
            if den == 0:
                raise InputError("--den must be nonzero")
            x = _fraction(args.num, "--num") / den
            if x == 0:
                raise InputError("cannot expand zero")
            return Surd.rational(x, ctx)
        if args.sqrt is not None:
            D = args.sqrt
            if D <= 0 or is_square(D):
                raise InputError(f"--sqrt needs a positive non-square integer, got {D}")
            return Surd.sqrt(D, ctx, branch)
        if args.P is None or args.Q is None or args.D is None:
            raise InputError("--P, --Q and --D go together")
        P, Q, D = _fraction(args.P, "--P"), _fraction(args.Q, "--Q"), args.D
        if Q == 0:
            raise InputError("--Q must be nonzero")
        if D and (D < 0 or is_square(D)):
            raise InputError(f"--D must be 0 or a positive non-square, got {D}")
        if D == 0 and P == 0:
            raise InputError("cannot expand zero")
        return Surd(P, Q, D, ctx, branch)
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(str(exc))


def cmd_expand(args, out) -> int:
    try:
        alpha = build_input(args)
        alg = parse_algorithm(args.alg)
        if args.max_steps < 1:
            raise InputError("--max-steps must be >= 1")
        if alg.name == "browkin4" and alpha.D == 0:
            raise InputError("browkin4 expands quadratic irrationals only")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    result = expand(alpha, alg, args.max_steps)
    if args.format == "json":
        print(envelope("expansion", {"result": result_to_dict(result)}), file=out)
        return EXIT_OK
    print(render(result), file=out)
    line = f"kind={result.kind} steps={result.steps}"
    if result.kind == PERIODIC:
        line += f" pre={result.preperiod} period={result.period}"
    print(line, file=out)
    return EXIT_OK


def _sweep_overrides(args) -> Dict[str, object]:
    ov = {
        "primes": args.primes,
        "d_min": args.d_min,
        "d_max": args.d_max,
        "algorithms": args.algorithms,
        "max_steps": args.max_steps,
        "neww_max_steps": args.neww_max_steps,
        "format": args.format,
        "jobs": args.jobs,
        "seed": getattr(args, "seed", None),
    }
    if args.no_verify:
        ov["verify"] = False
    return ov


def _resolve(args) -> SweepConfig:
    file_values = read_config_file(args.config) if args.config else None
    cfg = resolve_config(file_values, _sweep_overrides(args))
    # the two commands share the key but not the text/csv choice
    if args.command == "table" and cfg.format == "text":
        cfg.format = "csv"
    if args.command == "audit" and cfg.format == "csv":
        cfg.format = "text"
    return cfg


def _csv_list(kind):
    def parse(text: str):
        return [kind(x) for x in text.split(",") if x.strip()]
    return parse


def format_table(cfg: SweepConfig, rows) -> str:
    if cfg.format == "json":
        return envelope("table", {
            "config": dict(cfg.items()),
            "rows": [r.as_dict() for r in rows],
        }) + "\n"
    buf = io.StringIO()
    for k, v in cfg.items():
        buf.write(f"# {k} = {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p"] + list(cfg.algorithms) + ["total"])
    for r in rows:
        w.writerow([r.p] + [r.counts[a] for a in cfg.algorithms] + [r.total])
    return buf.getvalue()


def cmd_table(args, out) -> int:
    try:
        cfg = _resolve(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    rows = run_sweep(cfg)
    out.write(format_table(cfg, rows))
    return EXIT_OK


def audit_surd(task) -> List[AuditReport]:
    """Period re-verification and size bounds for ``sqrt(D)`` in Q_p."""
    p, D, plan = task
    alpha = Surd.sqrt(D, PrimeCtx(p))
    reports = []
    for alg, cap in plan:
        res = expand(alpha, alg, cap, verify=False)
        if res.kind == PERIODIC:
            reports.append(verify_period(alpha, alg, res))
        reports.append(audit_bounds(alpha, alg, res))
    return reports


def audit_rational(task) -> List[AuditReport]:
    """Digit agreement with the oracle and reconstruction of finite expansions."""
    p, x, algs = task
    alpha = Surd.rational(x, PrimeCtx(p))
    rep = AuditReport({"p": p, "alpha": str(x), "algorithm": "digits"})
    v = int(vp(x, p))
    mine = digits(alpha, v, v + 12)
    theirs = rational_digit_oracle(x, p, v + 12)
    bad = next((i for i, (a, b) in enumerate(zip(mine, theirs)) if a != b), None)
    rep.add("digits match oracle", bad is None, None if bad is None else v + bad,
            None if bad is None else (mine[bad], theirs[bad]))
    reports = [rep]
    for alg in algs:
        if parse_algorithm(alg).name == "browkin4":
            continue
        res = expand(alpha, alg, 1000, verify=False)
        r = audit_bounds(alpha, alg, res)
        if res.kind == FINITE:
            back = reconstruct_rational(res.quotients)
            r.add("reconstructs input", back == x, res.steps, (back, x))
        reports.append(r)
    return reports


def audit_tasks(cfg: SweepConfig, rationals: int, den_max: int):
    rng = random.Random(cfg.seed)
    surds, rats = [], []
    for p in sorted(set(cfg.primes)):
        plan = tuple((a, cfg.steps_for(a, p)) for a in cfg.algorithms)
        if cfg.d_max >= cfg.d_min:
            surds.extend((p, D, plan) for D in admissible(p, cfg.d_min, cfg.d_max))
        for _ in range(rationals):
            num = 0
            while num == 0:
                num = rng.randint(-den_max, den_max)
            rats.append((p, Fraction(num, rng.randint(1, den_max)), tuple(cfg.algorithms)))
    return surds, rats


def cmd_audit(args, out) -> int:
    try:
        cfg = _resolve(args)
        if args.rationals < 0 or args.den_max < 1:
            raise ValueError("--rationals must be >= 0 and --den-max >= 1")
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    surds, rats = audit_tasks(cfg, args.rationals, args.den_max)
    reports: List[AuditReport] = []
    for chunk in _pmap(audit_surd, surds, cfg.jobs):
        reports.extend(chunk)
    for chunk in _pmap(audit_rational, rats, cfg.jobs):
        reports.extend(chunk)
    failed = [r for r in reports if not r.passed]
    n_checks = sum(len(r.checks) for r in reports)
    if cfg.format == "json":
        shown = reports if args.all else failed
        print(envelope("audit", {
            "config": dict(cfg.items()),
            "subjects": len(reports),
            "checks": n_checks,
            "failed": len(failed),
            "reports": [r.to_dict() for r in shown],
        }), file=out)
    else:
        for k, v in cfg.items():
            print(f"# {k} = {v}", file=out)
        for r in failed:
            for c in r.failures():
                print(f"FAIL {r.subject} {c.name} at {c.witness_index}: {c.witness}", file=out)
        print(f"subjects={len(reports)} checks={n_checks} failed={len(failed)}", file=out)
    return EXIT_AUDIT_FAILED if failed else EXIT_OK


def _add_sweep_flags(sp):
    sp.add_argument("--config", help="flat key = value file; flags override it")
    sp.add_argument("--primes", type=_csv_list(int), help="comma-separated primes")
    sp.add_argument("--d-min", type=int)
    sp.add_argument("--d-max", type=int)
    sp.add_argument("--algorithms", type=_csv_list(str))
    sp.add_argument("--max-steps", type=int)
    sp.add_argument("--neww-max-steps", type=int)
    sp.add_argument("--jobs", type=int, help="worker processes (env PADICFRAC_JOBS)")
    sp.add_argument("--no-verify", action="store_true",
                    help="skip oracle re-verification of periodic results")
    sp.add_argument("--format", choices=("csv", "json", "text"), default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="padicfrac",
                                 description="p-adic continued fractions")
    sub = ap.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("expand", help="expand one number")
    ex.add_argument("--p", type=int, required=True)
    ex.add_argument("--alg", default="neww")
    ex.add_argument("--num")
    ex.add_argument("--den", default="1")
    ex.add_argument("--sqrt", type=int)
    ex.add_argument("--P")
    ex.add_argument("--Q")
    ex.add_argument("--D", type=int)
    ex.add_argument("--branch", choices=("plus", "minus"), default="plus")
    ex.add_argument("--max-steps", type=int, default=1000)
    ex.add_argument("--format", choices=("text", "json"), default="text")
    ex.set_defaults(func=cmd_expand)

    tb = sub.add_parser("table", help="periodicity counts per prime")
    _add_sweep_flags(tb)
    tb.set_defaults(func=cmd_table)

    au = sub.add_parser("audit", help="cross-check the engine against the oracle")
    _add_sweep_flags(au)
    au.add_argument("--rationals", type=int, default=100,
                    help="random rationals per prime")
    au.add_argument("--den-max", type=int, default=10 ** 6)
    au.add_argument("--seed", type=int)
    au.add_argument("--all", action="store_true", help="list passing reports too")
    au.set_defaults(func=cmd_audit)
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_INPUT if exc.code else EXIT_OK
    return args.func(args, out)


if __name__ == "__main__":
    sys.exit(main())
