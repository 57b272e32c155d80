"""Command-line front end: ``strengthen``, ``size``, ``solve`` and ``check``.

Exit status: 0 success, 1 discrepancy or strengthening conflict, 2 parse
(or other input) error, 3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .ast import RuleTrace, TraceStep
from .attr_rules import StrengtheningConflict
from .engine import strengthen, termination_measure
from .oracle import DEFAULT_LIMIT, BudgetExceeded, EvaluationError, check_equivalent, solve, spec_env
from .parser import ParseError, parse_params, parse_spec
from .printer import pretty_print, show
from .sizes import InfiniteDomain, UnboundName, domain_size

OK, DISCREPANCY, INPUT_ERROR, BUDGET = 0, 1, 2, 3


def trace_record(step: TraceStep) -> dict:
    conv = step.conversion
    return {
        "rule": step.rule,
        "variable": step.target,
        "before": show(step.before) if step.before is not None else None,
        "after": show(step.after) if step.after is not None else None,
        "constraint": show(step.constraint) if step.constraint is not None else None,
        "kept": step.kept,
        "conversion": None
        if conv is None
        else {
            "kind": conv.kind,
            "path": list(conv.path),
            "permutation": list(conv.permutation) if conv.permutation is not None else None,
            "key_arity": conv.key_arity,
        },
    }


def format_trace(trace: RuleTrace) -> str:
    lines = []
    for i, step in enumerate(trace, 1):
        if step.target is None:
            lines.append(f"{i}. {step.rule}")
            continue
        line = f"{i}. {step.rule} on {step.target}: {show(step.before)} ~> {show(step.after)}"
        if step.constraint is not None:
            line += f"  [{'kept' if step.kept else 'removed'}: {show(step.constraint)}]"
        lines.append(line)
    return "".join(l + "\n" for l in lines)


def _load(args):
    spec = parse_spec(Path(args.spec).read_text(encoding="utf-8"))
    params = None
    if getattr(args, "param", None):
        params = parse_params(Path(args.param).read_text(encoding="utf-8"))
    return spec, params


def _emit(text: str, dest: str | None) -> None:
    if dest is None or dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def cmd_strengthen(args) -> int:
    spec, params = _load(args)
    out, trace = strengthen(spec, params)
    _emit(pretty_print(out), args.output)
    if args.json_trace:
        text = json.dumps([trace_record(s) for s in trace], indent=2) + "\n"
    else:
        text = format_trace(trace)
    if args.trace:
        _emit(text, args.trace)
    elif args.json_trace:
        sys.stderr.write(text)
    return OK


def _size_text(d, env) -> str:
    try:
        return str(domain_size(d, env))
    except InfiniteDomain:
        return "infinite"


def cmd_size(args) -> int:
    spec, params = _load(args)
    out, _ = strengthen(spec, params)
    names = [args.var] if args.var else list(spec.finds)
    for n in names:
        if n not in spec.finds:
            raise UnboundName(n)
    before_env, after_env = spec_env(spec, params), spec_env(out, params)
    for n in names:
        before = _size_text(spec.domain_of(n), before_env)
        after = _size_text(out.domain_of(n), after_env)
        print(f"{n}: before {before}")
        print(f"{n}: after {after}")
    return OK


def cmd_solve(args) -> int:
    spec, params = _load(args)
    solutions = solve(spec, params, args.limit, args.jobs)
    sys.stdout.write(solutions.to_text())
    print(f"$ {len(solutions)} solutions", file=sys.stderr)
    return OK


def cmd_check(args) -> int:
    spec, params = _load(args)
    out, trace = strengthen(spec, params)
    verdict = check_equivalent(spec, out, trace, params, args.limit, args.jobs)
    print(f"trace: {len(trace)} steps")
    sys.stdout.write(format_trace(trace))
    print(f"measure: {termination_measure(spec)} ~> {termination_measure(out)}")
    print(verdict.describe())
    return OK if verdict.equal else DISCREPANCY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="essence-robust",
        description="Recover domain attributes and strengthen types in mini-ESSENCE specifications.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("strengthen", help="write the strengthened specification")
    s.add_argument("spec")
    s.add_argument("--param")
    s.add_argument("-o", "--output", help="output file (default: stdout)")
    s.add_argument("--trace", help="write the rule trace to this file")
    s.add_argument("--json-trace", action="store_true", help="structured JSON trace")
    s.set_defaults(func=cmd_strengthen)

    z = sub.add_parser("size", help="domain sizes before and after strengthening")
    z.add_argument("spec")
    z.add_argument("--param")
    z.add_argument("--var", help="only this decision variable")
    z.set_defaults(func=cmd_size)

    for name, func, text in (
        ("solve", cmd_solve, "print every solution"),
        ("check", cmd_check, "strengthen, then compare solution sets"),
    ):
        c = sub.add_parser(name, help=text)
        c.add_argument("spec")
        c.add_argument("--param")
        c.add_argument("--limit", type=int, default=DEFAULT_LIMIT, help="enumeration budget")
        c.add_argument("--jobs", type=int, default=1, help="worker processes for enumeration")
        c.set_defaults(func=func)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"{args.spec}: parse error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except (UnboundName, EvaluationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except StrengtheningConflict as exc:
        print(f"strengthening conflict: {exc}", file=sys.stderr)
        if exc.trace:
            sys.stderr.write(format_trace(exc.trace))
        return DISCREPANCY
    except (BudgetExceeded, InfiniteDomain) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return BUDGET


def main() -> None:
    sys.exit(run())
