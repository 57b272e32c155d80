"""Fixpoint driver for attribute recovery, type strengthening and simplification.

Each round tries, in order, every attribute rule (catalogue order, then
declaration order of the finds), then the type rules, then wrapper
simplification; the first change found is recorded and the round restarts.
The loop stops when nothing applies.
"""

from __future__ import annotations

from typing import Mapping

from .ast import (
    LEGAL_ATTRIBUTES,
    ATTRIBUTED_DOMAINS,
    BinOp,
    Expr,
    MSetDomain,
    Quant,
    QuantIn,
    RelationDomain,
    RuleTrace,
    Specification,
    ToMSet,
    ToRelation,
    TraceStep,
    conjuncts,
    domain_positions,
    resolve,
    walk,
)
from .attr_rules import Firing, StrengtheningConflict, apply_rule, rule_catalogue, rule_named
from .matcher import normalize
from .type_rules import TYPE_RULES, apply_type_rule, simplify_wrappers

SIMPLIFY = "simplify-wrappers"


def prepare(spec: Specification) -> Specification:
    """Normalize every constraint and split top-level conjunctions."""
    out: list[Expr] = []
    for c in spec.constraints:
        out.extend(conjuncts(normalize(c)))
    return spec.with_constraints(out)


def _max_arity(spec: Specification) -> int:
    arity = 3
    for name in spec.finds:
        for _, d in domain_positions(resolve(spec.domain_of(name), spec.domain_lettings())):
            if isinstance(d, RelationDomain) and isinstance(d.columns, tuple):
                arity = max(arity, len(d.columns))
    return arity


def _simplify_step(spec: Specification) -> Firing | None:
    new = simplify_wrappers(spec)
    if new == spec:
        return None
    return Firing(new, TraceStep(SIMPLIFY, None, None, None, None, True))


def next_firing(spec: Specification, params: Mapping | None = None) -> Firing | None:
    for rule in rule_catalogue(_max_arity(spec)):
        for target in spec.finds:
            firing = apply_rule(rule, spec, target, params)
            if firing is not None:
                return firing
    for rule in TYPE_RULES:
        for target in spec.finds:
            firing = apply_type_rule(rule, spec, target, params)
            if firing is not None:
                return firing
    return _simplify_step(spec)


def strengthen(
    spec: Specification, params: Mapping | None = None
) -> tuple[Specification, RuleTrace]:
    """Strengthen ``spec`` to a fixpoint.

    ``params`` (optional) lets guards and attribute merges evaluate parameter
    expressions; without it only literal values are compared.
    """
    spec = prepare(spec)
    trace = RuleTrace()
    while True:
        try:
            firing = next_firing(spec, params)
        except StrengtheningConflict as exc:
            exc.trace = trace
            raise
        if firing is None:
            return prepare(spec), trace
        spec = firing.spec
        trace = trace.append(firing.step)


def replay(
    spec: Specification, trace: RuleTrace, params: Mapping | None = None
) -> Specification:
    """Re-run the recorded steps on ``spec``; each must fire exactly as recorded."""
    spec = prepare(spec)
    arity = _max_arity(spec)
    type_rules = {r.name: r for r in TYPE_RULES}
    for step in trace:
        if step.target is not None and step.target not in spec.finds:
            raise ValueError(f"trace step {step.rule} names unknown variable {step.target}")
        if step.rule == SIMPLIFY:
            firing = _simplify_step(spec)
        elif step.rule in type_rules:
            firing = apply_type_rule(type_rules[step.rule], spec, step.target, params)
        else:
            firing = apply_rule(rule_named(step.rule, arity), spec, step.target, params)
        if firing is None or firing.step != step:
            raise ValueError(f"trace step {step.rule} on {step.target} does not replay")
        spec = firing.spec
    return prepare(spec)


# ---------------------------------------------------------------------------
# Termination measure
# ---------------------------------------------------------------------------


def _atoms(e: Expr) -> int:
    match e:
        case Quant(body=body) | QuantIn(body=body):
            return _atoms(body)
        case BinOp("/\\", left, right):
            return _atoms(left) + _atoms(right)
    return 1


def termination_measure(spec: Specification) -> tuple[int, int, int, int]:
    """Lexicographic measure that every engine step strictly decreases.

    Components: constraint atoms (conjunct leaves, looking through
    quantifiers); mset and relation positions in find domains; legal
    attributes still absent from find domains; wrapper nodes.
    """
    atoms = sum(_atoms(c) for c in spec.constraints)
    weak = absent = 0
    lettings = spec.domain_lettings()
    for name in spec.finds:
        for _, d in domain_positions(resolve(spec.domain_of(name), lettings)):
            if isinstance(d, (MSetDomain, RelationDomain)):
                weak += 1
            if isinstance(d, ATTRIBUTED_DOMAINS):
                present = {a.name for a in d.attrs}
                absent += len(LEGAL_ATTRIBUTES[d.constructor] - present)
    wrappers = sum(
        1 for c in spec.constraints for n in walk(c) if isinstance(n, (ToMSet, ToRelation))
    )
    return atoms, weak, absent, wrappers
