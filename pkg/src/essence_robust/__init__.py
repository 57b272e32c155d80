"""Attribute recovery and type strengthening for mini-ESSENCE specifications."""

from .ast import RuleTrace, Specification, alpha_equal, substitute
from .attr_rules import StrengtheningConflict, rule_catalogue
from .engine import replay, strengthen, termination_measure
from .oracle import BudgetExceeded, check_equivalent, enumerate_values, solve
from .parser import ParseError, parse_params, parse_spec
from .printer import pretty_print
from .sizes import domain_size

__all__ = [
    "BudgetExceeded",
    "ParseError",
    "RuleTrace",
    "Specification",
    "StrengtheningConflict",
    "alpha_equal",
    "check_equivalent",
    "domain_size",
    "enumerate_values",
    "parse_params",
    "parse_spec",
    "pretty_print",
    "replay",
    "rule_catalogue",
    "solve",
    "strengthen",
    "substitute",
    "termination_measure",
]
