"""Syntactic information representation: parsing, rules, linearization."""

from sirforge.sir.tree import (
    AstNode,
    Language,
    SirNode,
    SirTree,
    SourceUnit,
    linearize,
)
from sirforge.sir.parse import parse_source
from sirforge.sir.rules import (
    NodeRuleTable,
    Rule,
    RuleOp,
    build_sir,
    classify_node,
    default_rule_table,
    load_rule_table,
)

__all__ = [
    "Language",
    "SourceUnit",
    "AstNode",
    "SirNode",
    "SirTree",
    "linearize",
    "parse_source",
    "RuleOp",
    "Rule",
    "NodeRuleTable",
    "classify_node",
    "build_sir",
    "load_rule_table",
    "default_rule_table",
]
