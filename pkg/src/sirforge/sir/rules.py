"""Node classification rules and the AST -> SIR rewrite.

Rule tables are versioned text files, one rule per line:

    <lang> <kind> <op> [<canonical>]   [# comment]

with op one of unchange / replace / prune. Kinds absent from the table
default to unchange, which keeps information rather than losing it.
Tables are hashed so outputs can be stamped with the exact ruleset.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from sirforge.errors import EmptyResult, SchemaError
from sirforge.sir.tree import AstNode, Language, SirNode, SirTree, linearize


class RuleOp(Enum):
    UNCHANGE = "unchange"
    REPLACE = "replace"
    PRUNE = "prune"


@dataclass(frozen=True)
class Rule:
    language: Language
    kind: str
    op: RuleOp
    canonical: str | None = None


@dataclass
class NodeRuleTable:
    """Per-language rule sets; the three kind sets are pairwise disjoint."""

    language: Language
    universal: set[str] = field(default_factory=set)
    semi_universal: dict[str, str] = field(default_factory=dict)
    language_specific: set[str] = field(default_factory=set)
    version: str = "unversioned"
    content_hash: str = ""

    def __post_init__(self) -> None:
        semi = set(self.semi_universal)
        overlaps = (
            (self.universal & semi)
            | (self.universal & self.language_specific)
            | (semi & self.language_specific)
        )
        if overlaps:
            raise SchemaError(f"rule sets overlap on kinds: {sorted(overlaps)}")
        bad = set(self.semi_universal.values()) & semi
        if bad:
            raise SchemaError(f"replacement names reused as rule keys: {sorted(bad)}")

    def add(self, rule: Rule) -> None:
        if rule.op is RuleOp.UNCHANGE:
            self.universal.add(rule.kind)
        elif rule.op is RuleOp.REPLACE:
            if not rule.canonical:
                raise SchemaError(f"replace rule for {rule.kind!r} lacks a canonical name")
            self.semi_universal[rule.kind] = rule.canonical
        else:
            self.language_specific.add(rule.kind)
        self.__post_init__()


def classify_node(kind: str, table: NodeRuleTable) -> tuple[RuleOp, str | None]:
    """Return the unique rule for a node kind; unlisted kinds are unchanged."""
    if kind in table.language_specific:
        return RuleOp.PRUNE, None
    if kind in table.semi_universal:
        return RuleOp.REPLACE, table.semi_universal[kind]
    return RuleOp.UNCHANGE, None


def parse_rule_line(line: str, lineno: int) -> Rule | None:
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    parts = body.split()
    if len(parts) < 3:
        raise SchemaError(f"expected '<lang> <kind> <op> [<canonical>]', got {line!r}", lineno)
    lang = Language.parse(parts[0])
    kind = parts[1]
    try:
        op = RuleOp(parts[2].lower())
    except ValueError:
        raise SchemaError(f"unknown rule op {parts[2]!r}", lineno) from None
    canonical = parts[3] if len(parts) > 3 else None
    if op is RuleOp.REPLACE and canonical is None:
        raise SchemaError(f"replace rule without canonical name: {line!r}", lineno)
    if op is not RuleOp.REPLACE and canonical is not None:
        raise SchemaError(f"{op.value} rule carries extra field: {line!r}", lineno)
    return Rule(lang, kind, op, canonical)


def load_rule_table(path: str | Path, language: Language | str) -> NodeRuleTable:
    """Load the rules for one language from a rule file."""
    language = language if isinstance(language, Language) else Language.parse(language)
    text = Path(path).read_text(encoding="utf-8")
    return _table_from_text(text, language)


def _table_from_text(text: str, language: Language) -> NodeRuleTable:
    table = NodeRuleTable(language=language)
    version = "unversioned"
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("# version:"):
            version = line.split(":", 1)[1].strip()
        rule = parse_rule_line(line, lineno)
        if rule is None or rule.language != language:
            continue
        table.add(rule)
    table.version = version
    table.content_hash = hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
    return table


def default_rule_table(language: Language | str) -> NodeRuleTable:
    """Load the packaged ruleset for a language."""
    language = language if isinstance(language, Language) else Language.parse(language)
    name = f"{language.value}.rules"
    text = resources.files("sirforge.rulesets").joinpath(name).read_text(encoding="utf-8")
    return _table_from_text(text, language)


def build_sir(ast: AstNode, table: NodeRuleTable) -> SirTree:
    """Rewrite a concrete tree into its language-agnostic form.

    Prune removes a node with its whole subtree, replace renames the kind,
    unchange copies. Surviving nodes keep their source spans, indexed by
    preorder id.
    """
    spans: dict[int, tuple[int, int]] = {}
    counter = [0]

    def rewrite(node: AstNode) -> SirNode | None:
        op, canonical = classify_node(node.kind, table)
        if op is RuleOp.PRUNE:
            return None
        kind = canonical if op is RuleOp.REPLACE else node.kind
        node_id = counter[0]
        counter[0] += 1
        spans[node_id] = node.span
        sir = SirNode(kind=kind, leaf_text=node.leaf_text if node.is_leaf else None)
        for child in node.children:
            sub = rewrite(child)
            if sub is not None:
                sir.children.append(sub)
        return sir

    root = rewrite(ast)
    if root is None:
        raise EmptyResult("root node was pruned")
    return SirTree(root=root, source_span_index=spans)
