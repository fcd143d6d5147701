"""CodeBLEU: BLEU + keyword-weighted n-grams + AST match + dataflow match.

Components:
  bleu            smoothed 4-gram precision with brevity penalty;
  weighted_ngram  same, but an n-gram counts 4x when it starts with a
                  language keyword;
  ast_match       multiset overlap of depth-3 canonical subtree strings
                  rooted at internal AST nodes (kinds only, leaves
                  excluded as roots);
  dataflow_match  multiset overlap of name-abstracted def-use edges
                  (def-site ordinal, per-def use counter).

Total is the weighted sum. Smoothing is (m + 0.1) / (t + 0.1) per order,
so self-comparison scores exactly 1.0. When a side fails to parse (no
structure recovered), the AST and dataflow components degrade to 0.0 and
a warning is recorded.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from sirforge.errors import EmptyInput
from sirforge.sir import javalex, pylex
from sirforge.sir.parse import parse_source
from sirforge.sir.tree import AstNode, Language, SourceUnit

SMOOTH_EPS = 0.1
KEYWORD_WEIGHT = 4.0
MAX_NGRAM = 4
SUBTREE_DEPTH = 3

DEFAULT_WEIGHTS = (0.25, 0.25, 0.25, 0.25)


@dataclass
class CodeBleuReport:
    bleu: float
    weighted_ngram: float
    ast_match: float
    dataflow_match: float
    weights: tuple[float, float, float, float]
    total: float
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "bleu": self.bleu,
            "weighted_ngram": self.weighted_ngram,
            "ast_match": self.ast_match,
            "dataflow_match": self.dataflow_match,
            "weights": list(self.weights),
            "total": self.total,
            "warnings": self.warnings,
        }


def tokenize_code(text: str, lang: Language) -> list[str]:
    """Lexer-based tokens (comments and whitespace dropped)."""
    if lang is Language.PYTHON:
        skip = {pylex.NEWLINE, pylex.INDENT, pylex.DEDENT, pylex.ENDMARKER}
        return [t.text for t in pylex.tokenize(text) if t.type not in skip and t.text]
    return [t.text for t in javalex.tokenize(text) if t.type != javalex.EOF and t.text]


def _keywords(lang: Language) -> frozenset[str]:
    return pylex.KEYWORDS if lang is Language.PYTHON else javalex.KEYWORDS


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _precision(hyp: Counter, ref: Counter, weight_of) -> tuple[float, float]:
    matched = 0.0
    total = 0.0
    for gram, count in hyp.items():
        w = weight_of(gram)
        total += w * count
        matched += w * min(count, ref.get(gram, 0))
    return matched, total


def _geo_mean_precision(
    hyp_tokens: list[str], ref_tokens: list[str], weight_of
) -> float:
    log_sum = 0.0
    for n in range(1, MAX_NGRAM + 1):
        matched, total = _precision(_ngrams(hyp_tokens, n), _ngrams(ref_tokens, n), weight_of)
        p_n = (matched + SMOOTH_EPS) / (total + SMOOTH_EPS)
        log_sum += math.log(p_n) / MAX_NGRAM
    bp = 1.0
    c, r = len(hyp_tokens), len(ref_tokens)
    if c == 0:
        return 0.0
    if c < r:
        bp = math.exp(1.0 - r / c)
    return bp * math.exp(log_sum)


def _subtree_strings(root: AstNode) -> Counter:
    out: Counter = Counter()

    def render(node: AstNode, depth: int) -> str:
        if node.is_leaf or depth == 0:
            return node.kind
        inner = " ".join(render(c, depth - 1) for c in node.children)
        return f"{node.kind}({inner})"

    for node in root.walk():
        if not node.is_leaf:
            out[render(node, SUBTREE_DEPTH)] += 1
    return out


_PY_DEF_PARENTS = {"assignment", "augmented_assignment"}


def _dataflow_edges(root: AstNode, lang: Language) -> Counter:
    """Name-abstracted def-use edges.

    Defs: assignment targets, loop targets, parameters, declarators.
    Uses: remaining identifier leaves except member/callee names after a
    dot. Names never defined get a pseudo def-site in first-use order.
    Each use contributes an edge (def ordinal, k-th use of that def).
    """
    defs: dict[str, int] = {}
    def_counter = [0]
    use_counts: dict[int, int] = {}
    edges: Counter = Counter()

    def define(name: str) -> None:
        defs[name] = def_counter[0]
        def_counter[0] += 1

    def use(name: str) -> None:
        if name not in defs:
            define(name)
        ordinal = defs[name]
        use_counts[ordinal] = use_counts.get(ordinal, 0) + 1
        edges[(ordinal, use_counts[ordinal])] += 1

    def ident_leaves(node: AstNode):
        for sub in node.walk():
            if sub.kind == "identifier":
                yield sub

    def visit(node: AstNode) -> None:
        if lang is Language.PYTHON:
            if node.kind in _PY_DEF_PARENTS and len(node.children) >= 3:
                target = node.children[0]
                rest = node.children[1:]
                for child in rest:
                    visit(child)
                for leaf in ident_leaves(target):
                    define(leaf.leaf_text or "")
                return
            if node.kind == "for_statement":
                # children: "for" target "in" iter ":" block ...
                seen_for = False
                target = None
                for child in node.children:
                    if child.kind == "for":
                        seen_for = True
                        continue
                    if seen_for and target is None and child.kind != "in":
                        target = child
                        continue
                    visit(child)
                if target is not None:
                    for leaf in ident_leaves(target):
                        define(leaf.leaf_text or "")
                return
            if node.kind in ("parameters", "lambda_parameters"):
                for leaf in ident_leaves(node):
                    define(leaf.leaf_text or "")
                return
            if node.kind == "attribute" and len(node.children) == 3:
                visit(node.children[0])  # member name is not a variable
                return
            if node.kind == "function_definition":
                for child in node.children:
                    if child.kind == "identifier":
                        continue  # function name is not a dataflow variable
                    visit(child)
                return
        else:
            if node.kind == "variable_declarator" and node.children:
                name_node = node.children[0]
                for child in node.children[1:]:
                    visit(child)
                if name_node.kind == "identifier":
                    define(name_node.leaf_text or "")
                return
            if node.kind == "formal_parameter":
                for leaf in ident_leaves(node):
                    define(leaf.leaf_text or "")
                return
            if node.kind == "assignment_expression" and len(node.children) >= 3:
                target, rest = node.children[0], node.children[1:]
                for child in rest:
                    visit(child)
                for leaf in ident_leaves(target):
                    define(leaf.leaf_text or "")
                return
            if node.kind == "enhanced_for_statement":
                loop_var_done = False
                for child in node.children:
                    if not loop_var_done and child.kind == "identifier":
                        define(child.leaf_text or "")
                        loop_var_done = True
                        continue
                    visit(child)
                return
            if node.kind in ("field_access", "method_invocation") and len(node.children) >= 3:
                visit(node.children[0])  # receiver only
                for child in node.children[3:]:
                    visit(child)
                return
            if node.kind == "method_declaration":
                for child in node.children:
                    if child.kind == "identifier":
                        continue
                    visit(child)
                return
        if node.is_leaf:
            if node.kind == "identifier":
                use(node.leaf_text or "")
            return
        for child in node.children:
            visit(child)

    visit(root)
    return edges


def _overlap(hyp: Counter, ref: Counter) -> float:
    total = sum(hyp.values())
    if total == 0:
        return 1.0 if sum(ref.values()) == 0 else 0.0
    matched = sum(min(c, ref.get(k, 0)) for k, c in hyp.items())
    return matched / total


def _parse_ok(text: str, lang: Language) -> AstNode | None:
    try:
        root = parse_source(SourceUnit(lang, text))
    except Exception:
        return None
    # "failed to parse" = nothing but error structure was recovered
    named = [n for n in root.walk() if not n.is_leaf and n.kind != "ERROR" and n is not root]
    if not named:
        return None
    return root


def codebleu(
    candidate: str,
    reference: str,
    lang: Language | str = Language.JAVA,
    weights: tuple[float, float, float, float] = DEFAULT_WEIGHTS,
) -> CodeBleuReport:
    """Score a candidate against a reference in the given language."""
    lang = lang if isinstance(lang, Language) else Language.parse(str(lang))
    if not candidate.strip() or not reference.strip():
        raise EmptyInput("candidate and reference must be non-empty")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {weights}")

    hyp_tokens = tokenize_code(candidate, lang)
    ref_tokens = tokenize_code(reference, lang)
    keywords = _keywords(lang)

    bleu = _geo_mean_precision(hyp_tokens, ref_tokens, lambda g: 1.0)
    weighted = _geo_mean_precision(
        hyp_tokens, ref_tokens, lambda g: KEYWORD_WEIGHT if g[0] in keywords else 1.0
    )

    warnings: list[str] = []
    hyp_root = _parse_ok(candidate, lang)
    ref_root = _parse_ok(reference, lang)
    if hyp_root is None or ref_root is None:
        side = "candidate" if hyp_root is None else "reference"
        warnings.append(f"{side} failed to parse; ast/dataflow components set to 0")
        ast_match = 0.0
        dataflow = 0.0
    else:
        ast_match = _overlap(_subtree_strings(hyp_root), _subtree_strings(ref_root))
        dataflow = _overlap(
            _dataflow_edges(hyp_root, lang), _dataflow_edges(ref_root, lang)
        )

    total = (
        weights[0] * bleu
        + weights[1] * weighted
        + weights[2] * ast_match
        + weights[3] * dataflow
    )
    return CodeBleuReport(
        bleu=bleu,
        weighted_ngram=weighted,
        ast_match=ast_match,
        dataflow_match=dataflow,
        weights=tuple(weights),
        total=total,
        warnings=warnings,
    )
