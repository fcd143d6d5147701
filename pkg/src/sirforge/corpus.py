"""Corpus construction: ingestion, dedup, leakage filtering, segmentation.

Input records are {id, python, java} JSONL. The build path is
ingest -> dedup -> seeded 80/20 split per dataset -> AST-cosine leakage
filter -> statement segmentation along SIR node boundaries, emitting one
corpus record per surviving pair plus a skip report for the rest.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

from sirforge.errors import NoStatements, SchemaError
from sirforge.jsonl import read_jsonl, require_fields
from sirforge.sir import (
    AstNode,
    Language,
    NodeRuleTable,
    SirTree,
    SourceUnit,
    build_sir,
    linearize,
    parse_source,
)


class Dataset(str, Enum):
    AVATAR = "AVATAR"
    CODETRANSOCEAN = "CodeTransOcean"
    GTRANSEVAL = "GTransEval"
    XLCOST = "XLCoST"
    OTHER = "Other"

    @classmethod
    def parse(cls, name: str) -> "Dataset":
        for member in cls:
            if member.value.lower() == name.strip().lower():
                return member
        return cls.OTHER


class Split(str, Enum):
    TRAIN = "train"
    VALID = "valid"


class Side(str, Enum):
    SOURCE = "source"
    TARGET = "target"


@dataclass
class FunctionPair:
    pair_id: str
    source: SourceUnit
    target: SourceUnit
    dataset: Dataset = Dataset.OTHER
    split: Split | None = None


@dataclass
class StatementSnippet:
    text: str
    index: int
    span: tuple[int, int]
    side: Side


@dataclass
class StatementPair:
    source_snippet: StatementSnippet
    sir_node_text: str
    target_snippet: StatementSnippet
    confidence: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of range: {self.confidence}")
        if not self.sir_node_text:
            raise ValueError("empty sir_node_text")


# ---------------------------------------------------------------------------
# AST signatures (bag of node kinds) for the leakage filter
# ---------------------------------------------------------------------------


@dataclass
class AstSignature:
    vector: dict[str, int]
    norm: float

    @classmethod
    def from_ast(cls, root: AstNode) -> "AstSignature":
        counts: dict[str, int] = {}
        for node in root.walk():
            counts[node.kind] = counts.get(node.kind, 0) + 1
        norm = math.sqrt(sum(c * c for c in counts.values()))
        return cls(vector=counts, norm=norm)

    def cosine(self, other: "AstSignature") -> float:
        if self.norm == 0.0 or other.norm == 0.0:
            return 0.0
        small, large = self.vector, other.vector
        if len(small) > len(large):
            small, large = large, small
        dot = sum(c * large.get(k, 0) for k, c in small.items())
        return dot / (self.norm * other.norm)


# ---------------------------------------------------------------------------
# ingestion, dedup, split, leakage
# ---------------------------------------------------------------------------


def ingest(
    path: str | Path, dataset: Dataset | str = Dataset.OTHER
) -> tuple[list[FunctionPair], list[dict[str, Any]]]:
    """Load {id, python, java} JSONL into pairs; drop and count bad records.

    Records whose either side fails to parse or parses with ERROR nodes are
    excluded and reported as {id, reason} entries.
    """
    dataset = dataset if isinstance(dataset, Dataset) else Dataset.parse(str(dataset))
    pairs: list[FunctionPair] = []
    skips: list[dict[str, Any]] = []
    for lineno, record in read_jsonl(path):
        if "id" not in record:
            raise SchemaError("missing field 'id'", lineno)
        require_fields(record, ("python", "java"), lineno)
        pair_id = str(record["id"])
        try:
            source = SourceUnit(Language.PYTHON, record["python"], f"{dataset.value}:{pair_id}")
            target = SourceUnit(Language.JAVA, record["java"], f"{dataset.value}:{pair_id}")
        except Exception as exc:
            skips.append({"id": pair_id, "reason": f"bad source unit: {exc}"})
            continue
        reason = None
        for side_name, unit in (("python", source), ("java", target)):
            try:
                tree = parse_source(unit)
            except Exception as exc:
                reason = f"{side_name} parse failed: {exc}"
                break
            if tree.has_error():
                reason = f"{side_name} AST contains ERROR nodes"
                break
        if reason is not None:
            skips.append({"id": pair_id, "reason": reason})
            continue
        pairs.append(FunctionPair(pair_id, source, target, dataset))
    return pairs, skips


def dedup(pairs: list[FunctionPair]) -> list[FunctionPair]:
    """Collapse exact (source text, target text) duplicates, keeping first."""
    seen: set[tuple[str, str]] = set()
    out: list[FunctionPair] = []
    for pair in pairs:
        key = (pair.source.text, pair.target.text)
        if key in seen:
            continue
        seen.add(key)
        out.append(pair)
    return out


def split_pairs(
    pairs: list[FunctionPair], valid_frac: float = 0.2, seed: int = 0
) -> list[FunctionPair]:
    """Seeded per-dataset shuffle assigning train/valid tags."""
    out: list[FunctionPair] = []
    by_dataset: dict[Dataset, list[FunctionPair]] = {}
    for pair in pairs:
        by_dataset.setdefault(pair.dataset, []).append(pair)
    for dataset in sorted(by_dataset, key=lambda d: d.value):
        bucket = by_dataset[dataset]
        order = list(range(len(bucket)))
        random.Random(f"{seed}:{dataset.value}").shuffle(order)
        n_valid = int(round(len(bucket) * valid_frac))
        valid_idx = set(order[:n_valid])
        for idx, pair in enumerate(bucket):
            out.append(replace(pair, split=Split.VALID if idx in valid_idx else Split.TRAIN))
    return out


def source_signature(pair: FunctionPair, side: Side = Side.SOURCE) -> AstSignature:
    unit = pair.source if side is Side.SOURCE else pair.target
    return AstSignature.from_ast(parse_source(unit))


def leakage_filter(
    train: list[FunctionPair],
    valid: list[FunctionPair],
    threshold: float = 0.9,
    side: Side = Side.SOURCE,
) -> list[FunctionPair]:
    """Drop train pairs whose AST cosine to any valid pair exceeds threshold."""
    if not valid or not train:
        return list(train)
    valid_sigs = [source_signature(pair, side) for pair in valid]
    kept: list[FunctionPair] = []
    for pair in train:
        sig = source_signature(pair, side)
        if any(sig.cosine(v) > threshold for v in valid_sigs):
            continue
        kept.append(pair)
    return kept


# ---------------------------------------------------------------------------
# segmentation
# ---------------------------------------------------------------------------

_SOURCE_FUNCTION_KINDS = ("FunctionDeclaration", "function_definition")
_SOURCE_BODY_KINDS = ("CompoundStatement", "block")
_TARGET_FUNCTION_KINDS = ("method_declaration", "constructor_declaration")


def sir_statement_nodes(sir: SirTree) -> list[tuple[int, Any, tuple[int, int]]]:
    """Statement-boundary SIR nodes: direct children of the function body.

    Returns (node_id, node, source_span) triples in source order. Falls back
    to top-level statements when the unit is a bare statement sequence.
    """
    nodes = list(sir.iter_nodes())
    by_identity = {id(node): node_id for node_id, node in nodes}

    body = None
    for _, node in nodes:
        if node.kind in _SOURCE_FUNCTION_KINDS:
            for child in node.children:
                if child.kind in _SOURCE_BODY_KINDS:
                    body = child
                    break
            if body is not None:
                break
    if body is None:
        body = sir.root

    out = []
    for child in body.children:
        if child.is_leaf and child.leaf_text is not None:
            continue
        node_id = by_identity[id(child)]
        out.append((node_id, child, sir.node_span(node_id)))
    if not out:
        raise NoStatements("function body has no statements")
    return out


def segment_source(unit: SourceUnit, sir: SirTree) -> list[StatementSnippet]:
    """One snippet per SIR statement node, in source order."""
    data = unit.data
    snippets = []
    for index, (_, _, span) in enumerate(sir_statement_nodes(sir)):
        text = data[span[0] : span[1]].decode("utf-8", errors="replace")
        snippets.append(StatementSnippet(text=text, index=index, span=span, side=Side.SOURCE))
    _check_disjoint(snippets)
    return snippets


def segment_target(unit: SourceUnit, ast: AstNode) -> list[StatementSnippet]:
    """Target-side statement boundaries from the raw AST."""
    body = None
    for node in ast.walk():
        if node.kind in _TARGET_FUNCTION_KINDS:
            for child in node.children:
                if child.kind == "block":
                    body = child
                    break
            if body is not None:
                break
    if body is None:
        body = ast

    data = unit.data
    snippets = []
    index = 0
    for child in body.children:
        if child.is_leaf and child.leaf_text is not None:
            continue
        text = data[child.span[0] : child.span[1]].decode("utf-8", errors="replace")
        snippets.append(StatementSnippet(text=text, index=index, span=child.span, side=Side.TARGET))
        index += 1
    if not snippets:
        raise NoStatements("method body has no statements")
    _check_disjoint(snippets)
    return snippets


def _check_disjoint(snippets: list[StatementSnippet]) -> None:
    prev_end = -1
    for snip in snippets:
        if snip.span[0] < prev_end:
            raise NoStatements(f"overlapping snippet spans at index {snip.index}")
        prev_end = snip.span[1]


# ---------------------------------------------------------------------------
# full corpus build
# ---------------------------------------------------------------------------


@dataclass
class CorpusBuild:
    records: list[dict[str, Any]] = field(default_factory=list)
    skips: list[dict[str, Any]] = field(default_factory=list)
    stats: dict[str, int] = field(default_factory=dict)


def build_corpus(
    inputs: Iterable[tuple[str | Path, Dataset | str]],
    rule_table: NodeRuleTable,
    valid_frac: float = 0.2,
    leakage_threshold: float = 0.9,
    seed: int = 0,
    apply_leakage: bool = True,
) -> CorpusBuild:
    """Run the full corpus pipeline over one or more input files."""
    build = CorpusBuild()
    pairs: list[FunctionPair] = []
    for path, dataset in inputs:
        loaded, skips = ingest(path, dataset)
        pairs.extend(loaded)
        build.skips.extend(skips)
    before = len(pairs)
    pairs = dedup(pairs)
    build.stats["ingested"] = before
    build.stats["after_dedup"] = len(pairs)
    pairs = split_pairs(pairs, valid_frac=valid_frac, seed=seed)
    train = [p for p in pairs if p.split is Split.TRAIN]
    valid = [p for p in pairs if p.split is Split.VALID]
    if apply_leakage:
        train = leakage_filter(train, valid, threshold=leakage_threshold)
    build.stats["train"] = len(train)
    build.stats["valid"] = len(valid)

    for pair in [*train, *valid]:
        try:
            record = segment_pair(pair, rule_table)
        except NoStatements as exc:
            build.skips.append({"id": pair.pair_id, "reason": str(exc)})
            continue
        build.records.append(record)
    build.stats["segmented"] = len(build.records)
    build.stats["skipped"] = len(build.skips)
    return build


def segment_pair(pair: FunctionPair, rule_table: NodeRuleTable) -> dict[str, Any]:
    """Segment both sides of one pair into a corpus record."""
    source_ast = parse_source(pair.source)
    sir = build_sir(source_ast, rule_table)
    source_snips = segment_source(pair.source, sir)
    target_ast = parse_source(pair.target)
    target_snips = segment_target(pair.target, target_ast)
    segments = [
        {"side": s.side.value, "index": s.index, "start": s.span[0], "end": s.span[1]}
        for s in [*source_snips, *target_snips]
    ]
    return {
        "id": pair.pair_id,
        "dataset": pair.dataset.value,
        "split": pair.split.value if pair.split else None,
        "python": pair.source.text,
        "java": pair.target.text,
        "python_sir": sir.linearized,
        "segments": segments,
    }


def statement_sir_texts(pair_python: str, rule_table: NodeRuleTable) -> list[str]:
    """Linearized SIR text of each statement node of a python function."""
    unit = SourceUnit(Language.PYTHON, pair_python)
    sir = build_sir(parse_source(unit), rule_table)
    return [linearize(node) for _, node, _ in sir_statement_nodes(sir)]
