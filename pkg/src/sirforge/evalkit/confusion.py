"""Syntactic-confusion detector.

Flags a candidate translation when source-language artifacts surface in
it. Three independently toggleable rules:

  SourceKeywordLeak   source-exclusive keywords appear as identifiers of
                      the candidate (lexed under the target grammar, so
                      strings and comments never match);
  SourceGrammarParse  the candidate, or one of its lines, parses more
                      cleanly under the source grammar than the target
                      grammar;
  SourceContinuation  the line-level LCS between candidate and source
                      exceeds a ratio of the shorter side (the candidate
                      carries the source forward).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from sirforge.sir import javalex, pylex
from sirforge.sir.javaparse import parse_java
from sirforge.sir.pyparse import parse_python
from sirforge.sir.tree import Language, SourceUnit

PYTHON_EXCLUSIVE = frozenset(
    "def elif lambda None del global nonlocal raise except yield async await".split()
)
JAVA_EXCLUSIVE = frozenset(
    """public private protected static final void new null boolean extends
    implements interface synchronized instanceof throws""".split()
)


class ConfusionReason(str, Enum):
    SOURCE_KEYWORD_LEAK = "SourceKeywordLeak"
    SOURCE_GRAMMAR_PARSE = "SourceGrammarParse"
    SOURCE_CONTINUATION = "SourceContinuation"


@dataclass
class ConfusionConfig:
    keyword_rule: bool = True
    grammar_rule: bool = True
    continuation_rule: bool = True
    continuation_threshold: float = 0.5


@dataclass
class ConfusionVerdict:
    flagged: bool
    reasons: set[ConfusionReason] = field(default_factory=set)
    evidence: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "flagged": self.flagged,
            "reasons": sorted(r.value for r in self.reasons),
            "evidence": self.evidence,
        }


def _exclusive_keywords(source_lang: Language) -> frozenset[str]:
    return PYTHON_EXCLUSIVE if source_lang is Language.PYTHON else JAVA_EXCLUSIVE


def _name_tokens(text: str, lang: Language) -> list[tuple[str, int]]:
    if lang is Language.PYTHON:
        return [(t.text, t.start) for t in pylex.tokenize(text) if t.type == pylex.NAME]
    return [(t.text, t.start) for t in javalex.tokenize(text) if t.type == javalex.NAME]


def _error_count(text: str, lang: Language) -> int:
    try:
        root = parse_python(text) if lang is Language.PYTHON else parse_java(text)
    except Exception:
        return 1_000_000
    return root.error_count()


def _line_parses_clean(line: str, lang: Language) -> bool:
    probe = line
    if lang is Language.PYTHON and line.rstrip().endswith(":"):
        probe = line + "\n    pass"  # lone compound-statement header
    return _error_count(probe, lang) == 0


def _normalized_lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def detect_confusion(
    candidate: str,
    source: SourceUnit,
    target_lang: Language | str,
    config: ConfusionConfig | None = None,
) -> ConfusionVerdict:
    """Classify one candidate translation; deterministic and total."""
    cfg = config or ConfusionConfig()
    target_lang = (
        target_lang if isinstance(target_lang, Language) else Language.parse(str(target_lang))
    )
    verdict = ConfusionVerdict(flagged=False)
    if not candidate.strip():
        return verdict

    if cfg.keyword_rule:
        exclusive = _exclusive_keywords(source.language)
        for word, offset in _name_tokens(candidate, target_lang):
            if word in exclusive:
                verdict.reasons.add(ConfusionReason.SOURCE_KEYWORD_LEAK)
                verdict.evidence.append(
                    {"rule": "keyword", "token": word, "offset": offset}
                )

    if cfg.grammar_rule:
        src_errors = _error_count(candidate, source.language)
        tgt_errors = _error_count(candidate, target_lang)
        if src_errors < tgt_errors:
            verdict.reasons.add(ConfusionReason.SOURCE_GRAMMAR_PARSE)
            verdict.evidence.append(
                {
                    "rule": "grammar",
                    "scope": "candidate",
                    "source_errors": src_errors,
                    "target_errors": tgt_errors,
                }
            )
        for lineno, line in enumerate(candidate.splitlines(), start=1):
            stripped = line.strip()
            if len(stripped) < 4 or stripped in ("{", "}", "});", ");"):
                continue
            if _line_parses_clean(stripped, source.language) and not _line_parses_clean(
                stripped, target_lang
            ):
                verdict.reasons.add(ConfusionReason.SOURCE_GRAMMAR_PARSE)
                verdict.evidence.append({"rule": "grammar", "line": lineno, "text": stripped})

    if cfg.continuation_rule:
        cand_lines = _normalized_lines(candidate)
        src_lines = _normalized_lines(source.text)
        denom = min(len(cand_lines), len(src_lines))
        if denom > 0:
            ratio = _lcs_length(cand_lines, src_lines) / denom
            if ratio > cfg.continuation_threshold:
                verdict.reasons.add(ConfusionReason.SOURCE_CONTINUATION)
                verdict.evidence.append(
                    {"rule": "continuation", "lcs_ratio": round(ratio, 4)}
                )

    verdict.flagged = bool(verdict.reasons)
    return verdict
