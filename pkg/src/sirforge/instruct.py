"""Instruction-record rendering and train/valid splitting.

Stage 1 (syntax-aware) pairs a statement's SIR node text with its aligned
target snippet; stage 2 (code generation) pairs a full function SIR with
the full target function. Templates are plain text files with
{PLACEHOLDER} fields; substitution is literal, code content is never
escaped.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

from sirforge.errors import MissingField, SchemaError, TooFewRecords


class Stage(str, Enum):
    SYNTAX_AWARE = "syntax_aware"
    CODE_GEN = "code_generation"


ALLOWED_PLACEHOLDERS = frozenset({"SIR", "SOURCE_LANG", "TARGET_LANG", "TARGET_CODE"})
DEFAULT_VALID_SIZES = {Stage.SYNTAX_AWARE: 10_000, Stage.CODE_GEN: 1_000}

_PLACEHOLDER_RE = re.compile(r"\{([A-Z_]+)\}")


@dataclass(frozen=True)
class InstructionTemplate:
    stage: Stage
    text: str

    def __post_init__(self) -> None:
        unknown = set(_PLACEHOLDER_RE.findall(self.text)) - ALLOWED_PLACEHOLDERS
        if unknown:
            raise SchemaError(f"unknown placeholders {sorted(unknown)} in template")
        if "{SIR}" not in self.text:
            raise SchemaError("template must reference {SIR}")

    def placeholders(self) -> set[str]:
        return set(_PLACEHOLDER_RE.findall(self.text))


@dataclass
class InstructionRecord:
    stage: Stage
    instruction: str
    response: str
    origin: str

    def __post_init__(self) -> None:
        if not self.response:
            raise MissingField("record response is empty")
        leftover = set(_PLACEHOLDER_RE.findall(self.instruction)) & ALLOWED_PLACEHOLDERS
        if leftover:
            raise MissingField(f"unresolved placeholders {sorted(leftover)}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "stage": self.stage.value,
            "instruction": self.instruction,
            "response": self.response,
            "origin": self.origin,
        }


def load_template(path: str | Path, stage: Stage) -> InstructionTemplate:
    return InstructionTemplate(stage=stage, text=Path(path).read_text(encoding="utf-8"))


def default_template(stage: Stage) -> InstructionTemplate:
    name = (
        "stage1_syntax_aware.txt" if stage is Stage.SYNTAX_AWARE else "stage2_code_generation.txt"
    )
    text = resources.files("sirforge.templates").joinpath(name).read_text(encoding="utf-8")
    return InstructionTemplate(stage=stage, text=text)


def render(
    template: InstructionTemplate,
    sir_text: str,
    target_code: str,
    origin: str = "",
    source_lang: str = "Python",
    target_lang: str = "Java",
) -> InstructionRecord:
    """Literal placeholder substitution; the response is the target code."""
    if not sir_text:
        raise MissingField("sir_text is empty")
    if not target_code:
        raise MissingField("target_code is empty")
    values = {
        "SIR": sir_text,
        "SOURCE_LANG": source_lang,
        "TARGET_LANG": target_lang,
        "TARGET_CODE": target_code,
    }

    def sub(match: re.Match) -> str:
        return values[match.group(1)]

    instruction = _PLACEHOLDER_RE.sub(sub, template.text)
    return InstructionRecord(
        stage=template.stage,
        instruction=instruction,
        response=target_code,
        origin=origin,
    )


def render_stage1(
    template: InstructionTemplate,
    pair_record: dict[str, Any],
    function_sir: str | None = None,
    include_function_context: bool = True,
) -> InstructionRecord:
    """Render a fine-grained pair record (augment output schema)."""
    for key in ("sir_node", "target_snippet", "function_id"):
        if key not in pair_record:
            raise MissingField(f"pair record lacks {key!r}")
    sir_text = pair_record["sir_node"]
    if include_function_context and function_sir:
        sir_text = f"{sir_text}\nEnclosing function:\n{function_sir}"
    return render(
        template,
        sir_text=sir_text,
        target_code=pair_record["target_snippet"],
        origin=str(pair_record["function_id"]),
    )


def render_stage2(template: InstructionTemplate, corpus_record: dict[str, Any]) -> InstructionRecord:
    """Render a segmented corpus record (full SIR -> full target function)."""
    for key in ("python_sir", "java", "id"):
        if key not in corpus_record:
            raise MissingField(f"corpus record lacks {key!r}")
    return render(
        template,
        sir_text=corpus_record["python_sir"],
        target_code=corpus_record["java"],
        origin=str(corpus_record["id"]),
    )


def split(
    records: Sequence[Any],
    stage: Stage,
    valid_size: int | None = None,
    seed: int = 0,
) -> tuple[list[Any], list[Any]]:
    """Seeded uniform sample into (train, valid); sizes follow the stage."""
    if valid_size is None:
        valid_size = DEFAULT_VALID_SIZES[stage]
    if len(records) <= valid_size:
        raise TooFewRecords(
            f"need more than {valid_size} records to split, got {len(records)}"
        )
    order = list(range(len(records)))
    random.Random(f"{seed}:{stage.value}").shuffle(order)
    valid_idx = set(order[:valid_size])
    train = [rec for i, rec in enumerate(records) if i not in valid_idx]
    valid = [rec for i, rec in enumerate(records) if i in valid_idx]
    return train, valid


def emit(records: Iterable[InstructionRecord]) -> list[dict[str, Any]]:
    return [rec.to_dict() for rec in records]
