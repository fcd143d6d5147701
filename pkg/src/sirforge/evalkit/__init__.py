"""Translation evaluation: harness, confusion detection, CodeBLEU."""

from sirforge.evalkit.codebleu import CodeBleuReport, codebleu
from sirforge.evalkit.confusion import (
    ConfusionConfig,
    ConfusionReason,
    ConfusionVerdict,
    detect_confusion,
)
from sirforge.evalkit.harness import (
    EvalConfig,
    TranslationResult,
    Verdict,
    parse_eval_config,
    run_harness,
    run_many,
)
from sirforge.evalkit.report import summarize, render_table

__all__ = [
    "codebleu",
    "CodeBleuReport",
    "ConfusionReason",
    "ConfusionVerdict",
    "ConfusionConfig",
    "detect_confusion",
    "EvalConfig",
    "Verdict",
    "TranslationResult",
    "run_harness",
    "run_many",
    "parse_eval_config",
    "summarize",
    "render_table",
]
