"""Aggregate evaluation results into a report.

Success rate is Pass/total. Confusion is reported against two
denominators: all results, and only the CompileError/TestFailure subset
(the paths where the detector runs). Percentages round to 2 decimals.
"""

from __future__ import annotations

from typing import Iterable

from sirforge.errors import EmptyInput
from sirforge.evalkit.harness import TranslationResult, Verdict


def summarize(results: Iterable[TranslationResult]) -> dict:
    results = list(results)
    if not results:
        raise EmptyInput("no results to summarize")
    total = len(results)
    verdicts = {v.value: 0 for v in Verdict}
    confused = 0
    failure_paths = 0
    for res in results:
        verdicts[res.verdict.value] += 1
        if res.verdict in (Verdict.COMPILE_ERROR, Verdict.TEST_FAILURE):
            failure_paths += 1
        if res.confusion is not None and res.confusion.flagged:
            confused += 1
    passed = verdicts[Verdict.PASS.value]
    return {
        "total": total,
        "passed": passed,
        "success_rate_pct": round(100.0 * passed / total, 2),
        "confusion_count": confused,
        "confusion_rate_all_pct": round(100.0 * confused / total, 2),
        "confusion_rate_failures_pct": (
            round(100.0 * confused / failure_paths, 2) if failure_paths else 0.0
        ),
        "verdicts": verdicts,
    }


def render_table(report: dict) -> str:
    lines = [
        f"{'metric':<28} value",
        f"{'-' * 28} {'-' * 8}",
        f"{'total':<28} {report['total']}",
        f"{'passed':<28} {report['passed']}",
        f"{'success rate %':<28} {report['success_rate_pct']:.2f}",
        f"{'confusion count':<28} {report['confusion_count']}",
        f"{'confusion % (all)':<28} {report['confusion_rate_all_pct']:.2f}",
        f"{'confusion % (failures)':<28} {report['confusion_rate_failures_pct']:.2f}",
    ]
    for verdict, count in report["verdicts"].items():
        lines.append(f"{('  ' + verdict):<28} {count}")
    return "\n".join(lines)
