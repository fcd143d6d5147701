"""Compile/run harness for candidate translations.

Commands are user-supplied templates with {FILE} and {DIR} placeholders;
each evaluation runs in its own fresh temp workspace with a wall-clock
timeout. There is no sandboxing beyond workspace isolation and timeouts:
the harness runs whatever commands the config names.

Verdict classification: compile exit != 0 -> CompileError; run exit 0 ->
Pass; run exit 1 -> TestFailure (the assertion-failure convention of
test runners); any other exit or a signal -> RuntimeError; wall-clock
overrun -> Timeout.
"""

from __future__ import annotations

import shlex
import shutil
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

from sirforge.errors import ConfigError
from sirforge.evalkit.confusion import ConfusionConfig, ConfusionVerdict, detect_confusion
from sirforge.sir.tree import Language, SourceUnit


class Verdict(str, Enum):
    PASS = "Pass"
    COMPILE_ERROR = "CompileError"
    RUNTIME_ERROR = "RuntimeError"
    TEST_FAILURE = "TestFailure"
    TIMEOUT = "Timeout"


@dataclass
class EvalConfig:
    compile_cmd: str = ""
    run_cmd: str = ""
    timeout_s: float = 30.0
    jobs: int = 1
    candidate_file: str = "candidate.txt"
    tests_file: str = "tests.txt"
    keep_workdir: bool = False

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise ConfigError(f"timeout_s must be > 0, got {self.timeout_s}")
        if not self.run_cmd:
            raise ConfigError("run_cmd is required")
        for name, cmd in (("compile_cmd", self.compile_cmd), ("run_cmd", self.run_cmd)):
            if cmd and "{FILE}" not in cmd and "{DIR}" not in cmd:
                raise ConfigError(f"{name} must reference {{FILE}} or {{DIR}}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")


@dataclass
class TranslationResult:
    verdict: Verdict
    logs: str = ""
    confusion: ConfusionVerdict | None = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "logs": self.logs,
            "confusion": self.confusion.to_dict() if self.confusion else None,
        }


def parse_eval_config(path: str | Path) -> EvalConfig:
    """Key=value config file: compile_cmd, run_cmd, timeout_s, jobs, ..."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    kwargs: dict = {}
    for key in ("compile_cmd", "run_cmd", "candidate_file", "tests_file"):
        if key in values:
            kwargs[key] = values[key]
    if "timeout_s" in values:
        kwargs["timeout_s"] = float(values["timeout_s"])
    if "jobs" in values:
        kwargs["jobs"] = int(values["jobs"])
    unknown = set(values) - {
        "compile_cmd", "run_cmd", "timeout_s", "jobs", "candidate_file", "tests_file",
    }
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return EvalConfig(**kwargs)


def _render(cmd: str, workdir: Path, candidate_path: Path) -> list[str]:
    rendered = cmd.replace("{FILE}", str(candidate_path)).replace("{DIR}", str(workdir))
    return shlex.split(rendered)


def _run_step(argv: list[str], cwd: Path, timeout: float) -> tuple[int | None, str]:
    try:
        proc = subprocess.run(
            argv, cwd=cwd, capture_output=True, text=True, timeout=timeout
        )
    except subprocess.TimeoutExpired as exc:
        out = (exc.stdout or b"") if isinstance(exc.stdout, bytes) else (exc.stdout or "")
        if isinstance(out, bytes):
            out = out.decode("utf-8", "replace")
        return None, out
    except FileNotFoundError as exc:
        raise ConfigError(f"command not found: {argv[0]!r}") from None
    return proc.returncode, proc.stdout + proc.stderr


def run_harness(
    candidate: str,
    tests: str,
    cfg: EvalConfig,
    source: SourceUnit | None = None,
    target_lang: Language | str = Language.JAVA,
    confusion_config: ConfusionConfig | None = None,
) -> TranslationResult:
    """Evaluate one candidate in a fresh workspace; inputs are not mutated."""
    if not candidate.strip():
        raise ConfigError("empty candidate")
    workdir = Path(tempfile.mkdtemp(prefix="sirforge-eval-"))
    try:
        candidate_path = workdir / cfg.candidate_file
        candidate_path.write_text(candidate, encoding="utf-8")
        if tests:
            (workdir / cfg.tests_file).write_text(tests, encoding="utf-8")

        logs: list[str] = []
        verdict: Verdict | None = None
        if cfg.compile_cmd:
            rc, out = _run_step(_render(cfg.compile_cmd, workdir, candidate_path), workdir, cfg.timeout_s)
            logs.append(f"[compile] {out}".rstrip())
            if rc is None:
                verdict = Verdict.TIMEOUT
            elif rc != 0:
                verdict = Verdict.COMPILE_ERROR
        if verdict is None:
            rc, out = _run_step(_render(cfg.run_cmd, workdir, candidate_path), workdir, cfg.timeout_s)
            logs.append(f"[run] {out}".rstrip())
            if rc is None:
                verdict = Verdict.TIMEOUT
            elif rc == 0:
                verdict = Verdict.PASS
            elif rc == 1:
                verdict = Verdict.TEST_FAILURE
            else:
                verdict = Verdict.RUNTIME_ERROR

        confusion = None
        if source is not None and verdict in (Verdict.COMPILE_ERROR, Verdict.TEST_FAILURE):
            confusion = detect_confusion(candidate, source, target_lang, confusion_config)
        return TranslationResult(verdict=verdict, logs="\n".join(logs), confusion=confusion)
    finally:
        if not cfg.keep_workdir:
            shutil.rmtree(workdir, ignore_errors=True)


def run_many(
    items: Iterable[tuple[str, str, SourceUnit | None]],
    cfg: EvalConfig,
    target_lang: Language | str = Language.JAVA,
) -> list[TranslationResult]:
    """Evaluate (candidate, tests, source) triples in a bounded worker pool."""
    items = list(items)
    if cfg.jobs == 1:
        return [run_harness(c, t, cfg, s, target_lang) for c, t, s in items]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        futures = [pool.submit(run_harness, c, t, cfg, s, target_lang) for c, t, s in items]
        return [f.result() for f in futures]
