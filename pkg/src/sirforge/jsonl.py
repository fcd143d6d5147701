"""JSONL I/O shared by all pipeline stages."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator

from sirforge.errors import SchemaError


def read_jsonl(path: str | Path) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (lineno, record) pairs; malformed lines raise with the line number."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON: {exc.msg}", lineno) from None
            if not isinstance(record, dict):
                raise SchemaError("record is not a JSON object", lineno)
            yield lineno, record


def write_jsonl(path: str | Path, records: Iterable[dict[str, Any]]) -> int:
    """Write records one per line; returns the record count."""
    count = 0
    path = Path(path)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            count += 1
    return count


def require_fields(record: dict[str, Any], fields: Iterable[str], lineno: int) -> None:
    for name in fields:
        if name not in record:
            raise SchemaError(f"missing field {name!r}", lineno)
        if not isinstance(record[name], str) or not record[name].strip():
            raise SchemaError(f"field {name!r} must be a non-empty string", lineno)
