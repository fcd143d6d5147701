"""Run manifests: hash-stamped provenance for every CLI invocation."""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path
from typing import Any

from sirforge import __version__


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()[:16]


def build_manifest(
    command: str,
    config: dict[str, Any],
    inputs: list[str | Path],
    seed: int | None = None,
    ruleset_hash: str = "",
    model_hash: str = "",
) -> dict[str, Any]:
    return {
        "command": command,
        "config": config,
        "input_hashes": {str(p): sha256_file(p) for p in inputs if Path(p).exists()},
        "ruleset_hash": ruleset_hash,
        "model_hash": model_hash,
        "seed": seed,
        "tool_version": __version__,
        "timestamp_unix": round(time.time(), 3),
    }


def write_manifest(out_path: str | Path, manifest: dict[str, Any]) -> Path:
    """Write next to the output file as <out>.manifest.json."""
    target = Path(str(out_path) + ".manifest.json")
    target.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target
