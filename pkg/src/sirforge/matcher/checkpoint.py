"""Versioned checkpoint container for the match model.

A single .npz holding the parameter arrays plus a JSON metadata entry
(format version, encoder config, tokenizer merges, tau, lambda, training
metadata hash). Loads verify the format version and config shape before
touching arrays; truncated or foreign files raise.
"""

from __future__ import annotations

import hashlib
import json
import zipfile
from pathlib import Path

import numpy as np

from sirforge.errors import CheckpointError, VersionMismatch
from sirforge.matcher.encoder import EncoderConfig, init_params
from sirforge.matcher.model import MatchModel
from sirforge.matcher.tokenizer import TokenizerModel

FORMAT_VERSION = "sirforge-ckpt-1"


def save_model(model: MatchModel, path: str | Path, metadata: dict | None = None) -> str:
    """Write the model; returns the sha256 content hash of the file."""
    meta = {
        "format": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "tau_match": model.tau_match,
        "lam": model.lam.tolist(),
        "merges": [list(m) for m in model.tokenizer.merges],
        "metadata": metadata or {},
    }
    path = Path(path)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:  # keep the exact filename (no .npz suffixing)
        np.savez(
            fh,
            __meta__=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
            **model.params,
        )
    return file_hash(path)


def load_model(path: str | Path) -> MatchModel:
    path = Path(path)
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError, zipfile.BadZipFile) as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from None
    try:
        if "__meta__" not in archive:
            raise VersionMismatch(f"{path} is not a sirforge checkpoint")
        try:
            meta = json.loads(bytes(archive["__meta__"]).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"corrupt checkpoint metadata: {exc}") from None
        if meta.get("format") != FORMAT_VERSION:
            raise VersionMismatch(
                f"checkpoint format {meta.get('format')!r}, expected {FORMAT_VERSION!r}"
            )
        config = EncoderConfig(**meta["config"])
        tokenizer = TokenizerModel(merges=[tuple(m) for m in meta["merges"]])
        expected = init_params(config, tokenizer.vocab_size, seed=0)
        params: dict[str, np.ndarray] = {}
        for name, ref in expected.items():
            if name not in archive:
                raise VersionMismatch(f"checkpoint missing parameter {name!r}")
            arr = archive[name]
            if arr.shape != ref.shape:
                raise VersionMismatch(
                    f"parameter {name!r} shape {arr.shape} != config shape {ref.shape}"
                )
            params[name] = arr.astype(config.np_dtype)
        return MatchModel(
            config=config,
            tokenizer=tokenizer,
            params=params,
            tau_match=float(meta["tau_match"]),
            lam=meta["lam"],
        )
    finally:
        archive.close()


def file_hash(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()[:16]
