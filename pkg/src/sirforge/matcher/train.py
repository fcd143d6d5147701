"""Training loop for the match model: Adam, linear warmup, metrics log.

Deterministic under a fixed seed in single-worker mode: batch order comes
from a seeded shuffle and every numeric op is single-threaded numpy/numba.
A non-finite loss aborts with a diagnostic snapshot on disk.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sirforge import kernels
from sirforge.errors import NonFiniteLoss
from sirforge.matcher.model import (
    AlignmentBatch,
    MatchModel,
    TAU_CAP,
    batch_gammas,
    loss_and_embedding_grads,
)


@dataclass
class TrainConfig:
    epochs: int = 10
    lr: float = 1e-4
    warmup_frac: float = 0.03
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    log_path: str | None = None
    snapshot_dir: str | None = None
    keep_best: bool = False  # restore the best-val_top1 epoch at the end


@dataclass
class TrainResult:
    model: MatchModel
    metrics: list[dict] = field(default_factory=list)


def _lr_at(step: int, total: int, cfg: TrainConfig) -> float:
    warmup = max(1, int(round(cfg.warmup_frac * total)))
    if step < warmup:
        return cfg.lr * (step + 1) / warmup
    return cfg.lr


class _Adam:
    def __init__(self, cfg: TrainConfig):
        self.cfg = cfg
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float) -> None:
        cfg = self.cfg
        self.t += 1
        b1c = 1.0 - cfg.beta1**self.t
        b2c = 1.0 - cfg.beta2**self.t
        for name, g in grads.items():
            if name not in self.m:
                self.m[name] = np.zeros_like(g, dtype=np.float64)
                self.v[name] = np.zeros_like(g, dtype=np.float64)
            m = self.m[name]
            v = self.v[name]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * np.square(g, dtype=np.float64)
            update = lr * (m / b1c) / (np.sqrt(v / b2c) + cfg.adam_eps)
            params[name] -= update.astype(params[name].dtype)


def batch_loss_and_grads(
    model: MatchModel, batch: AlignmentBatch
) -> tuple[float, dict[str, np.ndarray], float]:
    """Full loss + parameter gradients (+ tau gradient) for one batch."""
    ids_p, mask_p = model.prepare_batch(batch.sir_texts)
    ids_x, mask_x = model.prepare_batch(batch.snippet_texts)
    p_out, p_cache = model.encoder.forward(model.params, ids_p, mask_p, want_cache=True)
    x_out, x_cache = model.encoder.forward(model.params, ids_x, mask_x, want_cache=True)
    loss, dp, dx, dtau = loss_and_embedding_grads(model, p_out, x_out, batch)
    grads_p = model.encoder.backward(model.params, p_cache, dp)
    grads_x = model.encoder.backward(model.params, x_cache, dx)
    grads = {name: grads_p[name] + grads_x[name] for name in grads_p}
    return loss, grads, dtau


def retrieval_top1(model: MatchModel, batch: AlignmentBatch) -> float:
    """Direct-alignment retrieval: fraction of nodes whose nearest snippet
    encoding (independent head) is their own pair."""
    p = model.encode(batch.sir_texts).data
    x = model.encode(batch.snippet_texts).data
    preds = (p @ x.T).argmax(axis=1)
    return float((preds == np.arange(len(preds))).mean())


def mechanism_mean_top1(model: MatchModel, batch: AlignmentBatch, tau_norm: float = 0.1) -> float:
    """Top-1 under the mean of the three softmax-normalized mechanism scores
    (the selection rule the augmentation stage uses)."""
    p = model.encode(batch.sir_texts).data
    x = model.encode(batch.snippet_texts).data
    gammas = batch_gammas(model, p, x, batch)
    mean_scores = np.zeros_like(gammas[0], dtype=np.float64)
    for gamma in gammas:
        mean_scores += kernels.softmax_rows(
            np.ascontiguousarray(gamma.astype(np.float64) / tau_norm)
        )
    preds = mean_scores.argmax(axis=1)
    return float((preds == np.arange(len(preds))).mean())


def train(
    model: MatchModel,
    batches: list[AlignmentBatch],
    config: TrainConfig | None = None,
    val_batches: list[AlignmentBatch] | None = None,
) -> TrainResult:
    """Minimize the contrastive loss over encoder parameters and tau."""
    cfg = config or TrainConfig()
    result = TrainResult(model=model)
    if cfg.epochs <= 0 or not batches:
        return result
    rng = np.random.default_rng(cfg.seed)
    adam = _Adam(cfg)
    total_steps = cfg.epochs * len(batches)
    step = 0
    best_top1 = -1.0
    best_state: tuple[dict[str, np.ndarray], float] | None = None
    log_fh = open(cfg.log_path, "w", encoding="utf-8") if cfg.log_path else None
    try:
        for epoch in range(cfg.epochs):
            order = rng.permutation(len(batches))
            epoch_loss = 0.0
            t0 = time.monotonic()
            for bi in order:
                batch = batches[int(bi)]
                loss, grads, dtau = batch_loss_and_grads(model, batch)
                if not np.isfinite(loss):
                    snap = _write_snapshot(model, batch, cfg)
                    raise NonFiniteLoss(
                        f"loss became {loss} at step {step}", snapshot_path=snap
                    )
                lr = _lr_at(step, total_steps, cfg)
                adam.step(model.params, grads, lr)
                model.tau_match = min(model.tau_match - lr * dtau, TAU_CAP)
                epoch_loss += loss
                step += 1
            entry = {
                "epoch": epoch,
                "step": step,
                "loss": epoch_loss / len(batches),
                "val_top1": None,
                "seconds": round(time.monotonic() - t0, 3),
            }
            if val_batches:
                accs = [retrieval_top1(model, b) for b in val_batches]
                entry["val_top1"] = float(np.mean(accs))
                if cfg.keep_best and entry["val_top1"] > best_top1:
                    best_top1 = entry["val_top1"]
                    best_state = (model.clone_params(), model.tau_match)
            result.metrics.append(entry)
            if log_fh is not None:
                log_fh.write(json.dumps(entry) + "\n")
                log_fh.flush()
    finally:
        if log_fh is not None:
            log_fh.close()
    if cfg.keep_best and best_state is not None:
        model.params, model.tau_match = best_state
        result.metrics.append({"restored_val_top1": best_top1})
    return result


def _write_snapshot(model: MatchModel, batch: AlignmentBatch, cfg: TrainConfig) -> str:
    directory = cfg.snapshot_dir or os.environ.get("SIRFORGE_CACHE") or tempfile.gettempdir()
    Path(directory).mkdir(parents=True, exist_ok=True)
    path = str(Path(directory) / "sirforge_nonfinite_snapshot.npz")
    np.savez(
        path,
        tau=model.tau_match,
        sir_texts=np.asarray(batch.sir_texts, dtype=object),
        snippet_texts=np.asarray(batch.snippet_texts, dtype=object),
        **model.params,
    )
    return path
