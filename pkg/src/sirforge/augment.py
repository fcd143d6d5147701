"""Statement-alignment mining: score SIR nodes against candidate snippets.

For every function the M node texts and N candidate snippets are encoded,
the three mechanism scores are softmax-normalized over candidates at
temperature tau_norm, and a node is paired with its best-mean candidate
only when that mean clears the threshold; everything else is discarded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from sirforge import kernels
from sirforge.errors import EmptyCandidates
from sirforge.matcher.model import MatchModel, neighborhood_mean

_MECHANISMS = 3


@dataclass
class CandidateSet:
    function_id: str
    sir_nodes: list[str]
    candidates: list[str]

    def __post_init__(self) -> None:
        if not self.sir_nodes:
            raise EmptyCandidates(f"{self.function_id}: no SIR nodes")
        if not self.candidates:
            raise EmptyCandidates(f"{self.function_id}: no candidate snippets")


@dataclass
class ScoreRow:
    node_index: int
    scores: np.ndarray  # (3, N) normalized per mechanism
    mean_scores: np.ndarray  # (N,)
    best_q: int
    best_mean: float


@dataclass
class AugmentConfig:
    tau_norm: float = 0.1
    threshold: float = 0.85
    one_to_one: bool = False

    def __post_init__(self) -> None:
        if self.tau_norm <= 0:
            raise ValueError(f"tau_norm must be > 0, got {self.tau_norm}")
        if not 0 < self.threshold <= 1:
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")


def softmax_with_temperature(raw: np.ndarray, tau_norm: float) -> np.ndarray:
    """Row softmax of raw/tau_norm, max-subtracted for stability."""
    raw = np.asarray(raw, dtype=np.float64)
    squeeze = raw.ndim == 1
    rows = np.ascontiguousarray(np.atleast_2d(raw) / tau_norm)
    probs = kernels.softmax_rows(rows)
    return probs[0] if squeeze else probs


def raw_mechanism_scores(model: MatchModel, cset: CandidateSet) -> np.ndarray:
    """Unnormalized mechanism similarities, shape (3, M, N).

    Mechanism 1: node_i . candidate_q. Mechanism 2: node_i . (sequence-
    neighborhood mean around candidate q). Mechanism 3: candidate_q .
    (tree-neighborhood mean around node i).
    """
    p = model.encode(cset.sir_nodes).data.astype(np.float64)
    x = model.encode(cset.candidates).data.astype(np.float64)
    m, n = p.shape[0], x.shape[0]
    scale = float(np.exp(model.tau_match))

    seq_nbrs = {q: tuple(j for j in (q - 1, q, q + 1) if 0 <= j < n) for q in range(n)}
    x_seq = neighborhood_mean(x, seq_nbrs)
    tree_nbrs = {
        i: tuple(j for j in (i - 1, i + 1) if 0 <= j < m) or (i,) for i in range(m)
    }
    p_tree = neighborhood_mean(p, tree_nbrs)

    out = np.empty((_MECHANISMS, m, n), dtype=np.float64)
    out[0] = scale * (p @ x.T)
    out[1] = scale * (p @ x_seq.T)
    out[2] = scale * (p_tree @ x.T)  # candidate_q . tree-mean_i, laid out (i, q)
    return out


def rows_from_raw(raw: np.ndarray, cfg: AugmentConfig | None = None) -> list[ScoreRow]:
    """Normalize raw (3, M, N) mechanism scores into per-node ScoreRows."""
    cfg = cfg or AugmentConfig()
    rows: list[ScoreRow] = []
    for i in range(raw.shape[1]):
        per_mech = np.stack(
            [softmax_with_temperature(raw[k, i], cfg.tau_norm) for k in range(_MECHANISMS)]
        )
        mean_scores = per_mech.mean(axis=0)
        best_q = int(mean_scores.argmax())  # ties resolve to the lowest index
        rows.append(
            ScoreRow(
                node_index=i,
                scores=per_mech,
                mean_scores=mean_scores,
                best_q=best_q,
                best_mean=float(mean_scores[best_q]),
            )
        )
    return rows


def score_candidates(
    model: MatchModel, cset: CandidateSet, cfg: AugmentConfig | None = None
) -> list[ScoreRow]:
    """Per-node normalized mechanism scores over the candidate set."""
    return rows_from_raw(raw_mechanism_scores(model, cset), cfg)


def select_pairs(
    rows: list[ScoreRow], cfg: AugmentConfig | None = None
) -> list[dict[str, Any]]:
    """Keep each node's best candidate when its mean score clears the threshold."""
    cfg = cfg or AugmentConfig()
    selected: list[dict[str, Any]] = []
    taken: set[int] = set()
    order = range(len(rows))
    if cfg.one_to_one:
        order = sorted(order, key=lambda idx: -rows[idx].best_mean)
    for idx in order:
        row = rows[idx]
        q, mean = row.best_q, row.best_mean
        if cfg.one_to_one:
            ranked = np.argsort(-row.mean_scores, kind="stable")
            q = next((int(c) for c in ranked if int(c) not in taken), -1)
            if q < 0:
                continue
            mean = float(row.mean_scores[q])
        if mean <= cfg.threshold:
            continue
        taken.add(q)
        selected.append(
            {
                "node_index": row.node_index,
                "candidate_index": q,
                "s1": float(row.scores[0, q]),
                "s2": float(row.scores[1, q]),
                "s3": float(row.scores[2, q]),
                "mean": mean,
            }
        )
    selected.sort(key=lambda rec: rec["node_index"])
    return selected


@dataclass
class AugmentStats:
    functions: int = 0
    nodes_seen: int = 0
    pairs_emitted: int = 0
    per_dataset: dict[str, int] = field(default_factory=dict)
    score_histogram: dict[str, int] = field(default_factory=dict)

    @property
    def discard_rate(self) -> float:
        if self.nodes_seen == 0:
            return 0.0
        return 1.0 - self.pairs_emitted / self.nodes_seen

    def to_dict(self) -> dict[str, Any]:
        return {
            "functions": self.functions,
            "nodes_seen": self.nodes_seen,
            "pairs_emitted": self.pairs_emitted,
            "discard_rate": round(self.discard_rate, 6),
            "per_dataset": self.per_dataset,
            "score_histogram": self.score_histogram,
        }


def augment_corpus(
    model: MatchModel,
    candidate_sets: Iterable[tuple[CandidateSet, dict[str, Any]]],
    cfg: AugmentConfig | None = None,
    model_hash: str = "unsaved",
    ruleset_hash: str = "",
) -> tuple[list[dict[str, Any]], AugmentStats, list[dict[str, Any]]]:
    """Score and filter candidate sets into fine-grained pair records.

    candidate_sets yields (CandidateSet, context) where context carries the
    snippet texts and dataset tag. Per-record failures land in the skip
    report instead of aborting.
    """
    cfg = cfg or AugmentConfig()
    records: list[dict[str, Any]] = []
    skips: list[dict[str, Any]] = []
    stats = AugmentStats()
    for cset, context in candidate_sets:
        stats.functions += 1
        try:
            rows = score_candidates(model, cset, cfg)
        except Exception as exc:
            skips.append({"id": cset.function_id, "reason": str(exc)})
            continue
        stats.nodes_seen += len(rows)
        for row in rows:
            bucket = f"{min(int(row.best_mean * 10), 9) / 10:.1f}"
            stats.score_histogram[bucket] = stats.score_histogram.get(bucket, 0) + 1
        for hit in select_pairs(rows, cfg):
            record = {
                "function_id": cset.function_id,
                "node_index": hit["node_index"],
                "sir_node": cset.sir_nodes[hit["node_index"]],
                "target_snippet": cset.candidates[hit["candidate_index"]],
                "scores": {
                    "s1": hit["s1"],
                    "s2": hit["s2"],
                    "s3": hit["s3"],
                    "mean": hit["mean"],
                },
                "model_hash": model_hash,
                "ruleset_hash": ruleset_hash,
            }
            record.update({k: v for k, v in context.items() if k not in record})
            records.append(record)
            stats.pairs_emitted += 1
            dataset = str(context.get("dataset", "unknown"))
            stats.per_dataset[dataset] = stats.per_dataset.get(dataset, 0) + 1
    return records, stats, skips


def brute_force_select(
    raw: np.ndarray, cfg: AugmentConfig
) -> list[tuple[int, int, float]]:
    """Independent oracle: exhaustive enumeration over all (node, candidate).

    Recomputes normalized scores per cell with plain python math and scans
    every pair; returns (node_index, candidate_index, mean) selections.
    """
    import math

    n_mech, m, n = raw.shape
    out = []
    for i in range(m):
        best_q, best_mean = -1, -1.0
        for q in range(n):
            mean = 0.0
            for k in range(n_mech):
                row = [raw[k, i, j] / cfg.tau_norm for j in range(n)]
                hi = max(row)
                exps = [math.exp(v - hi) for v in row]
                mean += exps[q] / sum(exps)
            mean /= n_mech
            if mean > best_mean:
                best_mean, best_q = mean, q
        if best_mean > cfg.threshold:
            out.append((i, best_q, best_mean))
    return out
