"""Match model: structured encoding, alignment mechanisms, contrastive loss.

Three alignment mechanisms pair the node encodings P (rows unit-norm) with
snippet encodings X:

  1. independent  - identity on both sides, direct node <-> snippet dots;
  2. structural   - node vs the plain mean of the snippet's sequence
                    neighborhood (self included);
  3. hybrid       - snippet vs the plain mean of the node's tree
                    neighborhood (adjacent statement siblings).

Each mechanism's similarity matrix is scaled by exp(tau), a trainable
temperature. The loss is the symmetric in-batch cross entropy with labels
y_i = i, averaged over rows, weighted by lambda_k and summed over k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from sirforge import kernels
from sirforge.errors import (
    DegenerateBatch,
    EmptyNeighborhood,
    SequenceTooLong,
    ShapeMismatch,
)
from sirforge.matcher.encoder import Encoder, EncoderConfig, init_params
from sirforge.matcher.tokenizer import PAD_ID, TokenizerModel

TAU_CAP = float(np.log(100.0))  # exp(tau) clamp for stability


@dataclass
class EmbeddingMatrix:
    data: np.ndarray
    normalized: bool = True

    def __post_init__(self) -> None:
        if self.data.ndim != 2 or self.data.shape[0] < 1:
            raise ShapeMismatch(f"expected (N, d) with N >= 1, got {self.data.shape}")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def _as_array(m: EmbeddingMatrix | np.ndarray) -> np.ndarray:
    return m.data if isinstance(m, EmbeddingMatrix) else np.asarray(m)


@dataclass
class AlignmentBatch:
    """One function's aligned statement set with neighborhood structure."""

    sir_texts: list[str]
    snippet_texts: list[str]
    tree_neighbors: dict[int, tuple[int, ...]]
    seq_neighbors: dict[int, tuple[int, ...]]

    def __post_init__(self) -> None:
        n = len(self.sir_texts)
        if n != len(self.snippet_texts):
            raise ShapeMismatch(
                f"{n} nodes vs {len(self.snippet_texts)} snippets"
            )
        if n < 2:
            raise DegenerateBatch(f"contrastive batch needs N >= 2, got {n}")
        for mapping in (self.tree_neighbors, self.seq_neighbors):
            for i, nbrs in mapping.items():
                if not nbrs:
                    raise EmptyNeighborhood(f"empty neighborhood for row {i}")
                if not all(0 <= j < n for j in nbrs):
                    raise ShapeMismatch(f"neighbor index out of range for row {i}")

    @property
    def size(self) -> int:
        return len(self.sir_texts)

    @classmethod
    def from_statements(
        cls, sir_texts: Sequence[str], snippet_texts: Sequence[str]
    ) -> "AlignmentBatch":
        """Default neighborhoods for a flat statement sequence.

        Sequence neighborhood is {i-1, i, i+1}. Tree neighborhood is the
        adjacent statement siblings plus i itself: every statement's parent
        is the shared function body whose span contains the statement, so
        the row itself is the parent's in-batch stand-in. Without it the
        hybrid head is structurally anti-diagonal (the matching node sits
        in the neighborhoods of q = i+-1 but never q = i).
        """
        n = len(sir_texts)
        seq = {i: tuple(j for j in (i - 1, i, i + 1) if 0 <= j < n) for i in range(n)}
        tree = dict(seq)
        return cls(list(sir_texts), list(snippet_texts), tree, seq)


def neighborhood_mean(rows: np.ndarray, neighbors: dict[int, tuple[int, ...]]) -> np.ndarray:
    """Row i of the result is the plain mean of rows[j] over j in neighbors[i]."""
    n = rows.shape[0]
    out = np.zeros_like(rows)
    for i in range(n):
        nbrs = neighbors.get(i)
        if not nbrs:
            raise EmptyNeighborhood(f"no neighborhood for row {i}")
        out[i] = rows[list(nbrs)].mean(axis=0)
    return out


def _neighbor_matrix(neighbors: dict[int, tuple[int, ...]], n: int, dtype) -> np.ndarray:
    mat = np.zeros((n, n), dtype=dtype)
    for i in range(n):
        nbrs = neighbors.get(i)
        if not nbrs:
            raise EmptyNeighborhood(f"no neighborhood for row {i}")
        w = 1.0 / len(nbrs)
        for j in nbrs:
            mat[i, j] += w
    return mat


def align_independent(
    p: EmbeddingMatrix | np.ndarray, x: EmbeddingMatrix | np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Identity transforms: direct node-to-snippet correspondence."""
    p, x = _as_array(p), _as_array(x)
    if p.shape[1] != x.shape[1]:
        raise ShapeMismatch(f"dim mismatch: {p.shape} vs {x.shape}")
    return p, x


def align_structural(
    p: EmbeddingMatrix | np.ndarray,
    x: EmbeddingMatrix | np.ndarray,
    seq_neighbors: dict[int, tuple[int, ...]],
) -> tuple[np.ndarray, np.ndarray]:
    """Node encodings vs sequence-neighborhood means of snippet encodings."""
    p, x = _as_array(p), _as_array(x)
    if p.shape[1] != x.shape[1]:
        raise ShapeMismatch(f"dim mismatch: {p.shape} vs {x.shape}")
    return p, neighborhood_mean(x, seq_neighbors)


def align_hybrid(
    p: EmbeddingMatrix | np.ndarray,
    x: EmbeddingMatrix | np.ndarray,
    tree_neighbors: dict[int, tuple[int, ...]],
) -> tuple[np.ndarray, np.ndarray]:
    """Snippet encodings vs tree-neighborhood means of node encodings."""
    p, x = _as_array(p), _as_array(x)
    if p.shape[1] != x.shape[1]:
        raise ShapeMismatch(f"dim mismatch: {p.shape} vs {x.shape}")
    return x, neighborhood_mean(p, tree_neighbors)


class MatchModel:
    """Encoder, tokenizer, trainable temperature, mechanism weights."""

    def __init__(
        self,
        config: EncoderConfig,
        tokenizer: TokenizerModel,
        seed: int = 0,
        lam: Sequence[float] = (1.0, 1.0, 1.0),
        params: dict[str, np.ndarray] | None = None,
        tau_match: float = 0.0,
    ):
        self.config = config
        self.tokenizer = tokenizer
        self.encoder = Encoder(config)
        self.params = params if params is not None else init_params(
            config, tokenizer.vocab_size, seed=seed
        )
        self.tau_match = float(tau_match)
        self.lam = np.asarray(list(lam), dtype=np.float64)
        if len(self.lam) != 3 or (self.lam < 0).any():
            raise ValueError("lambda must be 3 non-negative reals")

    # -- tokenization ------------------------------------------------------

    def prepare_batch(self, texts: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        if not texts:
            raise ValueError("no texts to encode")
        rows = []
        for text in texts:
            ids = self.tokenizer.encode(text, add_special=True)
            if len(ids) < 3:  # BOS + at least one content token + EOS
                raise ValueError(f"text tokenizes to no content tokens: {text!r}")
            if len(ids) > self.config.max_seq:
                if not self.config.truncate:
                    raise SequenceTooLong(
                        f"{len(ids)} tokens > max_seq {self.config.max_seq}"
                    )
                ids = ids[: self.config.max_seq]
            rows.append(ids)
        width = max(len(r) for r in rows)
        ids_arr = np.full((len(rows), width), PAD_ID, dtype=np.int64)
        mask = np.zeros((len(rows), width), dtype=bool)
        for i, r in enumerate(rows):
            ids_arr[i, : len(r)] = r
            mask[i, : len(r)] = True
        return ids_arr, mask

    def encode(self, texts: Sequence[str]) -> EmbeddingMatrix:
        """Normalized structured encodings, one row per text."""
        ids, mask = self.prepare_batch(texts)
        out, _ = self.encoder.forward(self.params, ids, mask, want_cache=False)
        return EmbeddingMatrix(data=out, normalized=True)

    def clone_params(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}


def similarity(model: MatchModel, lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """exp(tau) * lhs @ rhs^T."""
    lhs, rhs = _as_array(lhs), _as_array(rhs)
    if lhs.shape[1] != rhs.shape[1]:
        raise ShapeMismatch(f"dim mismatch: {lhs.shape} vs {rhs.shape}")
    return np.exp(model.tau_match) * (lhs @ rhs.T)


def _ce_rows(gamma: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean-over-rows softmax cross entropy with labels y_i = i."""
    n = gamma.shape[0]
    labels = np.arange(n, dtype=np.int64)
    losses, dlogits = kernels.softmax_xent(
        np.ascontiguousarray(gamma.astype(np.float64)), labels
    )
    return float(losses.mean()), dlogits


def contrastive_loss(
    model: MatchModel,
    gammas: Sequence[np.ndarray],
) -> float:
    """Symmetric in-batch contrastive loss over the mechanism matrices."""
    loss, _ = contrastive_loss_and_grads(model, gammas)
    return loss


def contrastive_loss_and_grads(
    model: MatchModel,
    gammas: Sequence[np.ndarray],
) -> tuple[float, list[np.ndarray]]:
    """Loss plus d(loss)/d(Gamma_k) for each mechanism matrix."""
    total = 0.0
    dgammas: list[np.ndarray] = []
    for lam_k, gamma in zip(model.lam, gammas):
        gamma = np.asarray(gamma)
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
            raise ShapeMismatch(f"similarity matrix must be square, got {gamma.shape}")
        if gamma.shape[0] < 2:
            raise DegenerateBatch("contrastive loss needs N >= 2")
        ce_fwd, d_fwd = _ce_rows(gamma)
        ce_bwd, d_bwd = _ce_rows(gamma.T)
        total += 0.5 * lam_k * (ce_fwd + ce_bwd)
        dgammas.append(0.5 * lam_k * (d_fwd + d_bwd.T))
    return float(total), dgammas


def batch_gammas(
    model: MatchModel, p: np.ndarray, x: np.ndarray, batch: AlignmentBatch
) -> list[np.ndarray]:
    """The three mechanism similarity matrices for one training batch."""
    pairs = [
        align_independent(p, x),
        align_structural(p, x, batch.seq_neighbors),
        align_hybrid(p, x, batch.tree_neighbors),
    ]
    return [similarity(model, lhs, rhs) for lhs, rhs in pairs]


def loss_from_embeddings(
    model: MatchModel, p: np.ndarray, x: np.ndarray, batch: AlignmentBatch
) -> float:
    return contrastive_loss(model, batch_gammas(model, p, x, batch))


def loss_and_embedding_grads(
    model: MatchModel, p: np.ndarray, x: np.ndarray, batch: AlignmentBatch
) -> tuple[float, np.ndarray, np.ndarray, float]:
    """Loss, d/dP, d/dX, d/dtau for one batch of normalized embeddings.

    Gamma_1 = e^t P X^T, Gamma_2 = e^t P (A2 X)^T, Gamma_3 = e^t X (A3 P)^T
    with A2/A3 the row-averaging neighborhood matrices, so
    d/dtau = sum_k <dGamma_k, Gamma_k>.
    """
    n = p.shape[0]
    dtype = p.dtype
    a2 = _neighbor_matrix(batch.seq_neighbors, n, dtype)
    a3 = _neighbor_matrix(batch.tree_neighbors, n, dtype)
    scale = np.exp(model.tau_match)

    g1 = scale * (p @ x.T)
    x2 = a2 @ x
    g2 = scale * (p @ x2.T)
    p3 = a3 @ p
    g3 = scale * (x @ p3.T)

    loss, (dg1, dg2, dg3) = contrastive_loss_and_grads(model, [g1, g2, g3])

    dtau = float((dg1 * g1).sum() + (dg2 * g2).sum() + (dg3 * g3).sum())
    dp = scale * (dg1 @ x) + scale * (dg2 @ x2) + a3.T @ (scale * (dg3.T @ x))
    dx = scale * (dg1.T @ p) + a2.T @ (scale * (dg2.T @ p)) + scale * (dg3 @ p3)
    return loss, dp.astype(dtype), dx.astype(dtype), dtau
