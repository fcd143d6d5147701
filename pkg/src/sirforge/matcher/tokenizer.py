"""Byte-level BPE tokenizer.

Ids: 0..3 specials (PAD, UNK, BOS, EOS), 4..259 raw bytes, 260+ learned
merges. vocab_size budgets bytes + merges (specials ride outside), so
vocab_size=260 leaves room for 4 merges. Byte fallback makes encode total
and decode(encode(s)) == s exact; UNK only guards out-of-range ids.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from sirforge import kernels
from sirforge.errors import EmptyCorpus

PAD_ID = 0
UNK_ID = 1
BOS_ID = 2
EOS_ID = 3
_N_SPECIALS = 4
_BYTE_BASE = _N_SPECIALS
_FIRST_MERGE_ID = _BYTE_BASE + 256

_PIECE_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*|[0-9]+|\s+|[^\sA-Za-z_0-9]+")

SPECIAL_TOKENS = ("<pad>", "<unk>", "<bos>", "<eos>")


@dataclass
class TokenizerModel:
    merges: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._ranks = {pair: _FIRST_MERGE_ID + i for i, pair in enumerate(self.merges)}
        self._token_bytes = [b"", b"", b"", b""]
        self._token_bytes += [bytes([b]) for b in range(256)]
        for a, b in self.merges:
            self._token_bytes.append(self._token_bytes[a] + self._token_bytes[b])

    @property
    def vocab_size(self) -> int:
        return _FIRST_MERGE_ID + len(self.merges)

    def vocab(self) -> list[str]:
        out = list(SPECIAL_TOKENS)
        out += [self._token_bytes[i].decode("utf-8", "backslashreplace") for i in range(4, self.vocab_size)]
        return out

    def encode(self, text: str, add_special: bool = False) -> list[int]:
        ids: list[int] = [BOS_ID] if add_special else []
        for piece in _PIECE_RE.findall(text):
            ids.extend(self._encode_piece(piece))
        if add_special:
            ids.append(EOS_ID)
        return ids

    def _encode_piece(self, piece: str) -> list[int]:
        ids = [_BYTE_BASE + b for b in piece.encode("utf-8")]
        if not self._ranks:
            return ids
        while len(ids) > 1:
            best_rank = None
            best_idx = -1
            for i in range(len(ids) - 1):
                rank = self._ranks.get((ids[i], ids[i + 1]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank = rank
                    best_idx = i
            if best_rank is None:
                break
            ids[best_idx : best_idx + 2] = [best_rank]
        return ids

    def decode(self, ids: list[int]) -> str:
        chunks = []
        for i in ids:
            if 0 <= i < self.vocab_size:
                chunks.append(self._token_bytes[i])
        return b"".join(chunks).decode("utf-8", errors="replace")


def train_tokenizer(corpus, vocab_size: int, seed: int = 0) -> TokenizerModel:
    """Learn BPE merges from an iterable of strings.

    Deterministic for a fixed corpus order: best pair by count, ties broken
    by lowest (left, right) id pair. Merging stops early when no adjacent
    pair repeats.
    """
    if vocab_size < 256:
        raise ValueError(f"vocab_size must be >= 256, got {vocab_size}")
    piece_counts: dict[str, int] = {}
    saw_text = False
    for text in corpus:
        saw_text = True
        for piece in _PIECE_RE.findall(text):
            piece_counts[piece] = piece_counts.get(piece, 0) + 1
    if not saw_text or not piece_counts:
        raise EmptyCorpus("tokenizer corpus is empty")

    pieces = [[_BYTE_BASE + b for b in p.encode("utf-8")] for p in piece_counts]
    weights = list(piece_counts.values())
    n_merges = vocab_size - 256
    merges: list[tuple[int, int]] = []

    for _ in range(n_merges):
        counts = _pair_counts(pieces, weights)
        if not counts:
            break
        best_key = min(counts, key=lambda k: (-counts[k], k))
        if counts[best_key] < 2:
            break
        pair = (best_key >> 32, best_key & 0xFFFFFFFF)
        new_id = _FIRST_MERGE_ID + len(merges)
        merges.append(pair)
        for ids in pieces:
            _merge_in_place(ids, pair, new_id)
    return TokenizerModel(merges=merges)


def _pair_counts(pieces: list[list[int]], weights: list[int]) -> dict[int, int]:
    flat: list[int] = []
    boundaries = [0]
    piece_weights: list[int] = []
    for ids, w in zip(pieces, weights):
        if len(ids) < 2:
            continue
        flat.extend(ids)
        boundaries.append(len(flat))
        piece_weights.append(w)
    if len(flat) < 2:
        return {}
    return kernels.count_pairs(
        np.asarray(flat, dtype=np.int32),
        np.asarray(boundaries, dtype=np.int64),
        np.asarray(piece_weights, dtype=np.int64),
    )


def _merge_in_place(ids: list[int], pair: tuple[int, int], new_id: int) -> None:
    i = 0
    while i < len(ids) - 1:
        if ids[i] == pair[0] and ids[i + 1] == pair[1]:
            ids[i : i + 2] = [new_id]
        else:
            i += 1
