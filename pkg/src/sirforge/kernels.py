"""Hot numeric kernels with numba-jitted and pure-numpy implementations.

Every kernel has a vectorized numpy reference (`*_np`) and a fused numba
twin (`*_nb`). The active set is chosen once at import time: numba wins by
default, the numpy path is forced with SIRFORGE_NUMBA=0 (or when numba is
not importable). `benchmarks/bench_kernels.py` compares the two paths.

All kernels operate on 2-D row-major arrays (callers reshape); float32 and
float64 are both supported (numba lazily specializes per dtype). fastmath
stays off: the gradient checks need bit-faithful arithmetic order.
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("SIRFORGE_NUMBA", "1") in ("0", "false", "off")

try:
    if _FORCE_NUMPY:
        raise ImportError("numpy path forced via SIRFORGE_NUMBA")
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via subprocess in tests
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------


def softmax_rows_np(x: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; x is (N, M)."""
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_backward_np(probs: np.ndarray, dprobs: np.ndarray) -> np.ndarray:
    """Backward of row softmax: dx = p * (dp - sum(dp * p))."""
    inner = (dprobs * probs).sum(axis=1, keepdims=True)
    return probs * (dprobs - inner)


def layer_norm_np(
    x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, eps: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row layer norm; returns (y, xhat, rstd). x is (N, D)."""
    mean = x.mean(axis=1, keepdims=True)
    var = ((x - mean) ** 2).mean(axis=1, keepdims=True)
    rstd = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean) * rstd
    return xhat * gamma + beta, xhat, rstd[:, 0]


def layer_norm_backward_np(
    dy: np.ndarray, xhat: np.ndarray, gamma: np.ndarray, rstd: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Backward of layer_norm: returns (dx, dgamma, dbeta)."""
    dgamma = (dy * xhat).sum(axis=0)
    dbeta = dy.sum(axis=0)
    dxhat = dy * gamma
    m1 = dxhat.mean(axis=1, keepdims=True)
    m2 = (dxhat * xhat).mean(axis=1, keepdims=True)
    dx = (dxhat - m1 - xhat * m2) * rstd[:, None]
    return dx, dgamma, dbeta


def softmax_xent_np(
    logits: np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Fused softmax + cross-entropy over rows.

    Returns per-row losses and dlogits for a mean-over-rows reduction
    (i.e. dlogits already divided by N).
    """
    n = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - logz
    losses = -logp[np.arange(n), labels]
    dlogits = np.exp(logp)
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return losses, dlogits


def _aggregate_pairs(keys: np.ndarray, wexp: np.ndarray) -> dict[int, int]:
    if len(keys) == 0:
        return {}
    uniq, inverse = np.unique(keys, return_inverse=True)
    sums = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(sums, inverse, wexp)
    return {int(k): int(c) for k, c in zip(uniq, sums)}


def count_pairs_np(ids: np.ndarray, boundaries: np.ndarray, weights: np.ndarray) -> dict[int, int]:
    """Weighted adjacent-pair counts over a flattened piece array.

    ids: int32 symbols of all pieces concatenated. boundaries: int64 start
    offsets of each piece plus the final end offset. weights: one int64
    multiplier per piece. Pairs never cross piece boundaries.
    Returns {a << 32 | b: weighted count}.
    """
    if len(ids) < 2:
        return {}
    keys = (ids[:-1].astype(np.int64) << 32) | ids[1:].astype(np.int64)
    mask = np.ones(len(ids) - 1, dtype=bool)
    mask[boundaries[1:-1] - 1] = False
    pair_counts = np.maximum(np.diff(boundaries) - 1, 0)
    wexp = np.repeat(weights, pair_counts)
    return _aggregate_pairs(keys[mask], wexp)


# ---------------------------------------------------------------------------
# numba twins (explicit loops, fused where the numpy path allocates temps)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _softmax_rows_nb(x):
    n, m = x.shape
    out = np.empty_like(x)
    for i in range(n):
        hi = x[i, 0]
        for j in range(1, m):
            if x[i, j] > hi:
                hi = x[i, j]
        s = 0.0
        for j in range(m):
            v = np.exp(x[i, j] - hi)
            out[i, j] = v
            s += v
        for j in range(m):
            out[i, j] /= s
    return out


@njit(cache=True)
def _softmax_backward_nb(probs, dprobs):
    n, m = probs.shape
    out = np.empty_like(probs)
    for i in range(n):
        inner = 0.0
        for j in range(m):
            inner += dprobs[i, j] * probs[i, j]
        for j in range(m):
            out[i, j] = probs[i, j] * (dprobs[i, j] - inner)
    return out


@njit(cache=True)
def _layer_norm_nb(x, gamma, beta, eps):
    n, d = x.shape
    y = np.empty_like(x)
    xhat = np.empty_like(x)
    rstd = np.empty(n, dtype=x.dtype)
    for i in range(n):
        mean = 0.0
        for j in range(d):
            mean += x[i, j]
        mean /= d
        var = 0.0
        for j in range(d):
            diff = x[i, j] - mean
            var += diff * diff
        var /= d
        r = 1.0 / np.sqrt(var + eps)
        rstd[i] = r
        for j in range(d):
            h = (x[i, j] - mean) * r
            xhat[i, j] = h
            y[i, j] = h * gamma[j] + beta[j]
    return y, xhat, rstd


@njit(cache=True)
def _layer_norm_backward_nb(dy, xhat, gamma, rstd):
    n, d = dy.shape
    dx = np.empty_like(dy)
    dgamma = np.zeros(d, dtype=dy.dtype)
    dbeta = np.zeros(d, dtype=dy.dtype)
    for i in range(n):
        m1 = 0.0
        m2 = 0.0
        for j in range(d):
            g = dy[i, j] * gamma[j]
            dgamma[j] += dy[i, j] * xhat[i, j]
            dbeta[j] += dy[i, j]
            m1 += g
            m2 += g * xhat[i, j]
        m1 /= d
        m2 /= d
        for j in range(d):
            dx[i, j] = (dy[i, j] * gamma[j] - m1 - xhat[i, j] * m2) * rstd[i]
    return dx, dgamma, dbeta


@njit(cache=True)
def _softmax_xent_nb(logits, labels):
    n, m = logits.shape
    losses = np.empty(n, dtype=logits.dtype)
    dlogits = np.empty_like(logits)
    for i in range(n):
        hi = logits[i, 0]
        for j in range(1, m):
            if logits[i, j] > hi:
                hi = logits[i, j]
        s = 0.0
        for j in range(m):
            v = np.exp(logits[i, j] - hi)
            dlogits[i, j] = v
            s += v
        logz = np.log(s)
        losses[i] = -(logits[i, labels[i]] - hi - logz)
        for j in range(m):
            dlogits[i, j] = dlogits[i, j] / s
        dlogits[i, labels[i]] -= 1.0
        for j in range(m):
            dlogits[i, j] /= n
    return losses, dlogits


@njit(cache=True)
def _count_pairs_keys_nb(ids, boundaries, weights):
    cap = max(len(ids) - 1, 0)
    keys = np.empty(cap, dtype=np.int64)
    wexp = np.empty(cap, dtype=np.int64)
    k = 0
    for p in range(len(boundaries) - 1):
        w = weights[p]
        for i in range(boundaries[p], boundaries[p + 1] - 1):
            keys[k] = (np.int64(ids[i]) << 32) | np.int64(ids[i + 1])
            wexp[k] = w
            k += 1
    return keys[:k], wexp[:k]


def count_pairs_nb(ids: np.ndarray, boundaries: np.ndarray, weights: np.ndarray) -> dict[int, int]:
    if len(ids) < 2:
        return {}
    keys, wexp = _count_pairs_keys_nb(
        ids, boundaries.astype(np.int64), weights.astype(np.int64)
    )
    return _aggregate_pairs(keys, wexp)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if _HAVE_NUMBA:
    softmax_rows = _softmax_rows_nb
    softmax_backward = _softmax_backward_nb
    layer_norm = _layer_norm_nb
    layer_norm_backward = _layer_norm_backward_nb
    softmax_xent = _softmax_xent_nb
    count_pairs = count_pairs_nb
    BACKEND = "numba"
else:
    softmax_rows = softmax_rows_np
    softmax_backward = softmax_backward_np
    layer_norm = layer_norm_np
    layer_norm_backward = layer_norm_backward_np
    softmax_xent = softmax_xent_np
    count_pairs = count_pairs_np
    BACKEND = "numpy"


def backend_name() -> str:
    """Active kernel backend: "numba" or "numpy"."""
    return BACKEND
