"""Post-norm transformer encoder in numpy with hand-written backprop.

Forward: token embedding (scaled by sqrt(d)) + fixed sinusoidal positions,
N layers of multi-head self-attention and ReLU FFN with residuals and
layer norm, masked mean pooling, row-wise L2 normalization. The backward
pass mirrors it exactly; layer norm and softmax go through the kernel
backend so numba and numpy paths stay interchangeable.

Padding uses an additive -1e9 on masked key logits, which underflows to
exact zeros after max-subtracted softmax; pooled outputs are therefore
independent of padding length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from sirforge import kernels

MASK_NEG = -1e9


@dataclass
class EncoderConfig:
    layers: int = 4
    heads: int = 4
    model_dim: int = 256
    ffn_dim: int = 1024
    max_seq: int = 256
    pooling: str = "mean"
    dtype: str = "float32"
    truncate: bool = True

    def __post_init__(self) -> None:
        if self.model_dim % self.heads != 0:
            raise ValueError(f"model_dim {self.model_dim} not divisible by heads {self.heads}")
        if self.pooling != "mean":
            raise ValueError(f"unsupported pooling {self.pooling!r}")

    @property
    def np_dtype(self):
        return np.dtype(self.dtype)

    def to_dict(self) -> dict[str, Any]:
        return {
            "layers": self.layers,
            "heads": self.heads,
            "model_dim": self.model_dim,
            "ffn_dim": self.ffn_dim,
            "max_seq": self.max_seq,
            "pooling": self.pooling,
            "dtype": self.dtype,
            "truncate": self.truncate,
        }


def init_params(config: EncoderConfig, vocab_size: int, seed: int = 0) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(seed)
    dt = config.np_dtype
    d, f = config.model_dim, config.ffn_dim
    params: dict[str, np.ndarray] = {
        "tok_emb": (rng.standard_normal((vocab_size, d)) * 0.02).astype(dt),
    }
    for i in range(config.layers):
        p = f"layer{i}."
        for name in ("wq", "wk", "wv", "wo"):
            params[p + name] = (rng.standard_normal((d, d)) * 0.02).astype(dt)
            params[p + name.replace("w", "b")] = np.zeros(d, dtype=dt)
        params[p + "ln1_g"] = np.ones(d, dtype=dt)
        params[p + "ln1_b"] = np.zeros(d, dtype=dt)
        params[p + "w1"] = (rng.standard_normal((d, f)) * 0.02).astype(dt)
        params[p + "b1"] = np.zeros(f, dtype=dt)
        params[p + "w2"] = (rng.standard_normal((f, d)) * 0.02).astype(dt)
        params[p + "b2"] = np.zeros(d, dtype=dt)
        params[p + "ln2_g"] = np.ones(d, dtype=dt)
        params[p + "ln2_b"] = np.zeros(d, dtype=dt)
    return params


def sinusoidal_positions(max_seq: int, dim: int, dtype) -> np.ndarray:
    pos = np.arange(max_seq, dtype=np.float64)[:, None]
    idx = np.arange(dim, dtype=np.float64)[None, :]
    angle = pos / np.power(10000.0, (2 * (idx // 2)) / dim)
    enc = np.where(idx % 2 == 0, np.sin(angle), np.cos(angle))
    return enc.astype(dtype)


@dataclass
class ForwardCache:
    ids: np.ndarray
    mask: np.ndarray
    x0: np.ndarray
    layers: list[dict[str, np.ndarray]] = field(default_factory=list)
    pooled: np.ndarray | None = None
    pooled_norm: np.ndarray | None = None
    out: np.ndarray | None = None


class Encoder:
    """Stateless apply/grad over an external parameter dict."""

    def __init__(self, config: EncoderConfig):
        self.config = config
        self._pos = sinusoidal_positions(config.max_seq, config.model_dim, config.np_dtype)

    # -- forward -----------------------------------------------------------

    def forward(
        self, params: dict[str, np.ndarray], ids: np.ndarray, mask: np.ndarray,
        want_cache: bool = False,
    ) -> tuple[np.ndarray, ForwardCache | None]:
        """ids, mask: (B, L) int/bool arrays -> normalized (B, d) embeddings."""
        cfg = self.config
        dt = cfg.np_dtype
        B, L = ids.shape
        scale = np.asarray(np.sqrt(cfg.model_dim), dtype=dt)
        x = params["tok_emb"][ids] * scale + self._pos[:L]
        maskf = mask.astype(dt)
        cache = ForwardCache(ids=ids, mask=maskf, x0=x) if want_cache else None

        key_bias = (1.0 - maskf) * dt.type(MASK_NEG)  # (B, L)
        for i in range(cfg.layers):
            x = self._layer_forward(params, f"layer{i}.", x, key_bias, cache)

        counts = maskf.sum(axis=1, keepdims=True)
        pooled = (x * maskf[:, :, None]).sum(axis=1) / counts
        norms = np.sqrt((pooled * pooled).sum(axis=1, keepdims=True))
        out = pooled / norms
        if cache is not None:
            cache.pooled = pooled
            cache.pooled_norm = norms
            cache.out = out
        return out, cache

    def _layer_forward(
        self, params, prefix: str, x: np.ndarray, key_bias: np.ndarray,
        cache: ForwardCache | None,
    ) -> np.ndarray:
        cfg = self.config
        B, L, d = x.shape
        H = cfg.heads
        dh = d // H

        q = x @ params[prefix + "wq"] + params[prefix + "bq"]
        k = x @ params[prefix + "wk"] + params[prefix + "bk"]
        v = x @ params[prefix + "wv"] + params[prefix + "bv"]
        qh = q.reshape(B, L, H, dh).transpose(0, 2, 1, 3)  # (B,H,L,dh)
        kh = k.reshape(B, L, H, dh).transpose(0, 2, 1, 3)
        vh = v.reshape(B, L, H, dh).transpose(0, 2, 1, 3)

        inv_sqrt = 1.0 / np.sqrt(dh)
        scores = np.einsum("bhid,bhjd->bhij", qh, kh) * inv_sqrt
        scores = scores + key_bias[:, None, None, :]
        probs = kernels.softmax_rows(
            np.ascontiguousarray(scores.reshape(B * H * L, L))
        ).reshape(B, H, L, L)
        ctx = np.einsum("bhij,bhjd->bhid", probs, vh)
        ctx_flat = ctx.transpose(0, 2, 1, 3).reshape(B, L, d)
        attn_out = ctx_flat @ params[prefix + "wo"] + params[prefix + "bo"]

        res1 = x + attn_out
        y1, xhat1, rstd1 = kernels.layer_norm(
            np.ascontiguousarray(res1.reshape(B * L, d)),
            params[prefix + "ln1_g"], params[prefix + "ln1_b"],
            1e-5,
        )
        x1 = y1.reshape(B, L, d)

        pre = x1 @ params[prefix + "w1"] + params[prefix + "b1"]
        h = np.maximum(pre, 0)
        ffn_out = h @ params[prefix + "w2"] + params[prefix + "b2"]
        res2 = x1 + ffn_out
        y2, xhat2, rstd2 = kernels.layer_norm(
            np.ascontiguousarray(res2.reshape(B * L, d)),
            params[prefix + "ln2_g"], params[prefix + "ln2_b"],
            1e-5,
        )
        x2 = y2.reshape(B, L, d)

        if cache is not None:
            cache.layers.append({
                "x_in": x, "qh": qh, "kh": kh, "vh": vh, "probs": probs,
                "ctx_flat": ctx_flat, "xhat1": xhat1, "rstd1": rstd1,
                "x1": x1, "h": h, "xhat2": xhat2, "rstd2": rstd2,
            })
        return x2

    # -- backward ------------------------------------------------------------

    def backward(
        self, params: dict[str, np.ndarray], cache: ForwardCache, dout: np.ndarray,
    ) -> dict[str, np.ndarray]:
        """Gradients of a scalar loss w.r.t. params, given d(loss)/d(out)."""
        cfg = self.config
        grads = {name: np.zeros_like(p) for name, p in params.items()}
        out, pooled, norms = cache.out, cache.pooled, cache.pooled_norm
        maskf = cache.mask
        B, L = cache.ids.shape
        d = cfg.model_dim

        # L2-normalize backward: y = p / |p|
        inner = (dout * out).sum(axis=1, keepdims=True)
        dpooled = (dout - out * inner) / norms
        # masked mean pool backward
        counts = maskf.sum(axis=1, keepdims=True)
        dx = dpooled[:, None, :] * (maskf / counts)[:, :, None]

        for i in reversed(range(cfg.layers)):
            dx = self._layer_backward(params, grads, f"layer{i}.", cache.layers[i], dx)

        scale = np.sqrt(cfg.model_dim)
        np.add.at(grads["tok_emb"], cache.ids, dx * scale)
        return grads

    def _layer_backward(self, params, grads, prefix: str, lc, dx2: np.ndarray) -> np.ndarray:
        cfg = self.config
        B, L, d = lc["x_in"].shape
        H = cfg.heads
        dh = d // H

        # LN2
        dres2_flat, dg2, db2 = kernels.layer_norm_backward(
            np.ascontiguousarray(dx2.reshape(B * L, d)), lc["xhat2"],
            params[prefix + "ln2_g"], lc["rstd2"],
        )
        grads[prefix + "ln2_g"] += dg2
        grads[prefix + "ln2_b"] += db2
        dres2 = dres2_flat.reshape(B, L, d)

        # FFN
        h = lc["h"]
        x1 = lc["x1"]
        dffn = dres2
        grads[prefix + "w2"] += np.einsum("blf,bld->fd", h, dffn)
        grads[prefix + "b2"] += dffn.sum(axis=(0, 1))
        dh_ = dffn @ params[prefix + "w2"].T
        dpre = dh_ * (h > 0)
        grads[prefix + "w1"] += np.einsum("bld,blf->df", x1, dpre)
        grads[prefix + "b1"] += dpre.sum(axis=(0, 1))
        dx1 = dres2 + dpre @ params[prefix + "w1"].T

        # LN1
        dres1_flat, dg1, db1 = kernels.layer_norm_backward(
            np.ascontiguousarray(dx1.reshape(B * L, d)), lc["xhat1"],
            params[prefix + "ln1_g"], lc["rstd1"],
        )
        grads[prefix + "ln1_g"] += dg1
        grads[prefix + "ln1_b"] += db1
        dres1 = dres1_flat.reshape(B, L, d)

        # attention output projection
        dattn = dres1
        grads[prefix + "wo"] += np.einsum("bld,ble->de", lc["ctx_flat"], dattn)
        grads[prefix + "bo"] += dattn.sum(axis=(0, 1))
        dctx_flat = dattn @ params[prefix + "wo"].T
        dctx = dctx_flat.reshape(B, L, H, dh).transpose(0, 2, 1, 3)

        probs, qh, kh, vh = lc["probs"], lc["qh"], lc["kh"], lc["vh"]
        dprobs = np.einsum("bhid,bhjd->bhij", dctx, vh)
        dvh = np.einsum("bhij,bhid->bhjd", probs, dctx)
        dscores = kernels.softmax_backward(
            np.ascontiguousarray(probs.reshape(B * H * L, L)),
            np.ascontiguousarray(dprobs.reshape(B * H * L, L)),
        ).reshape(B, H, L, L)
        inv_sqrt = 1.0 / np.sqrt(dh)
        dqh = np.einsum("bhij,bhjd->bhid", dscores, kh) * inv_sqrt
        dkh = np.einsum("bhij,bhid->bhjd", dscores, qh) * inv_sqrt

        dq = dqh.transpose(0, 2, 1, 3).reshape(B, L, d)
        dk = dkh.transpose(0, 2, 1, 3).reshape(B, L, d)
        dv = dvh.transpose(0, 2, 1, 3).reshape(B, L, d)
        x_in = lc["x_in"]
        grads[prefix + "wq"] += np.einsum("bld,ble->de", x_in, dq)
        grads[prefix + "bq"] += dq.sum(axis=(0, 1))
        grads[prefix + "wk"] += np.einsum("bld,ble->de", x_in, dk)
        grads[prefix + "bk"] += dk.sum(axis=(0, 1))
        grads[prefix + "wv"] += np.einsum("bld,ble->de", x_in, dv)
        grads[prefix + "bv"] += dv.sum(axis=(0, 1))

        dx_in = dres1  # residual path
        dx_in = dx_in + dq @ params[prefix + "wq"].T
        dx_in = dx_in + dk @ params[prefix + "wk"].T
        dx_in = dx_in + dv @ params[prefix + "wv"].T
        return dx_in
