"""Dual-attention encoder blocks: row-wise attention with a shared map,
column-wise attention across rows, and a GELU feed-forward, each with a
residual and layer normalization.

The row-wise logits are averaged over rows valid at both the query and key
column, so the shared map reduces to ordinary self-attention when R = 1 and
ignores PAD everywhere. Q/K/V projections are fused into one gemm; the
parameters stay separate tensors.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from .. import kernels
from .ops import (
    accumulate, gelu_backward, gelu_forward, layernorm_backward,
    layernorm_forward, masked_softmax, merge_heads, softmax_backward,
    split_heads,
)


def _proj(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    r, l, d = x.shape
    return (x.reshape(-1, d) @ w).reshape(r, l, -1)


def _proj_grads(x: np.ndarray, dy: np.ndarray, w: np.ndarray
                ) -> Tuple[np.ndarray, np.ndarray]:
    r, l, d = x.shape
    xf = x.reshape(-1, d)
    dyf = np.ascontiguousarray(dy).reshape(-1, dy.shape[-1])
    return (dyf @ w.T).reshape(x.shape), xf.T @ dyf


def _qkv(x: np.ndarray, params: dict, prefix: str, n_heads: int):
    w = np.concatenate([params[prefix + "wq"], params[prefix + "wk"],
                        params[prefix + "wv"]], axis=1)
    fused = _proj(x, w)
    d = x.shape[-1]
    q = split_heads(fused[..., :d], n_heads)
    k = split_heads(fused[..., d:2 * d], n_heads)
    v = split_heads(fused[..., 2 * d:], n_heads)
    return q, k, v


def _qkv_backward(x: np.ndarray, dq, dk, dv, params: dict, grads: dict,
                  prefix: str) -> np.ndarray:
    d = x.shape[-1]
    dfused = np.concatenate(
        [merge_heads(dq), merge_heads(dk), merge_heads(dv)], axis=-1)
    w = np.concatenate([params[prefix + "wq"], params[prefix + "wk"],
                        params[prefix + "wv"]], axis=1)
    dx, dw = _proj_grads(x, dfused, w)
    accumulate(grads, prefix + "wq", dw[:, :d])
    accumulate(grads, prefix + "wk", dw[:, d:2 * d])
    accumulate(grads, prefix + "wv", dw[:, 2 * d:])
    return dx


def _residual_norm(x, proj, mask, params, prefix):
    m3 = mask[:, :, None]
    y = x + proj * m3
    out, lnc = layernorm_forward(y, params[prefix + "ln_g"], params[prefix + "ln_b"])
    out *= m3
    return out, lnc


def _residual_norm_backward(dout, lnc, mask, params, grads, prefix):
    m3 = mask[:, :, None]
    dy, dg, dbi = layernorm_backward(dout * m3, lnc, params[prefix + "ln_g"])
    accumulate(grads, prefix + "ln_g", dg)
    accumulate(grads, prefix + "ln_b", dbi)
    return dy, dy * m3


def inner_forward(x: np.ndarray, mask: np.ndarray, params: dict,
                  prefix: str, n_heads: int):
    dh = x.shape[-1] // n_heads
    scale = 1.0 / np.sqrt(dh)
    q, k, v = _qkv(x, params, prefix, n_heads)
    logits = q @ k.swapaxes(-1, -2) * scale                # (H, R, Le, Le)
    p, cnt = kernels.shared_row_softmax_fwd(
        np.ascontiguousarray(logits), mask)                # (H, R, Le, Le)
    merged = merge_heads(p @ v)
    proj = _proj(merged, params[prefix + "wo"])
    out, lnc = _residual_norm(x, proj, mask, params, prefix)
    cache = (x, q, k, v, p, cnt, merged, lnc, scale)
    return out, cache


def inner_backward(dout: np.ndarray, cache, mask: np.ndarray, params: dict,
                   grads: dict, prefix: str, n_heads: int) -> np.ndarray:
    x, q, k, v, p, cnt, merged, lnc, scale = cache
    dx, dproj = _residual_norm_backward(dout, lnc, mask, params, grads, prefix)
    dmerged, dwo = _proj_grads(merged, dproj, params[prefix + "wo"])
    accumulate(grads, prefix + "wo", dwo)
    dctx = split_heads(dmerged, n_heads)
    dp = dctx @ v.swapaxes(-1, -2)
    dv = p.swapaxes(-1, -2) @ dctx
    dlogits = kernels.shared_row_softmax_bwd(p, np.ascontiguousarray(dp),
                                             cnt, mask)
    dq = dlogits @ k * scale
    dk = dlogits.swapaxes(-1, -2) @ q * scale
    dx += _qkv_backward(x, dq, dk, dv, params, grads, prefix)
    return dx


def inter_forward(x: np.ndarray, mask: np.ndarray, params: dict,
                  prefix: str, n_heads: int):
    dh = x.shape[-1] // n_heads
    scale = 1.0 / np.sqrt(dh)
    q, k, v = _qkv(x, params, prefix, n_heads)
    # (H, Le, R, dh): attention runs over rows within each column
    q = np.ascontiguousarray(q.transpose(0, 2, 1, 3))
    k = np.ascontiguousarray(k.transpose(0, 2, 1, 3))
    v = np.ascontiguousarray(v.transpose(0, 2, 1, 3))
    logits = q @ k.swapaxes(-1, -2) * scale              # (H, Le, R, R)
    key_mask = mask.T[None, :, None, :]                  # (1, Le, 1, R)
    p = masked_softmax(logits, key_mask)
    merged = merge_heads((p @ v).transpose(0, 2, 1, 3))
    proj = _proj(merged, params[prefix + "wo"])
    out, lnc = _residual_norm(x, proj, mask, params, prefix)
    cache = (x, q, k, v, p, merged, lnc, scale)
    return out, cache


def inter_backward(dout: np.ndarray, cache, mask: np.ndarray, params: dict,
                   grads: dict, prefix: str, n_heads: int) -> np.ndarray:
    x, q, k, v, p, merged, lnc, scale = cache
    dx, dproj = _residual_norm_backward(dout, lnc, mask, params, grads, prefix)
    dmerged, dwo = _proj_grads(merged, dproj, params[prefix + "wo"])
    accumulate(grads, prefix + "wo", dwo)
    dctx = split_heads(dmerged, n_heads).transpose(0, 2, 1, 3)  # (H, Le, R, dh)
    dp = dctx @ v.swapaxes(-1, -2)
    dv = p.swapaxes(-1, -2) @ dctx
    dlog = softmax_backward(p, dp)
    dq = dlog @ k * scale
    dk = dlog.swapaxes(-1, -2) @ q * scale
    dx += _qkv_backward(x, dq.transpose(0, 2, 1, 3), dk.transpose(0, 2, 1, 3),
                        dv.transpose(0, 2, 1, 3), params, grads, prefix)
    return dx


def ffn_forward(x: np.ndarray, mask: np.ndarray, params: dict, prefix: str):
    y1 = _proj(x, params[prefix + "w1"]) + params[prefix + "b1"]
    a, gcache = gelu_forward(y1)
    y2 = _proj(a, params[prefix + "w2"]) + params[prefix + "b2"]
    out, lnc = _residual_norm(x, y2, mask, params, prefix)
    return out, (x, a, gcache, lnc)


def ffn_backward(dout: np.ndarray, cache, mask: np.ndarray, params: dict,
                 grads: dict, prefix: str) -> np.ndarray:
    x, a, gcache, lnc = cache
    dx, dy2 = _residual_norm_backward(dout, lnc, mask, params, grads, prefix)
    da, dw2 = _proj_grads(a, dy2, params[prefix + "w2"])
    accumulate(grads, prefix + "w2", dw2)
    accumulate(grads, prefix + "b2", dy2.sum(axis=(0, 1)))
    dy1 = gelu_backward(da, gcache)
    dxc, dw1 = _proj_grads(x, dy1, params[prefix + "w1"])
    accumulate(grads, prefix + "w1", dw1)
    accumulate(grads, prefix + "b1", dy1.sum(axis=(0, 1)))
    dx += dxc
    return dx


def codeformer_forward(x: np.ndarray, mask: np.ndarray, params: dict,
                       n_blocks: int, n_heads: int):
    caches = []
    for i in range(n_blocks):
        x, c_inner = inner_forward(x, mask, params, f"cf.{i}.inner.", n_heads)
        x, c_inter = inter_forward(x, mask, params, f"cf.{i}.inter.", n_heads)
        x, c_ffn = ffn_forward(x, mask, params, f"cf.{i}.ffn.")
        caches.append((c_inner, c_inter, c_ffn))
    return x, caches


def codeformer_backward(dout: np.ndarray, caches, mask: np.ndarray,
                        params: dict, grads: dict, n_heads: int) -> np.ndarray:
    for i in range(len(caches) - 1, -1, -1):
        c_inner, c_inter, c_ffn = caches[i]
        dout = ffn_backward(dout, c_ffn, mask, params, grads, f"cf.{i}.ffn.")
        dout = inter_backward(dout, c_inter, mask, params, grads,
                              f"cf.{i}.inter.", n_heads)
        dout = inner_backward(dout, c_inner, mask, params, grads,
                              f"cf.{i}.inner.", n_heads)
    return dout
