"""Differentiable primitives used by the encoder stages.

Every forward returns (output, cache); the matching backward consumes the
upstream gradient plus the cache. All math is plain numpy so the whole
network runs in float32 for training and float64 for gradient checking.
"""

from __future__ import annotations

import numpy as np

from .. import kernels

LN_EPS = 1e-5


def layernorm_forward(x: np.ndarray, gain: np.ndarray, bias: np.ndarray):
    shape = x.shape
    x2d = np.ascontiguousarray(x).reshape(-1, shape[-1])
    y, xhat, inv = kernels.layernorm_fwd(x2d, gain, bias, LN_EPS)
    return y.reshape(shape), (xhat, inv, shape)


def layernorm_backward(dy: np.ndarray, cache, gain: np.ndarray):
    xhat, inv, shape = cache
    dy2d = np.ascontiguousarray(dy).reshape(-1, shape[-1])
    dx, dgain, dbias = kernels.layernorm_bwd(dy2d, xhat, inv, gain)
    return dx.reshape(shape), dgain, dbias


def gelu_forward(x: np.ndarray):
    shape = x.shape
    x2d = np.ascontiguousarray(x).reshape(-1, shape[-1])
    y, t = kernels.gelu_fwd(x2d)
    return y.reshape(shape), (x2d, t, shape)


def gelu_backward(dy: np.ndarray, cache):
    x2d, t, shape = cache
    dy2d = np.ascontiguousarray(dy).reshape(-1, shape[-1])
    return kernels.gelu_bwd(dy2d, x2d, t).reshape(shape)


def softmax_last(z: np.ndarray) -> np.ndarray:
    m = z.max(axis=-1, keepdims=True)
    e = np.exp(z - m)
    return e / e.sum(axis=-1, keepdims=True)


def masked_softmax(logits: np.ndarray, key_mask: np.ndarray) -> np.ndarray:
    """Softmax over the last axis restricted to key_mask; empty rows give zeros."""
    z = np.where(key_mask, logits, np.asarray(-np.inf, dtype=logits.dtype))
    m = z.max(axis=-1, keepdims=True)
    safe_m = np.where(np.isfinite(m), m, np.asarray(0.0, dtype=logits.dtype))
    e = np.exp(z - safe_m)
    e = np.where(key_mask, e, np.asarray(0.0, dtype=logits.dtype))
    s = e.sum(axis=-1, keepdims=True)
    return np.where(s > 0, e / np.where(s > 0, s, 1.0), np.asarray(0.0, dtype=logits.dtype))


def softmax_backward(p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    # Rows that were fully masked have p == 0, so they stay zero here.
    inner = (p * dp).sum(axis=-1, keepdims=True)
    return p * (dp - inner)


def split_heads(x: np.ndarray, n_heads: int) -> np.ndarray:
    """(R, L, d) -> (H, R, L, d/H)."""
    r, l, d = x.shape
    return x.reshape(r, l, n_heads, d // n_heads).transpose(2, 0, 1, 3)


def merge_heads(x: np.ndarray) -> np.ndarray:
    """(H, R, L, dh) -> (R, L, d)."""
    h, r, l, dh = x.shape
    return x.transpose(1, 2, 0, 3).reshape(r, l, h * dh)


def accumulate(grads: dict, name: str, value: np.ndarray) -> None:
    existing = grads.get(name)
    if existing is None:
        grads[name] = value.copy() if isinstance(value, np.ndarray) else value
    else:
        existing += value
