"""Pure-numpy kernel implementations: the fallback backend.

Semantically identical to the numba backend (same update order, same
tie-breaking); arithmetic may differ at machine precision where numpy
reduces in a different order.
"""

import numpy as np

_MIN_BLOCK = 64

_GELU_C = 0.7978845608028654   # sqrt(2/pi)
_GELU_A = 0.044715


def gelu_fwd(x):
    """Tanh-form GELU on a 2D block; returns (y, tanh_cache)."""
    x2 = x * x
    t = np.tanh(_GELU_C * (x + _GELU_A * (x2 * x)))
    y = 0.5 * x * (1.0 + t)
    return y, t


def gelu_bwd(dy, x, t):
    du = _GELU_C * (1.0 + 3.0 * _GELU_A * (x * x))
    return dy * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du)


def layernorm_fwd(x, gain, bias, eps):
    """Rows of a 2D block normalized to zero mean / unit variance, then
    scaled and shifted; returns (y, xhat, inv_std)."""
    mu = x.mean(axis=1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + np.asarray(eps, dtype=x.dtype))
    xhat = xc * inv
    y = gain * xhat + bias
    return y, xhat, inv


def layernorm_bwd(dy, xhat, inv, gain):
    dgain = (dy * xhat).sum(axis=0)
    dbias = dy.sum(axis=0)
    dxhat = dy * gain
    m1 = dxhat.mean(axis=1, keepdims=True)
    m2 = (dxhat * xhat).mean(axis=1, keepdims=True)
    dx = inv * (dxhat - m1 - xhat * m2)
    return dx, dgain, dbias


def shared_row_softmax_fwd(logits, mask):
    """Row-attention probabilities from a shared per-head logit map."""
    pair = mask[:, :, None] & mask[:, None, :]
    cnt = pair.sum(axis=0).astype(np.int64)
    shared = (logits * pair).sum(axis=1)
    shared = np.divide(shared, cnt, out=shared,
                       where=cnt > 0)
    neg = np.asarray(-np.inf, dtype=logits.dtype)
    z = np.where(mask[None, :, None, :], shared[:, None, :, :], neg)
    m = z.max(axis=-1, keepdims=True)
    safe_m = np.where(np.isfinite(m), m, np.asarray(0.0, dtype=logits.dtype))
    e = np.exp(z - safe_m)
    e = np.where(mask[None, :, None, :], e, np.asarray(0.0, dtype=logits.dtype))
    s = e.sum(axis=-1, keepdims=True)
    p = np.where(s > 0, e / np.where(s > 0, s, 1.0),
                 np.asarray(0.0, dtype=logits.dtype))
    return p, cnt


def shared_row_softmax_bwd(p, dp, cnt, mask):
    inner = (p * dp).sum(axis=-1, keepdims=True)
    dshared = (p * (dp - inner)).sum(axis=1)
    pair = (mask[:, :, None] & mask[:, None, :]).astype(p.dtype)
    ratio = np.divide(pair, cnt, out=pair, where=cnt > 0)
    return dshared[:, None, :, :] * ratio


def accumulate_index_scores(q_buckets, q_counts, idx_buckets, idx_offsets,
                            post_funcs, post_counts, n_functions):
    """Dot products of a query n-gram vector against every indexed function.

    Counts are integers stored in float64, so every product and partial sum
    is exact and the result is independent of accumulation order.
    """
    scores = np.zeros(n_functions, dtype=np.float64)
    pos = np.searchsorted(idx_buckets, q_buckets)
    for i, p in enumerate(pos):
        if p < len(idx_buckets) and idx_buckets[p] == q_buckets[i]:
            lo, hi = idx_offsets[p], idx_offsets[p + 1]
            np.add.at(scores, post_funcs[lo:hi], q_counts[i] * post_counts[lo:hi])
    return scores


def min_distances(a, b):
    """Per-row minimum Euclidean distance from rows of `a` to rows of `b`.

    Returns (mins, argmins); ties keep the first index. Distances come from
    explicit differences (not a Gram-matrix identity) so identical rows give
    exactly 0.0.
    """
    n1 = a.shape[0]
    mins = np.empty(n1, dtype=a.dtype)
    argmins = np.empty(n1, dtype=np.int64)
    for lo in range(0, n1, _MIN_BLOCK):
        hi = min(lo + _MIN_BLOCK, n1)
        diff = a[lo:hi, None, :] - b[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        idx = np.argmin(d2, axis=1)
        argmins[lo:hi] = idx
        mins[lo:hi] = np.sqrt(d2[np.arange(hi - lo), idx])
    return mins, argmins


def sgns_epoch(syn0, syn1, centers, contexts, negatives, n_neg,
               alpha_start, alpha_end, t0, t_total):
    """One pass of skip-gram negative-sampling updates, in place.

    Python loop over pairs with numpy vector math per step; step size decays
    linearly over the global schedule [t0, t_total).
    """
    denom = max(t_total - 1, 1)
    for t in range(len(centers)):
        alpha = alpha_start + (alpha_end - alpha_start) * ((t0 + t) / denom)
        c = centers[t]
        o = contexts[t]
        v = syn0[c].astype(np.float64)
        grad_v = np.zeros_like(v)
        f = 1.0 / (1.0 + np.exp(-float(v @ syn1[o].astype(np.float64))))
        g = (1.0 - f) * alpha
        grad_v += g * syn1[o]
        syn1[o] += (g * v).astype(syn1.dtype)
        for j in range(n_neg):
            k = negatives[t * n_neg + j]
            if k == o:
                continue
            f = 1.0 / (1.0 + np.exp(-float(v @ syn1[k].astype(np.float64))))
            g = (0.0 - f) * alpha
            grad_v += g * syn1[k]
            syn1[k] += (g * v).astype(syn1.dtype)
        syn0[c] += grad_v.astype(syn0.dtype)
