"""Numba-compiled kernel implementations: the default backend."""

import math

import numpy as np
from numba import njit

_GELU_C = 0.7978845608028654   # sqrt(2/pi)
_GELU_A = 0.044715


@njit(cache=True, fastmath=True, nogil=True)
def gelu_fwd(x):
    n, d = x.shape
    y = np.empty_like(x)
    t = np.empty_like(x)
    for i in range(n):
        for j in range(d):
            v = x[i, j]
            tv = math.tanh(_GELU_C * (v + _GELU_A * v * v * v))
            t[i, j] = tv
            y[i, j] = 0.5 * v * (1.0 + tv)
    return y, t


@njit(cache=True, fastmath=True, nogil=True)
def gelu_bwd(dy, x, t):
    n, d = x.shape
    dx = np.empty_like(x)
    for i in range(n):
        for j in range(d):
            v = x[i, j]
            tv = t[i, j]
            du = _GELU_C * (1.0 + 3.0 * _GELU_A * v * v)
            dx[i, j] = dy[i, j] * (0.5 * (1.0 + tv)
                                   + 0.5 * v * (1.0 - tv * tv) * du)
    return dx


@njit(cache=True, nogil=True)
def shared_row_softmax_fwd(logits, mask):
    """Row-attention probabilities from a shared per-head logit map.

    logits: (H, R, Le, Le); mask: (R, Le) validity. The shared map averages
    logits over rows valid at both query and key column; each row then
    softmaxes the shared map over its own valid keys.
    """
    h_count, r_count, le, _ = logits.shape
    shared = np.zeros((h_count, le, le), dtype=logits.dtype)
    cnt = np.zeros((le, le), dtype=np.int64)
    for r in range(r_count):
        for i in range(le):
            if mask[r, i]:
                for j in range(le):
                    if mask[r, j]:
                        cnt[i, j] += 1
    for h in range(h_count):
        for r in range(r_count):
            for i in range(le):
                if mask[r, i]:
                    for j in range(le):
                        if mask[r, j]:
                            shared[h, i, j] += logits[h, r, i, j]
    for h in range(h_count):
        for i in range(le):
            for j in range(le):
                if cnt[i, j] > 0:
                    shared[h, i, j] /= cnt[i, j]
    p = np.zeros_like(logits)
    for h in range(h_count):
        for r in range(r_count):
            for i in range(le):
                m = -np.inf
                for j in range(le):
                    if mask[r, j] and shared[h, i, j] > m:
                        m = shared[h, i, j]
                if m == -np.inf:
                    continue
                s = 0.0
                for j in range(le):
                    if mask[r, j]:
                        e = math.exp(shared[h, i, j] - m)
                        p[h, r, i, j] = e
                        s += e
                for j in range(le):
                    if mask[r, j]:
                        p[h, r, i, j] /= s
    return p, cnt


@njit(cache=True, nogil=True)
def shared_row_softmax_bwd(p, dp, cnt, mask):
    """Gradient through the per-row softmax, the row-mean, and the pair
    masking; returns d(logits)."""
    h_count, r_count, le, _ = p.shape
    dlogits = np.zeros_like(p)
    dshared = np.zeros((h_count, le, le), dtype=p.dtype)
    for h in range(h_count):
        for r in range(r_count):
            for i in range(le):
                inner = 0.0
                for j in range(le):
                    inner += p[h, r, i, j] * dp[h, r, i, j]
                for j in range(le):
                    pv = p[h, r, i, j]
                    if pv != 0.0:
                        dshared[h, i, j] += pv * (dp[h, r, i, j] - inner)
    for h in range(h_count):
        for r in range(r_count):
            for i in range(le):
                if mask[r, i]:
                    for j in range(le):
                        if mask[r, j] and cnt[i, j] > 0:
                            dlogits[h, r, i, j] = dshared[h, i, j] / cnt[i, j]
    return dlogits


@njit(cache=True, nogil=True)
def layernorm_fwd(x, gain, bias, eps):
    n, d = x.shape
    y = np.empty_like(x)
    xhat = np.empty_like(x)
    inv = np.empty((n, 1), dtype=x.dtype)
    for i in range(n):
        mu = 0.0
        for j in range(d):
            mu += x[i, j]
        mu /= d
        var = 0.0
        for j in range(d):
            diff = x[i, j] - mu
            var += diff * diff
        var /= d
        iv = 1.0 / math.sqrt(var + eps)
        inv[i, 0] = iv
        for j in range(d):
            h = (x[i, j] - mu) * iv
            xhat[i, j] = h
            y[i, j] = gain[j] * h + bias[j]
    return y, xhat, inv


@njit(cache=True, nogil=True)
def layernorm_bwd(dy, xhat, inv, gain):
    n, d = dy.shape
    dx = np.empty_like(dy)
    dgain = np.zeros(d, dtype=dy.dtype)
    dbias = np.zeros(d, dtype=dy.dtype)
    for i in range(n):
        m1 = 0.0
        m2 = 0.0
        for j in range(d):
            g = dy[i, j]
            h = xhat[i, j]
            dgain[j] += g * h
            dbias[j] += g
            dh = g * gain[j]
            m1 += dh
            m2 += dh * h
        m1 /= d
        m2 /= d
        iv = inv[i, 0]
        for j in range(d):
            dx[i, j] = iv * (dy[i, j] * gain[j] - m1 - xhat[i, j] * m2)
    return dx, dgain, dbias


@njit(cache=True, nogil=True)
def accumulate_index_scores(q_buckets, q_counts, idx_buckets, idx_offsets,
                            post_funcs, post_counts, n_functions):
    scores = np.zeros(n_functions, dtype=np.float64)
    nb = len(idx_buckets)
    for i in range(len(q_buckets)):
        target = q_buckets[i]
        lo, hi = 0, nb
        while lo < hi:
            mid = (lo + hi) // 2
            if idx_buckets[mid] < target:
                lo = mid + 1
            else:
                hi = mid
        if lo < nb and idx_buckets[lo] == target:
            qc = q_counts[i]
            for p in range(idx_offsets[lo], idx_offsets[lo + 1]):
                scores[post_funcs[p]] += qc * post_counts[p]
    return scores


@njit(cache=True, nogil=True)
def min_distances(a, b):
    n1, d = a.shape
    n2 = b.shape[0]
    mins = np.empty(n1, dtype=a.dtype)
    argmins = np.empty(n1, dtype=np.int64)
    for i in range(n1):
        best = np.inf
        best_j = 0
        for j in range(n2):
            acc = 0.0
            for k in range(d):
                diff = a[i, k] - b[j, k]
                acc += diff * diff
            if acc < best:
                best = acc
                best_j = j
        mins[i] = math.sqrt(best)
        argmins[i] = best_j
    return mins, argmins


@njit(cache=True, nogil=True)
def sgns_epoch(syn0, syn1, centers, contexts, negatives, n_neg,
               alpha_start, alpha_end, t0, t_total):
    d = syn0.shape[1]
    denom = max(t_total - 1, 1)
    grad_v = np.zeros(d, dtype=np.float64)
    for t in range(len(centers)):
        alpha = alpha_start + (alpha_end - alpha_start) * ((t0 + t) / denom)
        c = centers[t]
        o = contexts[t]
        for k in range(d):
            grad_v[k] = 0.0
        for j in range(n_neg + 1):
            if j == 0:
                target = o
                label = 1.0
            else:
                target = negatives[t * n_neg + (j - 1)]
                if target == o:
                    continue
                label = 0.0
            dot = 0.0
            for k in range(d):
                dot += syn0[c, k] * syn1[target, k]
            f = 1.0 / (1.0 + math.exp(-dot))
            g = (label - f) * alpha
            for k in range(d):
                grad_v[k] += g * syn1[target, k]
            for k in range(d):
                syn1[target, k] += g * syn0[c, k]
        for k in range(d):
            syn0[c, k] += grad_v[k]
