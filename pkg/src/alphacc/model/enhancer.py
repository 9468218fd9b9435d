"""Token semantic enhancer: embedding fusion, per-type projection, and
attention over per-row type summaries.

Parameter names use the "enh." prefix. The three stages keep the mask
invariant: invalid cells stay exactly zero and never feed any summary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .ops import (
    accumulate, layernorm_backward, layernorm_forward, masked_softmax,
    softmax_backward,
)

MODES = ("full", "attention_only", "off")


@dataclass
class MsaInput:
    """Vocab ids / type ids / validity for one MSA, truncated to the
    longest valid prefix across rows."""

    ids: np.ndarray    # int32 (R, Le)
    types: np.ndarray  # int8  (R, Le)
    valid: np.ndarray  # bool  (R, Le)

    @property
    def mask3(self) -> np.ndarray:
        return self.valid[:, :, None]


def embed_forward(inp: MsaInput, params: dict, dtype) -> np.ndarray:
    le = inp.ids.shape[1]
    x = (params["token_embed"][inp.ids]
         + params["enh.type_embed"][inp.types]
         + params["enh.pos_embed"][:le][None, :, :])
    return np.where(inp.mask3, x, np.asarray(0.0, dtype=dtype))


def embed_backward(dx: np.ndarray, inp: MsaInput, params: dict, grads: dict,
                   freeze_embeddings: bool = False) -> None:
    rows, cols = np.nonzero(inp.valid)
    flat = dx[rows, cols]
    if not freeze_embeddings:
        g_tok = grads.setdefault("token_embed",
                                 np.zeros_like(params["token_embed"]))
        np.add.at(g_tok, inp.ids[rows, cols], flat)
    g_typ = grads.setdefault("enh.type_embed",
                             np.zeros_like(params["enh.type_embed"]))
    np.add.at(g_typ, inp.types[rows, cols], flat)
    g_pos = grads.setdefault("enh.pos_embed",
                             np.zeros_like(params["enh.pos_embed"]))
    np.add.at(g_pos, cols, flat)


def project_forward(x: np.ndarray, inp: MsaInput, params: dict):
    w = params["enh.proj_w"]
    b = params["enh.proj_b"]
    h = np.zeros_like(x)
    groups: List[Tuple[int, Tuple[np.ndarray, np.ndarray]]] = []
    for t in np.unique(inp.types[inp.valid]):
        sel = inp.valid & (inp.types == t)
        idx = np.nonzero(sel)
        h[idx] = x[idx] @ w[t] + b[t]
        groups.append((int(t), idx))
    return h, (x, groups)


def project_backward(dh: np.ndarray, cache, params: dict, grads: dict) -> np.ndarray:
    x, groups = cache
    w = params["enh.proj_w"]
    dw = grads.setdefault("enh.proj_w", np.zeros_like(w))
    db = grads.setdefault("enh.proj_b", np.zeros_like(params["enh.proj_b"]))
    dx = np.zeros_like(x)
    for t, idx in groups:
        g = dh[idx]
        dw[t] += x[idx].T @ g
        db[t] += g.sum(axis=0)
        dx[idx] = g @ w[t].T
    return dx


def _type_groups(inp: MsaInput):
    """Per row: list of (cell indices) per present type, padded summaries."""
    r_count = inp.valid.shape[0]
    groups = []
    t_max = 1
    for r in range(r_count):
        vmask = inp.valid[r]
        tr = inp.types[r]
        row = [np.nonzero(vmask & (tr == t))[0] for t in np.unique(tr[vmask])]
        t_max = max(t_max, len(row))
        groups.append(row)
    return groups, t_max


def attention_forward(h: np.ndarray, inp: MsaInput, params: dict):
    """Each valid cell attends over its row's per-type mean vectors.

    Summaries are padded to the widest row and masked, so all rows go
    through one batched attention."""
    wq, wk, wv, wo = (params["enh.attn_wq"], params["enh.attn_wk"],
                      params["enh.attn_wv"], params["enh.attn_wo"])
    r_count, le, d = h.shape
    scale = 1.0 / np.sqrt(d)
    groups, t_max = _type_groups(inp)
    u = np.zeros((r_count, t_max, d), dtype=h.dtype)
    umask = np.zeros((r_count, t_max), dtype=bool)
    for r, row in enumerate(groups):
        for gi, cells in enumerate(row):
            u[r, gi] = h[r, cells].mean(axis=0)
            umask[r, gi] = True
    q = (h.reshape(-1, d) @ wq).reshape(r_count, le, d)
    k = (u.reshape(-1, d) @ wk).reshape(r_count, t_max, d)
    v = (u.reshape(-1, d) @ wv).reshape(r_count, t_max, d)
    p = masked_softmax(q @ k.swapaxes(-1, -2) * scale, umask[:, None, :])
    att = p @ v
    o = (att.reshape(-1, d) @ wo).reshape(h.shape)
    yn, lnc = layernorm_forward(h + o, params["enh.ln_g"], params["enh.ln_b"])
    out = yn * inp.mask3
    return out, (h, groups, u, umask, q, k, v, p, att, lnc, scale)


def attention_backward(dout: np.ndarray, cache, inp: MsaInput, params: dict,
                       grads: dict) -> np.ndarray:
    h, groups, u, umask, q, k, v, p, att, lnc, scale = cache
    wq, wk, wv, wo = (params["enh.attn_wq"], params["enh.attn_wk"],
                      params["enh.attn_wv"], params["enh.attn_wo"])
    r_count, le, d = h.shape
    dy, dg, dbi = layernorm_backward(dout * inp.mask3, lnc, params["enh.ln_g"])
    accumulate(grads, "enh.ln_g", dg)
    accumulate(grads, "enh.ln_b", dbi)
    dh = dy.copy()
    do2 = dy.reshape(-1, d)
    accumulate(grads, "enh.attn_wo", att.reshape(-1, d).T @ do2)
    datt = (do2 @ wo.T).reshape(r_count, le, d)
    dp = datt @ v.swapaxes(-1, -2)
    dv = p.swapaxes(-1, -2) @ datt
    dlog = softmax_backward(p, dp)
    dq = dlog @ k * scale
    dk = dlog.swapaxes(-1, -2) @ q * scale
    accumulate(grads, "enh.attn_wq", h.reshape(-1, d).T @ dq.reshape(-1, d))
    dh += (dq.reshape(-1, d) @ wq.T).reshape(h.shape)
    u2 = u.reshape(-1, d)
    accumulate(grads, "enh.attn_wk", u2.T @ dk.reshape(-1, d))
    accumulate(grads, "enh.attn_wv", u2.T @ dv.reshape(-1, d))
    du = dk @ wk.T + dv @ wv.T
    for r, row in enumerate(groups):
        for gi, cells in enumerate(row):
            dh[r, cells] += du[r, gi] / len(cells)
    return dh


def enhancer_forward(inp: MsaInput, params: dict, mode: str, dtype):
    """Full fusion pipeline; `mode` reproduces the component ablations."""
    if mode not in MODES:
        raise ValueError(f"unknown enhancer mode {mode!r}")
    x = embed_forward(inp, params, dtype)
    cache = {"mode": mode}
    if mode == "off":
        return x, cache
    if mode == "full":
        h, cache["project"] = project_forward(x, inp, params)
    else:
        h = x
    out, cache["attention"] = attention_forward(h, inp, params)
    return out, cache


def enhancer_backward(dout: np.ndarray, cache, inp: MsaInput, params: dict,
                      grads: dict, freeze_embeddings: bool = False) -> None:
    mode = cache["mode"]
    if mode == "off":
        embed_backward(dout, inp, params, grads, freeze_embeddings)
        return
    dh = attention_backward(dout, cache["attention"], inp, params, grads)
    if mode == "full":
        dx = project_backward(dh, cache["project"], params, grads)
    else:
        dx = dh
    embed_backward(dx, inp, params, grads, freeze_embeddings)
