"""Parameter initialization and the end-to-end encode/score pipeline.

Parameters live in a flat dict name -> ndarray so the optimizer, gradient
checker, and checkpoint format all treat them uniformly.
"""

from __future__ import annotations

from typing import Dict, Optional, Tuple

import numpy as np

from ..config import Config
from ..embeddings import PAD_ID, Vocabulary
from ..lexer import N_TOKEN_TYPES
from ..msa import CodeMSA
from .codeformer import codeformer_backward, codeformer_forward
from .enhancer import MsaInput, enhancer_backward, enhancer_forward
from .scorer import (
    COSINE, EUCLIDEAN, LATE_INTERACTION, PooledFragment, Score,
    fragment_measure_backward, fragment_measure_with_cache,
    late_interaction_backward, late_interaction_with_cache, pool_backward,
    pool_forward,
)


def init_params(cfg: Config, vocab_size: int, seed: int,
                embed_table: Optional[np.ndarray] = None) -> Dict[str, np.ndarray]:
    """Seeded parameter dict. Projections are uniform scaled by 1/sqrt(d);
    biases zero; layer-norm gains one; the PAD embedding row is zero."""
    dtype = np.dtype(cfg.dtype)
    rng = np.random.default_rng(seed)
    d, dff = cfg.d, cfg.d_ff
    scale = 1.0 / np.sqrt(d)

    def uniform(*shape):
        return (rng.uniform(-1.0, 1.0, size=shape) * scale).astype(dtype)

    params: Dict[str, np.ndarray] = {}
    if embed_table is not None:
        if embed_table.shape != (vocab_size, d):
            raise ValueError(f"embedding table shape {embed_table.shape} != ({vocab_size}, {d})")
        params["token_embed"] = embed_table.astype(dtype).copy()
    else:
        params["token_embed"] = uniform(vocab_size, d)
    params["token_embed"][PAD_ID] = 0.0

    params["enh.type_embed"] = uniform(N_TOKEN_TYPES, d)
    params["enh.pos_embed"] = uniform(cfg.L, d)
    params["enh.proj_w"] = uniform(N_TOKEN_TYPES, d, d)
    params["enh.proj_b"] = np.zeros((N_TOKEN_TYPES, d), dtype=dtype)
    for name in ("wq", "wk", "wv", "wo"):
        params[f"enh.attn_{name}"] = uniform(d, d)
    params["enh.ln_g"] = np.ones(d, dtype=dtype)
    params["enh.ln_b"] = np.zeros(d, dtype=dtype)

    for i in range(cfg.B):
        for part in ("inner", "inter"):
            for name in ("wq", "wk", "wv", "wo"):
                params[f"cf.{i}.{part}.{name}"] = uniform(d, d)
            params[f"cf.{i}.{part}.ln_g"] = np.ones(d, dtype=dtype)
            params[f"cf.{i}.{part}.ln_b"] = np.zeros(d, dtype=dtype)
        params[f"cf.{i}.ffn.w1"] = uniform(d, dff)
        params[f"cf.{i}.ffn.b1"] = np.zeros(dff, dtype=dtype)
        params[f"cf.{i}.ffn.w2"] = uniform(dff, d)
        params[f"cf.{i}.ffn.b2"] = np.zeros(d, dtype=dtype)
        params[f"cf.{i}.ffn.ln_g"] = np.ones(d, dtype=dtype)
        params[f"cf.{i}.ffn.ln_b"] = np.zeros(d, dtype=dtype)

    params["bce.w"] = np.asarray(4.0, dtype=dtype)
    params["bce.b"] = np.asarray(0.0, dtype=dtype)
    return params


def prepare_input(msa: CodeMSA, vocab: Vocabulary) -> MsaInput:
    """Truncate to the longest valid prefix and map texts to vocab ids."""
    lengths = msa.row_lengths()
    le = max(int(lengths.max()), 1)
    ids = np.full((msa.R, le), PAD_ID, dtype=np.int32)
    for r in range(msa.R):
        texts = msa.texts[r]
        for c in range(int(lengths[r])):
            ids[r, c] = vocab.id_of(texts[c])
    return MsaInput(ids=ids,
                    types=msa.types[:, :le].copy(),
                    valid=msa.valid[:, :le].copy())


def encode_forward(inp: MsaInput, params: Dict[str, np.ndarray], cfg: Config
                   ) -> Tuple[PooledFragment, tuple]:
    h, enh_cache = enhancer_forward(inp, params, cfg.enhancer_mode,
                                    np.dtype(cfg.dtype))
    h, cf_caches = codeformer_forward(h, inp.valid, params, cfg.B, cfg.H)
    fragment, pool_cache = pool_forward(h, inp.valid)
    return fragment, (enh_cache, cf_caches, pool_cache)


def encode_backward(dvec: np.ndarray, cache, inp: MsaInput,
                    params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray],
                    cfg: Config) -> None:
    enh_cache, cf_caches, pool_cache = cache
    dh = pool_backward(dvec, pool_cache)
    dh = codeformer_backward(dh, cf_caches, inp.valid, params, grads, cfg.H)
    enhancer_backward(dh, enh_cache, inp, params, grads, cfg.freeze_embeddings)


def pair_forward(inp1: MsaInput, inp2: MsaInput, params: Dict[str, np.ndarray],
                 cfg: Config):
    f1, c1 = encode_forward(inp1, params, cfg)
    f2, c2 = encode_forward(inp2, params, cfg)
    if cfg.measure == LATE_INTERACTION:
        score, mcache = late_interaction_with_cache(f1.vectors, f2.vectors,
                                                    cfg.symmetrize)
    elif cfg.measure in (COSINE, EUCLIDEAN):
        score, mcache = fragment_measure_with_cache(f1.vectors, f2.vectors,
                                                    cfg.measure)
    else:
        raise ValueError(f"unknown measure {cfg.measure!r}")
    return score, (c1, c2, mcache, f1, f2)


def pair_backward(dvalue: float, cache, inp1: MsaInput, inp2: MsaInput,
                  params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray],
                  cfg: Config) -> None:
    c1, c2, mcache, _f1, _f2 = cache
    if cfg.measure == LATE_INTERACTION:
        dv1, dv2 = late_interaction_backward(dvalue, mcache)
    else:
        dv1, dv2 = fragment_measure_backward(dvalue, mcache)
    encode_backward(dv1, c1, inp1, params, grads, cfg)
    encode_backward(dv2, c2, inp2, params, grads, cfg)


def score_pair(inp1: MsaInput, inp2: MsaInput, params: Dict[str, np.ndarray],
               cfg: Config) -> Score:
    score, _ = pair_forward(inp1, inp2, params, cfg)
    return score
