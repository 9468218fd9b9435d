"""Pool encoded MSAs into per-token fragment vectors and score pairs.

Late interaction is the mean over one fragment's tokens of the minimum
Euclidean distance to the other fragment's tokens (optionally symmetrized);
cosine and euclidean collapse each fragment to a single pooled vector
first. Distances between unit vectors live in [0, 2].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .. import kernels
from ..errors import EmptyFragmentError

DISTANCE_LIKE = "distance_like"
SIMILARITY_LIKE = "similarity_like"

LATE_INTERACTION = "late_interaction"
COSINE = "cosine"
EUCLIDEAN = "euclidean"
MEASURES = (LATE_INTERACTION, COSINE, EUCLIDEAN)

_NORM_EPS = 1e-12


def polarity_of(measure: str) -> str:
    return SIMILARITY_LIKE if measure == COSINE else DISTANCE_LIKE


@dataclass
class PooledFragment:
    vectors: np.ndarray        # (n, d), unit rows
    column_indices: np.ndarray  # (n,) MSA columns the vectors came from
    flagged: np.ndarray        # (n,) rows that fell back to e1 (zero pooled vector)


@dataclass
class Score:
    value: float
    polarity: str


def _renormalize(pooled: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    norms = np.linalg.norm(pooled, axis=-1)
    flagged = norms < _NORM_EPS
    safe = np.where(flagged, 1.0, norms)
    vectors = pooled / safe[..., None]
    if flagged.any():
        vectors = vectors.copy()
        vectors[flagged] = 0.0
        vectors[flagged, 0] = 1.0
    return vectors, norms, flagged


def pool_forward(h: np.ndarray, valid: np.ndarray):
    """Mean over rows valid at each query-valid column, then unit-normalize."""
    qcols = np.nonzero(valid[0])[0]
    if len(qcols) == 0:
        raise EmptyFragmentError("query row has no valid columns")
    m = valid[:, qcols]                            # (R, n)
    counts = m.sum(axis=0).astype(h.dtype)         # every column has row 0
    pooled = (h[:, qcols, :] * m[:, :, None]).sum(axis=0) / counts[:, None]
    vectors, norms, flagged = _renormalize(pooled)
    fragment = PooledFragment(vectors, qcols, flagged)
    cache = (h.shape, valid, qcols, m, counts, vectors, norms, flagged)
    return fragment, cache


def pool_backward(dvec: np.ndarray, cache) -> np.ndarray:
    shape, valid, qcols, m, counts, vectors, norms, flagged = cache
    live = ~flagged
    dpooled = np.zeros_like(dvec)
    if live.any():
        v = vectors[live]
        g = dvec[live]
        dpooled[live] = (g - v * (v * g).sum(axis=-1, keepdims=True)) / norms[live, None]
    dh = np.zeros(shape, dtype=dvec.dtype)
    dh[:, qcols, :] = (dpooled[None, :, :] / counts[None, :, None]) * m[:, :, None]
    return dh


def token_distance(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(u) - np.asarray(v)))


def late_interaction(p1: PooledFragment, p2: PooledFragment,
                     symmetrize: bool = True) -> Score:
    score, _ = late_interaction_with_cache(p1.vectors, p2.vectors, symmetrize)
    return score


def late_interaction_with_cache(v1: np.ndarray, v2: np.ndarray,
                                symmetrize: bool):
    mins12, arg12 = kernels.min_distances(v1, v2)
    s12 = float(mins12.mean())
    if symmetrize:
        mins21, arg21 = kernels.min_distances(v2, v1)
        s21 = float(mins21.mean())
        value = (s12 + s21) / 2.0
    else:
        mins21 = arg21 = None
        value = s12
    cache = (v1, v2, mins12, arg12, mins21, arg21, symmetrize)
    return Score(value, DISTANCE_LIKE), cache


def _min_direction_grad(dvalue, va, vb, mins, args, dva, dvb):
    n = len(va)
    live = mins > _NORM_EPS
    if not live.any():
        return
    diff = va[live] - vb[args[live]]
    contrib = (dvalue / n) * diff / mins[live, None]
    np.add.at(dva, np.nonzero(live)[0], contrib)
    np.add.at(dvb, args[live], -contrib)


def late_interaction_backward(dvalue: float, cache):
    v1, v2, mins12, arg12, mins21, arg21, symmetrize = cache
    dv1 = np.zeros_like(v1)
    dv2 = np.zeros_like(v2)
    w = dvalue / 2.0 if symmetrize else dvalue
    _min_direction_grad(w, v1, v2, mins12, arg12, dv1, dv2)
    if symmetrize:
        _min_direction_grad(w, v2, v1, mins21, arg21, dv2, dv1)
    return dv1, dv2


def _fragment_pool(vectors: np.ndarray):
    pooled = vectors.mean(axis=0)
    unit, norm, flagged = _renormalize(pooled[None, :])
    return unit[0], float(norm[0]), bool(flagged[0])


def fragment_cosine(p1: PooledFragment, p2: PooledFragment) -> Score:
    score, _ = fragment_measure_with_cache(p1.vectors, p2.vectors, COSINE)
    return score


def fragment_euclidean(p1: PooledFragment, p2: PooledFragment) -> Score:
    score, _ = fragment_measure_with_cache(p1.vectors, p2.vectors, EUCLIDEAN)
    return score


def fragment_measure_with_cache(v1: np.ndarray, v2: np.ndarray, measure: str):
    g1, n1, f1 = _fragment_pool(v1)
    g2, n2, f2 = _fragment_pool(v2)
    if measure == COSINE:
        value = float(g1 @ g2)
        polarity = SIMILARITY_LIKE
        dist = None
    elif measure == EUCLIDEAN:
        dist = float(np.linalg.norm(g1 - g2))
        value = dist
        polarity = DISTANCE_LIKE
    else:
        raise ValueError(f"unknown fragment measure {measure!r}")
    cache = (v1.shape[0], v2.shape[0], g1, n1, f1, g2, n2, f2, measure, dist)
    return Score(value, polarity), cache


def fragment_measure_backward(dvalue: float, cache):
    count1, count2, g1, n1, f1, g2, n2, f2, measure, dist = cache
    if measure == COSINE:
        dg1 = dvalue * g2
        dg2 = dvalue * g1
    else:
        if dist is None or dist < _NORM_EPS:
            dg1 = np.zeros_like(g1)
            dg2 = np.zeros_like(g2)
        else:
            ddiff = dvalue * (g1 - g2) / dist
            dg1 = ddiff
            dg2 = -ddiff

    def through_pool(dg, g, norm, flagged, count):
        if flagged:
            return np.zeros((count, len(g)), dtype=g.dtype)
        dpooled = (dg - g * float(g @ dg)) / norm
        return np.tile(dpooled / count, (count, 1))

    return (through_pool(dg1, g1, n1, f1, count1),
            through_pool(dg2, g2, n2, f2, count2))


def classify(score: Score, tau: float) -> int:
    """1 = clone. Distance-like scores: clone iff value < tau; similarity:
    clone iff value > tau."""
    if score.polarity == DISTANCE_LIKE:
        return int(score.value < tau)
    return int(score.value > tau)
