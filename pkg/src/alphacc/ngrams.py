"""Hashed 5-gram vectors, cosine similarity, and the inverted retrieval index.

Window texts are hashed with blake2b (fixed, seedless) into 2^20 buckets.
All counts are small integers, so dot products and norms are exact in
float64 regardless of accumulation order: the indexed retrieval path and a
brute-force cosine scan produce bit-identical scores.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import kernels
from .corpus import FunctionStore
from .errors import CheckpointError
from .io_utils import (
    expect_magic, read_json_block, read_str_list, read_u32, read_u64,
    read_array, write_array, write_json_block, write_str_list, write_u32,
    write_u64,
)
from .lexer import TokenSequence

DEFAULT_N = 5
BUCKET_BITS = 20
BUCKET_COUNT = 1 << BUCKET_BITS

_MAGIC = b"ACCI"
_VERSION = 1
_SEP = b"\x1f"


def _hash_window(texts: Tuple[str, ...]) -> int:
    digest = hashlib.blake2b(_SEP.join(t.encode("utf-8") for t in texts),
                             digest_size=8).digest()
    return int.from_bytes(digest, "little") & (BUCKET_COUNT - 1)


@dataclass(frozen=True)
class NGramVector:
    buckets: Dict[int, int]
    norm: float

    @property
    def empty(self) -> bool:
        return not self.buckets


def ngram_vector(seq: TokenSequence, n: int = DEFAULT_N) -> NGramVector:
    """Multiset of hashed n-gram buckets over the token texts."""
    if n < 1:
        raise ValueError("n must be >= 1")
    texts = tuple(t.text for t in seq.tokens)
    counts: Dict[int, int] = {}
    for i in range(len(texts) - n + 1):
        b = _hash_window(texts[i:i + n])
        counts[b] = counts.get(b, 0) + 1
    norm = math.sqrt(float(sum(c * c for c in counts.values()))) if counts else 0.0
    return NGramVector(counts, norm)


def cosine(a: NGramVector, b: NGramVector) -> float:
    """Cosine similarity in [0, 1]; 0 when either vector is empty."""
    if a.empty or b.empty:
        return 0.0
    small, large = (a.buckets, b.buckets) if len(a.buckets) <= len(b.buckets) else (b.buckets, a.buckets)
    dot = 0
    for k, c in small.items():
        other = large.get(k)
        if other:
            dot += c * other
    if dot == 0:
        return 0.0
    return float(dot) / (a.norm * b.norm)


class NGramIndex:
    """Inverted index bucket -> postings of (function index, count).

    Functions are numbered in ascending id order, so postings within a
    bucket are sorted by id.
    """

    def __init__(self, n: int, ids: List[str], norms: np.ndarray,
                 buckets: np.ndarray, offsets: np.ndarray,
                 post_funcs: np.ndarray, post_counts: np.ndarray,
                 provenance: Optional[dict] = None):
        self.n = n
        self.ids = ids
        self.id_to_idx = {fid: i for i, fid in enumerate(ids)}
        self.norms = norms
        self.buckets = buckets
        self.offsets = offsets
        self.post_funcs = post_funcs
        self.post_counts = post_counts
        self.provenance = provenance or {}

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def build(cls, store: FunctionStore, n: int = DEFAULT_N,
              provenance: Optional[dict] = None) -> "NGramIndex":
        ids = store.ids_sorted()
        norms = np.zeros(len(ids), dtype=np.float64)
        postings: Dict[int, List[Tuple[int, int]]] = {}
        for idx, fid in enumerate(ids):
            vec = ngram_vector(store.get(fid).seq, n)
            norms[idx] = vec.norm
            for bucket, count in vec.buckets.items():
                postings.setdefault(bucket, []).append((idx, count))
        buckets = np.array(sorted(postings), dtype=np.uint32)
        offsets = np.zeros(len(buckets) + 1, dtype=np.int64)
        funcs: List[int] = []
        counts: List[int] = []
        for i, b in enumerate(buckets):
            entries = postings[int(b)]
            funcs.extend(e[0] for e in entries)
            counts.extend(e[1] for e in entries)
            offsets[i + 1] = len(funcs)
        return cls(n, ids, norms, buckets, offsets,
                   np.array(funcs, dtype=np.uint32),
                   np.array(counts, dtype=np.float64),
                   provenance)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.n).encode())
        h.update("\x00".join(self.ids).encode())
        for arr in (self.norms, self.buckets, self.offsets,
                    self.post_funcs, self.post_counts):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()

    def scores_for(self, vec: NGramVector) -> np.ndarray:
        """Exact dot products of `vec` against every indexed function."""
        if vec.empty:
            return np.zeros(len(self.ids), dtype=np.float64)
        q_buckets = np.array(sorted(vec.buckets), dtype=np.uint32)
        q_counts = np.array([float(vec.buckets[int(b)]) for b in q_buckets],
                            dtype=np.float64)
        return kernels.accumulate_index_scores(
            q_buckets, q_counts, self.buckets, self.offsets,
            self.post_funcs, self.post_counts, len(self.ids))

    def save(self, path: str) -> None:
        with open(path, "wb") as f:
            f.write(_MAGIC)
            write_u32(f, _VERSION)
            write_u32(f, self.n)
            write_u32(f, BUCKET_COUNT)
            write_u32(f, len(self.ids))
            write_json_block(f, self.provenance)
            write_str_list(f, self.ids)
            write_array(f, self.norms, "<f8")
            write_array(f, self.buckets, "<u4")
            write_array(f, self.offsets, "<i8")
            write_u64(f, len(self.post_funcs))
            write_array(f, self.post_funcs, "<u4")
            write_array(f, self.post_counts, "<f8")

    @classmethod
    def load(cls, path: str) -> "NGramIndex":
        with open(path, "rb") as f:
            expect_magic(f, _MAGIC, "n-gram index")
            version = read_u32(f)
            if version != _VERSION:
                raise CheckpointError(f"unsupported index version {version}")
            n = read_u32(f)
            bucket_count = read_u32(f)
            if bucket_count != BUCKET_COUNT:
                raise CheckpointError(f"bucket count mismatch: {bucket_count}")
            n_functions = read_u32(f)
            provenance = read_json_block(f)
            ids = read_str_list(f)
            if len(ids) != n_functions:
                raise CheckpointError("id table length mismatch")
            norms = read_array(f, "<f8")
            buckets = read_array(f, "<u4")
            offsets = read_array(f, "<i8")
            _ = read_u64(f)
            post_funcs = read_array(f, "<u4")
            post_counts = read_array(f, "<f8")
        return cls(n, ids, norms, buckets, offsets, post_funcs, post_counts,
                   provenance)


def retrieve_topk(query: TokenSequence, store: FunctionStore,
                  index: NGramIndex, k: int = 4) -> List[str]:
    """Ids of the k most cosine-similar stored functions.

    Excludes the query's own id; ties break by ascending id; when fewer
    than k candidates score above zero, the remainder repeats the query id.
    """
    qvec = ngram_vector(query, index.n)
    ranked: List[Tuple[float, str]] = []
    if not qvec.empty:
        scores = index.scores_for(qvec)
        for i in np.nonzero(scores > 0.0)[0]:
            fid = index.ids[int(i)]
            if fid == query.function_id:
                continue
            cos = float(scores[int(i)]) / (qvec.norm * float(index.norms[int(i)]))
            ranked.append((cos, fid))
    ranked.sort(key=lambda t: (-t[0], t[1]))
    result = [fid for _, fid in ranked[:k]]
    while len(result) < k:
        result.append(query.function_id)
    return result
