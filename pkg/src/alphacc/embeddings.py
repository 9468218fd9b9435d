"""Token vocabulary and distributional embeddings.

Embeddings come from skip-gram with negative sampling over the corpus
token stream (window 5, 5 negatives, unigram^0.75 noise, step size decayed
linearly 0.025 -> 0.0001). Training is seeded and single-threaded, so a
given (corpus, hyperparameters, seed) triple is bit-reproducible within
one kernel backend.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import kernels
from .corpus import FunctionStore
from .errors import CheckpointError
from .io_utils import (
    expect_magic, read_json_block, read_str_list, read_u32, read_array,
    write_array, write_json_block, write_str_list, write_u32,
)

PAD_ID = 0
UNK_ID = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"

ALPHA_START = 0.025
ALPHA_END = 0.0001
NOISE_POWER = 0.75

_MAGIC = b"ACCE"
_VERSION = 1


@dataclass
class Vocabulary:
    token_to_id: Dict[str, int]
    id_to_token: List[str]
    frequencies: np.ndarray  # int64, aligned with ids; UNK holds the filtered mass

    @property
    def size(self) -> int:
        return len(self.id_to_token)

    def id_of(self, text: str) -> int:
        return self.token_to_id.get(text, UNK_ID)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update("\x00".join(self.id_to_token).encode())
        return h.hexdigest()


def build_vocab(store: FunctionStore, min_count: int = 1) -> Vocabulary:
    """Ids in descending corpus frequency (ties lexicographic); 0=PAD, 1=UNK."""
    counts = Counter()
    for fid in store.ids_sorted():
        counts.update(t.text for t in store.get(fid).seq.tokens)
    kept = sorted((t for t, c in counts.items() if c >= min_count),
                  key=lambda t: (-counts[t], t))
    id_to_token = [PAD_TOKEN, UNK_TOKEN] + kept
    token_to_id = {t: i for i, t in enumerate(id_to_token)}
    freqs = np.zeros(len(id_to_token), dtype=np.int64)
    unk_mass = 0
    for t, c in counts.items():
        if t in token_to_id:
            freqs[token_to_id[t]] = c
        else:
            unk_mass += c
    freqs[UNK_ID] = unk_mass
    return Vocabulary(token_to_id, id_to_token, freqs)


def _sentence_ids(store: FunctionStore, vocab: Vocabulary) -> List[np.ndarray]:
    out = []
    for fid in store.ids_sorted():
        ids = np.array([vocab.id_of(t.text) for t in store.get(fid).seq.tokens],
                       dtype=np.int32)
        out.append(ids)
    return out


def _skipgram_pairs(sentences: List[np.ndarray], window: int
                    ) -> Tuple[np.ndarray, np.ndarray]:
    centers: List[int] = []
    contexts: List[int] = []
    for ids in sentences:
        n = len(ids)
        for i in range(n):
            lo = max(0, i - window)
            hi = min(n, i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(ids[i])
                    contexts.append(ids[j])
    return (np.array(centers, dtype=np.int32),
            np.array(contexts, dtype=np.int32))


def initial_table(vocab_size: int, d: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    table = rng.uniform(-0.5 / d, 0.5 / d, size=(vocab_size, d)).astype(np.float32)
    table[PAD_ID] = 0.0
    return table


def train_embeddings(store: FunctionStore, vocab: Vocabulary, d: int = 256,
                     window: int = 5, negatives: int = 5, epochs: int = 5,
                     seed: int = 1) -> np.ndarray:
    """Skip-gram/negative-sampling table, float32 V x d; PAD row stays zero."""
    if vocab.size < 2:
        raise ValueError("vocabulary must contain at least PAD and UNK")
    syn0 = initial_table(vocab.size, d, seed)
    syn1 = np.zeros((vocab.size, d), dtype=np.float32)
    rng = np.random.default_rng([seed, 1])  # negative-sampling stream

    centers, contexts = _skipgram_pairs(_sentence_ids(store, vocab), window)
    total = len(centers) * epochs
    if total == 0 or epochs == 0:
        return syn0

    active = np.nonzero(vocab.frequencies > 0)[0]
    weights = vocab.frequencies[active].astype(np.float64) ** NOISE_POWER
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]

    for epoch in range(epochs):
        draws = rng.random(len(centers) * negatives)
        negs = active[np.searchsorted(cdf, draws)].astype(np.int32)
        kernels.sgns_epoch(syn0, syn1, centers, contexts, negs, negatives,
                           ALPHA_START, ALPHA_END, epoch * len(centers), total)
    return syn0


def sgns_pair_loss(v: np.ndarray, u_pos: np.ndarray, u_negs: np.ndarray
                   ) -> Tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Loss and analytic gradients for one (center, context, negatives) step.

    Independent double-precision reference for the update the kernels apply;
    finite differences validate these gradients in the tests.
    """
    v = np.asarray(v, dtype=np.float64)
    u_pos = np.asarray(u_pos, dtype=np.float64)
    u_negs = np.asarray(u_negs, dtype=np.float64)
    sig_pos = 1.0 / (1.0 + np.exp(-(v @ u_pos)))
    sig_negs = 1.0 / (1.0 + np.exp(-(u_negs @ v)))
    loss = -np.log(sig_pos) - np.sum(np.log(1.0 - sig_negs))
    grad_v = (sig_pos - 1.0) * u_pos + sig_negs @ u_negs
    grad_u_pos = (sig_pos - 1.0) * v
    grad_u_negs = sig_negs[:, None] * v[None, :]
    return float(loss), grad_v, grad_u_pos, grad_u_negs


def lookup(vocab: Vocabulary, table: np.ndarray, token_text: str) -> np.ndarray:
    return table[vocab.id_of(token_text)]


def save_embeddings(path: str, vocab: Vocabulary, table: np.ndarray,
                    provenance: Optional[dict] = None) -> None:
    if table.shape[0] != vocab.size:
        raise ValueError("table rows must match vocabulary size")
    with open(path, "wb") as f:
        f.write(_MAGIC)
        write_u32(f, _VERSION)
        write_u32(f, vocab.size)
        write_u32(f, table.shape[1])
        write_json_block(f, provenance or {})
        write_str_list(f, vocab.id_to_token)
        write_array(f, vocab.frequencies, "<i8")
        write_array(f, table, "<f4")


def load_embeddings(path: str) -> Tuple[Vocabulary, np.ndarray, dict]:
    with open(path, "rb") as f:
        expect_magic(f, _MAGIC, "embedding")
        version = read_u32(f)
        if version != _VERSION:
            raise CheckpointError(f"unsupported embedding version {version}")
        v = read_u32(f)
        d = read_u32(f)
        provenance = read_json_block(f)
        id_to_token = read_str_list(f)
        freqs = read_array(f, "<i8")
        table = read_array(f, "<f4")
    if len(id_to_token) != v or table.shape != (v, d):
        raise CheckpointError("embedding file is inconsistent")
    vocab = Vocabulary({t: i for i, t in enumerate(id_to_token)}, id_to_token, freqs)
    return vocab, table, provenance
