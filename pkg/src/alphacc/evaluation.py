"""Dataset loading, metrics with clone-type breakdowns, threshold
calibration, model evaluation, and the cross-dataset transfer protocol."""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .corpus import FunctionStore, ingest
from .errors import DatasetError
from .model.network import prepare_input
from .model.scorer import DISTANCE_LIKE, Score, classify, polarity_of
from .msa import MsaCache
from .ngrams import NGramIndex
from .synthetic import CLONE_TYPES
from .trainer import Checkpoint, InputCache, train

VALID_SPLITS = ("train", "validation", "test")


@dataclass
class ClonePair:
    id1: str
    id2: str
    label: int                      # +1 clone, -1 not
    clone_type: Optional[str] = None


@dataclass
class ClonePairDataset:
    functions: FunctionStore
    pairs: List[ClonePair]
    split: str

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.functions.digest().encode())
        h.update(self.split.encode())
        for p in self.pairs:
            h.update(f"{p.id1}|{p.id2}|{p.label}|{p.clone_type}".encode())
        return h.hexdigest()

    def as_tuples(self) -> List[Tuple[str, str, int]]:
        return [(p.id1, p.id2, p.label) for p in self.pairs]


def _load_pairs(path: str, store: FunctionStore) -> List[ClonePair]:
    pairs: List[ClonePair] = []
    seen = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            id1, id2 = rec.get("id1"), rec.get("id2")
            label = rec.get("label")
            ctype = rec.get("clone_type")
            if label not in (-1, 1):
                raise DatasetError(f"{path}:{lineno}: label must be -1 or 1")
            for fid in (id1, id2):
                if fid not in store:
                    raise DatasetError(
                        f"{path}:{lineno}: pair ({id1}, {id2}) references "
                        f"unknown function {fid!r}")
            key = (id1, id2) if id1 <= id2 else (id2, id1)
            if key in seen:
                raise DatasetError(f"{path}:{lineno}: duplicate pair {key}")
            seen.add(key)
            if ctype is not None and ctype not in CLONE_TYPES:
                raise DatasetError(f"{path}:{lineno}: unknown clone_type {ctype!r}")
            pairs.append(ClonePair(id1, id2, label, ctype))
    return pairs


def load_dataset(path: str, split: str = "train", language: str = "java"
                 ) -> ClonePairDataset:
    """Read functions.jsonl plus pairs_<split>.jsonl from a dataset directory."""
    if split not in VALID_SPLITS:
        raise DatasetError(f"unknown split {split!r}")
    functions_path = os.path.join(path, "functions.jsonl")
    pairs_path = os.path.join(path, f"pairs_{split}.jsonl")
    for p in (functions_path, pairs_path):
        if not os.path.isfile(p):
            raise DatasetError(f"missing dataset file {p}")
    store = ingest(functions_path, language)
    return ClonePairDataset(store, _load_pairs(pairs_path, store), split)


def load_benchmark(path: str, language: str = "java"
                   ) -> Dict[str, ClonePairDataset]:
    """All splits sharing one FunctionStore."""
    store = ingest(os.path.join(path, "functions.jsonl"), language)
    out = {}
    for split in VALID_SPLITS:
        pairs_path = os.path.join(path, f"pairs_{split}.jsonl")
        if os.path.isfile(pairs_path):
            out[split] = ClonePairDataset(store, _load_pairs(pairs_path, store),
                                          split)
    return out


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

@dataclass
class Metrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    per_type: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall,
                "f1": self.f1, "tp": self.tp, "fp": self.fp, "fn": self.fn,
                "tn": self.tn, "per_type": dict(self.per_type)}


def _prf(tp: int, fp: int, fn: int) -> Tuple[float, float, float]:
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if (precision + recall) else 0.0)
    return precision, recall, f1


def compute_metrics(labels: Sequence[int], preds: Sequence[int],
                    clone_types: Optional[Sequence[Optional[str]]] = None
                    ) -> Metrics:
    tp = fp = fn = tn = 0
    for y, p in zip(labels, preds):
        if y > 0 and p:
            tp += 1
        elif y > 0:
            fn += 1
        elif p:
            fp += 1
        else:
            tn += 1
    precision, recall, f1 = _prf(tp, fp, fn)
    metrics = Metrics(precision, recall, f1, tp, fp, fn, tn)
    if clone_types is not None:
        # per-type convention: positives of that type vs all negatives
        for ctype in CLONE_TYPES:
            t_tp = t_fn = 0
            any_of_type = False
            for y, p, ct in zip(labels, preds, clone_types):
                if y > 0 and ct == ctype:
                    any_of_type = True
                    if p:
                        t_tp += 1
                    else:
                        t_fn += 1
            if any_of_type:
                metrics.per_type[ctype] = _prf(t_tp, fp, t_fn)[2]
    return metrics


# ---------------------------------------------------------------------------
# Threshold calibration
# ---------------------------------------------------------------------------

def calibrate_from_scores(scores: Sequence[float], labels: Sequence[int],
                          polarity: str) -> Tuple[float, float]:
    """Sweep midpoints of sorted distinct scores (plus one candidate below
    the minimum and one above the maximum) and return (tau, best F1); ties
    prefer the smaller tau."""
    if not scores:
        raise DatasetError("cannot calibrate on an empty score set")
    distinct = sorted(set(float(s) for s in scores))
    candidates = [distinct[0] - 0.5]
    candidates += [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]
    candidates.append(distinct[-1] + 0.5)
    best_tau = candidates[0]
    best_f1 = -1.0
    for tau in candidates:
        if polarity == DISTANCE_LIKE:
            preds = [int(s < tau) for s in scores]
        else:
            preds = [int(s > tau) for s in scores]
        f1 = compute_metrics(labels, preds).f1
        if f1 > best_f1 or (f1 == best_f1 and tau < best_tau):
            best_f1 = f1
            best_tau = tau
    return best_tau, best_f1


def calibrate_threshold(ckpt: Checkpoint, validation: ClonePairDataset,
                        store: Optional[FunctionStore] = None,
                        index: Optional[NGramIndex] = None,
                        threads: int = 1) -> float:
    session = ScoringSession(ckpt, store or validation.functions, index)
    scores = session.score_pairs(validation.as_tuples(), threads=threads)
    labels = [p.label for p in validation.pairs]
    return calibrate_from_scores([s.value for s in scores], labels,
                                 polarity_of(ckpt.config.measure))[0]


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

class ScoringSession:
    """Checkpoint + retrieval context, with per-function input caching."""

    def __init__(self, ckpt: Checkpoint, store: FunctionStore,
                 index: Optional[NGramIndex] = None):
        self.ckpt = ckpt
        cfg = ckpt.config
        self.inputs = InputCache(MsaCache(store, index, cfg.R, cfg.L),
                                 ckpt.vocab)

    def score(self, id1: str, id2: str) -> Score:
        from .model.network import score_pair
        return score_pair(self.inputs.get(id1), self.inputs.get(id2),
                          self.ckpt.params, self.ckpt.config)

    def score_pairs(self, pairs: Sequence[Tuple[str, str, int]],
                    threads: int = 1) -> List[Score]:
        # warm the caches serially so retrieval stays deterministic
        for id1, id2, _ in pairs:
            self.inputs.get(id1)
            self.inputs.get(id2)
        if threads <= 1:
            return [self.score(id1, id2) for id1, id2, _ in pairs]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda p: self.score(p[0], p[1]), pairs))


def evaluate(ckpt: Checkpoint, dataset: ClonePairDataset,
             tau: Optional[float] = None,
             store: Optional[FunctionStore] = None,
             index: Optional[NGramIndex] = None,
             threads: int = 1) -> Metrics:
    """Score every pair, classify at tau (default: checkpoint tau), and
    report metrics with per-clone-type F1 where tags exist."""
    session = ScoringSession(ckpt, store or dataset.functions, index)
    scores = session.score_pairs(dataset.as_tuples(), threads=threads)
    threshold = ckpt.tau if tau is None else tau
    preds = [classify(s, threshold) for s in scores]
    labels = [p.label for p in dataset.pairs]
    types = [p.clone_type for p in dataset.pairs]
    has_types = any(t is not None for t in types)
    return compute_metrics(labels, preds, types if has_types else None)


def score_records(ckpt: Checkpoint, pairs: Sequence[Tuple[str, str]],
                  store: FunctionStore, index: Optional[NGramIndex] = None,
                  tau: Optional[float] = None, threads: int = 1) -> List[dict]:
    """Detection output records for arbitrary id pairs."""
    session = ScoringSession(ckpt, store, index)
    tuples = [(a, b, 0) for a, b in pairs]
    scores = session.score_pairs(tuples, threads=threads)
    threshold = ckpt.tau if tau is None else tau
    return [{"id1": a, "id2": b, "score": s.value,
             "measure": ckpt.config.measure,
             "clone": classify(s, threshold)}
            for (a, b), s in zip(pairs, scores)]


# ---------------------------------------------------------------------------
# Cross-dataset transfer
# ---------------------------------------------------------------------------

def transfer_protocol(source: Dict[str, ClonePairDataset],
                      target: Dict[str, ClonePairDataset],
                      cfg: Config, embed_table, source_inputs: InputCache,
                      target_inputs: InputCache,
                      fraction: float = 0.10) -> Tuple[Metrics, dict]:
    """Train on source, fine-tune on a seeded fraction of target train
    pairs, recalibrate tau on target validation, evaluate on target test."""
    ckpt = train(source["train"].as_tuples(), source_inputs, cfg, embed_table)

    tgt_train = target["train"].as_tuples()
    rng = np.random.default_rng([cfg.seed, 7])
    n_sample = int(round(fraction * len(tgt_train)))
    if n_sample > 0:
        idx = rng.choice(len(tgt_train), size=n_sample, replace=False)
        sample = [tgt_train[int(i)] for i in sorted(idx)]
        ckpt = fine_tune(ckpt, sample, target_inputs)

    if "validation" in target and target["validation"].pairs:
        val = target["validation"].as_tuples()
        session_scores = [_score_with(ckpt, target_inputs, i1, i2)
                          for i1, i2, _ in val]
        labels = [y for _, _, y in val]
        ckpt.tau = calibrate_from_scores(session_scores, labels,
                                         polarity_of(cfg.measure))[0]

    test = target["test"]
    scores = [_score_with(ckpt, target_inputs, i1, i2)
              for i1, i2, _ in test.as_tuples()]
    preds = [int(s < ckpt.tau) if polarity_of(cfg.measure) == DISTANCE_LIKE
             else int(s > ckpt.tau) for s in scores]
    labels = [p.label for p in test.pairs]
    types = [p.clone_type for p in test.pairs]
    metrics = compute_metrics(labels, preds,
                              types if any(types) else None)
    report = {"fraction": fraction, "tau": ckpt.tau,
              "metrics": metrics.to_dict()}
    return metrics, report


def _score_with(ckpt: Checkpoint, inputs: InputCache, id1: str, id2: str
                ) -> float:
    from .model.network import score_pair
    return score_pair(inputs.get(id1), inputs.get(id2), ckpt.params,
                      ckpt.config).value


def fine_tune(ckpt: Checkpoint, pairs: Sequence[Tuple[str, str, int]],
              inputs: InputCache) -> Checkpoint:
    """Continue optimizing an existing checkpoint on new pairs (one epoch
    of the same optimizer settings)."""
    from .trainer import Adam, _balanced_batches, _pair_loss_and_backward
    from .embeddings import PAD_ID
    cfg = ckpt.config
    params = ckpt.params
    pos = [p for p in pairs if p[2] > 0]
    neg = [p for p in pairs if p[2] < 0]
    if not pos or not neg:
        return ckpt
    rng = np.random.default_rng([cfg.seed, 3])
    opt = Adam(params, lr=cfg.lr)
    for _ in range(max(cfg.epochs, 1)):
        for batch in _balanced_batches(pos, neg, cfg.batch, rng):
            grads: Dict[str, np.ndarray] = {}
            weight = 1.0 / len(batch)
            for id1, id2, y in batch:
                _pair_loss_and_backward(inputs.get(id1), inputs.get(id2), y,
                                        params, cfg, grads, weight)
            if "token_embed" in grads:
                grads["token_embed"][PAD_ID] = 0.0
            opt.step(params, grads)
    return ckpt
