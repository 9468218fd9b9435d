"""End-to-end optimization: margin/BCE losses, Adam, the pair training
loop, finite-difference gradient checking, and checkpoint persistence."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .embeddings import PAD_ID, Vocabulary
from .errors import CheckpointError, ConfigError, DatasetError, TrainingDivergedError
from .io_utils import (
    expect_magic, read_array, read_json_block, read_str, read_str_list,
    read_f64, read_u32, write_array, write_f64, write_json_block, write_str,
    write_str_list, write_u32,
)
from .model.enhancer import MsaInput
from .model.network import init_params, pair_backward, pair_forward
from .model.scorer import COSINE, DISTANCE_LIKE, Score
from .msa import MsaCache
from .model.network import prepare_input

logger = logging.getLogger("alphacc.trainer")

_MAGIC = b"ACCM"
_VERSION = 1

_BCE_CLAMP = 1e-7


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------

def margin_loss(score: Score, y: int, gamma: float) -> float:
    """max(0, gamma - y * (1 - s)) on a distance-like score."""
    if gamma <= 0:
        raise ConfigError("gamma must be > 0")
    if score.polarity != DISTANCE_LIKE:
        raise ConfigError("margin loss is defined on distance-like scores; "
                          "convert similarity scores first")
    return max(0.0, gamma - y * (1.0 - score.value))


def margin_loss_with_grad(value: float, y: int, gamma: float
                          ) -> Tuple[float, float]:
    arg = gamma - y * (1.0 - value)
    if arg > 0.0:
        return arg, float(y)
    return 0.0, 0.0  # subgradient 0 at the kink


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def bce_loss(score: Score, y: int, w: float, b: float) -> float:
    loss, _, _, _ = bce_loss_with_grad(score.value, y, w, b)
    return loss


def bce_loss_with_grad(value: float, y: int, w: float, b: float
                       ) -> Tuple[float, float, float, float]:
    """Returns (loss, d/ds, d/dw, d/db); p is clamped to [1e-7, 1-1e-7] and
    the gradient is exactly zero inside the clamped region."""
    z = w * (1.0 - value) + b
    p = _sigmoid(z)
    clamped = p < _BCE_CLAMP or p > 1.0 - _BCE_CLAMP
    p = min(max(p, _BCE_CLAMP), 1.0 - _BCE_CLAMP)
    yhat = (y + 1) / 2.0
    loss = -(yhat * math.log(p) + (1.0 - yhat) * math.log(1.0 - p))
    if clamped:
        return loss, 0.0, 0.0, 0.0
    dz = p - yhat
    return loss, -w * dz, (1.0 - value) * dz, dz


def to_distance(score: Score) -> Tuple[float, float]:
    """Distance-like view of a score: (value, chain factor d(dist)/d(raw))."""
    if score.polarity == DISTANCE_LIKE:
        return score.value, 1.0
    return 1.0 - score.value, -1.0


def default_tau(measure: str) -> float:
    return 0.0 if measure == COSINE else 1.0


# ---------------------------------------------------------------------------
# Optimizer
# ---------------------------------------------------------------------------

class Adam:
    """Adaptive moment estimation; state matches the parameter dtype."""

    def __init__(self, params: Dict[str, np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: Dict[str, np.ndarray],
             grads: Dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name in sorted(grads):
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            params[name] -= self.lr * update


# ---------------------------------------------------------------------------
# Checkpoint
# ---------------------------------------------------------------------------

@dataclass
class Checkpoint:
    params: Dict[str, np.ndarray]
    vocab: Vocabulary
    config: Config
    tau: float
    provenance: dict = field(default_factory=dict)

    def vocab_digest(self) -> str:
        return self.vocab.digest()


def save_checkpoint(path: str, ckpt: Checkpoint) -> None:
    """Binary checkpoint; tensors are stored as row-major float32, so a
    float32-trained model round-trips bit-exactly."""
    cfg = ckpt.config
    with open(path, "wb") as f:
        f.write(_MAGIC)
        write_u32(f, _VERSION)
        for v in (cfg.d, cfg.L, cfg.R, cfg.H, cfg.B):
            write_u32(f, v)
        write_str(f, cfg.loss)
        write_str(f, cfg.measure)
        write_u32(f, int(cfg.symmetrize))
        write_f64(f, ckpt.tau)
        write_json_block(f, {"config": cfg.to_dict(),
                             "provenance": ckpt.provenance,
                             "vocab_digest": ckpt.vocab_digest()})
        write_str_list(f, ckpt.vocab.id_to_token)
        write_array(f, ckpt.vocab.frequencies, "<i8")
        names = sorted(ckpt.params)
        write_u32(f, len(names))
        for name in names:
            write_str(f, name)
            write_array(f, ckpt.params[name], "<f4")


def load_checkpoint(path: str) -> Checkpoint:
    with open(path, "rb") as f:
        expect_magic(f, _MAGIC, "checkpoint")
        version = read_u32(f)
        if version != _VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        _ = [read_u32(f) for _ in range(5)]
        _loss = read_str(f)
        _measure = read_str(f)
        _sym = read_u32(f)
        tau = read_f64(f)
        meta = read_json_block(f)
        id_to_token = read_str_list(f)
        freqs = read_array(f, "<i8")
        n_tensors = read_u32(f)
        params = {}
        for _ in range(n_tensors):
            name = read_str(f)
            params[name] = read_array(f, "<f4")
    cfg = Config(**meta["config"])
    vocab = Vocabulary({t: i for i, t in enumerate(id_to_token)}, id_to_token,
                       freqs)
    return Checkpoint(params=params, vocab=vocab, config=cfg, tau=tau,
                      provenance=meta.get("provenance", {}))


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------

class InputCache:
    """Function id -> MsaInput, built once per function via the MSA cache."""

    def __init__(self, msa_cache: MsaCache, vocab: Vocabulary):
        self.msa_cache = msa_cache
        self.vocab = vocab
        self._inputs: Dict[str, MsaInput] = {}

    def get(self, function_id: str) -> MsaInput:
        inp = self._inputs.get(function_id)
        if inp is None:
            inp = prepare_input(self.msa_cache.get(function_id), self.vocab)
            self._inputs[function_id] = inp
        return inp


def _pair_loss_and_backward(inp1: MsaInput, inp2: MsaInput, y: int,
                            params: Dict[str, np.ndarray], cfg: Config,
                            grads: Optional[Dict[str, np.ndarray]],
                            weight: float = 1.0) -> Tuple[float, Score]:
    score, cache = pair_forward(inp1, inp2, params, cfg)
    if cfg.loss == "margin":
        dist, chain = to_distance(score)
        loss, dd = margin_loss_with_grad(dist, y, cfg.gamma)
        dvalue = dd * chain
    else:
        w = float(params["bce.w"])
        b = float(params["bce.b"])
        loss, dvalue, dw, db = bce_loss_with_grad(score.value, y, w, b)
        if grads is not None:
            dtype = params["bce.w"].dtype
            for name, g in (("bce.w", dw), ("bce.b", db)):
                cur = grads.get(name)
                add = np.asarray(g * weight, dtype=dtype)
                grads[name] = add if cur is None else cur + add
    if grads is not None and dvalue != 0.0:
        pair_backward(dvalue * weight, cache, inp1, inp2, params, grads, cfg)
    return loss, score


def _balanced_batches(pos: Sequence, neg: Sequence, batch_size: int,
                      rng: np.random.Generator) -> List[List]:
    """Equal positive/negative halves per batch; the minority class is
    resampled with replacement to the majority count."""
    half = max(batch_size // 2, 1)
    n = max(len(pos), len(neg))

    def indices(group):
        order = rng.permutation(len(group))
        if len(group) < n:
            extra = rng.integers(0, len(group), size=n - len(group))
            order = np.concatenate([order, extra])
        return order

    pos_idx = indices(pos)
    neg_idx = indices(neg)
    batches = []
    for i in range(0, n, half):
        batch = [pos[k] for k in pos_idx[i:i + half]]
        batch += [neg[k] for k in neg_idx[i:i + half]]
        batches.append(batch)
    return batches


def _reduce_grads(into: Dict[str, np.ndarray],
                  parts: Sequence[Dict[str, np.ndarray]]) -> None:
    for part in parts:
        for name in sorted(part):
            cur = into.get(name)
            into[name] = part[name] if cur is None else cur + part[name]


def train(pairs: Sequence[Tuple[str, str, int]], inputs: InputCache,
          cfg: Config, embed_table: Optional[np.ndarray] = None,
          validation_pairs: Optional[Sequence[Tuple[str, str, int]]] = None,
          provenance: Optional[dict] = None, threads: int = 1) -> Checkpoint:
    """Optimize all parameters over labeled (id1, id2, y) pairs.

    Deterministic under a fixed seed regardless of `threads`: each pair's
    gradient is computed independently and the per-batch reduction runs in
    a fixed order.
    """
    vocab = inputs.vocab
    params = init_params(cfg, vocab.size, cfg.seed, embed_table)
    pos = [p for p in pairs if p[2] > 0]
    neg = [p for p in pairs if p[2] < 0]
    if cfg.epochs > 0 and (not pos or not neg):
        raise DatasetError("training needs at least one positive and one "
                           "negative pair")
    if cfg.epochs > 0:
        for id1, id2, _ in pairs:   # build MSAs serially, retrieval order fixed
            inputs.get(id1)
            inputs.get(id2)
    rng = np.random.default_rng([cfg.seed, 1])
    opt = Adam(params, lr=cfg.lr)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    def run_pair(pair, weight):
        id1, id2, y = pair
        part: Dict[str, np.ndarray] = {}
        loss, score = _pair_loss_and_backward(
            inputs.get(id1), inputs.get(id2), y, params, cfg, part, weight)
        if not math.isfinite(loss) or not math.isfinite(score.value):
            raise TrainingDivergedError(
                f"non-finite loss {loss} on pair ({id1}, {id2})",
                batch_dump={"pair": (id1, id2), "score": score.value,
                            "loss": loss})
        return loss, part

    try:
        for epoch in range(cfg.epochs):
            epoch_loss = 0.0
            n_seen = 0
            for batch in _balanced_batches(pos, neg, cfg.batch, rng):
                weight = 1.0 / len(batch)
                if pool is None:
                    results = [run_pair(p, weight) for p in batch]
                else:
                    results = list(pool.map(lambda p: run_pair(p, weight),
                                            batch))
                grads: Dict[str, np.ndarray] = {}
                _reduce_grads(grads, [part for _, part in results])
                epoch_loss += sum(loss for loss, _ in results)
                n_seen += len(results)
                if "token_embed" in grads:
                    grads["token_embed"][PAD_ID] = 0.0
                opt.step(params, grads)
            if n_seen:
                logger.info("epoch=%d mean_loss=%.6f pairs=%d",
                            epoch, epoch_loss / n_seen, n_seen)
    finally:
        if pool is not None:
            pool.shutdown()

    ckpt = Checkpoint(params=params, vocab=vocab, config=cfg,
                      tau=cfg.tau if cfg.tau is not None else default_tau(cfg.measure),
                      provenance=provenance or {})
    if validation_pairs:
        from .evaluation import calibrate_from_scores
        from .model.scorer import polarity_of
        scores = [score_checkpoint_pair(ckpt, inputs.get(i1), inputs.get(i2)).value
                  for i1, i2, _ in validation_pairs]
        labels = [y for _, _, y in validation_pairs]
        ckpt.tau = calibrate_from_scores(scores, labels,
                                         polarity_of(cfg.measure))[0]
    return ckpt


def score_checkpoint_pair(ckpt: Checkpoint, inp1: MsaInput,
                          inp2: MsaInput) -> Score:
    score, _ = pair_forward(inp1, inp2, ckpt.params, ckpt.config)
    return score


# ---------------------------------------------------------------------------
# Gradient checking
# ---------------------------------------------------------------------------

def _total_loss(inp1: MsaInput, inp2: MsaInput, y: int,
                params: Dict[str, np.ndarray], cfg: Config) -> float:
    loss, _ = _pair_loss_and_backward(inp1, inp2, y, params, cfg, grads=None)
    return loss


def grad_check(params: Dict[str, np.ndarray], cfg: Config, inp1: MsaInput,
               inp2: MsaInput, y: int, n_probes: int = 64,
               seed: int = 0, step: float = 1e-5) -> Tuple[float, Dict[str, float]]:
    """Compare analytic gradients with central finite differences on
    n_probes randomly chosen scalars, at least one per parameter tensor."""
    grads: Dict[str, np.ndarray] = {}
    _pair_loss_and_backward(inp1, inp2, y, params, cfg, grads)
    rng = np.random.default_rng(seed)
    names = sorted(params)
    per_tensor: Dict[str, float] = {}
    max_err = 0.0
    checked = 0
    i = 0
    while checked < n_probes:
        name = names[i % len(names)]
        i += 1
        theta = params[name]
        idx = int(rng.integers(theta.size)) if theta.size > 1 else 0
        orig = theta.flat[idx] if theta.ndim else theta.item()
        def poke(value):
            if theta.ndim:
                theta.flat[idx] = value
            else:
                theta.fill(value)
        poke(orig + step)
        lp = _total_loss(inp1, inp2, y, params, cfg)
        poke(orig - step)
        lm = _total_loss(inp1, inp2, y, params, cfg)
        poke(orig)
        numeric = (lp - lm) / (2.0 * step)
        g = grads.get(name)
        analytic = 0.0
        if g is not None:
            analytic = float(g.flat[idx]) if g.ndim else float(g)
        err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
        per_tensor[name] = max(per_tensor.get(name, 0.0), err)
        max_err = max(max_err, err)
        checked += 1
    return max_err, per_tensor


def build_toy_problem(loss: str = "margin", seed: int = 0, d: int = 8,
                      L: int = 12, R: int = 3, B: int = 1, H: int = 2,
                      vocab_size: int = 24):
    """Small double-precision model plus a random MSA pair with the loss
    active, used by `alphacc gradcheck` and the tests."""
    cfg = Config(d=d, L=L, R=R, H=H, B=B, d_ff=2 * d, loss=loss,
                 dtype="float64").validate()
    rng = np.random.default_rng(seed)
    params = init_params(cfg, vocab_size, seed)

    def random_input():
        lengths = rng.integers(3, L + 1, size=R)
        ids = np.full((R, L), PAD_ID, dtype=np.int32)
        types = np.full((R, L), 14, dtype=np.int8)
        valid = np.zeros((R, L), dtype=bool)
        for r in range(R):
            n = int(lengths[r])
            ids[r, :n] = rng.integers(2, vocab_size, size=n)
            types[r, :n] = rng.integers(0, 15, size=n)
            valid[r, :n] = True
        le = int(lengths.max())
        return MsaInput(ids[:, :le], types[:, :le], valid[:, :le])

    inp1, inp2 = random_input(), random_input()
    score, _ = pair_forward(inp1, inp2, params, cfg)
    if loss == "margin":
        dist, _ = to_distance(score)
        y = 1 if dist > 1.0 - cfg.gamma else -1
        if margin_loss_with_grad(dist, y, cfg.gamma)[0] == 0.0:
            y = -y
    else:
        y = 1
    return params, cfg, inp1, inp2, y
