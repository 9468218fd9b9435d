"""Command-line entry point wiring the pipeline stages together.

Exit codes: 0 success, 1 usage error, 2 data/validation error,
3 numerical failure (non-finite loss or failed gradient check).
"""

from __future__ import annotations

import argparse
import difflib
import json
import logging
import os
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .config import Config, resolve_config
from .corpus import FunctionStore, ingest
from .embeddings import build_vocab, load_embeddings, save_embeddings, train_embeddings
from .errors import (
    AlphaccError, CheckpointError, ConfigError, DatasetError, IngestError,
    LexicalError, TrainingDivergedError,
)
from .evaluation import (
    calibrate_from_scores, evaluate, load_benchmark, score_records,
)
from .msa import MsaCache, build_msa_for_stored
from .ngrams import NGramIndex
from .synthetic import generate_benchmark, write_benchmark
from .trainer import (
    Checkpoint, InputCache, build_toy_problem, grad_check, load_checkpoint,
    save_checkpoint, train,
)

logger = logging.getLogger("alphacc")

GRADCHECK_TOLERANCE = 1e-4

_USAGE_EXIT = 1
_DATA_EXIT = 2
_NUMERIC_EXIT = 3


class CliParser(argparse.ArgumentParser):
    """argparse with exit code 1 on usage errors and flag suggestions."""

    def error(self, message):
        if "unrecognized arguments:" in message:
            bad = message.split("unrecognized arguments:")[1].strip().split()[0]
            options = []
            for action in self._actions:
                options.extend(action.option_strings)
            close = difflib.get_close_matches(bad, options, n=1)
            if close:
                message += f" (did you mean {close[0]}?)"
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(_USAGE_EXIT)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value configuration file")
    p.add_argument("--R", type=int, dest="R")
    p.add_argument("--L", type=int, dest="L")
    p.add_argument("--d", type=int, dest="d")
    p.add_argument("--H", type=int, dest="H")
    p.add_argument("--B", type=int, dest="B")
    p.add_argument("--d-ff", type=int, dest="d_ff")
    p.add_argument("--gamma", type=float)
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--loss", choices=["margin", "bce"])
    p.add_argument("--measure",
                   choices=["late_interaction", "cosine", "euclidean"])
    p.add_argument("--symmetrize", type=int, choices=[0, 1])
    p.add_argument("--tau", type=float)
    p.add_argument("--enhancer-mode", dest="enhancer_mode",
                   choices=["full", "attention_only", "off"])
    p.add_argument("--freeze-embeddings", dest="freeze_embeddings",
                   action="store_const", const=True, default=None)
    p.add_argument("--ngram-n", type=int, dest="ngram_n")


def _config_from_args(args) -> Config:
    flags = {}
    for key in ("R", "L", "d", "H", "B", "d_ff", "gamma", "lr", "epochs",
                "batch", "seed", "loss", "measure", "tau", "enhancer_mode",
                "freeze_embeddings", "ngram_n"):
        flags[key] = getattr(args, key, None)
    sym = getattr(args, "symmetrize", None)
    if sym is not None:
        flags["symmetrize"] = bool(sym)
    return resolve_config(getattr(args, "config", None), flags)


def build_parser() -> CliParser:
    parser = CliParser(prog="alphacc",
                       description="token-based code clone detection toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=CliParser)

    p = sub.add_parser("version", help="print version")

    p = sub.add_parser("index", help="n-gram retrieval index")
    isub = p.add_subparsers(dest="index_command", parser_class=CliParser)
    pb = isub.add_parser("build", help="build an index over a corpus")
    pb.add_argument("--corpus", required=True)
    pb.add_argument("--lang", required=True, choices=["java", "c"])
    pb.add_argument("--out", required=True)
    pb.add_argument("--ngram-n", type=int, dest="ngram_n", default=5)

    p = sub.add_parser("embed", help="token embeddings")
    esub = p.add_subparsers(dest="embed_command", parser_class=CliParser)
    pe = esub.add_parser("train", help="train skip-gram embeddings")
    pe.add_argument("--corpus", required=True)
    pe.add_argument("--lang", required=True, choices=["java", "c"])
    pe.add_argument("--dim", type=int, default=256)
    pe.add_argument("--out", required=True)
    pe.add_argument("--seed", type=int, default=1)
    pe.add_argument("--window", type=int, default=5)
    pe.add_argument("--negatives", type=int, default=5)
    pe.add_argument("--epochs", type=int, default=5)
    pe.add_argument("--min-count", type=int, default=1)

    p = sub.add_parser("msa", help="code MSA inspection")
    msub = p.add_subparsers(dest="msa_command", parser_class=CliParser)
    pm = msub.add_parser("build", help="build and dump one MSA as JSON")
    pm.add_argument("--corpus", required=True)
    pm.add_argument("--lang", required=True, choices=["java", "c"])
    pm.add_argument("--index")
    pm.add_argument("--id", required=True, dest="function_id")
    pm.add_argument("--R", type=int, default=5)
    pm.add_argument("--L", type=int, default=256)
    pm.add_argument("--out")

    p = sub.add_parser("train", help="train a clone-detection model")
    p.add_argument("--dataset", required=True,
                   help="dataset directory (functions.jsonl + pairs_*.jsonl)")
    p.add_argument("--lang", default="java", choices=["java", "c"])
    p.add_argument("--corpus", help="retrieval corpus (default: dataset functions)")
    p.add_argument("--index", help="prebuilt retrieval index")
    p.add_argument("--embed", help="pretrained embedding file")
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    _add_config_flags(p)

    p = sub.add_parser("detect", help="score and classify fragment pairs")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True, help="JSONL of {id1, id2}")
    p.add_argument("--functions", required=True, help="functions JSONL")
    p.add_argument("--lang", default="java", choices=["java", "c"])
    p.add_argument("--index")
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=float)
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("eval", help="evaluate a model on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default="test",
                   choices=["train", "validation", "test"])
    p.add_argument("--lang", default="java", choices=["java", "c"])
    p.add_argument("--index")
    p.add_argument("--threshold", type=float)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")

    p = sub.add_parser("synth", help="generate a synthetic benchmark")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--problems", type=int, required=True)
    p.add_argument("--variants", type=int, required=True)
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p.add_argument("--probes", type=int, default=64)
    p.add_argument("--loss", default="both", choices=["margin", "bce", "both"])
    p.add_argument("--seed", type=int, default=0)

    return parser


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------

def _cmd_index(args) -> int:
    if args.index_command != "build":
        raise ConfigError("usage: alphacc index build ...")
    store = ingest(args.corpus, args.lang)
    logger.info("corpus functions=%d skipped=%d", len(store), len(store.skipped))
    provenance = {"corpus_digest": store.digest(), "language": args.lang,
                  "ngram_n": args.ngram_n}
    index = NGramIndex.build(store, args.ngram_n, provenance)
    index.save(args.out)
    logger.info("index functions=%d buckets=%d out=%s", len(index),
                len(index.buckets), args.out)
    return 0


def _cmd_embed(args) -> int:
    if args.embed_command != "train":
        raise ConfigError("usage: alphacc embed train ...")
    store = ingest(args.corpus, args.lang)
    vocab = build_vocab(store, min_count=args.min_count)
    table = train_embeddings(store, vocab, d=args.dim, window=args.window,
                             negatives=args.negatives, epochs=args.epochs,
                             seed=args.seed)
    provenance = {"corpus_digest": store.digest(), "language": args.lang,
                  "dim": args.dim, "window": args.window,
                  "negatives": args.negatives, "epochs": args.epochs,
                  "seed": args.seed, "min_count": args.min_count}
    save_embeddings(args.out, vocab, table, provenance)
    logger.info("embeddings vocab=%d dim=%d out=%s", vocab.size, args.dim,
                args.out)
    return 0


def _cmd_msa(args) -> int:
    if args.msa_command != "build":
        raise ConfigError("usage: alphacc msa build ...")
    store = ingest(args.corpus, args.lang)
    index = NGramIndex.load(args.index) if args.index else None
    if args.function_id not in store:
        raise DatasetError(f"unknown function id {args.function_id!r}")
    msa = build_msa_for_stored(args.function_id, store, index,
                               R=args.R, L=args.L)
    doc = {
        "query": args.function_id,
        "row_ids": msa.row_ids,
        "R": msa.R, "L": msa.L,
        "rows": [
            [{"text": msa.texts[r][c], "type": int(msa.types[r, c]),
              "valid": bool(msa.valid[r, c])} for c in range(msa.L)]
            for r in range(msa.R)
        ],
    }
    _write_json(doc, args.out)
    return 0


def _load_retrieval(args, default_store: FunctionStore):
    store = ingest(args.corpus, args.lang) if getattr(args, "corpus", None) \
        else default_store
    if getattr(args, "index", None):
        index = NGramIndex.load(args.index)
    else:
        index = NGramIndex.build(store, provenance={"corpus_digest": store.digest()})
    return store, index


def _cmd_train(args) -> int:
    cfg = _config_from_args(args)
    datasets = load_benchmark(args.dataset, args.lang)
    if "train" not in datasets:
        raise DatasetError(f"{args.dataset} has no pairs_train.jsonl")
    train_ds = datasets["train"]
    store, index = _load_retrieval(args, train_ds.functions)

    if args.embed:
        vocab, table, emb_prov = load_embeddings(args.embed)
        if table.shape[1] != cfg.d:
            raise ConfigError(
                f"embedding dim {table.shape[1]} != configured d {cfg.d}")
    else:
        logger.info("no --embed given; training embeddings inline")
        vocab = build_vocab(store)
        table = train_embeddings(store, vocab, d=cfg.d, seed=cfg.seed)
        emb_prov = {"inline": True, "seed": cfg.seed}

    inputs = InputCache(MsaCache(store, index, cfg.R, cfg.L), vocab)
    validation = datasets.get("validation")
    provenance = {
        "config": cfg.to_dict(),
        "dataset_digest": train_ds.digest(),
        "corpus_digest": store.digest(),
        "index_digest": index.digest(),
        "embeddings": emb_prov,
    }
    ckpt = train(train_ds.as_tuples(), inputs, cfg, table,
                 validation_pairs=validation.as_tuples() if validation else None,
                 provenance=provenance, threads=args.threads)
    save_checkpoint(args.out, ckpt)
    logger.info("checkpoint tau=%.6f out=%s", ckpt.tau, args.out)
    return 0


def _cmd_detect(args) -> int:
    ckpt = load_checkpoint(args.model)
    store = ingest(args.functions, args.lang)
    if args.index:
        index = NGramIndex.load(args.index)
    else:
        index = NGramIndex.build(store, ckpt.config.ngram_n,
                                 provenance={"corpus_digest": store.digest()})
    pairs = []
    with open(args.pairs, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            pairs.append((rec["id1"], rec["id2"]))
    records = score_records(ckpt, pairs, store, index, tau=args.threshold,
                            threads=args.threads)
    with open(args.out, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")
    logger.info("scored pairs=%d out=%s", len(records), args.out)
    return 0


def _cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.model)
    datasets = load_benchmark(args.dataset, args.lang)
    if args.split not in datasets:
        raise DatasetError(f"{args.dataset} has no pairs_{args.split}.jsonl")
    dataset = datasets[args.split]
    index = NGramIndex.load(args.index) if args.index else \
        NGramIndex.build(dataset.functions, ckpt.config.ngram_n)
    metrics = evaluate(ckpt, dataset, tau=args.threshold,
                       store=dataset.functions, index=index,
                       threads=args.threads)
    report = {
        "precision": metrics.precision, "recall": metrics.recall,
        "f1": metrics.f1, "per_type": metrics.per_type,
        "n_pairs": len(dataset.pairs),
        "tau": ckpt.tau if args.threshold is None else args.threshold,
        "split": args.split,
        "config": ckpt.config.to_dict(),
    }
    _write_json(report, args.out)
    return 0


def _cmd_synth(args) -> int:
    bench = generate_benchmark(args.seed, args.problems, args.variants,
                               negative_ratio=args.ratio)
    write_benchmark(bench, args.out)
    counts = {s: len(p) for s, p in bench.splits.items()}
    logger.info("synthetic functions=%d pairs=%s out=%s",
                len(bench.functions), counts, args.out)
    return 0


def _cmd_gradcheck(args) -> int:
    losses = ["margin", "bce"] if args.loss == "both" else [args.loss]
    worst = 0.0
    for loss in losses:
        params, cfg, inp1, inp2, y = build_toy_problem(loss=loss,
                                                       seed=args.seed)
        err, _ = grad_check(params, cfg, inp1, inp2, y,
                            n_probes=args.probes, seed=args.seed + 1)
        worst = max(worst, err)
        print(f"gradcheck loss={loss} probes={args.probes} "
              f"max_rel_err={err:.3e}")
    if worst >= GRADCHECK_TOLERANCE:
        print(f"FAIL: max relative error {worst:.3e} >= {GRADCHECK_TOLERANCE}")
        return _NUMERIC_EXIT
    return 0


def _write_json(doc, out: Optional[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print(text)


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return _USAGE_EXIT
    if args.command == "version":
        print(f"alphacc {__version__}")
        return 0
    handlers = {
        "index": _cmd_index,
        "embed": _cmd_embed,
        "msa": _cmd_msa,
        "train": _cmd_train,
        "detect": _cmd_detect,
        "eval": _cmd_eval,
        "synth": _cmd_synth,
        "gradcheck": _cmd_gradcheck,
    }
    try:
        return handlers[args.command](args)
    except TrainingDivergedError as exc:
        logger.error("numerical failure: %s", exc)
        return _NUMERIC_EXIT
    except (ConfigError, DatasetError, IngestError, LexicalError,
            CheckpointError) as exc:
        logger.error("%s", exc)
        return _DATA_EXIT
    except AlphaccError as exc:
        logger.error("%s", exc)
        return _DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
