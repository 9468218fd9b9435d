"""Code MSA assembly: standardize sequences to fixed length and stack
the query with its retrieved neighbors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .corpus import FunctionStore, StoredFunction
from .lexer import SourceFunction, Token, TokenType, tokenize
from .ngrams import NGramIndex, retrieve_topk

DEFAULT_R = 5
DEFAULT_L = 256

PAD_TEXT = ""
PAD_TYPE = TokenType.OTHER


@dataclass
class CodeMSA:
    """R x L grid of token cells; row 0 is the query, PAD cells have valid=0."""

    texts: List[List[str]]
    types: np.ndarray          # int8, R x L
    valid: np.ndarray          # bool, R x L
    row_ids: List[str]
    query_row_index: int = 0

    @property
    def R(self) -> int:
        return self.types.shape[0]

    @property
    def L(self) -> int:
        return self.types.shape[1]

    def row_lengths(self) -> np.ndarray:
        return self.valid.sum(axis=1)


def standardize(tokens: Sequence[Token], context_before: Sequence[Token],
                context_after: Sequence[Token], L: int
                ) -> Tuple[List[str], np.ndarray, np.ndarray]:
    """Fit one sequence to exactly L cells.

    Sequences longer than L are truncated; shorter ones borrow context
    tokens nearest-first, alternating append (after) / prepend (before),
    then PAD on the right. Function tokens stay contiguous and valid cells
    always form a prefix.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    toks = list(tokens)
    if len(toks) >= L:
        row = toks[:L]
    else:
        row = toks
        after = list(context_after)
        before = list(context_before)
        ai = 0
        bi = len(before) - 1
        head: List[Token] = []
        take_after = True
        while len(row) + len(head) < L and (ai < len(after) or bi >= 0):
            if take_after and ai < len(after):
                row = row + [after[ai]]
                ai += 1
            elif not take_after and bi >= 0:
                head.insert(0, before[bi])
                bi -= 1
            take_after = not take_after
        row = head + row
    texts = [t.text for t in row]
    types = np.full(L, int(PAD_TYPE), dtype=np.int8)
    valid = np.zeros(L, dtype=bool)
    types[:len(row)] = [int(t.type) for t in row]
    valid[:len(row)] = True
    texts.extend([PAD_TEXT] * (L - len(row)))
    return texts, types, valid


def _stack_rows(rows, row_ids) -> CodeMSA:
    texts = [r[0] for r in rows]
    types = np.stack([r[1] for r in rows])
    valid = np.stack([r[2] for r in rows])
    return CodeMSA(texts=texts, types=types, valid=valid, row_ids=list(row_ids))


def _build(seq, context_before, context_after, query_id: str,
           store: Optional[FunctionStore], index: Optional[NGramIndex],
           R: int, L: int) -> CodeMSA:
    if R < 1:
        raise ValueError("R must be >= 1")
    query_row = standardize(seq.tokens, context_before, context_after, L)
    rows = [query_row]
    row_ids = [query_id]
    if R > 1:
        if store is not None and index is not None:
            neighbor_ids = retrieve_topk(seq, store, index, k=R - 1)
        else:
            neighbor_ids = [query_id] * (R - 1)
        for fid in neighbor_ids:
            if fid == query_id:
                rows.append(query_row)
            else:
                fn = store.get(fid)
                rows.append(standardize(fn.seq.tokens, fn.context_before,
                                        fn.context_after, L))
            row_ids.append(fid)
    return _stack_rows(rows, row_ids)


def build_msa(query: SourceFunction, store: Optional[FunctionStore],
              index: Optional[NGramIndex], R: int = DEFAULT_R,
              L: int = DEFAULT_L) -> CodeMSA:
    """MSA for an arbitrary query function (query need not be in the store)."""
    seq = tokenize(query.text, query.language, function_id=query.id)
    return _build(seq, query.context_before, query.context_after, query.id,
                  store, index, R, L)


def build_msa_for_stored(function_id: str, store: FunctionStore,
                         index: Optional[NGramIndex], R: int = DEFAULT_R,
                         L: int = DEFAULT_L) -> CodeMSA:
    fn = store.get(function_id)
    return _build(fn.seq, fn.context_before, fn.context_after, function_id,
                  store, index, R, L)


class MsaCache:
    """Memoizes MSAs keyed by (function id, R, L, index digest).

    Training touches each function many times; retrieval and
    standardization happen once per function here.
    """

    def __init__(self, store: FunctionStore, index: Optional[NGramIndex],
                 R: int = DEFAULT_R, L: int = DEFAULT_L):
        self.store = store
        self.index = index
        self.R = R
        self.L = L
        self._index_digest = index.digest() if index is not None else "none"
        self._cache = {}

    def get(self, function_id: str) -> CodeMSA:
        key = (function_id, self.R, self.L, self._index_digest)
        msa = self._cache.get(key)
        if msa is None:
            msa = build_msa_for_stored(function_id, self.store, self.index,
                                       self.R, self.L)
            self._cache[key] = msa
        return msa
