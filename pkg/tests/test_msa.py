"""Standardization and MSA assembly tests."""

import numpy as np

from alphacc.corpus import FunctionStore, StoredFunction
from alphacc.lexer import JAVA, SourceFunction, Token, TokenSequence, TokenType
from alphacc.msa import CodeMSA, MsaCache, build_msa, build_msa_for_stored, standardize
from alphacc.ngrams import NGramIndex


def _toks(texts):
    return tuple(Token(t, TokenType.IDENTIFIER) for t in texts)


def _seq(texts, fid="q"):
    return TokenSequence(fid, _toks(texts))


class TestStandardize:
    def test_exact_fit(self):
        texts, types, valid = standardize(_toks(["a", "b", "c"]), (), (), 3)
        assert texts == ["a", "b", "c"]
        assert valid.all()

    def test_truncation(self):
        texts, _, valid = standardize(_toks(list("abcdefgh")), (), (), 3)
        assert texts == ["a", "b", "c"]
        assert valid.all()

    def test_padding_rule_after_then_pad(self):
        # |seq| = L-3, two after-context tokens, no before: seq + 2 ctx + 1 PAD
        texts, _, valid = standardize(
            _toks(["f1", "f2"]), (), _toks(["a1", "a2"]), 5)
        assert texts == ["f1", "f2", "a1", "a2", ""]
        assert valid.tolist() == [True, True, True, True, False]

    def test_alternating_append_prepend(self):
        texts, _, valid = standardize(
            _toks(["f"]), _toks(["b1", "b2"]), _toks(["a1", "a2"]), 5)
        # append a1, prepend b2, append a2, prepend b1
        assert texts == ["b1", "b2", "f", "a1", "a2"]
        assert valid.all()

    def test_valid_cells_form_prefix(self):
        _, _, valid = standardize(_toks(["x"]), (), (), 8)
        n = valid.sum()
        assert valid[:n].all() and not valid[n:].any()

    def test_function_tokens_contiguous(self):
        texts, _, _ = standardize(
            _toks(["f1", "f2"]), _toks(["b"]), _toks(["a"]), 5)
        joined = " ".join(texts).strip()
        assert "f1 f2" in joined


def _store_and_index():
    store = FunctionStore(JAVA)
    data = {
        "q": list("abcdefgh"),
        "near": list("abcdefgz"),
        "mid": list("cdefghij"),
        "far": list("qrstuvwx"),
    }
    for fid, texts in data.items():
        store.add(fid, StoredFunction(seq=_seq(texts, fid)))
    return store, NGramIndex.build(store)


class TestBuildMsa:
    def test_single_row_ablation(self):
        store, index = _store_and_index()
        msa = build_msa_for_stored("q", store, index, R=1, L=16)
        assert msa.R == 1
        assert msa.row_ids == ["q"]
        assert msa.valid[0].sum() == 8

    def test_empty_retrieval_fills_query_copies(self):
        store = FunctionStore(JAVA)
        store.add("q", StoredFunction(seq=_seq(list("abcde"), "q")))
        index = NGramIndex.build(store)
        msa = build_msa_for_stored("q", store, index, R=5, L=8)
        assert msa.row_ids == ["q"] * 5
        assert all((msa.types[r] == msa.types[0]).all() for r in range(5))

    def test_rows_in_rank_order(self):
        store, index = _store_and_index()
        msa = build_msa_for_stored("q", store, index, R=3, L=16)
        assert msa.row_ids[0] == "q"
        assert msa.row_ids[1] == "near"      # highest cosine
        assert msa.row_ids[2] == "mid"

    def test_external_query_not_in_store(self):
        store, index = _store_and_index()
        query = SourceFunction(id="ext", language=JAVA,
                               text="a b c d e f g h")
        msa = build_msa(query, store, index, R=2, L=16)
        assert msa.row_ids[0] == "ext"
        assert msa.row_ids[1] in store

    def test_determinism(self):
        store, index = _store_and_index()
        m1 = build_msa_for_stored("q", store, index, R=4, L=16)
        m2 = build_msa_for_stored("q", store, index, R=4, L=16)
        assert m1.row_ids == m2.row_ids
        assert (m1.types == m2.types).all()
        assert (m1.valid == m2.valid).all()
        assert m1.texts == m2.texts

    def test_cache_returns_same_object(self):
        store, index = _store_and_index()
        cache = MsaCache(store, index, R=3, L=16)
        assert cache.get("q") is cache.get("q")
