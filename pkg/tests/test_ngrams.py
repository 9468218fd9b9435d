"""N-gram vectors, cosine, and index retrieval against a brute-force oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alphacc.corpus import FunctionStore, StoredFunction
from alphacc.lexer import JAVA, Token, TokenSequence, TokenType
from alphacc.ngrams import NGramIndex, NGramVector, cosine, ngram_vector, retrieve_topk


def _seq(texts, fid="q"):
    return TokenSequence(fid, tuple(Token(t, TokenType.IDENTIFIER) for t in texts))


def _store_of(named_seqs):
    store = FunctionStore(JAVA)
    for fid, texts in named_seqs.items():
        store.add(fid, StoredFunction(seq=_seq(texts, fid)))
    return store


class TestNGramVector:
    def test_single_window(self):
        v = ngram_vector(_seq(["a", "b", "c", "d", "e"]))
        assert sum(v.buckets.values()) == 1
        assert v.norm == 1.0

    def test_below_window_size_empty(self):
        v = ngram_vector(_seq(["a", "b", "c", "d"]))
        assert v.empty and v.norm == 0.0

    def test_repeated_gram_counts(self):
        v = ngram_vector(_seq(["a"] * 6))
        assert list(v.buckets.values()) == [2]
        assert v.norm == 2.0

    def test_norm_matches_counts(self):
        v = ngram_vector(_seq(list("abcdefgh")), n=3)
        assert v.norm == pytest.approx(
            math.sqrt(sum(c * c for c in v.buckets.values())), abs=0)


class TestCosine:
    def test_identical(self):
        v = ngram_vector(_seq(list("abcdefg")))
        assert cosine(v, v) == 1.0

    def test_disjoint(self):
        a = ngram_vector(_seq(list("abcde")))
        b = ngram_vector(_seq(list("fghij")))
        assert cosine(a, b) == 0.0

    def test_hand_value(self):
        # a={g1:1, g2:1}, b={g2:1, g3:1} -> 1 / (sqrt(2) * sqrt(2)) = 0.5
        a = NGramVector({1: 1, 2: 1}, math.sqrt(2.0))
        b = NGramVector({2: 1, 3: 1}, math.sqrt(2.0))
        assert cosine(a, b) == pytest.approx(0.5, abs=1e-15)

    def test_empty_is_zero(self):
        e = NGramVector({}, 0.0)
        v = ngram_vector(_seq(list("abcde")))
        assert cosine(e, v) == 0.0 and cosine(v, e) == 0.0

    @given(st.lists(st.sampled_from("abcdef"), min_size=5, max_size=20),
           st.lists(st.sampled_from("abcdef"), min_size=5, max_size=20))
    @settings(max_examples=60, deadline=None)
    def test_bounds_and_symmetry(self, xs, ys):
        a = ngram_vector(_seq(xs))
        b = ngram_vector(_seq(ys))
        c = cosine(a, b)
        assert 0.0 <= c <= 1.0 + 1e-12
        assert c == cosine(b, a)


class TestRetrieve:
    def test_exact_duplicate_ranks_first(self):
        store = _store_of({
            "dup": list("vwxyzab"),
            "q": list("vwxyzab"),
            "other": list("qrstuvw"),
        })
        index = NGramIndex.build(store)
        ids = retrieve_topk(store.get("q").seq, store, index, k=2)
        assert ids[0] == "dup"

    def test_fill_rule_with_small_store(self):
        store = _store_of({"q": list("abcdefg"), "x": list("cdefghi")})
        index = NGramIndex.build(store)
        ids = retrieve_topk(store.get("q").seq, store, index, k=4)
        assert ids == ["x", "q", "q", "q"]

    def test_zero_similarity_never_retrieved(self):
        store = _store_of({"q": list("abcde"), "far": list("vwxyz")})
        index = NGramIndex.build(store)
        ids = retrieve_topk(store.get("q").seq, store, index, k=2)
        assert ids == ["q", "q"]

    def _brute_force(self, store, index, qid, k):
        qvec = ngram_vector(store.get(qid).seq, index.n)
        ranked = []
        for fid in store.ids_sorted():
            if fid == qid:
                continue
            c = cosine(qvec, ngram_vector(store.get(fid).seq, index.n))
            if c > 0.0:
                ranked.append((c, fid))
        ranked.sort(key=lambda t: (-t[0], t[1]))
        out = [fid for _, fid in ranked[:k]]
        while len(out) < k:
            out.append(qid)
        return out

    def test_thousand_function_store_matches_brute_force(self):
        rng = np.random.default_rng(5)
        alphabet = [f"w{i}" for i in range(30)]
        store = FunctionStore(JAVA)
        for i in range(1000):
            n = int(rng.integers(5, 40))
            texts = [alphabet[int(j)] for j in rng.integers(0, 30, n)]
            store.add(f"f{i:04d}", StoredFunction(seq=_seq(texts, f"f{i:04d}")))
        index = NGramIndex.build(store)
        qids = [f"f{int(i):04d}" for i in rng.integers(0, 1000, 100)]
        for qid in qids:
            fast = retrieve_topk(store.get(qid).seq, store, index, k=4)
            slow = self._brute_force(store, index, qid, 4)
            assert fast == slow, f"mismatch for {qid}"


class TestIndexPersistence:
    def test_roundtrip(self, tmp_path):
        store = _store_of({
            "a": list("abcdefgh"), "b": list("defghijk"), "c": list("ghijklmn"),
        })
        index = NGramIndex.build(store, provenance={"note": "test"})
        path = str(tmp_path / "test.idx")
        index.save(path)
        loaded = NGramIndex.load(path)
        assert loaded.ids == index.ids
        assert loaded.n == index.n
        assert np.array_equal(loaded.norms, index.norms)
        assert np.array_equal(loaded.buckets, index.buckets)
        assert np.array_equal(loaded.post_funcs, index.post_funcs)
        assert loaded.provenance == {"note": "test"}
        assert loaded.digest() == index.digest()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk.idx"
        path.write_bytes(b"NOPE1234")
        from alphacc.errors import CheckpointError
        with pytest.raises(CheckpointError):
            NGramIndex.load(str(path))
