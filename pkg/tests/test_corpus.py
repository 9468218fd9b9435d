"""FunctionStore ingest tests for both directory and JSONL sources."""

import json
import os

import pytest

from alphacc.corpus import ingest
from alphacc.errors import IngestError


def _write(path, text):
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def test_jsonl_ingest_counts(tmp_path):
    path = tmp_path / "functions.jsonl"
    recs = [{"id": f"f{i}", "language": "java",
             "code": f"int f{i}(int a) {{ return a + {i}; }}"}
            for i in range(3)]
    _write(path, "\n".join(json.dumps(r) for r in recs))
    store = ingest(str(path), "java")
    assert len(store) == 3
    assert store.get("f1").seq.tokens[0].text == "int"


def test_directory_ingest_with_skip(tmp_path):
    good = tmp_path / "src"
    os.makedirs(good)
    for i in range(9):
        _write(good / f"file{i}.c", f"int fn{i}(void) {{ return {i}; }}")
    _write(good / "broken.c", "int broken() { unclosed")
    store = ingest(str(tmp_path), "c")
    assert len(store) == 9
    assert len(store.skipped) == 1
    assert "broken.c" in store.skipped[0].path


def test_reingest_identical_digest(tmp_path):
    path = tmp_path / "functions.jsonl"
    _write(path, json.dumps({"id": "a", "code": "int f() { return 1; }"}))
    d1 = ingest(str(path), "java").digest()
    d2 = ingest(str(path), "java").digest()
    assert d1 == d2


def test_zero_functions_is_hard_error(tmp_path):
    path = tmp_path / "functions.jsonl"
    _write(path, "")
    with pytest.raises(IngestError):
        ingest(str(path), "java")


def test_duplicate_id_rejected(tmp_path):
    path = tmp_path / "functions.jsonl"
    rec = json.dumps({"id": "a", "code": "int f() { return 1; }"})
    _write(path, rec + "\n" + rec)
    with pytest.raises(IngestError):
        ingest(str(path), "java")


def test_wrong_language_record_skipped(tmp_path):
    path = tmp_path / "functions.jsonl"
    _write(path, "\n".join([
        json.dumps({"id": "a", "language": "c", "code": "int f(){return 1;}"}),
        json.dumps({"id": "b", "language": "java", "code": "int g(){return 2;}"}),
    ]))
    store = ingest(str(path), "java")
    assert len(store) == 1 and "b" in store
    assert len(store.skipped) == 1


def test_context_tokens_from_tree(tmp_path):
    src = tmp_path / "x.c"
    _write(src, "int a(){return 1;}\nint b(){return 2;}")
    store = ingest(str(tmp_path), "c")
    ids = store.ids_sorted()
    assert len(ids) == 2
    second = store.get(ids[1])
    assert [t.text for t in second.context_before][-1] == "}"
