"""Function corpus: ingest from a source tree or JSONL, store token sequences."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import AlphaccError, IngestError
from .lexer import (
    C, JAVA, SourceFunction, Token, TokenSequence, TokenType,
    extract_functions, tokenize,
)

_EXTENSIONS = {JAVA: (".java",), C: (".c", ".h")}


@dataclass(frozen=True)
class StoredFunction:
    seq: TokenSequence
    context_before: Tuple[Token, ...] = ()
    context_after: Tuple[Token, ...] = ()


@dataclass
class SkipRecord:
    path: str
    reason: str


class FunctionStore:
    """Immutable-after-build map of function id to token sequence + context."""

    def __init__(self, language: str):
        self.language = language
        self.functions: Dict[str, StoredFunction] = {}
        self.skipped: List[SkipRecord] = []

    def add(self, function_id: str, stored: StoredFunction) -> None:
        if function_id in self.functions:
            raise IngestError(f"duplicate function id {function_id!r}")
        if len(stored.seq) == 0:
            raise IngestError(f"function {function_id!r} has an empty token sequence")
        self.functions[function_id] = stored

    def __len__(self) -> int:
        return len(self.functions)

    def __contains__(self, function_id: str) -> bool:
        return function_id in self.functions

    def get(self, function_id: str) -> StoredFunction:
        return self.functions[function_id]

    def ids_sorted(self) -> List[str]:
        return sorted(self.functions)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.language.encode())
        for fid in self.ids_sorted():
            fn = self.functions[fid]
            rec = [fid,
                   [(t.text, int(t.type)) for t in fn.seq.tokens],
                   [(t.text, int(t.type)) for t in fn.context_before],
                   [(t.text, int(t.type)) for t in fn.context_after]]
            h.update(json.dumps(rec, separators=(",", ":")).encode())
        return h.hexdigest()


def _ingest_tree(root: str, language: str, store: FunctionStore) -> None:
    exts = _EXTENSIONS[language]
    paths = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            if name.endswith(exts):
                paths.append(os.path.join(dirpath, name))
    for path in paths:
        rel = os.path.relpath(path, root)
        try:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
            functions = extract_functions(text, language, file_path=rel)
        except (AlphaccError, UnicodeDecodeError) as exc:
            store.skipped.append(SkipRecord(rel, str(exc)))
            continue
        for fn in functions:
            store.add(fn.id, StoredFunction(
                seq=tokenize(fn.text, language, function_id=fn.id),
                context_before=fn.context_before,
                context_after=fn.context_after,
            ))


def _ingest_jsonl(path: str, language: str, store: FunctionStore) -> None:
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                store.skipped.append(SkipRecord(f"{path}:{lineno}", f"bad json: {exc}"))
                continue
            fid = rec.get("id")
            code = rec.get("code")
            if not fid or code is None:
                store.skipped.append(SkipRecord(f"{path}:{lineno}", "missing id or code"))
                continue
            lang = rec.get("language", language)
            if lang != language:
                store.skipped.append(SkipRecord(f"{path}:{lineno}",
                                                f"language {lang!r} != store language"))
                continue
            try:
                seq = tokenize(code, language, function_id=fid)
            except AlphaccError as exc:
                store.skipped.append(SkipRecord(f"{path}:{lineno}", str(exc)))
                continue
            if len(seq) == 0:
                store.skipped.append(SkipRecord(f"{path}:{lineno}", "empty token sequence"))
                continue
            store.add(fid, StoredFunction(seq=seq))


def ingest(source: str, language: str) -> FunctionStore:
    """Build a FunctionStore from a directory tree or a functions JSONL file.

    Unparsable files become skip records; zero extractable functions is a
    hard error.
    """
    if language not in _EXTENSIONS:
        raise IngestError(f"unsupported language {language!r}")
    store = FunctionStore(language)
    if os.path.isdir(source):
        _ingest_tree(source, language, store)
    elif os.path.isfile(source):
        _ingest_jsonl(source, language, store)
    else:
        raise IngestError(f"corpus path {source!r} does not exist")
    if len(store) == 0:
        raise IngestError(f"no functions could be extracted from {source!r}")
    return store


def store_from_functions(functions: List[SourceFunction], language: str) -> FunctionStore:
    """In-memory store from already-extracted functions (keeps contexts)."""
    store = FunctionStore(language)
    for fn in functions:
        store.add(fn.id, StoredFunction(
            seq=tokenize(fn.text, language, function_id=fn.id),
            context_before=tuple(fn.context_before),
            context_after=tuple(fn.context_after),
        ))
    if len(store) == 0:
        raise IngestError("no functions provided")
    return store
