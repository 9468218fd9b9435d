"""Hand-rolled lexer for java-like and c-like source, plus function extraction.

No parser dependency: a single scan produces typed tokens, and functions are
delimited by a brace-balance heuristic over the token stream. Whitespace and
comments are consumed and never emitted, so any two formatting variants of
the same code yield byte-identical token sequences.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import IntEnum
from typing import List, Sequence, Tuple

from .errors import LexicalError, UnbalancedBracesError

JAVA = "java"
C = "c"
LANGUAGES = (JAVA, C)

#: Tokens of file context kept on each side of an extracted function.
CONTEXT_WINDOW = 64


class TokenType(IntEnum):
    SEPARATOR = 0
    IDENTIFIER = 1
    OPERATOR = 2
    KEYWORD = 3
    MODIFIER = 4
    DECIMAL_INTEGER = 5
    BASIC_TYPE = 6
    STRING = 7
    BOOLEAN = 8
    NULL = 9
    DECIMAL_FLOAT = 10
    ANNOTATION = 11
    HEX_INTEGER = 12
    HEX_FLOAT = 13
    OTHER = 14


N_TOKEN_TYPES = 15


@dataclass(frozen=True)
class Token:
    text: str
    type: TokenType
    start: int = 0
    end: int = 0


@dataclass(frozen=True)
class TokenSequence:
    function_id: str
    tokens: Tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def texts(self) -> List[str]:
        return [t.text for t in self.tokens]


@dataclass
class SourceFunction:
    id: str
    language: str
    text: str
    file_path: str = ""
    context_before: Tuple[Token, ...] = field(default_factory=tuple)
    context_after: Tuple[Token, ...] = field(default_factory=tuple)


# ---------------------------------------------------------------------------
# Word lists and punctuation tables (fixed data shipped with the artifact)
# ---------------------------------------------------------------------------

_JAVA_MODIFIERS = frozenset({
    "abstract", "default", "final", "native", "private", "protected",
    "public", "static", "strictfp", "synchronized", "transient", "volatile",
})
_JAVA_BASIC_TYPES = frozenset({
    "boolean", "byte", "char", "double", "float", "int", "long", "short",
})
_JAVA_KEYWORDS = frozenset({
    "assert", "break", "case", "catch", "class", "const", "continue", "do",
    "else", "enum", "extends", "finally", "for", "goto", "if", "implements",
    "import", "instanceof", "interface", "new", "package", "return", "super",
    "switch", "this", "throw", "throws", "try", "void", "while",
})

_C_MODIFIERS = frozenset()
_C_BASIC_TYPES = frozenset({
    "void", "char", "short", "int", "long", "float", "double",
    "signed", "unsigned", "_Bool", "_Complex",
})
_C_KEYWORDS = frozenset({
    "auto", "break", "case", "const", "continue", "default", "do", "else",
    "enum", "extern", "for", "goto", "if", "inline", "register", "restrict",
    "return", "sizeof", "static", "struct", "switch", "typedef", "union",
    "volatile", "while",
})

_SINGLE_SEPARATORS = frozenset("(){}[];,.")
_JAVA_MULTI_SEPARATORS = ("...", "::")
_C_MULTI_SEPARATORS = ("...",)

_COMMON_MULTI_OPERATORS = (
    "<<=", ">>=", "->", "==", ">=", "<=", "!=", "&&", "||", "++", "--",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
)
_JAVA_MULTI_OPERATORS = (">>>=", ">>>") + _COMMON_MULTI_OPERATORS
_SINGLE_OPERATORS = frozenset("+-*/%=<>!&|^~?:")

_IDENT_RE = {
    JAVA: re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*\Z"),
    C: re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z"),
}

_HEX_FLOAT_RE = re.compile(
    r"0[xX](?:[0-9a-fA-F]+(?:\.[0-9a-fA-F]*)?|\.[0-9a-fA-F]+)"
    r"[pP][+-]?[0-9]+[fFdDlL]?\Z"
)
_HEX_INT_RE = re.compile(r"0[xX][0-9a-fA-F]+[lLuU]*\Z")
_DEC_FLOAT_RE = re.compile(
    r"(?:"
    r"[0-9][0-9_]*\.[0-9_]*(?:[eE][+-]?[0-9]+)?"
    r"|\.[0-9][0-9_]*(?:[eE][+-]?[0-9]+)?"
    r"|[0-9][0-9_]*[eE][+-]?[0-9]+"
    r")[fFdD]?\Z"
    r"|[0-9][0-9_]*[fFdD]\Z"
)
_DEC_INT_RE = re.compile(r"[0-9][0-9_]*[lLuU]*\Z")


def _punct_tables(language: str):
    if language == JAVA:
        multi = _JAVA_MULTI_SEPARATORS + _JAVA_MULTI_OPERATORS
        seps = _SINGLE_SEPARATORS | set(_JAVA_MULTI_SEPARATORS)
    else:
        multi = _C_MULTI_SEPARATORS + _COMMON_MULTI_OPERATORS
        seps = _SINGLE_SEPARATORS | set(_C_MULTI_SEPARATORS)
    munch = sorted(multi, key=len, reverse=True)
    return munch, seps


_MUNCH = {lang: _punct_tables(lang)[0] for lang in LANGUAGES}
_SEPARATOR_SET = {lang: _punct_tables(lang)[1] for lang in LANGUAGES}
_OPERATOR_SET = {
    JAVA: set(_JAVA_MULTI_OPERATORS) | _SINGLE_OPERATORS,
    C: set(_COMMON_MULTI_OPERATORS) | _SINGLE_OPERATORS,
}

_WORD_TABLES = {
    JAVA: (_JAVA_KEYWORDS, _JAVA_MODIFIERS, _JAVA_BASIC_TYPES, "null"),
    C: (_C_KEYWORDS, _C_MODIFIERS, _C_BASIC_TYPES, "NULL"),
}


def _check_language(language: str) -> str:
    if language not in LANGUAGES:
        raise ValueError(f"unsupported language {language!r}; expected one of {LANGUAGES}")
    return language


def classify_token(lexeme: str, language: str) -> TokenType:
    """Assign one of the 15 lexical types to a lexeme. Total: never fails."""
    _check_language(language)
    if not lexeme:
        return TokenType.OTHER
    keywords, modifiers, basic_types, null_word = _WORD_TABLES[language]
    if lexeme in modifiers:
        return TokenType.MODIFIER
    if lexeme in basic_types:
        return TokenType.BASIC_TYPE
    if lexeme in keywords:
        return TokenType.KEYWORD
    if lexeme in ("true", "false"):
        return TokenType.BOOLEAN
    if lexeme == null_word:
        return TokenType.NULL
    head = lexeme[0]
    if head in "\"'":
        return TokenType.STRING
    if head == "@" and language == JAVA and _IDENT_RE[JAVA].match(lexeme[1:] or " "):
        return TokenType.ANNOTATION
    if head.isdigit() or (head == "." and len(lexeme) > 1 and lexeme[1].isdigit()):
        if _HEX_FLOAT_RE.match(lexeme):
            return TokenType.HEX_FLOAT
        if _HEX_INT_RE.match(lexeme):
            return TokenType.HEX_INTEGER
        if _DEC_FLOAT_RE.match(lexeme):
            return TokenType.DECIMAL_FLOAT
        if _DEC_INT_RE.match(lexeme):
            return TokenType.DECIMAL_INTEGER
        return TokenType.OTHER
    if lexeme in _SEPARATOR_SET[language]:
        return TokenType.SEPARATOR
    if lexeme in _OPERATOR_SET[language]:
        return TokenType.OPERATOR
    if _IDENT_RE[language].match(lexeme):
        return TokenType.IDENTIFIER
    return TokenType.OTHER


# ---------------------------------------------------------------------------
# Scanner
# ---------------------------------------------------------------------------

def _ident_start(ch: str, language: str) -> bool:
    return ch.isalpha() or ch == "_" or (language == JAVA and ch == "$")


def _ident_part(ch: str, language: str) -> bool:
    return ch.isalnum() or ch == "_" or (language == JAVA and ch == "$")


def _scan_number(text: str, i: int) -> int:
    # Preprocessor-number style scan: digits, letters, dots, and exponent
    # signs after e/E/p/P all belong to one numeric lexeme.
    n = len(text)
    j = i
    while j < n:
        ch = text[j]
        if ch.isalnum() or ch in "._":
            if ch in "eEpP" and j + 1 < n and text[j + 1] in "+-":
                j += 2
                continue
            j += 1
        else:
            break
    return j


def _scan_quoted(text: str, i: int, quote: str, kind: str) -> int:
    n = len(text)
    j = i + 1
    while j < n:
        ch = text[j]
        if ch == "\\":
            j += 2
            continue
        if ch == quote:
            return j + 1
        if ch == "\n":
            break
        j += 1
    raise LexicalError(f"unterminated {kind} literal", i)


def tokenize(source_text: str, language: str, function_id: str = "") -> TokenSequence:
    """Scan source text into typed tokens, dropping whitespace and comments."""
    _check_language(language)
    munch = _MUNCH[language]
    tokens: List[Token] = []
    text = source_text
    n = len(text)
    i = 0

    def emit(start: int, end: int, ttype=None):
        lex = text[start:end]
        tokens.append(Token(lex, ttype if ttype is not None else classify_token(lex, language), start, end))

    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "/" and i + 1 < n:
            nxt = text[i + 1]
            if nxt == "/":
                j = text.find("\n", i)
                i = n if j < 0 else j + 1
                continue
            if nxt == "*":
                j = text.find("*/", i + 2)
                if j < 0:
                    raise LexicalError("unterminated block comment", i)
                i = j + 2
                continue
        if ch == '"':
            j = _scan_quoted(text, i, '"', "string")
            emit(i, j, TokenType.STRING)
            i = j
            continue
        if ch == "'":
            j = _scan_quoted(text, i, "'", "character")
            emit(i, j, TokenType.STRING)
            i = j
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = _scan_number(text, i)
            emit(i, j)
            i = j
            continue
        if _ident_start(ch, language):
            j = i + 1
            while j < n and _ident_part(text[j], language):
                j += 1
            emit(i, j)
            i = j
            continue
        if ch in "@#" and i + 1 < n and _ident_start(text[i + 1], language):
            j = i + 2
            while j < n and _ident_part(text[j], language):
                j += 1
            emit(i, j)
            i = j
            continue
        matched = False
        for op in munch:
            if text.startswith(op, i):
                emit(i, i + len(op))
                i += len(op)
                matched = True
                break
        if matched:
            continue
        emit(i, i + 1)
        i += 1

    return TokenSequence(function_id, tuple(tokens))


# ---------------------------------------------------------------------------
# Function extraction
# ---------------------------------------------------------------------------

_SIGNATURE_TYPES = frozenset({
    TokenType.IDENTIFIER, TokenType.KEYWORD, TokenType.MODIFIER,
    TokenType.BASIC_TYPE, TokenType.ANNOTATION,
})
_SIGNATURE_TEXTS = frozenset({"<", ">", "[", "]", ",", ".", "*", "&"})


def _match_forward(tokens: Sequence[Token], start: int, open_text: str, close_text: str) -> int:
    """Index of the token closing the bracket at `start`, or -1."""
    depth = 0
    for k in range(start, len(tokens)):
        t = tokens[k].text
        if t == open_text:
            depth += 1
        elif t == close_text:
            depth -= 1
            if depth == 0:
                return k
    return -1


def _signature_start(tokens: Sequence[Token], name_idx: int) -> int:
    s = name_idx
    while s > 0:
        prev = tokens[s - 1]
        if prev.type in _SIGNATURE_TYPES or prev.text in _SIGNATURE_TEXTS:
            s -= 1
        else:
            break
    return s


def extract_functions(file_text: str, language: str, file_path: str = "") -> List[SourceFunction]:
    """Find function definitions by the header + brace-balance heuristic.

    A header is `identifier ( balanced-params )` followed (after an optional
    java throws clause) by `{`; the matching `}` ends the function. Nested
    definitions stay inside the enclosing function. Raises
    UnbalancedBracesError when a candidate body never closes.
    """
    seq = tokenize(file_text, language)
    tokens = seq.tokens
    n = len(tokens)
    functions: List[SourceFunction] = []
    j = 1
    while j < n:
        tok = tokens[j]
        if tok.text != "(" or tokens[j - 1].type != TokenType.IDENTIFIER:
            j += 1
            continue
        if j >= 2 and tokens[j - 2].text == "new":
            j += 1
            continue
        close = _match_forward(tokens, j, "(", ")")
        if close < 0:
            j += 1
            continue
        q = close + 1
        if language == JAVA and q < n and tokens[q].text == "throws":
            q += 1
            while q < n and (tokens[q].type == TokenType.IDENTIFIER or tokens[q].text in (",", ".")):
                q += 1
        if q >= n or tokens[q].text != "{":
            j += 1
            continue
        end = _match_forward(tokens, q, "{", "}")
        if end < 0:
            raise UnbalancedBracesError(
                f"{file_path or '<memory>'}: function body starting at byte "
                f"{tokens[q].start} never closes"
            )
        start = _signature_start(tokens, j - 1)
        functions.append(SourceFunction(
            id=f"{file_path or 'mem'}:{len(functions)}",
            language=language,
            text=file_text[tokens[start].start:tokens[end].end],
            file_path=file_path,
            context_before=tokens[max(0, start - CONTEXT_WINDOW):start],
            context_after=tokens[end + 1:end + 1 + CONTEXT_WINDOW],
        ))
        j = end + 1
    return functions
