"""Lexer unit and property tests, including a cross-check against an
independently written regex-based reference lexer."""

import re

import pytest
from hypothesis import given, settings, strategies as st

from alphacc.errors import LexicalError, UnbalancedBracesError
from alphacc.lexer import (
    C, JAVA, N_TOKEN_TYPES, TokenType, classify_token, extract_functions,
    tokenize,
)


class TestTokenizeExamples:
    def test_for_loop_reference_sequence(self):
        seq = tokenize("for(int a = 0; a < N; a++)", JAVA)
        assert [t.text for t in seq.tokens] == [
            "for", "(", "int", "a", "=", "0", ";",
            "a", "<", "N", ";", "a", "++", ")"]
        assert len(seq.tokens) == 14

    def test_empty_input(self):
        assert tokenize("", JAVA).tokens == ()
        assert tokenize("   \n\t ", C).tokens == ()

    def test_annotation_first_token(self):
        seq = tokenize("@Override public int f(){return 0;}", JAVA)
        assert seq.tokens[0].text == "@Override"
        assert seq.tokens[0].type == TokenType.ANNOTATION

    def test_string_and_char_keep_quotes(self):
        seq = tokenize('x = "a b" + \'c\';', C)
        texts = [t.text for t in seq.tokens]
        assert '"a b"' in texts and "'c'" in texts
        assert all(t.type == TokenType.STRING
                   for t in seq.tokens if t.text[0] in "\"'")

    def test_preprocessor_word_fuses(self):
        seq = tokenize("#include <stdio.h>\nint x;", C)
        assert seq.tokens[0].text == "#include"
        assert seq.tokens[0].type == TokenType.OTHER

    def test_comments_consumed(self):
        a = tokenize("int x = 1; // trailing\n/* block */ int y;", JAVA)
        b = tokenize("int x = 1; int y;", JAVA)
        assert [t.text for t in a.tokens] == [t.text for t in b.tokens]

    def test_unterminated_string_reports_offset(self):
        with pytest.raises(LexicalError) as exc:
            tokenize('int x = "oops', JAVA)
        assert exc.value.offset == 8

    def test_unterminated_block_comment(self):
        with pytest.raises(LexicalError) as exc:
            tokenize("x /* never closed", C)
        assert exc.value.offset == 2

    def test_shift_operators_maximal_munch(self):
        seq = tokenize("a >>>= b >> c >= d > e", JAVA)
        ops = [t.text for t in seq.tokens if t.type == TokenType.OPERATOR]
        assert ops == [">>>=", ">>", ">=", ">"]


class TestClassify:
    @pytest.mark.parametrize("lexeme,language,expected", [
        ("for", JAVA, TokenType.KEYWORD),
        ("0", JAVA, TokenType.DECIMAL_INTEGER),
        ("0x1F", C, TokenType.HEX_INTEGER),
        ("public", JAVA, TokenType.MODIFIER),
        ("static", C, TokenType.KEYWORD),
        ("int", JAVA, TokenType.BASIC_TYPE),
        ("true", C, TokenType.BOOLEAN),
        ("null", JAVA, TokenType.NULL),
        ("NULL", C, TokenType.NULL),
        ("null", C, TokenType.IDENTIFIER),
        ("3.14", JAVA, TokenType.DECIMAL_FLOAT),
        ("1e5", C, TokenType.DECIMAL_FLOAT),
        ("1f", JAVA, TokenType.DECIMAL_FLOAT),
        ("0x1.8p3", C, TokenType.HEX_FLOAT),
        ("@Override", JAVA, TokenType.ANNOTATION),
        ("@Override", C, TokenType.OTHER),
        ("{", JAVA, TokenType.SEPARATOR),
        ("+=", C, TokenType.OPERATOR),
        ("foo_bar", C, TokenType.IDENTIFIER),
        ("0b101", JAVA, TokenType.OTHER),
        ("#define", C, TokenType.OTHER),
        ("", JAVA, TokenType.OTHER),
    ])
    def test_cases(self, lexeme, language, expected):
        assert classify_token(lexeme, language) == expected

    @given(st.text(min_size=1, max_size=12))
    def test_totality(self, lexeme):
        for lang in (JAVA, C):
            t = classify_token(lexeme, lang)
            assert 0 <= int(t) < N_TOKEN_TYPES


_ident = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True)
_snippets = st.lists(
    st.sampled_from(["int", "x", "=", "0", ";", "if", "(", ")", "{", "}",
                     "+", "while", "a", "b", "<", "foo", "1.5", "++",
                     '"s"', "return", ","]),
    min_size=1, max_size=40)


class TestProperties:
    @given(_snippets, st.randoms(use_true_random=False))
    @settings(max_examples=120, deadline=None)
    def test_reformat_invariance(self, tokens, rnd):
        """Whitespace/comment edits never change the token sequence."""
        source = " ".join(tokens)
        seps = [" ", "  ", "\n", "\t\n  ", " /* c */ ", " // eol\n", "\n\n "]
        mutated = []
        for tok in tokens:
            mutated.append(tok)
            mutated.append(rnd.choice(seps))
        mutated = "".join(mutated)
        a = tokenize(source, JAVA)
        b = tokenize(mutated, JAVA)
        assert [(t.text, t.type) for t in a.tokens] == \
            [(t.text, t.type) for t in b.tokens]

    @given(_snippets)
    @settings(max_examples=60, deadline=None)
    def test_determinism_and_roundtrip(self, tokens):
        source = " ".join(tokens)
        a = tokenize(source, JAVA)
        b = tokenize(source, JAVA)
        assert [(t.text, t.type) for t in a.tokens] == \
            [(t.text, t.type) for t in b.tokens]
        # single-space concatenation reproduces the source modulo whitespace
        assert " ".join(t.text for t in a.tokens) == source

    @given(_snippets)
    @settings(max_examples=60, deadline=None)
    def test_spans_monotonic(self, tokens):
        seq = tokenize("  ".join(tokens), JAVA)
        prev_end = 0
        for t in seq.tokens:
            assert t.start >= prev_end
            assert t.end > t.start
            prev_end = t.end


class TestExtractFunctions:
    def test_single_function_empty_contexts(self):
        fns = extract_functions("int main(){return 0;}", C)
        assert len(fns) == 1
        assert fns[0].text == "int main(){return 0;}"
        assert fns[0].context_before == ()
        assert fns[0].context_after == ()

    def test_two_adjacent_functions(self):
        fns = extract_functions("int a(){int p=1;}\nint b(){return 2;}", C)
        assert len(fns) == 2
        assert fns[1].context_before[-1].text == "}"
        assert fns[0].context_after[0].text == "int"

    def test_nested_stays_inside(self):
        src = ("class T { int outer() { Runnable r = new Runnable() "
               "{ public void run() { } }; return 1; } }")
        fns = extract_functions(src, JAVA)
        assert len(fns) == 1
        assert "run" in fns[0].text

    def test_control_flow_headers_skipped(self):
        src = "int f(int x){ if (x) { x++; } while (x) { x--; } return x; }"
        fns = extract_functions(src, C)
        assert len(fns) == 1

    def test_throws_clause(self):
        src = "public int f(int x) throws IOException, FooError { return x; }"
        fns = extract_functions(src, JAVA)
        assert len(fns) == 1
        assert fns[0].text.startswith("public int f")

    def test_unbalanced_braces(self):
        with pytest.raises(UnbalancedBracesError):
            extract_functions("int f() { int x = 1;", C)

    def test_corpus_file_count_matches_construction(self):
        # build a 50-function file from known pieces; the count oracle is
        # the construction itself
        parts = []
        for i in range(50):
            parts.append(f"static int fn{i}(int a) {{ return a + {i}; }}")
        text = "\n\n".join(parts)
        fns = extract_functions(text, C)
        assert len(fns) == 50
        for i, fn in enumerate(fns):
            assert f"fn{i}" in fn.text

    def test_context_window_is_64(self):
        filler = " ".join(["int", f"v{0}", "=", "9", ";"] * 30)
        src = filler + "\nint target(){return 1;}\n" + filler
        fns = extract_functions(src, C)
        target = [f for f in fns if "target" in f.text]
        assert len(target) == 1
        assert len(target[0].context_before) == 64
        assert len(target[0].context_after) == 64


# ---------------------------------------------------------------------------
# Reference lexer cross-check: an independent regex-based implementation of
# the same lexical rules, written separately from the production scanner.
# ---------------------------------------------------------------------------

_REF_PUNCT = [
    ">>>=", ">>>", "<<=", ">>=", "...", "->", "::", "==", ">=", "<=", "!=",
    "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<", ">>",
] + list("+-*/%=<>!&|^~?:(){}[];,.")

_REF_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<lc>//[^\n]*)"
    r"|(?P<bc>/\*.*?\*/)"
    r"|(?P<str>\"(?:\\.|[^\"\\\n])*\")"
    r"|(?P<chr>'(?:\\.|[^'\\\n])*')"
    r"|(?P<num>(?:\d|\.\d)(?:[eEpP][+-]|[0-9A-Za-z_.])*)"
    r"|(?P<at>[@#][A-Za-z_$][A-Za-z0-9_$]*)"
    r"|(?P<word>[A-Za-z_$][A-Za-z0-9_$]*)"
    r"|(?P<punct>" + "|".join(re.escape(p) for p in _REF_PUNCT) + r")"
    r"|(?P<other>.)",
    re.DOTALL)

_REF_JAVA_MODIFIERS = {"abstract", "default", "final", "native", "private",
                       "protected", "public", "static", "strictfp",
                       "synchronized", "transient", "volatile"}
_REF_JAVA_BASIC = {"boolean", "byte", "char", "double", "float", "int",
                   "long", "short"}
_REF_JAVA_KEYWORDS = {"assert", "break", "case", "catch", "class", "const",
                      "continue", "do", "else", "enum", "extends", "finally",
                      "for", "goto", "if", "implements", "import",
                      "instanceof", "interface", "new", "package", "return",
                      "super", "switch", "this", "throw", "throws", "try",
                      "void", "while"}
_REF_SEPARATORS = set("(){}[];,.") | {"...", "::"}


def _ref_classify_java(text: str) -> TokenType:
    if text in _REF_JAVA_MODIFIERS:
        return TokenType.MODIFIER
    if text in _REF_JAVA_BASIC:
        return TokenType.BASIC_TYPE
    if text in _REF_JAVA_KEYWORDS:
        return TokenType.KEYWORD
    if text in ("true", "false"):
        return TokenType.BOOLEAN
    if text == "null":
        return TokenType.NULL
    if text[0] in "\"'":
        return TokenType.STRING
    if text[0] == "@":
        return TokenType.ANNOTATION
    if text[0].isdigit() or (text[0] == "." and len(text) > 1):
        if re.fullmatch(r"0[xX](?:[0-9a-fA-F]+(?:\.[0-9a-fA-F]*)?|\.[0-9a-fA-F]+)[pP][+-]?\d+[fFdDlL]?", text):
            return TokenType.HEX_FLOAT
        if re.fullmatch(r"0[xX][0-9a-fA-F]+[lLuU]*", text):
            return TokenType.HEX_INTEGER
        if re.fullmatch(r"(?:\d[\d_]*\.[\d_]*(?:[eE][+-]?\d+)?|\.\d[\d_]*(?:[eE][+-]?\d+)?|\d[\d_]*[eE][+-]?\d+)[fFdD]?|\d[\d_]*[fFdD]", text):
            return TokenType.DECIMAL_FLOAT
        if re.fullmatch(r"\d[\d_]*[lLuU]*", text):
            return TokenType.DECIMAL_INTEGER
        return TokenType.OTHER
    if text in _REF_SEPARATORS:
        return TokenType.SEPARATOR
    if text in _REF_PUNCT:
        return TokenType.OPERATOR
    if re.fullmatch(r"[A-Za-z_$][A-Za-z0-9_$]*", text):
        return TokenType.IDENTIFIER
    return TokenType.OTHER


def _ref_lex_java(source: str):
    out = []
    pos = 0
    while pos < len(source):
        m = _REF_RE.match(source, pos)
        assert m, f"reference lexer stuck at {pos}"
        pos = m.end()
        kind = m.lastgroup
        if kind in ("ws", "lc", "bc"):
            continue
        text = m.group()
        if kind == "at" and text[0] == "#":
            out.append((text, TokenType.OTHER))
        else:
            out.append((text, _ref_classify_java(text)))
    return out


class TestReferenceCrossCheck:
    def test_hundred_sampled_functions(self):
        from alphacc.synthetic import generate_benchmark
        bench = generate_benchmark(seed=11, n_problems=20,
                                   variants_per_problem=5)
        sample = bench.functions[:100]
        assert len(sample) == 100
        for rec in sample:
            ours = [(t.text, t.type) for t in tokenize(rec["code"], JAVA).tokens]
            ref = _ref_lex_java(rec["code"])
            assert ours == ref, f"divergence on {rec['id']}"
