import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccidetect.lexer import (
    Origin,
    Token,
    TokenKind,
    join_tokens,
    lex_code,
    lex_comment,
)


class TestLexCode:
    def test_simple_statement(self):
        assert lex_code("return x;").texts() == ["return", "x", ";"]

    def test_empty_input(self):
        seq = lex_code("")
        assert seq.texts() == []
        assert seq.origin is Origin.CODE

    def test_punctuation_run_splits_to_single_chars(self):
        # Character-class oracle: walk the string, word chars group, symbol
        # chars stand alone.
        source = "a.b(c)"
        expected = []
        buf = ""
        for ch in source:
            if ch.isalnum() or ch in "_$":
                buf += ch
            else:
                if buf:
                    expected.append(buf)
                    buf = ""
                expected.append(ch)
        if buf:
            expected.append(buf)
        assert lex_code(source).texts() == expected == ["a", ".", "b", "(", "c", ")"]

    def test_string_literal_kept_whole(self):
        assert lex_code('x = "foo";').texts() == ["x", "=", '"foo"', ";"]

    def test_char_literal_with_escape(self):
        assert lex_code("c = '\\'';").texts() == ["c", "=", "'\\''", ";"]

    def test_unterminated_literal_best_effort(self):
        assert lex_code('s = "oops').texts() == ["s", "=", '"oops']

    def test_identifiers_not_subword_split(self):
        assert lex_code("camelCase snake_case").texts() == ["camelCase", "snake_case"]

    def test_keyword_kind(self):
        seq = lex_code("return x;")
        assert seq.tokens[0].kind is TokenKind.KEYWORD
        assert seq.tokens[1].kind is TokenKind.IDENTIFIER
        assert seq.tokens[2].kind is TokenKind.PUNCTUATION

    def test_operator_run_splits(self):
        assert lex_code("a+=b==c").texts() == ["a", "+", "=", "b", "=", "=", "c"]


class TestLexComment:
    def test_javadoc_markers_stripped(self):
        assert lex_comment("/** Returns the id. */").texts() == ["Returns", "the", "id", "."]

    def test_at_tag_kept_whole(self):
        seq = lex_comment("@param name the name")
        assert seq.texts() == ["@param", "name", "the", "name"]
        assert seq.tokens[0].kind is TokenKind.COMMENT_WORD

    def test_empty(self):
        assert lex_comment("").texts() == []

    def test_leading_star_per_line(self):
        comment = "/**\n * First line.\n * @return the id\n */"
        assert lex_comment(comment).texts() == [
            "First", "line", ".", "@return", "the", "id",
        ]

    def test_origin(self):
        assert lex_comment("hi").origin is Origin.COMMENT


class TestTokenInvariants:
    def test_rejects_whitespace(self):
        with pytest.raises(ValueError):
            Token("a b", TokenKind.IDENTIFIER)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Token("", TokenKind.IDENTIFIER)


@settings(max_examples=300)
@given(st.text(max_size=120))
def test_lex_code_total_and_idempotent(source):
    seq = lex_code(source)
    rejoined = join_tokens(seq)
    again = lex_code(rejoined)
    assert again.tokens == seq.tokens


@settings(max_examples=200)
@given(st.text(max_size=120))
def test_lex_comment_total_and_idempotent(comment):
    seq = lex_comment(comment)
    again = lex_comment(join_tokens(seq))
    assert again.tokens == seq.tokens


@settings(max_examples=200)
@given(st.text(max_size=120))
def test_no_token_straddles_whitespace(source):
    chunks = source.split()
    tokens = lex_code(source).texts()
    # The lexer partitions each whitespace-delimited chunk exactly, so tokens
    # can be reassembled chunk by chunk without ever crossing a boundary.
    i = 0
    for chunk in chunks:
        acc = ""
        while len(acc) < len(chunk):
            assert i < len(tokens)
            acc += tokens[i]
            i += 1
        assert acc == chunk
    assert i == len(tokens)
