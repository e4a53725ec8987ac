"""Whitespace- and punctuation-splitting lexers for code and comment text.

The lexers are total: any UTF-8 input produces a token sequence, never an
exception.  Splitting is deliberately simple (whitespace first, then
single-character symbol tokens) so that diff spans remain human readable and
re-lexing a space-joined token sequence reproduces it exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new null package
    private protected public return short static strictfp super switch
    synchronized this throw throws transient true false try void volatile
    while""".split()
)

# Characters treated as operators; every other non-word, non-quote character
# is punctuation.  Both lex to single-character tokens.
_OPERATOR_CHARS = frozenset("+-*/%=<>!&|^~?:")
_QUOTE_CHARS = frozenset("'\"")


class TokenKind(enum.Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    LITERAL = "literal"
    OPERATOR = "operator"
    PUNCTUATION = "punctuation"
    COMMENT_WORD = "comment-word"
    TAG = "tag"


class Origin(enum.Enum):
    CODE = "code"
    COMMENT = "comment"


@dataclass(frozen=True)
class Token:
    text: str
    kind: TokenKind

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("token text must be non-empty")
        if any(ch.isspace() for ch in self.text):
            raise ValueError(f"token text contains whitespace: {self.text!r}")


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[Token, ...]
    origin: Origin

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]


def join_tokens(seq: TokenSequence) -> str:
    """Inverse-ish of lexing: token texts joined with single spaces."""
    return " ".join(t.text for t in seq.tokens)


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


def _word_kind(text: str, comment_mode: bool) -> TokenKind:
    if comment_mode:
        return TokenKind.COMMENT_WORD
    if text in JAVA_KEYWORDS:
        return TokenKind.KEYWORD
    if text[0].isdigit():
        return TokenKind.LITERAL
    return TokenKind.IDENTIFIER


def _lex_chunk(chunk: str, comment_mode: bool) -> list[Token]:
    """Lex one whitespace-free chunk of input."""
    out: list[Token] = []
    i = 0
    n = len(chunk)
    while i < n:
        ch = chunk[i]
        if ch in _QUOTE_CHARS:
            # String/char literal kept whole, quotes included.  Chunks never
            # contain whitespace, so an unterminated literal simply runs to
            # the end of the chunk (best effort).
            j = i + 1
            while j < n:
                if chunk[j] == "\\":
                    j += 2
                    continue
                if chunk[j] == ch:
                    j += 1
                    break
                j += 1
            j = min(j, n)
            out.append(Token(chunk[i:j], TokenKind.LITERAL))
            i = j
        elif _is_word_char(ch):
            j = i + 1
            while j < n and _is_word_char(chunk[j]):
                j += 1
            text = chunk[i:j]
            out.append(Token(text, _word_kind(text, comment_mode)))
            i = j
        elif comment_mode and ch == "@" and i + 1 < n and _is_word_char(chunk[i + 1]):
            # Javadoc tags (@param, @return, ...) survive as single tokens.
            j = i + 1
            while j < n and _is_word_char(chunk[j]):
                j += 1
            out.append(Token(chunk[i:j], TokenKind.COMMENT_WORD))
            i = j
        else:
            kind = TokenKind.OPERATOR if ch in _OPERATOR_CHARS else TokenKind.PUNCTUATION
            out.append(Token(ch, kind))
            i += 1
    return out


def lex_code(source: str) -> TokenSequence:
    """Lex arbitrary (Java-like) source text into a flat token sequence."""
    tokens: list[Token] = []
    for chunk in source.split():
        tokens.extend(_lex_chunk(chunk, comment_mode=False))
    return TokenSequence(tuple(tokens), Origin.CODE)


def _strip_comment_markers(comment: str) -> str:
    lines = []
    for line in comment.splitlines() or [comment]:
        s = line.strip()
        if s.startswith("/**"):
            s = s[3:]
        elif s.startswith("/*"):
            s = s[2:]
        if s.endswith("*/"):
            s = s[:-2]
        s = s.strip()
        while s.startswith("*"):
            s = s[1:].lstrip()
        lines.append(s)
    return " ".join(lines)


def lex_comment(comment: str) -> TokenSequence:
    """Lex comment text, stripping Javadoc markers (/**, */, leading *)."""
    tokens: list[Token] = []
    for chunk in _strip_comment_markers(comment).split():
        tokens.extend(_lex_chunk(chunk, comment_mode=True))
    return TokenSequence(tuple(tokens), Origin.COMMENT)
