"""Shared test utilities: token builders and independent diff oracles."""

from __future__ import annotations

from ccidetect.lexer import Origin, Token, TokenKind, TokenSequence


def toks(symbols: str | list[str]) -> TokenSequence:
    """Token sequence from space-separated symbols (or a list of them)."""
    if isinstance(symbols, str):
        symbols = symbols.split()
    return TokenSequence(
        tuple(Token(s, TokenKind.IDENTIFIER) for s in symbols), Origin.CODE
    )


def lcs_length(a: list[str], b: list[str]) -> int:
    """Classic quadratic DP, kept deliberately independent of the diff engine."""
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[-1]))
        prev = cur
    return prev[len(b)]


def min_edit_cost(a: list[str], b: list[str]) -> int:
    """Minimal insert+delete cost (no substitution) via the LCS identity."""
    return len(a) + len(b) - 2 * lcs_length(a, b)
