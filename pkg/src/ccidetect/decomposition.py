"""Splitting an edit script into removed / introduced / untouched token sets."""

from __future__ import annotations

from dataclasses import dataclass

from .diffing import EditScript, SpanKind
from .lexer import Token


@dataclass(frozen=True)
class DiffDecomposition:
    s_old: tuple[Token, ...]  # Del tokens + Replace old sides, in span order
    s_new: tuple[Token, ...]  # Add tokens + Replace new sides, in span order
    s_unchanged: tuple[Token, ...]  # Keep tokens, in span order


def decompose(script: EditScript) -> DiffDecomposition:
    s_old: list[Token] = []
    s_new: list[Token] = []
    s_unchanged: list[Token] = []
    for span in script.spans:
        if span.kind is SpanKind.KEEP:
            s_unchanged.extend(span.old_tokens)
        elif span.kind is SpanKind.DEL:
            s_old.extend(span.old_tokens)
        elif span.kind is SpanKind.ADD:
            s_new.extend(span.new_tokens)
        else:
            s_old.extend(span.old_tokens)
            s_new.extend(span.new_tokens)
    return DiffDecomposition(tuple(s_old), tuple(s_new), tuple(s_unchanged))
