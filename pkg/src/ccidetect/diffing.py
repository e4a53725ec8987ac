"""Token-level shortest edit scripts and activity-labeled edit spans.

diff_tokens computes a minimal edit script (Myers) between two token
sequences.  group_spans folds the raw op stream into maximal Keep/Add/Del
spans, pairing a Del run immediately followed by an Add run into a single
Replace span.  render_tagged serializes a script with explicit activity tags,
e.g. ``<ReplaceOld> a <ReplaceNew> b <EndReplace>``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .lexer import Origin, Token, TokenKind, TokenSequence


class DiffError(ValueError):
    """Raised for corrupted edit scripts or malformed tagged renderings."""


class EditAction(enum.Enum):
    KEEP = "keep"
    ADD = "add"
    DEL = "del"


@dataclass(frozen=True)
class EditOp:
    action: EditAction
    token: Token


class SpanKind(enum.Enum):
    KEEP = "keep"
    ADD = "add"
    DEL = "del"
    REPLACE = "replace"


@dataclass(frozen=True)
class EditSpan:
    kind: SpanKind
    old_tokens: tuple[Token, ...]
    new_tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        k = self.kind
        if k is SpanKind.KEEP and self.old_tokens != self.new_tokens:
            raise DiffError("Keep span must carry identical old/new tokens")
        if k in (SpanKind.KEEP, SpanKind.DEL, SpanKind.REPLACE) and not self.old_tokens:
            raise DiffError(f"{k.value} span requires old tokens")
        if k in (SpanKind.KEEP, SpanKind.ADD, SpanKind.REPLACE) and not self.new_tokens:
            raise DiffError(f"{k.value} span requires new tokens")
        if k is SpanKind.ADD and self.old_tokens:
            raise DiffError("Add span must not carry old tokens")
        if k is SpanKind.DEL and self.new_tokens:
            raise DiffError("Del span must not carry new tokens")


@dataclass(frozen=True)
class EditScript:
    spans: tuple[EditSpan, ...]

    def __post_init__(self) -> None:
        for a, b in zip(self.spans, self.spans[1:]):
            if a.kind is b.kind:
                raise DiffError("adjacent spans of the same kind must be merged")

    def old_projection(self) -> tuple[Token, ...]:
        out: list[Token] = []
        for span in self.spans:
            out.extend(span.old_tokens)
        return tuple(out)

    def new_projection(self) -> tuple[Token, ...]:
        out: list[Token] = []
        for span in self.spans:
            out.extend(span.new_tokens)
        return tuple(out)


def _myers_trace(a: tuple[Token, ...], b: tuple[Token, ...]) -> list[list[int]]:
    n, m = len(a), len(b)
    maxd = n + m
    off = maxd
    v = [0] * (2 * maxd + 1)
    trace: list[list[int]] = []
    for d in range(maxd + 1):
        trace.append(v.copy())
        for k in range(-d, d + 1, 2):
            # Preferring the k-1 predecessor on ties makes deletions win,
            # which keeps the script deterministic (Del before Add).
            if k == -d or (k != d and v[off + k - 1] < v[off + k + 1]):
                x = v[off + k + 1]
            else:
                x = v[off + k - 1] + 1
            y = x - k
            while x < n and y < m and a[x] == b[y]:
                x += 1
                y += 1
            v[off + k] = x
            if x >= n and y >= m:
                return trace
    return trace


def _backtrack(a: tuple[Token, ...], b: tuple[Token, ...], trace: list[list[int]]) -> list[EditOp]:
    off = len(a) + len(b)
    ops: list[EditOp] = []
    x, y = len(a), len(b)
    for d in range(len(trace) - 1, -1, -1):
        v = trace[d]
        k = x - y
        if k == -d or (k != d and v[off + k - 1] < v[off + k + 1]):
            prev_k = k + 1
        else:
            prev_k = k - 1
        prev_x = v[off + prev_k]
        prev_y = prev_x - prev_k
        while x > prev_x and y > prev_y:
            ops.append(EditOp(EditAction.KEEP, a[x - 1]))
            x -= 1
            y -= 1
        if d > 0:
            if x == prev_x:
                ops.append(EditOp(EditAction.ADD, b[prev_y]))
            else:
                ops.append(EditOp(EditAction.DEL, a[prev_x]))
            x, y = prev_x, prev_y
    ops.reverse()
    return ops


def _normalize(ops: list[EditOp]) -> list[EditOp]:
    """Within each maximal non-Keep run, emit all Dels before all Adds."""
    out: list[EditOp] = []
    i = 0
    while i < len(ops):
        if ops[i].action is EditAction.KEEP:
            out.append(ops[i])
            i += 1
            continue
        j = i
        while j < len(ops) and ops[j].action is not EditAction.KEEP:
            j += 1
        run = ops[i:j]
        out.extend(op for op in run if op.action is EditAction.DEL)
        out.extend(op for op in run if op.action is EditAction.ADD)
        i = j
    return out


def diff_tokens(old: TokenSequence, new: TokenSequence) -> list[EditOp]:
    """Minimal token edit script; Keep ops form an LCS of the two inputs."""
    a, b = old.tokens, new.tokens
    if not a and not b:
        return []
    return _normalize(_backtrack(a, b, _myers_trace(a, b)))


def _runs(ops: list[EditOp]) -> list[tuple[EditAction, list[Token]]]:
    runs: list[tuple[EditAction, list[Token]]] = []
    for op in ops:
        if runs and runs[-1][0] is op.action:
            runs[-1][1].append(op.token)
        else:
            runs.append((op.action, [op.token]))
    return runs


def group_spans(
    ops: list[EditOp],
    old: TokenSequence | None = None,
    new: TokenSequence | None = None,
) -> EditScript:
    """Fold an op stream into spans; Del-run + Add-run pairs become Replace.

    When the original sequences are supplied, the op stream's projections are
    validated against them and a mismatch raises DiffError.
    """
    if old is not None:
        proj = tuple(op.token for op in ops if op.action is not EditAction.ADD)
        if proj != old.tokens:
            raise DiffError("edit script old-side projection does not match input")
    if new is not None:
        proj = tuple(op.token for op in ops if op.action is not EditAction.DEL)
        if proj != new.tokens:
            raise DiffError("edit script new-side projection does not match input")

    runs = _runs(ops)
    spans: list[EditSpan] = []
    i = 0
    while i < len(runs):
        action, tokens = runs[i]
        if (
            action is EditAction.DEL
            and i + 1 < len(runs)
            and runs[i + 1][0] is EditAction.ADD
        ):
            spans.append(EditSpan(SpanKind.REPLACE, tuple(tokens), tuple(runs[i + 1][1])))
            i += 2
        elif action is EditAction.KEEP:
            spans.append(EditSpan(SpanKind.KEEP, tuple(tokens), tuple(tokens)))
            i += 1
        elif action is EditAction.DEL:
            spans.append(EditSpan(SpanKind.DEL, tuple(tokens), ()))
            i += 1
        else:
            spans.append(EditSpan(SpanKind.ADD, (), tuple(tokens)))
            i += 1

    # Arbitrary op streams (e.g. Del,Add,Del,Add with no Keep between) can
    # yield adjacent Replace spans; merge them to restore the invariant.
    merged: list[EditSpan] = []
    for span in spans:
        if merged and merged[-1].kind is span.kind:
            prev = merged.pop()
            merged.append(
                EditSpan(
                    span.kind,
                    prev.old_tokens + span.old_tokens,
                    prev.new_tokens + span.new_tokens,
                )
            )
        else:
            merged.append(span)
    return EditScript(tuple(merged))


TAG_KEEP = "<Keep>"
TAG_END_KEEP = "<EndKeep>"
TAG_ADD = "<Add>"
TAG_END_ADD = "<EndAdd>"
TAG_DEL = "<Del>"
TAG_END_DEL = "<EndDel>"
TAG_REPLACE_OLD = "<ReplaceOld>"
TAG_REPLACE_NEW = "<ReplaceNew>"
TAG_END_REPLACE = "<EndReplace>"

DIFF_TAGS = (
    TAG_KEEP,
    TAG_END_KEEP,
    TAG_ADD,
    TAG_END_ADD,
    TAG_DEL,
    TAG_END_DEL,
    TAG_REPLACE_OLD,
    TAG_REPLACE_NEW,
    TAG_END_REPLACE,
)


def _tag(text: str) -> Token:
    return Token(text, TokenKind.TAG)


def render_tagged(script: EditScript) -> TokenSequence:
    """Serialize a script as tag-delimited activity spans."""
    tokens: list[Token] = []
    for span in script.spans:
        if span.kind is SpanKind.KEEP:
            tokens.append(_tag(TAG_KEEP))
            tokens.extend(span.old_tokens)
            tokens.append(_tag(TAG_END_KEEP))
        elif span.kind is SpanKind.ADD:
            tokens.append(_tag(TAG_ADD))
            tokens.extend(span.new_tokens)
            tokens.append(_tag(TAG_END_ADD))
        elif span.kind is SpanKind.DEL:
            tokens.append(_tag(TAG_DEL))
            tokens.extend(span.old_tokens)
            tokens.append(_tag(TAG_END_DEL))
        else:
            tokens.append(_tag(TAG_REPLACE_OLD))
            tokens.extend(span.old_tokens)
            tokens.append(_tag(TAG_REPLACE_NEW))
            tokens.extend(span.new_tokens)
            tokens.append(_tag(TAG_END_REPLACE))
    return TokenSequence(tuple(tokens), Origin.CODE)


def _relex_one(text: str) -> Token:
    from .lexer import _lex_chunk  # lexing is idempotent, so this round-trips

    toks = _lex_chunk(text, comment_mode=False)
    if len(toks) != 1:
        # A rendered token always re-lexes to itself; anything else means the
        # serialized form was edited by hand.  Keep it as a single literal.
        return Token(text, TokenKind.LITERAL)
    return toks[0]


def parse_tagged(text: str) -> EditScript:
    """Parse the space-joined output of render_tagged back into a script."""
    words = text.split()
    spans: list[EditSpan] = []
    i = 0
    while i < len(words):
        opener = words[i]
        i += 1
        if opener == TAG_REPLACE_OLD:
            old: list[Token] = []
            new: list[Token] = []
            while i < len(words) and words[i] != TAG_REPLACE_NEW:
                if words[i] in DIFF_TAGS:
                    raise DiffError(f"unexpected tag {words[i]} inside Replace span")
                old.append(_relex_one(words[i]))
                i += 1
            if i >= len(words):
                raise DiffError("Replace span missing <ReplaceNew>")
            i += 1
            while i < len(words) and words[i] != TAG_END_REPLACE:
                if words[i] in DIFF_TAGS:
                    raise DiffError(f"unexpected tag {words[i]} inside Replace span")
                new.append(_relex_one(words[i]))
                i += 1
            if i >= len(words):
                raise DiffError("Replace span missing <EndReplace>")
            i += 1
            spans.append(EditSpan(SpanKind.REPLACE, tuple(old), tuple(new)))
            continue
        closer_for = {TAG_KEEP: TAG_END_KEEP, TAG_ADD: TAG_END_ADD, TAG_DEL: TAG_END_DEL}
        if opener not in closer_for:
            raise DiffError(f"expected a span opener, got {opener!r}")
        closer = closer_for[opener]
        body: list[Token] = []
        while i < len(words) and words[i] != closer:
            if words[i] in DIFF_TAGS:
                raise DiffError(f"unexpected tag {words[i]} inside span")
            body.append(_relex_one(words[i]))
            i += 1
        if i >= len(words):
            raise DiffError(f"span opened by {opener} is never closed")
        i += 1
        toks = tuple(body)
        if opener == TAG_KEEP:
            spans.append(EditSpan(SpanKind.KEEP, toks, toks))
        elif opener == TAG_ADD:
            spans.append(EditSpan(SpanKind.ADD, (), toks))
        else:
            spans.append(EditSpan(SpanKind.DEL, toks, ()))
    return EditScript(tuple(spans))
