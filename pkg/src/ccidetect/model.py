"""Compact trainable encoder: vocabulary, input assembly and forward pass.

The encoder embeds the concatenated input (removed tokens, introduced tokens,
comment, tagged diff), optionally applies a single self-attention block, and
mean-pools two unit-norm vectors: the comment representation and the diff
representation.  A logistic head over their concatenation yields the
inconsistency probability.  Everything is float64 numpy so the analytic
backward pass (see losses.py) can be checked against finite differences.
"""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import PreprocessedRecord
from .diffing import DIFF_TAGS
from .lexer import lex_code, lex_comment

PAD_TOKEN = "<pad>"
SEP_TOKEN = "<sep>"
UNK_TOKEN = "<unk>"
RESERVED_TOKENS = (PAD_TOKEN, SEP_TOKEN, UNK_TOKEN) + DIFF_TAGS
PAD_ID, SEP_ID, UNK_ID = 0, 1, 2

# Segment codes for EncodedInput positions.
SEG_OLD, SEG_NEW, SEG_COMMENT, SEG_DIFF, SEG_PAD = 0, 1, 2, 3, 4

_NORM_EPS = 1e-12  # below this, a pooled vector is degenerate


class ModelFormatError(ValueError):
    """Raised when a persisted model file is malformed."""


class Vocabulary:
    def __init__(self, tokens: list[str]):
        if tuple(tokens[: len(RESERVED_TOKENS)]) != RESERVED_TOKENS:
            raise ValueError("vocabulary must start with the reserved block")
        self.tokens = list(tokens)
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, text: str) -> int:
        return self.index.get(text, UNK_ID)

    def ids_of(self, texts: list[str]) -> list[int]:
        return [self.id_of(t) for t in texts]


def build_vocab(corpus: list[PreprocessedRecord], min_count: int = 1) -> Vocabulary:
    """Vocabulary over comment and diff tokens seen at least min_count times.

    Ids: reserved block first, then descending count, ties lexicographic.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    reserved = set(RESERVED_TOKENS)
    counts: Counter[str] = Counter()
    for pre in corpus:
        for tok in lex_comment(pre.record.comment).tokens:
            if tok.text not in reserved:
                counts[tok.text] += 1
        for word in pre.tagged_diff.split():
            if word not in reserved:
                counts[word] += 1
    kept = sorted(
        (tok for tok, n in counts.items() if n >= min_count),
        key=lambda tok: (-counts[tok], tok),
    )
    return Vocabulary(list(RESERVED_TOKENS) + kept)


@dataclass(frozen=True)
class EncodedInput:
    ids: np.ndarray  # int64, length == max_len
    segments: np.ndarray  # int64, parallel to ids

    def __post_init__(self) -> None:
        if self.ids.shape != self.segments.shape:
            raise ValueError("ids and segments must have equal length")


def _segment_parts(
    pre: PreprocessedRecord, vocab: Vocabulary, mode: str
) -> list[tuple[list[int], int]]:
    comment_ids = vocab.ids_of([t.text for t in lex_comment(pre.record.comment)])
    if mode == "tagged":
        old_ids = vocab.ids_of(pre.s_old_text.split())
        new_ids = vocab.ids_of(pre.s_new_text.split())
        diff_ids = vocab.ids_of(pre.tagged_diff.split())
    elif mode == "flat":
        # Ablation: no activity labels, no decomposition.  The diff segment
        # is just old code followed by new code.
        old_ids = []
        new_ids = []
        flat = [t.text for t in lex_code(pre.record.old_code)]
        flat += [t.text for t in lex_code(pre.record.new_code)]
        diff_ids = vocab.ids_of(flat)
    else:
        raise ValueError(f"unknown input mode {mode!r}")
    return [
        (old_ids, SEG_OLD),
        (new_ids, SEG_NEW),
        (comment_ids, SEG_COMMENT),
        (diff_ids, SEG_DIFF),
    ]


def assemble_input(
    pre: PreprocessedRecord, vocab: Vocabulary, max_len: int, mode: str = "tagged"
) -> EncodedInput:
    """Concatenate OLD + NEW + COMMENT + DIFF (separator-terminated), pad/truncate.

    Truncation removes DIFF tail first, then COMMENT tail; OLD/NEW are only
    touched as a last resort when they alone exceed max_len.
    """
    if max_len < 8:
        raise ValueError("max_len must be >= 8")
    parts = _segment_parts(pre, vocab, mode)
    budget = max_len - len(parts)  # one separator per segment
    over = sum(len(ids) for ids, _ in parts) - budget
    if over > 0:
        # Truncation priority: DIFF, COMMENT, then NEW and OLD as fallback.
        for seg in (SEG_DIFF, SEG_COMMENT, SEG_NEW, SEG_OLD):
            if over <= 0:
                break
            for idx, (ids, seg_code) in enumerate(parts):
                if seg_code == seg:
                    cut = min(over, len(ids))
                    parts[idx] = (ids[: len(ids) - cut], seg_code)
                    over -= cut
    ids: list[int] = []
    segments: list[int] = []
    for part_ids, seg_code in parts:
        ids.extend(part_ids)
        ids.append(SEP_ID)
        segments.extend([seg_code] * (len(part_ids) + 1))
    pad = max_len - len(ids)
    ids.extend([PAD_ID] * pad)
    segments.extend([SEG_PAD] * pad)
    return EncodedInput(np.asarray(ids, dtype=np.int64), np.asarray(segments, dtype=np.int64))


@dataclass
class ModelParams:
    dim: int
    max_len: int
    attention: bool
    emb: np.ndarray  # (vocab, dim)
    wq: np.ndarray  # (dim, dim)
    wk: np.ndarray  # (dim, dim)
    wv: np.ndarray  # (dim, dim)
    head_w: np.ndarray  # (2 * dim,)
    head_b: float

    @property
    def vocab_size(self) -> int:
        return self.emb.shape[0]

    def tensors(self) -> dict[str, np.ndarray]:
        return {
            "emb": self.emb,
            "wq": self.wq,
            "wk": self.wk,
            "wv": self.wv,
            "head_w": self.head_w,
            "head_b": np.asarray([self.head_b], dtype=np.float64),
        }

    def copy(self) -> "ModelParams":
        return ModelParams(
            dim=self.dim,
            max_len=self.max_len,
            attention=self.attention,
            emb=self.emb.copy(),
            wq=self.wq.copy(),
            wk=self.wk.copy(),
            wv=self.wv.copy(),
            head_w=self.head_w.copy(),
            head_b=self.head_b,
        )


def init_params(
    vocab_size: int, dim: int, max_len: int, attention: bool, seed: int
) -> ModelParams:
    rng = np.random.default_rng(seed)
    scale = 0.1
    return ModelParams(
        dim=dim,
        max_len=max_len,
        attention=attention,
        emb=rng.normal(0.0, scale, size=(vocab_size, dim)),
        wq=rng.normal(0.0, scale, size=(dim, dim)),
        wk=rng.normal(0.0, scale, size=(dim, dim)),
        wv=rng.normal(0.0, scale, size=(dim, dim)),
        head_w=rng.normal(0.0, scale, size=(2 * dim,)),
        head_b=0.0,
    )


def zero_grads(params: ModelParams) -> "ParamGrads":
    return ParamGrads(
        emb=np.zeros_like(params.emb),
        wq=np.zeros_like(params.wq),
        wk=np.zeros_like(params.wk),
        wv=np.zeros_like(params.wv),
        head_w=np.zeros_like(params.head_w),
        head_b=0.0,
    )


@dataclass
class ParamGrads:
    emb: np.ndarray
    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    head_w: np.ndarray
    head_b: float


@dataclass(frozen=True)
class PairEncoding:
    c: np.ndarray  # unit-norm comment vector
    s: np.ndarray  # unit-norm diff vector
    p: float  # predicted inconsistency probability


@dataclass
class _ExampleCache:
    ids: np.ndarray
    X: np.ndarray
    H: np.ndarray
    A: np.ndarray | None
    V: np.ndarray | None
    Q: np.ndarray | None
    K: np.ndarray | None
    cmask: np.ndarray
    smask: np.ndarray
    c: np.ndarray
    s: np.ndarray
    rc: float
    rs: float
    c_degenerate: bool
    s_degenerate: bool


def _softmax_rows(M: np.ndarray) -> np.ndarray:
    Z = M - M.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def _pool(H: np.ndarray, mask: np.ndarray, dim: int) -> tuple[np.ndarray, float, bool]:
    if not mask.any():
        e0 = np.zeros(dim)
        e0[0] = 1.0
        return e0, 0.0, True
    u = H[mask].mean(axis=0)
    r = float(np.linalg.norm(u))
    if r < _NORM_EPS:
        e0 = np.zeros(dim)
        e0[0] = 1.0
        return e0, 0.0, True
    return u / r, r, False


def forward_example(inp: EncodedInput, params: ModelParams) -> _ExampleCache:
    d = params.dim
    n = int(np.count_nonzero(inp.segments != SEG_PAD))
    ids = inp.ids[:n]
    segs = inp.segments[:n]
    X = params.emb[ids]
    if params.attention and n > 0:
        Q = X @ params.wq
        K = X @ params.wk
        V = X @ params.wv
        A = _softmax_rows(Q @ K.T / np.sqrt(d))
        H = X + A @ V
    else:
        Q = K = V = A = None
        H = X
    cmask = segs == SEG_COMMENT
    smask = (segs == SEG_OLD) | (segs == SEG_NEW) | (segs == SEG_DIFF)
    c, rc, c_deg = _pool(H, cmask, d)
    s, rs, s_deg = _pool(H, smask, d)
    return _ExampleCache(
        ids=ids, X=X, H=H, A=A, V=V, Q=Q, K=K,
        cmask=cmask, smask=smask,
        c=c, s=s, rc=rc, rs=rs,
        c_degenerate=c_deg, s_degenerate=s_deg,
    )


def _sigmoid(z: float | np.ndarray):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


def head_logit(c: np.ndarray, s: np.ndarray, params: ModelParams) -> float:
    d = params.dim
    return float(params.head_w[:d] @ c + params.head_w[d:] @ s + params.head_b)


def encode_pair(inp: EncodedInput, params: ModelParams) -> PairEncoding:
    cache = forward_example(inp, params)
    z = head_logit(cache.c, cache.s, params)
    return PairEncoding(c=cache.c, s=cache.s, p=float(_sigmoid(z)))


def forward_batch(
    inputs: list[EncodedInput], params: ModelParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, list[_ExampleCache]]:
    """Returns (C, S, z, p, caches) for a batch of encoded inputs."""
    caches = [forward_example(inp, params) for inp in inputs]
    C = np.stack([cache.c for cache in caches])
    S = np.stack([cache.s for cache in caches])
    d = params.dim
    z = C @ params.head_w[:d] + S @ params.head_w[d:] + params.head_b
    p = _sigmoid(z)
    return C, S, z, p, caches


def _backward_pool(
    dvec: np.ndarray, vec: np.ndarray, r: float, degenerate: bool,
    mask: np.ndarray, dH: np.ndarray,
) -> None:
    if degenerate:
        return  # constant basis vector: no gradient flows
    du = (dvec - vec * (vec @ dvec)) / r
    dH[mask] += du / int(mask.sum())


def backward_example(
    cache: _ExampleCache, dc: np.ndarray, ds: np.ndarray,
    params: ModelParams, grads: ParamGrads,
) -> None:
    """Accumulate parameter gradients for one example given dL/dc and dL/ds."""
    n, d = cache.X.shape
    if n == 0:
        return
    dH = np.zeros_like(cache.H)
    _backward_pool(dc, cache.c, cache.rc, cache.c_degenerate, cache.cmask, dH)
    _backward_pool(ds, cache.s, cache.rs, cache.s_degenerate, cache.smask, dH)
    if params.attention:
        A, V, Q, K, X = cache.A, cache.V, cache.Q, cache.K, cache.X
        dX = dH.copy()  # residual branch
        dA = dH @ V.T
        dV = A.T @ dH
        grads.wv += X.T @ dV
        dX += dV @ params.wv.T
        dScores = A * (dA - (dA * A).sum(axis=1, keepdims=True))
        inv = 1.0 / np.sqrt(d)
        dQ = dScores @ K * inv
        dK = dScores.T @ Q * inv
        grads.wq += X.T @ dQ
        grads.wk += X.T @ dK
        dX += dQ @ params.wq.T + dK @ params.wk.T
    else:
        dX = dH
    np.add.at(grads.emb, cache.ids, dX)


# ---------------------------------------------------------------------------
# Persistence: plain-text header + little-endian float32 payload.
# ---------------------------------------------------------------------------

_MAGIC = "ccidetect-model v1"
_TENSOR_ORDER = ("emb", "wq", "wk", "wv", "head_w", "head_b")


def save_model(
    path: str | Path, params: ModelParams, vocab: Vocabulary,
    extras: dict[str, str] | None = None,
) -> None:
    if len(vocab) != params.vocab_size:
        raise ValueError("vocabulary size does not match embedding rows")
    lines = [
        _MAGIC,
        f"dim {params.dim}",
        f"max_len {params.max_len}",
        f"attention {int(params.attention)}",
        f"vocab {len(vocab)}",
    ]
    for key, value in (extras or {}).items():
        lines.append(f"{key} {value}")
    lines.append("tokens:")
    lines.extend(vocab.tokens)
    header = ("\n".join(lines) + "\n").encode("utf-8")
    payload = b"".join(
        np.ascontiguousarray(t, dtype="<f4").tobytes() for t in params.tensors().values()
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_model(path: str | Path) -> tuple[ModelParams, Vocabulary, dict[str, str]]:
    with open(path, "rb") as fh:
        data = fh.read()
    buf = io.BytesIO(data)

    def read_line() -> str:
        raw = buf.readline()
        if not raw.endswith(b"\n"):
            raise ModelFormatError("truncated header")
        return raw[:-1].decode("utf-8")

    if read_line() != _MAGIC:
        raise ModelFormatError("not a ccidetect model file")
    fields: dict[str, str] = {}
    while True:
        line = read_line()
        if line == "tokens:":
            break
        key, _, value = line.partition(" ")
        if not value:
            raise ModelFormatError(f"malformed header line {line!r}")
        fields[key] = value
    for required in ("dim", "max_len", "attention", "vocab"):
        if required not in fields:
            raise ModelFormatError(f"missing header field {required!r}")
    dim = int(fields.pop("dim"))
    max_len = int(fields.pop("max_len"))
    attention = bool(int(fields.pop("attention")))
    vocab_size = int(fields.pop("vocab"))
    tokens = [read_line() for _ in range(vocab_size)]
    vocab = Vocabulary(tokens)
    payload = buf.read()
    shapes = {
        "emb": (vocab_size, dim),
        "wq": (dim, dim),
        "wk": (dim, dim),
        "wv": (dim, dim),
        "head_w": (2 * dim,),
        "head_b": (1,),
    }
    expected = sum(int(np.prod(shape)) for shape in shapes.values()) * 4
    if len(payload) != expected:
        raise ModelFormatError(
            f"payload size {len(payload)} does not match header (expected {expected})"
        )
    tensors: dict[str, np.ndarray] = {}
    offset = 0
    for name in _TENSOR_ORDER:
        shape = shapes[name]
        count = int(np.prod(shape))
        arr = np.frombuffer(payload, dtype="<f4", count=count, offset=offset)
        tensors[name] = arr.astype(np.float64).reshape(shape)
        offset += count * 4
    params = ModelParams(
        dim=dim,
        max_len=max_len,
        attention=attention,
        emb=tensors["emb"],
        wq=tensors["wq"],
        wk=tensors["wk"],
        wv=tensors["wv"],
        head_w=tensors["head_w"],
        head_b=float(tensors["head_b"][0]),
    )
    return params, vocab, fields
