"""Just-in-time code-comment inconsistency detection.

Pipeline: lex old/new code, compute a minimal token diff, label edit spans
with their activity (Keep/Add/Del/Replace), decompose into removed /
introduced / untouched token sets, then train a compact encoder with a
combined cross-entropy + label-aware contrastive objective.
"""

from .decomposition import DiffDecomposition, decompose
from .dataset import (
    CciRecord,
    PreprocessedRecord,
    SplitStats,
    compute_stats,
    load_records,
    preprocess,
)
from .diffing import (
    EditAction,
    EditOp,
    EditScript,
    EditSpan,
    SpanKind,
    diff_tokens,
    group_spans,
    parse_tagged,
    render_tagged,
)
from .lexer import Token, TokenKind, TokenSequence, lex_code, lex_comment
from .losses import (
    BatchTensors,
    ContrastiveConfig,
    LossBreakdown,
    batch_losses,
    bce_loss,
    infonce_loss,
    loss_and_gradients,
    neg_push_loss,
    pairwise_softmax,
)
from .metrics import ConfusionCounts, confusion, scores
from .model import (
    EncodedInput,
    ModelParams,
    PairEncoding,
    Vocabulary,
    assemble_input,
    build_vocab,
    encode_pair,
    init_params,
    load_model,
    save_model,
)
from .training import Checkpoint, TrainConfig, predict, train

__all__ = [
    "BatchTensors",
    "CciRecord",
    "Checkpoint",
    "ConfusionCounts",
    "ContrastiveConfig",
    "DiffDecomposition",
    "EditAction",
    "EditOp",
    "EditScript",
    "EditSpan",
    "EncodedInput",
    "LossBreakdown",
    "ModelParams",
    "PairEncoding",
    "PreprocessedRecord",
    "SpanKind",
    "SplitStats",
    "Token",
    "TokenKind",
    "TokenSequence",
    "TrainConfig",
    "Vocabulary",
    "assemble_input",
    "batch_losses",
    "bce_loss",
    "build_vocab",
    "compute_stats",
    "confusion",
    "decompose",
    "diff_tokens",
    "encode_pair",
    "group_spans",
    "infonce_loss",
    "init_params",
    "lex_code",
    "lex_comment",
    "load_model",
    "load_records",
    "loss_and_gradients",
    "neg_push_loss",
    "pairwise_softmax",
    "parse_tagged",
    "predict",
    "preprocess",
    "render_tagged",
    "save_model",
    "scores",
    "train",
]
