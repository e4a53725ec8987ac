"""Deterministic mini-batch training with Adam and F1 early stopping."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .dataset import PreprocessedRecord
from .losses import ContrastiveConfig, loss_and_gradients
from .metrics import confusion, scores
from .model import (
    EncodedInput,
    ModelParams,
    ParamGrads,
    Vocabulary,
    assemble_input,
    build_vocab,
    forward_batch,
    init_params,
)


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    learning_rate: float = 1e-3  # desk-scale default; 1e-5 suits a pretrained backbone
    max_epochs: int = 20
    patience: int = 3
    seed: int = 0
    tau: float = 0.08
    alpha: float = 1.0
    lam: float = 0.1
    threshold: float = 0.5
    dim: int = 64
    max_len: int = 256
    attention: bool = False
    min_count: int = 1
    input_mode: str = "tagged"

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise TrainingError(f"batch_size must be positive, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise TrainingError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.max_epochs < 1:
            raise TrainingError(f"max_epochs must be positive, got {self.max_epochs}")
        if self.patience < 1:
            raise TrainingError(f"patience must be positive, got {self.patience}")
        if not 0.0 < self.threshold < 1.0:
            raise TrainingError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.input_mode not in ("tagged", "flat"):
            raise TrainingError(f"input_mode must be tagged or flat, got {self.input_mode}")
        # Delegates tau/alpha/lambda validation.
        ContrastiveConfig(tau=self.tau, alpha=self.alpha, lam=self.lam)

    def contrastive(self) -> ContrastiveConfig:
        return ContrastiveConfig(tau=self.tau, alpha=self.alpha, lam=self.lam)


@dataclass
class Checkpoint:
    params: ModelParams
    vocab: Vocabulary
    epoch: int
    validation_f1: float


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0


def init_adam(params: ModelParams) -> AdamState:
    tensors = params.tensors()
    return AdamState(
        m={k: np.zeros_like(v) for k, v in tensors.items()},
        v={k: np.zeros_like(v) for k, v in tensors.items()},
    )


def adam_step(
    params: ModelParams,
    grads: ParamGrads,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    state.t += 1
    named = {
        "emb": (params.emb, grads.emb),
        "wq": (params.wq, grads.wq),
        "wk": (params.wk, grads.wk),
        "wv": (params.wv, grads.wv),
        "head_w": (params.head_w, grads.head_w),
        "head_b": (None, np.asarray([grads.head_b])),
    }
    bc1 = 1.0 - beta1**state.t
    bc2 = 1.0 - beta2**state.t
    for name, (tensor, grad) in named.items():
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * np.square(grad)
        update = lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
        if name == "head_b":
            params.head_b -= float(update[0])
        else:
            tensor -= update


def predict(
    records: list[PreprocessedRecord],
    params: ModelParams,
    vocab: Vocabulary,
    threshold: float = 0.5,
    input_mode: str = "tagged",
) -> list[dict]:
    """Per record: predicted probability and label (1 iff p >= threshold)."""
    if not records:
        return []
    inputs = [assemble_input(r, vocab, params.max_len, input_mode) for r in records]
    out = []
    for chunk_start in range(0, len(inputs), 256):
        chunk = inputs[chunk_start : chunk_start + 256]
        _, _, _, p, _ = forward_batch(chunk, params)
        for prob in p:
            out.append({"probability": float(prob), "label": int(prob >= threshold)})
    return out


def _validation_scores(
    valid_inputs: list[EncodedInput], y: list[int], params: ModelParams, threshold: float
) -> dict[str, float]:
    preds: list[int] = []
    for chunk_start in range(0, len(valid_inputs), 256):
        chunk = valid_inputs[chunk_start : chunk_start + 256]
        _, _, _, p, _ = forward_batch(chunk, params)
        preds.extend(int(prob >= threshold) for prob in p)
    return scores(confusion(preds, y))


def train(
    train_set: list[PreprocessedRecord],
    valid_set: list[PreprocessedRecord],
    cfg: TrainConfig,
    log: IO[str] | None = None,
) -> Checkpoint:
    """Train from scratch, returning the best-F1 checkpoint (ties: earlier epoch)."""
    if not train_set or not valid_set:
        raise TrainingError("train and validation sets must be non-empty")
    vocab = build_vocab(train_set, cfg.min_count)
    params = init_params(len(vocab), cfg.dim, cfg.max_len, cfg.attention, cfg.seed)
    ccfg = cfg.contrastive()

    train_inputs = [assemble_input(r, vocab, cfg.max_len, cfg.input_mode) for r in train_set]
    train_y = np.asarray([r.record.label for r in train_set], dtype=np.float64)
    valid_inputs = [assemble_input(r, vocab, cfg.max_len, cfg.input_mode) for r in valid_set]
    valid_y = [r.record.label for r in valid_set]

    rng = np.random.default_rng(cfg.seed)
    adam = init_adam(params)
    best: Checkpoint | None = None
    epochs_since_best = 0
    step = 0

    for epoch in range(1, cfg.max_epochs + 1):
        perm = rng.permutation(len(train_inputs))
        for start in range(0, len(perm), cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            batch_inputs = [train_inputs[i] for i in idx]
            breakdown = loss_and_gradients(batch_inputs, train_y[idx], params, ccfg)
            adam_step(params, breakdown.gradients, adam, cfg.learning_rate)
            step += 1
            if log is not None:
                line = {"step": step, "epoch": epoch, **breakdown.as_dict()}
                log.write(json.dumps(line) + "\n")

        val = _validation_scores(valid_inputs, valid_y, params, cfg.threshold)
        if log is not None:
            log.write(json.dumps({"epoch": epoch, **val}) + "\n")
        if best is None or val["f1"] > best.validation_f1:
            best = Checkpoint(
                params=params.copy(), vocab=vocab, epoch=epoch, validation_f1=val["f1"]
            )
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= cfg.patience:
                break
    assert best is not None
    return best
