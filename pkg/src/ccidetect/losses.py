"""Training objectives and their exact analytic gradients.

Components:
  * binary cross-entropy over predicted inconsistency probabilities
  * pairwise comment/diff similarity with temperature + row-wise softmax
  * InfoNCE over the consistent subset (diagonal pulled up)
  * negative-push over the inconsistent subset (diagonal pushed down)
  * contrast = infonce + alpha * neg;  total = bce + lambda * contrast

All math is float64.  loss_and_gradients backpropagates the total loss
through the softmax, the L2 normalizations, the pooling and the embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    EncodedInput,
    ModelParams,
    ParamGrads,
    backward_example,
    forward_batch,
    zero_grads,
)

_BCE_EPS = 1e-7
_LOG_EPS = 1e-12


@dataclass(frozen=True)
class ContrastiveConfig:
    tau: float = 0.08
    alpha: float = 1.0
    lam: float = 0.1

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if self.lam < 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam}")


@dataclass(frozen=True)
class BatchTensors:
    C: np.ndarray  # (B, d) unit-norm comment vectors
    S: np.ndarray  # (B, d) unit-norm diff vectors
    p: np.ndarray  # (B,) predicted probabilities
    y: np.ndarray  # (B,) labels in {0, 1}

    @property
    def consistent(self) -> np.ndarray:
        return np.flatnonzero(self.y == 0)

    @property
    def inconsistent(self) -> np.ndarray:
        return np.flatnonzero(self.y == 1)


@dataclass
class LossBreakdown:
    l_bce: float
    l_infonce: float
    l_neg: float
    l_contrast: float
    l_total: float
    gradients: ParamGrads | None = None

    def as_dict(self) -> dict[str, float]:
        return {
            "l_bce": self.l_bce,
            "l_infonce": self.l_infonce,
            "l_neg": self.l_neg,
            "l_contrast": self.l_contrast,
            "l_total": self.l_total,
        }


def bce_loss(p: np.ndarray, y: np.ndarray) -> float:
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if p.shape != y.shape:
        raise ValueError("p and y must have equal length")
    if p.size == 0:
        raise ValueError("empty batch")
    pc = np.clip(p, _BCE_EPS, 1.0 - _BCE_EPS)
    return float(-np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)))


def pairwise_softmax(C: np.ndarray, S: np.ndarray, tau: float) -> np.ndarray:
    if tau <= 0:
        raise ValueError("tau must be positive")
    if C.shape != S.shape:
        raise ValueError("C and S must have matching shapes")
    M = (C @ S.T) / tau
    Z = M - M.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def infonce_loss(P: np.ndarray, consistent: np.ndarray) -> float:
    idx = np.asarray(consistent, dtype=np.intp)
    if idx.size == 0:
        return 0.0
    diag = np.clip(P[idx, idx], _LOG_EPS, None)
    return float(-np.mean(np.log(diag)))


def neg_push_loss(P: np.ndarray, inconsistent: np.ndarray) -> float:
    idx = np.asarray(inconsistent, dtype=np.intp)
    if idx.size == 0:
        return 0.0
    comp = np.clip(1.0 - P[idx, idx], _LOG_EPS, None)
    return float(-np.mean(np.log(comp)))


def batch_losses(batch: BatchTensors, cfg: ContrastiveConfig) -> LossBreakdown:
    """Loss values only (no gradients) for a batch of encoded tensors."""
    P = pairwise_softmax(batch.C, batch.S, cfg.tau)
    l_bce = bce_loss(batch.p, batch.y)
    l_infonce = infonce_loss(P, batch.consistent)
    l_neg = neg_push_loss(P, batch.inconsistent)
    l_contrast = l_infonce + cfg.alpha * l_neg
    l_total = l_bce + cfg.lam * l_contrast
    return LossBreakdown(l_bce, l_infonce, l_neg, l_contrast, l_total)


def _contrastive_dM(P: np.ndarray, batch: BatchTensors, cfg: ContrastiveConfig) -> np.ndarray:
    """d(l_contrast)/dM where M is the scaled similarity matrix."""
    B = P.shape[0]
    dM = np.zeros((B, B))
    bc = batch.consistent
    if bc.size:
        dM[bc] += P[bc] / bc.size
        dM[bc, bc] -= 1.0 / bc.size
    bi = batch.inconsistent
    if bi.size and cfg.alpha > 0:
        for j in bi:
            pjj = P[j, j]
            denom = max(1.0 - pjj, _LOG_EPS)
            row = -pjj * P[j] / denom
            row[j] += pjj / denom
            dM[j] += cfg.alpha * row / bi.size
    return dM


def loss_and_gradients(
    inputs: list[EncodedInput],
    y: np.ndarray,
    params: ModelParams,
    cfg: ContrastiveConfig,
) -> LossBreakdown:
    """Total loss over a batch plus exact gradients w.r.t. all parameters."""
    if not inputs:
        raise ValueError("empty batch")
    y = np.asarray(y, dtype=np.float64)
    C, S, z, p, caches = forward_batch(inputs, params)
    batch = BatchTensors(C=C, S=S, p=p, y=y)
    breakdown = batch_losses(batch, cfg)

    B = len(inputs)
    d = params.dim
    grads = zero_grads(params)

    # Head: d(l_bce)/dz is exact when the BCE clamp is inactive.
    dz = (p - y) / B
    grads.head_w = np.concatenate([C.T @ dz, S.T @ dz])
    grads.head_b = float(dz.sum())
    dC = np.outer(dz, params.head_w[:d])
    dS = np.outer(dz, params.head_w[d:])

    if cfg.lam > 0:
        P = pairwise_softmax(C, S, cfg.tau)
        dM = cfg.lam * _contrastive_dM(P, batch, cfg)
        dC += dM @ S / cfg.tau
        dS += dM.T @ C / cfg.tau

    for i, cache in enumerate(caches):
        backward_example(cache, dC[i], dS[i], params, grads)

    breakdown.gradients = grads
    return breakdown
