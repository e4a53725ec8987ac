"""Matplotlib figures rendered next to the machine-readable outputs."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .dataset import COMMENT_TYPES

_METRIC_COLUMNS = ("accuracy", "precision", "recall", "f1")


def save_loss_curves(log_path: str | Path, out_png: str | Path) -> None:
    """Plot per-step loss components and per-epoch validation F1 from a JSONL log."""
    steps: list[dict] = []
    epochs: list[dict] = []
    with open(log_path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            (steps if "step" in obj else epochs).append(obj)

    fig, (ax_loss, ax_f1) = plt.subplots(2, 1, figsize=(8, 7), sharex=False)
    if steps:
        xs = [o["step"] for o in steps]
        for key, label in (
            ("l_total", "total"),
            ("l_bce", "bce"),
            ("l_contrast", "contrast"),
        ):
            ax_loss.plot(xs, [o[key] for o in steps], label=label, linewidth=1.0)
        ax_loss.set_xlabel("step")
        ax_loss.set_ylabel("loss")
        ax_loss.legend(loc="upper right")
        ax_loss.set_title("training loss")
    if epochs:
        xs = [o["epoch"] for o in epochs]
        ax_f1.plot(xs, [o["f1"] for o in epochs], marker="o")
        ax_f1.set_xlabel("epoch")
        ax_f1.set_ylabel("validation F1")
        ax_f1.set_ylim(-0.02, 1.02)
        ax_f1.set_title("validation F1")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)


def save_metrics_figure(report: dict, out_png: str | Path, title: str = "evaluation") -> None:
    """Grouped bar chart of the four metrics per comment type plus All."""
    rows = [t for t in COMMENT_TYPES if t in report] + ["All"]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.8 / len(_METRIC_COLUMNS)
    for k, col in enumerate(_METRIC_COLUMNS):
        xs = [i + k * width for i in range(len(rows))]
        ax.bar(xs, [100.0 * report[r][col] for r in rows], width=width, label=col)
    ax.set_xticks([i + 1.5 * width for i in range(len(rows))])
    ax.set_xticklabels(rows)
    ax.set_ylabel("percent")
    ax.set_ylim(0, 105)
    ax.set_title(title)
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
