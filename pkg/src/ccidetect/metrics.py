"""Accuracy / Precision / Recall / F1 with per-comment-type reports."""

from __future__ import annotations

from dataclasses import dataclass

from .dataset import COMMENT_TYPES


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(pred: list[int], gold: list[int]) -> ConfusionCounts:
    if len(pred) != len(gold):
        raise ValueError("pred and gold must have equal length")
    if not pred:
        raise ValueError("empty input")
    tp = fp = tn = fn = 0
    for p, g in zip(pred, gold):
        if p not in (0, 1) or g not in (0, 1):
            raise ValueError("labels must be 0 or 1")
        if p == 1 and g == 1:
            tp += 1
        elif p == 1 and g == 0:
            fp += 1
        elif p == 0 and g == 0:
            tn += 1
        else:
            fn += 1
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def scores(c: ConfusionCounts) -> dict[str, float]:
    if c.total == 0:
        raise ValueError("no evaluated examples")
    accuracy = (c.tp + c.tn) / c.total
    # 0/0 cases are defined as 0 to keep the metrics total.
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) else 0.0
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return {"accuracy": accuracy, "precision": precision, "recall": recall, "f1": f1}


def report(pred: list[int], gold: list[int], comment_types: list[str]) -> dict:
    """Metrics per comment type plus an "All" row."""
    if not (len(pred) == len(gold) == len(comment_types)):
        raise ValueError("pred, gold and comment_types must have equal length")
    out: dict = {}
    for ct in COMMENT_TYPES:
        idx = [i for i, t in enumerate(comment_types) if t == ct]
        if not idx:
            continue
        c = confusion([pred[i] for i in idx], [gold[i] for i in idx])
        out[ct] = {"count": c.total, **scores(c)}
    c = confusion(pred, gold)
    out["All"] = {"count": c.total, **scores(c)}
    return out


_COLUMNS = ("accuracy", "precision", "recall", "f1")


def render_table(rep: dict) -> str:
    """Aligned text table; metric cells are percentages with 2 decimals."""
    rows = [t for t in COMMENT_TYPES if t in rep] + ["All"]
    name_w = max(len("Type"), *(len(r) for r in rows))
    header = (
        f"{'Type':<{name_w}}  {'Count':>6}  "
        + "  ".join(f"{col.capitalize():>9}" for col in _COLUMNS)
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        cells = rep[row]
        line = f"{row:<{name_w}}  {cells['count']:>6}  " + "  ".join(
            f"{100.0 * cells[col]:>9.2f}" for col in _COLUMNS
        )
        lines.append(line)
    return "\n".join(lines)
