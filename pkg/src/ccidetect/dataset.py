"""JSONL ingestion, validation and preprocessing of CCI examples.

Canonical on-disk formats:
  * raw records: one JSON object per line with fields id, comment_type,
    comment, old_code, new_code, label
  * preprocessed records: the raw fields plus tagged_diff, s_old_text,
    s_new_text, s_unchanged_text
  * validated-subset sidecar: one record id per line
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .decomposition import decompose
from .diffing import diff_tokens, group_spans, parse_tagged, render_tagged
from .lexer import join_tokens, lex_code

COMMENT_TYPES = ("return", "param", "summary")


class DatasetError(ValueError):
    """Raised for malformed or invalid dataset files."""


@dataclass(frozen=True)
class CciRecord:
    id: str
    comment_type: str
    comment: str
    old_code: str
    new_code: str
    label: int

    def __post_init__(self) -> None:
        if self.comment_type not in COMMENT_TYPES:
            raise DatasetError(f"comment_type must be one of {COMMENT_TYPES}, got {self.comment_type!r}")
        if self.label not in (0, 1):
            raise DatasetError(f"label must be 0 or 1, got {self.label!r}")
        if not self.old_code or not self.new_code:
            raise DatasetError("old_code and new_code must be non-empty")
        if not self.comment:
            raise DatasetError("comment must be non-empty")


@dataclass(frozen=True)
class PreprocessedRecord:
    record: CciRecord
    tagged_diff: str
    s_old_text: str
    s_new_text: str
    s_unchanged_text: str


_RECORD_FIELDS = ("id", "comment_type", "comment", "old_code", "new_code", "label")
_PREPROCESSED_FIELDS = ("tagged_diff", "s_old_text", "s_new_text", "s_unchanged_text")


def _record_from_obj(obj: dict, lineno: int) -> CciRecord:
    for field in _RECORD_FIELDS:
        if field not in obj:
            raise DatasetError(f"line {lineno}: missing field {field!r}")
    label = obj["label"]
    if not isinstance(label, int) or isinstance(label, bool) or label not in (0, 1):
        raise DatasetError(f"line {lineno}: label must be 0 or 1, got {label!r}")
    try:
        return CciRecord(
            id=str(obj["id"]),
            comment_type=obj["comment_type"],
            comment=obj["comment"],
            old_code=obj["old_code"],
            new_code=obj["new_code"],
            label=label,
        )
    except DatasetError as exc:
        raise DatasetError(f"line {lineno}: {exc}") from None


def _iter_jsonl(path: str | Path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"line {lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise DatasetError(f"line {lineno}: expected a JSON object")
            yield lineno, obj


def load_records(path: str | Path, format: str = "canonical-jsonl") -> list[CciRecord]:
    if format != "canonical-jsonl":
        raise DatasetError(f"unsupported format {format!r}")
    return [_record_from_obj(obj, lineno) for lineno, obj in _iter_jsonl(path)]


def save_records(records: list[CciRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.__dict__, ensure_ascii=False) + "\n")


def preprocess_record(rec: CciRecord) -> PreprocessedRecord:
    old = lex_code(rec.old_code)
    new = lex_code(rec.new_code)
    script = group_spans(diff_tokens(old, new), old, new)
    dec = decompose(script)
    return PreprocessedRecord(
        record=rec,
        tagged_diff=join_tokens(render_tagged(script)),
        s_old_text=" ".join(t.text for t in dec.s_old),
        s_new_text=" ".join(t.text for t in dec.s_new),
        s_unchanged_text=" ".join(t.text for t in dec.s_unchanged),
    )


def preprocess(records: list[CciRecord]) -> list[PreprocessedRecord]:
    return [preprocess_record(rec) for rec in records]


def save_preprocessed(records: list[PreprocessedRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pre in records:
            obj = dict(pre.record.__dict__)
            obj.update(
                tagged_diff=pre.tagged_diff,
                s_old_text=pre.s_old_text,
                s_new_text=pre.s_new_text,
                s_unchanged_text=pre.s_unchanged_text,
            )
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def load_preprocessed(path: str | Path) -> list[PreprocessedRecord]:
    out: list[PreprocessedRecord] = []
    for lineno, obj in _iter_jsonl(path):
        for field in _PREPROCESSED_FIELDS:
            if field not in obj:
                raise DatasetError(f"line {lineno}: missing field {field!r}")
        rec = _record_from_obj(obj, lineno)
        pre = PreprocessedRecord(
            record=rec,
            tagged_diff=obj["tagged_diff"],
            s_old_text=obj["s_old_text"],
            s_new_text=obj["s_new_text"],
            s_unchanged_text=obj["s_unchanged_text"],
        )
        dec = decompose(parse_tagged(pre.tagged_diff))
        if (
            " ".join(t.text for t in dec.s_old) != pre.s_old_text
            or " ".join(t.text for t in dec.s_new) != pre.s_new_text
            or " ".join(t.text for t in dec.s_unchanged) != pre.s_unchanged_text
        ):
            raise DatasetError(f"line {lineno}: tagged_diff does not match decomposition fields")
        out.append(pre)
    return out


@dataclass(frozen=True)
class SplitStats:
    # counts[comment_type][split_name] -> number of records
    counts: dict[str, dict[str, int]]
    splits: tuple[str, ...]

    def total(self, split: str) -> int:
        return sum(self.counts[ct][split] for ct in COMMENT_TYPES)

    def grand_total(self) -> int:
        return sum(self.total(split) for split in self.splits)

    def as_dict(self) -> dict:
        out: dict = {ct: dict(self.counts[ct]) for ct in COMMENT_TYPES}
        out["All"] = {split: self.total(split) for split in self.splits}
        out["total"] = self.grand_total()
        return out


def compute_stats(splits: dict[str, list[CciRecord]]) -> SplitStats:
    names = tuple(splits)
    counts = {ct: {name: 0 for name in names} for ct in COMMENT_TYPES}
    for name, records in splits.items():
        for rec in records:
            counts[rec.comment_type][name] += 1
    return SplitStats(counts=counts, splits=names)


def load_id_subset(path: str | Path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]
