import json
from pathlib import Path

import pytest

from ccidetect.dataset import (
    CciRecord,
    DatasetError,
    compute_stats,
    load_id_subset,
    load_preprocessed,
    load_records,
    preprocess,
    save_preprocessed,
    save_records,
)
from ccidetect.diffing import SpanKind, parse_tagged

FIXTURES = Path(__file__).parent / "fixtures"


def make_record(i=0, **kw):
    base = dict(
        id=f"r{i}",
        comment_type="return",
        comment="/** Returns x. */",
        old_code="return x ;",
        new_code="return y ;",
        label=1,
    )
    base.update(kw)
    return CciRecord(**base)


class TestLoadRecords:
    def test_fixture_loads(self):
        records = load_records(FIXTURES / "train.jsonl")
        assert len(records) == 6
        assert records[0].id == "fx-1"
        assert records[0].label == 1

    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        good = json.dumps(make_record().__dict__)
        path.write_text(good + "\n" + "{not json\n")
        with pytest.raises(DatasetError, match="line 2"):
            load_records(path)

    def test_bad_label_names_line_and_field(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        obj = dict(make_record().__dict__)
        obj["label"] = 2
        path.write_text(json.dumps(obj) + "\n")
        with pytest.raises(DatasetError, match="line 1.*label"):
            load_records(path)

    def test_missing_field_names_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        obj = dict(make_record().__dict__)
        del obj["comment"]
        path.write_text(json.dumps(obj) + "\n")
        with pytest.raises(DatasetError, match="line 1.*comment"):
            load_records(path)

    def test_empty_file_is_empty_list(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert load_records(path) == []

    def test_round_trip(self, tmp_path):
        records = load_records(FIXTURES / "train.jsonl")
        out = tmp_path / "copy.jsonl"
        save_records(records, out)
        assert load_records(out) == records


class TestRecordValidation:
    def test_rejects_empty_code(self):
        with pytest.raises(DatasetError):
            make_record(old_code="")

    def test_rejects_bad_comment_type(self):
        with pytest.raises(DatasetError):
            make_record(comment_type="docstring")


class TestPreprocess:
    def test_identical_code_single_keep(self):
        rec = make_record(old_code="int x ;", new_code="int x ;", label=0)
        (pre,) = preprocess([rec])
        script = parse_tagged(pre.tagged_diff)
        assert [s.kind for s in script.spans] == [SpanKind.KEEP]
        assert pre.s_old_text == "" and pre.s_new_text == ""

    def test_disjoint_sequences_single_replace(self):
        rec = make_record(old_code="a b", new_code="x y", label=1)
        (pre,) = preprocess([rec])
        script = parse_tagged(pre.tagged_diff)
        assert [s.kind for s in script.spans] == [SpanKind.REPLACE]

    def test_deterministic(self, tmp_path):
        records = load_records(FIXTURES / "train.jsonl")
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        save_preprocessed(preprocess(records), a)
        save_preprocessed(preprocess(records), b)
        assert a.read_bytes() == b.read_bytes()

    def test_servlet_example_has_replace_span(self):
        records = load_records(FIXTURES / "test.jsonl")
        rec = next(r for r in records if r.id == "fx-11")
        (pre,) = preprocess([rec])
        script = parse_tagged(pre.tagged_diff)
        replaces = [s for s in script.spans if s.kind is SpanKind.REPLACE]
        assert any(
            "HttpServletRequest" in [t.text for t in s.old_tokens] for s in replaces
        )

    def test_preprocessed_round_trip(self, tmp_path):
        pre = preprocess(load_records(FIXTURES / "train.jsonl"))
        path = tmp_path / "pre.jsonl"
        save_preprocessed(pre, path)
        assert load_preprocessed(path) == pre

    def test_load_preprocessed_rejects_tampered_diff(self, tmp_path):
        pre = preprocess(load_records(FIXTURES / "train.jsonl"))
        path = tmp_path / "pre.jsonl"
        save_preprocessed(pre, path)
        lines = path.read_text().splitlines()
        obj = json.loads(lines[0])
        obj["s_old_text"] = obj["s_old_text"] + " bogus"
        lines[0] = json.dumps(obj)
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DatasetError, match="line 1"):
            load_preprocessed(path)


class TestComputeStats:
    def test_fixture_counts(self):
        splits = {
            "train": load_records(FIXTURES / "train.jsonl"),
            "validation": load_records(FIXTURES / "valid.jsonl"),
            "test": load_records(FIXTURES / "test.jsonl"),
        }
        stats = compute_stats(splits)
        expected = json.loads((FIXTURES / "expected_stats.json").read_text())
        assert stats.as_dict() == expected

    def test_empty_splits_all_zero(self):
        stats = compute_stats({"train": [], "test": []})
        assert stats.total("train") == 0
        assert stats.grand_total() == 0

    def test_totals_are_sums(self):
        records = load_records(FIXTURES / "train.jsonl")
        stats = compute_stats({"train": records})
        assert stats.total("train") == sum(
            stats.counts[ct]["train"] for ct in ("return", "param", "summary")
        )


def test_load_id_subset(tmp_path):
    ids = load_id_subset(FIXTURES / "subset_ids.txt")
    assert ids == ["fx-11", "fx-13"]
