import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ravel.dataset import (DatasetError, load_dataset, load_embeddings, parse_manifest,
                           write_embeddings, write_manifest)


def write_lines(path, rows):
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")


def test_parse_four_lines_two_splits(tmp_path):
    mf = tmp_path / "m.jsonl"
    write_lines(mf, [{"id": f"im{i}", "split": "photos" if i < 2 else "model_a"}
                     for i in range(4)])
    records = parse_manifest(mf)
    assert [r.row for r in records] == [0, 1, 2, 3]
    assert {r.split for r in records} == {"photos", "model_a"}
    assert [r.id for r in records] == ["im0", "im1", "im2", "im3"]


def test_unknown_split_names_line_and_value(tmp_path):
    mf = tmp_path / "m.jsonl"
    write_lines(mf, [{"id": "a", "split": "real"}, {"id": "b", "split": "gen"},
                     {"id": "c", "split": "middle"}])
    with pytest.raises(DatasetError, match=r"line 3.*middle"):
        parse_manifest(mf, declared_splits=("real", "gen"))


def test_third_split_rejected_when_inferring(tmp_path):
    mf = tmp_path / "m.jsonl"
    write_lines(mf, [{"id": "a", "split": "x"}, {"id": "b", "split": "y"},
                     {"id": "c", "split": "z"}])
    with pytest.raises(DatasetError, match=r"line 3.*'z'"):
        parse_manifest(mf)


def test_duplicate_id_reports_line(tmp_path):
    mf = tmp_path / "m.jsonl"
    write_lines(mf, [{"id": "a", "split": "x"}, {"id": "b", "split": "y"},
                     {"id": "a", "split": "x"}])
    with pytest.raises(DatasetError, match=r"line 3.*duplicate"):
        parse_manifest(mf)


def test_malformed_line_reports_line(tmp_path):
    mf = tmp_path / "m.jsonl"
    mf.write_text('{"id": "a", "split": "x"}\nnot json\n', encoding="utf-8")
    with pytest.raises(DatasetError, match="line 2"):
        parse_manifest(mf)


def test_missing_split_record_rejected(tmp_path):
    mf = tmp_path / "m.jsonl"
    write_lines(mf, [{"id": "a", "split": "x"}])
    with pytest.raises(DatasetError, match="has no records"):
        parse_manifest(mf, declared_splits=("x", "y"))


def test_label_index_200_records_10_labels(tmp_path):
    mf = tmp_path / "m.jsonl"
    rows = [{"id": f"r{i}", "split": "a" if i % 2 == 0 else "b", "label": f"lab{i % 10}"}
            for i in range(200)]
    write_lines(mf, rows)
    X = np.random.default_rng(0).normal(size=(200, 4)).astype(np.float32)
    write_embeddings(X, tmp_path / "e.json", tmp_path / "e.bin")
    handle = load_dataset(mf, tmp_path / "e.json", tmp_path / "e.bin")
    assert len(handle.label_index) == 10
    assert all(len(rows) == 20 for rows in handle.label_index.values())
    assert handle.n == 200
    assert int((handle.sides == 0).sum()) == 100


class TestLoadEmbeddings:
    def _meta(self, tmp_path, count, dim):
        meta = tmp_path / "e.json"
        meta.write_text(json.dumps({"count": count, "dim": dim, "dtype": "f32",
                                    "order": "row-major", "endianness": "little",
                                    "embedding_name": "t"}))
        return meta

    def test_shape(self, tmp_path):
        meta = self._meta(tmp_path, 4, 3)
        (tmp_path / "e.bin").write_bytes(np.arange(12, dtype="<f4").tobytes())
        emb = load_embeddings(meta, tmp_path / "e.bin")
        assert (emb.n, emb.d) == (4, 3)
        assert emb.data[3, 2] == 11.0

    def test_byte_length_mismatch(self, tmp_path):
        meta = self._meta(tmp_path, 4, 3)
        (tmp_path / "e.bin").write_bytes(b"\0" * 47)
        with pytest.raises(DatasetError, match="expected 48 bytes"):
            load_embeddings(meta, tmp_path / "e.bin")

    def test_nan_reports_first_row(self, tmp_path):
        meta = self._meta(tmp_path, 4, 3)
        X = np.arange(12, dtype="<f4").reshape(4, 3)
        X[2, 1] = np.nan
        (tmp_path / "e.bin").write_bytes(X.tobytes())
        with pytest.raises(DatasetError, match="row 2"):
            load_embeddings(meta, tmp_path / "e.bin")

    def test_count_vs_manifest(self, tmp_path):
        meta = self._meta(tmp_path, 4, 3)
        (tmp_path / "e.bin").write_bytes(b"\0" * 48)
        with pytest.raises(DatasetError, match="does not match"):
            load_embeddings(meta, tmp_path / "e.bin", expected_n=5)

    def test_rejects_wrong_dtype(self, tmp_path):
        meta = tmp_path / "e.json"
        meta.write_text(json.dumps({"count": 2, "dim": 2, "dtype": "f64",
                                    "order": "row-major", "endianness": "little"}))
        (tmp_path / "e.bin").write_bytes(b"\0" * 16)
        with pytest.raises(DatasetError, match="dtype"):
            load_embeddings(meta, tmp_path / "e.bin")


def test_no_partial_handle_on_bad_embeddings(tmp_path):
    mf = tmp_path / "m.jsonl"
    write_lines(mf, [{"id": "a", "split": "x"}, {"id": "b", "split": "y"}])
    meta = tmp_path / "e.json"
    meta.write_text(json.dumps({"count": 2, "dim": 2, "dtype": "f32",
                                "order": "row-major", "endianness": "little"}))
    (tmp_path / "e.bin").write_bytes(b"\0" * 15)  # short
    with pytest.raises(DatasetError):
        load_dataset(mf, meta, tmp_path / "e.bin")


def test_handle_is_read_only(tmp_path, dataset_dir):
    ds = dataset_dir()
    handle = load_dataset(ds["manifest"], ds["embeddings_meta"], ds["embeddings_bin"])
    with pytest.raises(ValueError):
        handle.embeddings.data[0, 0] = 5.0
    with pytest.raises(ValueError):
        handle.sides[0] = 1


ids_st = st.text(st.characters(blacklist_characters="/\\\n", blacklist_categories=("Cs",)),
                 min_size=1, max_size=12)
label_st = st.one_of(st.none(), st.text(max_size=8))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(ids_st, st.booleans(), label_st, label_st), min_size=2,
                max_size=25, unique_by=lambda t: t[0]))
def test_manifest_round_trip(tmp_path_factory, rows):
    tmp = tmp_path_factory.mktemp("rt")
    # force both splits present
    rows = [(rows[0][0], False, rows[0][2], rows[0][3]),
            (rows[1][0], True, rows[1][2], rows[1][3])] + rows[2:]
    from ravel.dataset import ImageRecord
    records = [ImageRecord(id=rid, split="s1" if right else "s0", row=i,
                           path=p or None, label=l or None)
               for i, (rid, right, p, l) in enumerate(rows)]
    write_manifest(records, tmp / "m.jsonl")
    parsed = parse_manifest(tmp / "m.jsonl", declared_splits=("s0", "s1"))
    assert parsed == records
    # every row index owned exactly once
    assert [r.row for r in parsed] == list(range(len(records)))
