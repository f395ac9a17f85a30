"""Manifest and embedding ingestion for a two-split image dataset.

A dataset is a line-delimited manifest (one JSON object per line) plus a
binary embedding sidecar (little-endian float32, row-major, described by a
small JSON descriptor). Row i of the embedding matrix belongs to manifest
line i. Every record belongs to one of exactly two splits; the first split
is displayed on the left, the second on the right.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    """A manifest or embedding file failed validation."""


@dataclass(frozen=True)
class ImageRecord:
    id: str
    split: str
    row: int
    path: str | None = None
    label: str | None = None


@dataclass(frozen=True)
class EmbeddingMatrix:
    """N x D float32 matrix; row i is bound to manifest row i."""

    data: np.ndarray
    embedding_name: str = ""

    def __post_init__(self):
        self.data.flags.writeable = False

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class DatasetHandle:
    """Validated, immutable view of one two-split dataset."""

    manifest: tuple[ImageRecord, ...]
    embeddings: EmbeddingMatrix
    split_names: tuple[str, str]
    label_index: dict[str, list[int]]
    sides: np.ndarray = field(repr=False)  # uint8, 0 = left split, 1 = right

    def __post_init__(self):
        self.sides.flags.writeable = False

    @property
    def n(self) -> int:
        return len(self.manifest)

    def left_rows(self) -> np.ndarray:
        return np.flatnonzero(self.sides == 0)

    def right_rows(self) -> np.ndarray:
        return np.flatnonzero(self.sides == 1)


def parse_manifest(path: str | Path,
                   declared_splits: tuple[str, str] | None = None) -> list[ImageRecord]:
    """Parse a line-delimited manifest into records with sequential rows.

    When ``declared_splits`` is None the two split names are inferred from
    the file in order of first appearance. Errors carry the 1-based line
    number of the offending record.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"manifest not found: {path}")

    records: list[ImageRecord] = []
    seen_ids: set[str] = set()
    seen_splits: list[str] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"manifest line {lineno}: malformed JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise DatasetError(f"manifest line {lineno}: expected an object")

            rid = obj.get("id")
            split = obj.get("split")
            if not isinstance(rid, str) or not rid:
                raise DatasetError(f"manifest line {lineno}: missing or empty 'id'")
            if "/" in rid or "\\" in rid:
                raise DatasetError(f"manifest line {lineno}: id {rid!r} contains a path separator")
            if not isinstance(split, str) or not split:
                raise DatasetError(f"manifest line {lineno}: missing or empty 'split'")
            if rid in seen_ids:
                raise DatasetError(f"manifest line {lineno}: duplicate id {rid!r}")
            seen_ids.add(rid)

            if declared_splits is not None:
                if split not in declared_splits:
                    raise DatasetError(
                        f"manifest line {lineno}: unknown split {split!r} "
                        f"(declared splits: {declared_splits[0]!r}, {declared_splits[1]!r})")
            elif split not in seen_splits:
                if len(seen_splits) == 2:
                    raise DatasetError(
                        f"manifest line {lineno}: unknown split {split!r} "
                        f"(already saw {seen_splits[0]!r} and {seen_splits[1]!r})")
                seen_splits.append(split)

            path_val = obj.get("path")
            label_val = obj.get("label")
            if path_val is not None and not isinstance(path_val, str):
                raise DatasetError(f"manifest line {lineno}: 'path' must be a string")
            if label_val is not None and not isinstance(label_val, str):
                raise DatasetError(f"manifest line {lineno}: 'label' must be a string")

            records.append(ImageRecord(id=rid, split=split, row=len(records),
                                       path=path_val, label=label_val))

    splits = declared_splits if declared_splits is not None else tuple(seen_splits)
    present = {r.split for r in records}
    if len(splits) < 2 or not all(s in present for s in splits):
        missing = [s for s in splits if s not in present] or ["<second split>"]
        raise DatasetError(f"manifest {path}: split {missing[0]!r} has no records")
    return records


def write_manifest(records: list[ImageRecord] | tuple[ImageRecord, ...], path: str | Path) -> None:
    """Serialize records back to manifest lines (inverse of parse_manifest)."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for rec in records:
            obj: dict = {"id": rec.id, "split": rec.split}
            if rec.path is not None:
                obj["path"] = rec.path
            if rec.label is not None:
                obj["label"] = rec.label
            fh.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")


def load_embeddings(meta_file: str | Path, bin_file: str | Path,
                    expected_n: int | None = None) -> EmbeddingMatrix:
    """Load the binary embedding sidecar described by ``meta_file``.

    The descriptor must declare float32, row-major, little-endian data and
    the byte length of ``bin_file`` must match count * dim * 4 exactly.
    """
    meta_file, bin_file = Path(meta_file), Path(bin_file)
    try:
        meta = json.loads(meta_file.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"cannot read embedding descriptor {meta_file}: {exc}") from exc

    count, dim = meta.get("count"), meta.get("dim")
    if not isinstance(count, int) or not isinstance(dim, int) or count < 1 or dim < 2:
        raise DatasetError(f"{meta_file}: need integer count >= 1 and dim >= 2, "
                           f"got count={count!r} dim={dim!r}")
    for key, expected in (("dtype", "f32"), ("order", "row-major"), ("endianness", "little")):
        if meta.get(key) != expected:
            raise DatasetError(f"{meta_file}: {key} must be {expected!r}, got {meta.get(key)!r}")

    expected_bytes = count * dim * 4
    actual_bytes = bin_file.stat().st_size if bin_file.exists() else -1
    if actual_bytes != expected_bytes:
        raise DatasetError(f"{bin_file}: expected {expected_bytes} bytes for "
                           f"{count}x{dim} float32, found {actual_bytes}")
    if expected_n is not None and count != expected_n:
        raise DatasetError(f"{meta_file}: count {count} does not match "
                           f"manifest record count {expected_n}")

    data = np.fromfile(bin_file, dtype="<f4").reshape(count, dim)
    bad = ~np.isfinite(data)
    if bad.any():
        row = int(np.flatnonzero(bad.any(axis=1))[0])
        raise DatasetError(f"{bin_file}: non-finite value in row {row}")
    return EmbeddingMatrix(data=data, embedding_name=str(meta.get("embedding_name", "")))


def write_embeddings(X: np.ndarray, meta_file: str | Path, bin_file: str | Path,
                     embedding_name: str = "") -> None:
    """Write an (n, d) array as the binary sidecar pair."""
    X = np.ascontiguousarray(X, dtype="<f4")
    meta = {"count": int(X.shape[0]), "dim": int(X.shape[1]), "dtype": "f32",
            "order": "row-major", "endianness": "little", "embedding_name": embedding_name}
    Path(meta_file).write_text(json.dumps(meta, separators=(",", ":")), encoding="utf-8")
    X.tofile(bin_file)


def build_label_index(records) -> dict[str, list[int]]:
    index: dict[str, list[int]] = {}
    for rec in records:
        if rec.label is not None:
            index.setdefault(rec.label, []).append(rec.row)
    return index


def load_dataset(manifest_path: str | Path, meta_path: str | Path, bin_path: str | Path,
                 declared_splits: tuple[str, str] | None = None,
                 l2_normalize: bool = False) -> DatasetHandle:
    """Parse, cross-validate and freeze a dataset. Fails atomically: any
    validation error raises before a handle exists."""
    records = parse_manifest(manifest_path, declared_splits)
    emb = load_embeddings(meta_path, bin_path, expected_n=len(records))

    if declared_splits is not None:
        split_names = declared_splits
    else:
        ordered: list[str] = []
        for rec in records:
            if rec.split not in ordered:
                ordered.append(rec.split)
        split_names = (ordered[0], ordered[1])

    sides = np.fromiter((0 if r.split == split_names[0] else 1 for r in records),
                        dtype=np.uint8, count=len(records))
    if l2_normalize:
        norms = np.linalg.norm(emb.data, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        emb = EmbeddingMatrix(data=(emb.data / norms).astype(np.float32),
                              embedding_name=emb.embedding_name)

    return DatasetHandle(manifest=tuple(records), embeddings=emb,
                         split_names=split_names,
                         label_index=build_label_index(records), sides=sides)
