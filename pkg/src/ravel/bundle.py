"""On-disk artifact bundle: layout, codecs and deterministic serialization.

A bundle directory is the immutable output of one pipeline run. JSON files
are written compactly with fixed field order and shortest-roundtrip float
formatting, so two runs with the same config and seed produce byte-identical
artifacts (timestamps live only in run.json). A finalization marker is
written last; readers must refuse bundles without it.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from ravel.metrics import ClusterMetricsRow, DatasetSummary, PerImageFlags

MARKER_NAME = "finalized.json"
RUN_NAME = "run.json"
MANIFEST_NAME = "manifest.jsonl"
FLAGS_NAME = "flags.bin"
MOMENTS_NAME = "moments.bin"
THUMBS_DIR = "thumbs"

_FLAGS_MAGIC = b"RVLFLAG1"
_MOMENTS_MAGIC = b"RVLMOM01"


class BundleError(ValueError):
    pass


def clusters_file(k: int) -> str:
    return f"clusters_{k}.json"


def centroids_file(k: int) -> str:
    return f"centroids_{k}.bin"


def metrics_file(k: int) -> str:
    return f"metrics_{k}.json"


def projection_clusters_file(k: int) -> str:
    return f"projection_clusters_{k}.json"


def projection_samples_dir(k: int) -> str:
    return f"projection_samples_{k}"


def jsonable(value):
    """Recursively convert numpy scalars/arrays to plain Python."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def dumps_canonical(obj) -> bytes:
    return json.dumps(jsonable(obj), ensure_ascii=False, separators=(",", ":"),
                      allow_nan=False).encode("utf-8")


def write_bytes_synced(path: Path, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())


def write_json(path: Path, obj) -> None:
    write_bytes_synced(path, dumps_canonical(obj))


def config_hash(config_dict: dict) -> str:
    return hashlib.sha256(json.dumps(jsonable(config_dict), sort_keys=True,
                                     separators=(",", ":")).encode()).hexdigest()


# ---------------------------------------------------------------------------
# binary codecs

def write_f32_matrix(path: Path, X: np.ndarray) -> None:
    data = np.ascontiguousarray(X, dtype="<f4").tobytes()
    write_bytes_synced(path, data)


def read_f32_matrix(path: Path, rows: int, cols: int) -> np.ndarray:
    data = np.fromfile(path, dtype="<f4")
    if data.size != rows * cols:
        raise BundleError(f"{path}: expected {rows}x{cols} float32")
    return data.reshape(rows, cols)


def write_flags(path: Path, n: int, sides: np.ndarray, flags: PerImageFlags) -> None:
    """Two bitsets in manifest row order. Bits of the opposite split (and of
    an undefined side) are zero; the header records which sides are defined."""
    prec_rows = np.zeros(n, dtype=bool)
    rec_rows = np.zeros(n, dtype=bool)
    if flags.precision_flags is not None:
        prec_rows[np.flatnonzero(sides == 1)] = flags.precision_flags
    if flags.recall_flags is not None:
        rec_rows[np.flatnonzero(sides == 0)] = flags.recall_flags
    header = (_FLAGS_MAGIC
              + np.uint64(n).tobytes()
              + bytes([flags.precision_flags is not None,
                       flags.recall_flags is not None]))
    body = (np.packbits(prec_rows, bitorder="little").tobytes()
            + np.packbits(rec_rows, bitorder="little").tobytes())
    write_bytes_synced(path, header + body)


def read_flags(path: Path) -> dict:
    raw = Path(path).read_bytes()
    if raw[:8] != _FLAGS_MAGIC:
        raise BundleError(f"{path}: bad flags magic")
    n = int(np.frombuffer(raw[8:16], dtype=np.uint64)[0])
    prec_defined, rec_defined = bool(raw[16]), bool(raw[17])
    nbytes = (n + 7) // 8
    off = 18
    prec = np.unpackbits(np.frombuffer(raw[off:off + nbytes], dtype=np.uint8),
                         bitorder="little", count=n).astype(bool)
    off += nbytes
    rec = np.unpackbits(np.frombuffer(raw[off:off + nbytes], dtype=np.uint8),
                        bitorder="little", count=n).astype(bool)
    return {"n": n, "precision_defined": prec_defined, "recall_defined": rec_defined,
            "precision_by_row": prec, "recall_by_row": rec}


def write_moments(path: Path, summary: DatasetSummary) -> None:
    d = 0
    for m in (summary.mean_left, summary.mean_right):
        if m is not None:
            d = int(m.shape[0])
            break
    parts = [_MOMENTS_MAGIC, np.uint64(d).tobytes(),
             bytes([summary.mean_left is not None, summary.mean_right is not None])]
    zeros_mean = np.zeros(d, dtype="<f8")
    zeros_cov = np.zeros((d, d), dtype="<f8")
    parts.append(np.ascontiguousarray(
        summary.mean_left if summary.mean_left is not None else zeros_mean, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(
        summary.mean_right if summary.mean_right is not None else zeros_mean, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(
        summary.cov_left if summary.cov_left is not None else zeros_cov, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(
        summary.cov_right if summary.cov_right is not None else zeros_cov, dtype="<f8").tobytes())
    write_bytes_synced(path, b"".join(parts))


def read_moments(path: Path) -> dict:
    raw = Path(path).read_bytes()
    if raw[:8] != _MOMENTS_MAGIC:
        raise BundleError(f"{path}: bad moments magic")
    d = int(np.frombuffer(raw[8:16], dtype=np.uint64)[0])
    left_def, right_def = bool(raw[16]), bool(raw[17])
    off = 18
    out = {}
    for name, shape in (("mean_left", (d,)), ("mean_right", (d,)),
                        ("cov_left", (d, d)), ("cov_right", (d, d))):
        size = int(np.prod(shape)) * 8
        out[name] = np.frombuffer(raw[off:off + size], dtype="<f8").reshape(shape)
        off += size
    out["left_defined"], out["right_defined"] = left_def, right_def
    return out


# ---------------------------------------------------------------------------
# JSON shapes

def _undef(value: float | None) -> float:
    # undefined metrics serialize as 0 plus an entry in the "undefined" list,
    # so degenerate clusters stay visible at the axis origin
    return 0.0 if value is None else float(value)


def metrics_row_json(row: ClusterMetricsRow) -> dict:
    return {
        "id": row.cluster_id,
        "n_left": row.n_left,
        "n_right": row.n_right,
        "percent_split2": float(row.percent_split2),
        "precision": _undef(row.precision),
        "recall": _undef(row.recall),
        "split_centroid_distance": _undef(row.split_centroid_distance),
        "median_dist_to_centroid": float(row.median_dist_to_centroid),
        "undefined": row.undefined,
    }


def summary_json(summary: DatasetSummary) -> dict:
    return {
        "n_total": summary.n_total,
        "n_left": summary.n_left,
        "n_right": summary.n_right,
        "frechet_distance": _undef(summary.frechet_distance),
        "precision": _undef(summary.precision),
        "recall": _undef(summary.recall),
        "embedding_name": summary.embedding_name,
        "undefined": summary.undefined,
        "moments_file": MOMENTS_NAME,
    }


def projection_json(proj, splits: np.ndarray | None = None) -> dict:
    out = {
        "method": proj.method,
        "params": proj.params,
        "ids": [int(i) for i in proj.ids],
        "coords": [[float(x), float(y)] for x, y in proj.coords],
    }
    if splits is not None:
        out["splits"] = [int(s) for s in splits]
    return out


# ---------------------------------------------------------------------------
# finalization protocol

def write_marker(bundle_dir: Path, cfg_hash: str, version: str) -> None:
    write_json(Path(bundle_dir) / MARKER_NAME, {"config_hash": cfg_hash, "version": version})


def is_finalized(bundle_dir: Path) -> bool:
    return (Path(bundle_dir) / MARKER_NAME).exists()


def require_finalized(bundle_dir: Path) -> dict:
    marker = Path(bundle_dir) / MARKER_NAME
    if not marker.exists():
        raise BundleError(
            f"{bundle_dir} is not a finalized bundle (missing {MARKER_NAME}); "
            "refusing to serve a partial run")
    return json.loads(marker.read_text(encoding="utf-8"))
