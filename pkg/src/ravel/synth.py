"""Synthetic two-split datasets for tests, benchmarks and demos."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ravel.dataset import ImageRecord, write_embeddings, write_manifest


def separated_centers(k: int, d: int, seed: int, min_gap: float = 10.0) -> np.ndarray:
    """k random component centers rescaled so the closest pair is min_gap apart."""
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(k, d))
    diffs = centers[:, None, :] - centers[None, :, :]
    dists = np.sqrt((diffs ** 2).sum(axis=2))
    np.fill_diagonal(dists, np.inf)
    return centers * (min_gap / dists.min())


def gaussian_blobs(n: int, d: int, k: int, seed: int, min_gap: float = 10.0,
                   sigma: float = 1.0, centers: np.ndarray | None = None):
    """n points from k isotropic Gaussians; returns (X float32, component labels)."""
    rng = np.random.default_rng(seed)
    if centers is None:
        centers = separated_centers(k, d, seed + 1, min_gap)
    labels = np.repeat(np.arange(k), int(np.ceil(n / k)))[:n]
    X = centers[labels] + sigma * rng.normal(size=(n, d))
    return X.astype(np.float32), labels


def mode_collapse_pair(n_per_split: int, d: int, n_components: int, seed: int,
                       displacement_sigmas: float = 20.0, sigma: float = 1.0,
                       min_gap: float = 20.0):
    """Left split: full Gaussian mixture. Right split: the same mixture except
    component 0, which is collapsed onto a single repeated point displaced
    ``displacement_sigmas`` * sigma away from that component's center.

    Returns (X_left, X_right, labels_left, labels_right) with integer
    component labels (collapsed right points keep label 0).
    """
    centers = separated_centers(n_components, d, seed, min_gap)
    X_left, labels_left = gaussian_blobs(n_per_split, d, n_components, seed + 1,
                                         sigma=sigma, centers=centers)
    X_right, labels_right = gaussian_blobs(n_per_split, d, n_components, seed + 2,
                                           sigma=sigma, centers=centers)
    collapsed = centers[0].copy()
    collapsed[0] += displacement_sigmas * sigma
    X_right[labels_right == 0] = collapsed.astype(np.float32)
    return X_left, X_right, labels_left, labels_right


def write_two_split_dataset(out_dir: str | Path, X_left: np.ndarray, X_right: np.ndarray,
                            split_names: tuple[str, str] = ("real", "generated"),
                            labels_left=None, labels_right=None,
                            embedding_name: str = "synthetic",
                            image_paths_left=None, image_paths_right=None) -> dict:
    """Write manifest + embedding sidecar for a pair of split matrices.

    Manifest order is all left rows then all right rows. Optional label and
    image-path sequences align with each split's rows. Returns the file paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for side, (X, name, labels, paths) in enumerate(
            [(X_left, split_names[0], labels_left, image_paths_left),
             (X_right, split_names[1], labels_right, image_paths_right)]):
        for i in range(X.shape[0]):
            records.append(ImageRecord(
                id=f"{name}_{i:06d}", split=name, row=len(records),
                label=None if labels is None else str(labels[i]),
                path=None if paths is None else str(paths[i])))
    manifest = out_dir / "manifest.jsonl"
    meta = out_dir / "embeddings.meta.json"
    binf = out_dir / "embeddings.bin"
    write_manifest(records, manifest)
    write_embeddings(np.vstack([X_left, X_right]), meta, binf, embedding_name)
    return {"manifest": str(manifest), "embeddings_meta": str(meta),
            "embeddings_bin": str(binf), "n": len(records)}
