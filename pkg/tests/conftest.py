"""Shared fixtures: synthetic datasets on disk and prebuilt bundles."""

from __future__ import annotations

import pytest

from ravel.pipeline import RunConfig, run_all
from ravel.synth import gaussian_blobs, separated_centers, write_two_split_dataset

# one label per blob; substring searches in the server tests rely on these
BLOB_LABELS = ["sea urchin", "space bar", "typewriter keyboard", "golden retriever",
               "dishrag", "doormat", "handkerchief", "pickelhaube", "rapeseed", "odometer"]


@pytest.fixture(scope="session")
def blob_data():
    """10 well-separated blobs in 16-D, 100 points each: (X, component labels)."""
    return gaussian_blobs(1000, 16, 10, seed=42, min_gap=20.0, sigma=0.1)


def make_labeled_dataset(out_dir, n_per_split=200, seed=5):
    """Two splits drawn from the same 10 separated blobs, labeled per blob.

    Blob 5 reuses blob 0's label, so the label "sea urchin" spans exactly two
    blobs (the planted two-cluster case for highlight tests).
    """
    centers = separated_centers(10, 16, seed, min_gap=25.0)
    Xl, labl = gaussian_blobs(n_per_split, 16, 10, seed + 1, sigma=0.3, centers=centers)
    Xr, labr = gaussian_blobs(n_per_split, 16, 10, seed + 2, sigma=0.3, centers=centers)
    names = list(BLOB_LABELS)
    names[5] = names[0]
    return write_two_split_dataset(
        out_dir, Xl, Xr, split_names=("real", "generated"),
        labels_left=[names[i] for i in labl], labels_right=[names[i] for i in labr],
        embedding_name="toy-16d"), (Xl, Xr, labl, labr)


@pytest.fixture(scope="session")
def labeled_bundle(tmp_path_factory):
    """400-image labeled fixture run through the full pipeline at k=4 and k=10."""
    root = tmp_path_factory.mktemp("labeled")
    ds, arrays = make_labeled_dataset(root / "data")
    config = RunConfig(manifest=ds["manifest"], embeddings_meta=ds["embeddings_meta"],
                       embeddings_bin=ds["embeddings_bin"], output_dir=str(root / "bundle"),
                       k_list=[4, 10], knn_k=3, seed=11)
    bundle = run_all(config)
    return {"bundle": bundle, "config": config, "dataset": ds, "arrays": arrays}


@pytest.fixture(scope="session")
def identity_bundle(tmp_path_factory):
    """Both splits are the same 300x8 matrix: precision = recall = 1 exactly."""
    root = tmp_path_factory.mktemp("identity")
    X, _ = gaussian_blobs(300, 8, 3, seed=9)
    ds = write_two_split_dataset(root / "data", X, X.copy(),
                                 split_names=("left", "right"), embedding_name="ident-8d")
    config = RunConfig(manifest=ds["manifest"], embeddings_meta=ds["embeddings_meta"],
                       embeddings_bin=ds["embeddings_bin"], output_dir=str(root / "bundle"),
                       k_list=[3], seed=1)
    bundle = run_all(config)
    return {"bundle": bundle, "config": config, "dataset": ds}


@pytest.fixture
def dataset_dir(tmp_path):
    """Factory: write a small two-split dataset into tmp_path and return paths."""
    def build(n_per_split=50, d=8, seed=3, **kwargs):
        Xl, _ = gaussian_blobs(n_per_split, d, 4, seed)
        Xr, _ = gaussian_blobs(n_per_split, d, 4, seed + 1)
        return write_two_split_dataset(tmp_path / "ds", Xl, Xr, **kwargs)
    return build
