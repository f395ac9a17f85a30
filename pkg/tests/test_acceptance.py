"""Acceptance suite. Each test covers one gate criterion at its stated
tolerance and prints one [ACCEPTANCE] pass/fail line (run with -s to stream
them). The scale test at the end works through a 120k x 256 dataset twice
and dominates the runtime of this module.
"""

import json
import shutil
import time
from contextlib import contextmanager

import numpy as np
import pytest
from fastapi.testclient import TestClient
from oracles import oracle_flags
from scipy.spatial.distance import pdist, squareform
from scipy.stats import spearmanr
from sklearn.metrics import adjusted_rand_score

from ravel.bundle import BundleError, read_f32_matrix
from ravel.clustering import kmeans
from ravel.metrics import (cluster_metrics, dataset_summary, frechet_distance,
                           per_image_flags)
from ravel.pipeline import RunConfig, run_all
from ravel.projection import pca_project, umap_project
from ravel.server import create_app
from ravel.synth import gaussian_blobs, mode_collapse_pair, write_two_split_dataset


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"\n[ACCEPTANCE] {name}: FAIL", flush=True)
        raise
    print(f"\n[ACCEPTANCE] {name}: PASS", flush=True)


def weighted_identity(rows, summary):
    p_num = sum(r.n_right * r.precision for r in rows if r.precision is not None)
    p_den = sum(r.n_right for r in rows if r.precision is not None)
    r_num = sum(r.n_left * r.recall for r in rows if r.recall is not None)
    r_den = sum(r.n_left for r in rows if r.recall is not None)
    assert p_num / p_den == pytest.approx(summary.precision, abs=1e-9)
    assert r_num / r_den == pytest.approx(summary.recall, abs=1e-9)


@pytest.fixture(scope="module")
def identity_arrays():
    X = np.random.default_rng(64).standard_normal((5000, 64)).astype(np.float32)
    return X


@pytest.fixture(scope="module")
def collapse_arrays():
    return mode_collapse_pair(n_per_split=10_000, d=32, n_components=10, seed=77,
                              displacement_sigmas=20.0, sigma=1.0, min_gap=60.0)


@pytest.fixture(scope="module")
def collapse_bundle(tmp_path_factory, collapse_arrays):
    Xl, Xr, labl, labr = collapse_arrays
    root = tmp_path_factory.mktemp("collapse")
    ds = write_two_split_dataset(root / "ds", Xl, Xr,
                                 split_names=("truth", "model"),
                                 labels_left=[f"component_{i}" for i in labl],
                                 labels_right=[f"component_{i}" for i in labr])
    config = RunConfig(manifest=ds["manifest"], embeddings_meta=ds["embeddings_meta"],
                       embeddings_bin=ds["embeddings_bin"],
                       output_dir=str(root / "bundle"), k_list=[20], knn_k=3, seed=5)
    t0 = time.perf_counter()
    bundle = run_all(config)
    return {"bundle": bundle, "elapsed": time.perf_counter() - t0,
            "config": config, "labels": (labl, labr)}


def test_identity_dataset_perfect_scores(identity_arrays):
    with criterion("identity dataset: precision=recall=1.0, FD<=1e-6, <30s"):
        X = identity_arrays
        t0 = time.perf_counter()
        flags = per_image_flags(X, X.copy(), knn_k=3)
        full = np.vstack([X, X])
        sides = np.r_[np.zeros(len(X), dtype=np.uint8), np.ones(len(X), dtype=np.uint8)]
        summary = dataset_summary(full, sides, flags, embedding_name="identity")
        elapsed = time.perf_counter() - t0
        assert summary.precision == 1.0
        assert summary.recall == 1.0
        assert summary.frechet_distance <= 1e-6
        assert elapsed < 30.0, f"took {elapsed:.1f}s"


def test_frechet_closed_form_oracles():
    with criterion("Frechet oracle: univariate + isotropic closed forms @1e-9"):
        rng = np.random.default_rng(123)
        for _ in range(50):
            mu1, mu2 = rng.normal(size=2)
            s1, s2 = rng.uniform(0.1, 4.0, size=2)
            expected = (mu1 - mu2) ** 2 + (np.sqrt(s1) - np.sqrt(s2)) ** 2
            got = frechet_distance([mu1], [[s1]], [mu2], [[s2]])
            assert got == pytest.approx(expected, abs=1e-9)
        for d in (2, 5, 16, 64):
            a, b = rng.uniform(0.1, 5.0, size=2)
            got = frechet_distance(np.zeros(d), a * np.eye(d), np.zeros(d), b * np.eye(d))
            assert got == pytest.approx(d * (np.sqrt(a) - np.sqrt(b)) ** 2, abs=1e-9)


def test_flags_match_bruteforce_oracle():
    with criterion("precision/recall flags == O(n^2) oracle on 20 random datasets"):
        rng = np.random.default_rng(31)
        mismatches = 0
        for trial in range(20):
            knn_k = (1, 3, 5)[trial % 3]
            n_l = int(rng.integers(knn_k + 2, 501))
            n_r = int(rng.integers(knn_k + 2, 501))
            d = int(rng.integers(2, 17))
            left = rng.normal(size=(n_l, d)) * rng.uniform(0.5, 2.0)
            right = rng.normal(size=(n_r, d)) * rng.uniform(0.5, 2.0) + rng.normal(size=d) * 0.5
            flags = per_image_flags(left.astype(np.float32), right.astype(np.float32),
                                    knn_k=knn_k)
            prec, rec = oracle_flags(left.astype(np.float32), right.astype(np.float32), knn_k)
            mismatches += int((flags.precision_flags != prec).sum())
            mismatches += int((flags.recall_flags != rec).sum())
        assert mismatches == 0


def test_mode_collapse_scenario(collapse_bundle, collapse_arrays):
    with criterion("mode collapse: zero-recall pure-right cluster + pure-left "
                   "component-0 cluster at k=20, <2min"):
        assert collapse_bundle["elapsed"] < 120.0, f"took {collapse_bundle['elapsed']:.0f}s"
        bundle = collapse_bundle["bundle"]
        metrics = json.loads((bundle / "metrics_20.json").read_text())
        rows = metrics["clusters"]

        collapsed = [r for r in rows
                     if r["percent_split2"] == 1.0
                     and (r["recall"] == 0.0 or "recall" in r["undefined"])]
        assert collapsed, "no pure-right zero-recall cluster found"

        # clusters holding left-split points of the collapsed component
        Xl, Xr, labl, labr = collapse_arrays
        assignments = np.array(json.loads((bundle / "clusters_20.json").read_text())["assignments"])
        left_comp0_rows = np.flatnonzero(labl == 0)          # manifest rows: left block first
        comp0_clusters = {int(c) for c in assignments[left_comp0_rows]}
        assert any(rows[c]["percent_split2"] <= 0.1 for c in comp0_clusters)


def test_aggregation_identity_across_k(identity_arrays, collapse_arrays):
    with criterion("aggregation identity @1e-9 for k in {250,500,1000} on both fixtures"):
        fixtures = []
        X_id = identity_arrays
        fixtures.append((np.vstack([X_id, X_id]),
                         np.r_[np.zeros(len(X_id), dtype=np.uint8),
                               np.ones(len(X_id), dtype=np.uint8)]))
        Xl, Xr, _, _ = collapse_arrays
        fixtures.append((np.vstack([Xl, Xr]),
                         np.r_[np.zeros(len(Xl), dtype=np.uint8),
                               np.ones(len(Xr), dtype=np.uint8)]))
        for X, sides in fixtures:
            flags = per_image_flags(X[sides == 0], X[sides == 1], knn_k=3)
            summary = dataset_summary(X, sides, flags)
            for k in (250, 500, 1000):
                # the identity is an exact property of the aggregation, so a
                # cheap partial clustering exercises it just as well
                result = kmeans(X, k, seed=k, max_iter=8)
                rows = cluster_metrics(result.assignments, flags, X, sides)
                weighted_identity(rows, summary)


def test_clustering_quality(blob_data):
    with criterion("clustering: ARI >= 0.99 on 10 blobs; inertia never increases"):
        X, truth = blob_data
        histories = []
        for seed in range(3):
            res = kmeans(X, 10, seed=seed)
            histories.append(res.inertia_history)
            assert adjusted_rand_score(truth, res.assignments) >= 0.99
        for hist in histories:
            diffs = np.diff(np.array(hist))
            assert (diffs <= 1e-9 * np.array(hist[:-1]) + 1e-12).all()


def test_projection_properties():
    with criterion("projection: blob separation + spearman >= 0.5 over 20 seeds; "
                   "PCA isometry @1e-9"):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(100, 32))
        b = rng.normal(size=(100, 32))
        b[:, 0] += 50
        blobs = np.vstack([a, b]).astype(np.float32)

        rng = np.random.default_rng(2024)
        centers = rng.normal(size=(10, 16)) * 10
        labels = rng.integers(0, 10, 500)
        mixture = (centers[labels] + rng.normal(size=(500, 16))).astype(np.float32)
        hd = pdist(mixture.astype(np.float64))

        for seed in range(20):
            proj = umap_project(blobs, seed=seed)
            c = proj.coords
            c1, c2 = c[:100].mean(axis=0), c[100:].mean(axis=0)
            spread = (np.linalg.norm(c[:100] - c1, axis=1).mean()
                      + np.linalg.norm(c[100:] - c2, axis=1).mean()) / 2
            assert np.linalg.norm(c1 - c2) > 3 * spread, f"seed {seed}"

            proj = umap_project(mixture, seed=seed)
            rho = spearmanr(hd, pdist(proj.coords)).statistic
            assert rho >= 0.5, f"seed {seed}: spearman {rho:.3f}"

        flat = np.random.default_rng(0).normal(size=(40, 2))
        basis, _ = np.linalg.qr(np.random.default_rng(1).normal(size=(8, 2)))
        plane = flat @ basis.T + 3.0
        low = pca_project(plane).coords
        assert np.abs(squareform(pdist(plane)) - squareform(pdist(low))).max() < 1e-9


def test_api_contract(labeled_bundle, identity_bundle, tmp_path):
    with criterion("API contract: shapes, cardinalities, unfinalized refusal"):
        client = TestClient(create_app(labeled_bundle["bundle"]))
        summary = client.get("/api/summary").json()
        for key in ("n_total", "n_left", "n_right", "frechet_distance", "precision",
                    "recall", "embedding_name", "undefined", "k_list", "split_names"):
            assert key in summary
        assert summary["n_total"] == 400

        for k in summary["k_list"]:
            rows = client.get("/api/clusters", params={"k": k}).json()
            assert len(rows) == k
            assert [r["id"] for r in rows] == list(range(k))
            total = 0
            for cid in range(k):
                body = client.get(f"/api/clusters/{k}/{cid}/samples").json()
                assert body, f"cluster {cid} empty"
                for item in body:
                    assert {"id", "split", "x", "y"} <= set(item)
                total += len(body)
            assert total == summary["n_total"]
            assert client.get("/api/clusters", params={"k": k + 1}).status_code == 404
            assert client.get(f"/api/clusters/{k}/{k}/samples").status_code == 404

        assert client.get("/api/labels", params={"q": "urch"}).json() == ["sea urchin"]
        ident = TestClient(create_app(identity_bundle["bundle"]))
        assert ident.get("/api/summary").json()["precision"] == 1.0

        broken = tmp_path / "unfinalized"
        shutil.copytree(labeled_bundle["bundle"], broken)
        (broken / "finalized.json").unlink()
        with pytest.raises(BundleError):
            create_app(broken)


def test_scale_smoke_120k(tmp_path_factory):
    with criterion("scale: 120k x 256, k=250 end-to-end <10min, <8GB, "
                   "rerun byte-identical"):
        root = tmp_path_factory.mktemp("scale")
        n_side = 60_000
        # both splits sample the same mixture: the realistic "model roughly
        # matches the data" comparison the workbench exists for
        from ravel.synth import separated_centers
        centers = separated_centers(50, 256, seed=3, min_gap=12.0)
        X_left, _ = gaussian_blobs(n_side, 256, 50, seed=1, centers=centers)
        X_right, _ = gaussian_blobs(n_side, 256, 50, seed=2, centers=centers)
        ds = write_two_split_dataset(root / "ds", X_left, X_right,
                                     split_names=("real", "generated"),
                                     embedding_name="synthetic-256d")
        config = RunConfig(manifest=ds["manifest"], embeddings_meta=ds["embeddings_meta"],
                           embeddings_bin=ds["embeddings_bin"],
                           output_dir=str(root / "bundle"),
                           k_list=[250], knn_k=3, seed=7, thumbnails=False)
        t0 = time.perf_counter()
        bundle = run_all(config)
        elapsed = time.perf_counter() - t0
        assert elapsed < 600.0, f"took {elapsed:.0f}s"

        info = json.loads((bundle / "run.json").read_text())
        peak = max(s.get("peak_rss_bytes", 0) for s in info["stages"].values())
        assert peak < 8 * 1024 ** 3, f"peak rss {peak/1e9:.2f} GB"

        rows = json.loads((bundle / "metrics_250.json").read_text())["clusters"]
        assert len(rows) == 250
        cents = read_f32_matrix(bundle / "centroids_250.bin", 250, 256)
        assert np.isfinite(cents).all()

        moved = root / "first_run"
        bundle.rename(moved)
        second = run_all(config)

        files = sorted(str(p.relative_to(moved)) for p in moved.rglob("*") if p.is_file())
        assert files == sorted(str(p.relative_to(second))
                               for p in second.rglob("*") if p.is_file())
        for rel in files:
            if rel == "run.json":   # timings/timestamps differ by design
                continue
            assert (moved / rel).read_bytes() == (second / rel).read_bytes(), rel
        print(f"\n[scale] single run {elapsed:.0f}s, peak rss {peak/1e9:.2f} GB")
