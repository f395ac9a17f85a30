"""2-D layouts of cluster centroids and per-cluster samples.

The main projector builds an exact k-NN graph, converts it to a fuzzy graph
(per-point rho = nearest-neighbor distance, sigma solved by bisection so the
smoothed weights sum to log2(n_neighbors), symmetrized as a + b - ab) and
optimizes a 2-D layout by stochastic attraction/repulsion with negative
sampling. Layouts start from the PCA plane, which keeps runs deterministic
and anchors the global arrangement.

PCA doubles as the fallback projector for inputs too small for a k-NN graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
from scipy.optimize import curve_fit

from ravel._layout import make_rng_state, optimize_layout, smooth_knn
from ravel.clustering import ClusteringResult


class ProjectionError(ValueError):
    pass


class TooFewPoints(ProjectionError):
    """Input is below the k-NN graph minimum; caller should use PCA."""


@dataclass(frozen=True)
class Projection2D:
    ids: np.ndarray                  # entity ids (cluster ids or image rows)
    coords: np.ndarray               # (m, 2) float64
    method: str                      # "umap" | "pca"
    params: dict = field(default_factory=dict)


def pca_project(X: np.ndarray, ids: np.ndarray | None = None) -> Projection2D:
    """Top-2 principal components of mean-centered X.

    Sign convention: the largest-magnitude loading of each component is made
    positive, so the output is unique. Rank-deficient input yields zero
    columns (rank-0 input an all-zero layout).
    """
    X = np.asarray(X, dtype=np.float64)
    m = X.shape[0]
    if ids is None:
        ids = np.arange(m)
    if m == 1:
        return Projection2D(ids=ids, coords=np.zeros((1, 2)), method="pca", params={})
    centered = X - X.mean(axis=0)
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    comps = vt[:2].copy()
    for c in range(comps.shape[0]):
        pivot = np.argmax(np.abs(comps[c]))
        if comps[c, pivot] < 0:
            comps[c] = -comps[c]
    # drop numerically-zero directions entirely
    comps[svals[:2] <= 1e-12 * max(svals[0], 1e-300)] = 0.0
    coords = centered @ comps.T
    if comps.shape[0] < 2:
        coords = np.hstack([coords, np.zeros((m, 1))])
    return Projection2D(ids=ids, coords=coords, method="pca", params={})


_AB_CACHE: dict[tuple[float, float], tuple[float, float]] = {}


def _find_ab(spread: float, min_dist: float) -> tuple[float, float]:
    """Fit the smooth curve 1/(1 + a x^(2b)) to the target offset-exponential
    membership falloff used by the low-dimensional space."""
    key = (round(spread, 9), round(min_dist, 9))
    if key not in _AB_CACHE:
        xv = np.linspace(0, spread * 3, 300)
        yv = np.ones_like(xv)
        yv[xv >= min_dist] = np.exp(-(xv[xv >= min_dist] - min_dist) / spread)
        params, _ = curve_fit(lambda x, a, b: 1.0 / (1.0 + a * x ** (2 * b)), xv, yv)
        _AB_CACHE[key] = (float(params[0]), float(params[1]))
    return _AB_CACHE[key]


def _exact_knn(X: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices and distances of the k nearest other points, sorted ascending."""
    m = X.shape[0]
    X64 = X.astype(np.float64, copy=False)
    sq = np.einsum("ij,ij->i", X64, X64)
    idx_out = np.empty((m, k), dtype=np.int64)
    d_out = np.empty((m, k), dtype=np.float64)
    chunk = max(1, min(2048, int(3.2e7 // max(m, 1))))  # caps scratch at ~256 MB
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (X64[start:stop] @ X64.T)
        np.maximum(d2, 0.0, out=d2)
        d2[np.arange(stop - start), np.arange(start, stop)] = np.inf
        part = np.argpartition(d2, k - 1, axis=1)[:, :k]
        pd = np.take_along_axis(d2, part, axis=1)
        order = np.argsort(pd, axis=1, kind="stable")
        idx_out[start:stop] = np.take_along_axis(part, order, axis=1)
        d_out[start:stop] = np.sqrt(np.take_along_axis(pd, order, axis=1))
    return idx_out, d_out


def _fuzzy_graph(X: np.ndarray, n_neighbors: int) -> scipy.sparse.coo_matrix:
    knn_idx, knn_d = _exact_knn(X, n_neighbors)
    sigmas, rhos = smooth_knn(knn_d, target=np.log2(n_neighbors))
    vals = np.exp(-np.maximum(knn_d - rhos[:, None], 0.0) / sigmas[:, None])
    m = X.shape[0]
    rows = np.repeat(np.arange(m), n_neighbors)
    graph = scipy.sparse.coo_matrix((vals.ravel(), (rows, knn_idx.ravel())), shape=(m, m))
    graph.sum_duplicates()
    transpose = graph.transpose().tocsr()
    graph = graph.tocsr()
    sym = graph + transpose - graph.multiply(transpose)   # fuzzy union a + b - ab
    sym = sym.tocoo()
    sym.eliminate_zeros()
    return sym


def _epochs_per_sample(weights: np.ndarray, n_epochs: int) -> np.ndarray:
    result = np.full(weights.shape[0], -1.0)
    n_samples = n_epochs * (weights / weights.max())
    result[n_samples > 0] = float(n_epochs) / n_samples[n_samples > 0]
    return result


def umap_project(X: np.ndarray, n_neighbors: int = 15, min_dist: float = 0.1,
                 epochs: int = 200, seed: int = 0,
                 ids: np.ndarray | None = None) -> Projection2D:
    """Nonlinear 2-D layout of X; deterministic for a fixed seed."""
    X = np.ascontiguousarray(X)
    m = X.shape[0]
    if m < max(4, n_neighbors + 1):
        raise TooFewPoints(
            f"{m} points is below the {max(4, n_neighbors + 1)}-point minimum "
            f"for n_neighbors={n_neighbors}")
    if ids is None:
        ids = np.arange(m)

    graph = _fuzzy_graph(X, n_neighbors)
    a, b = _find_ab(1.0, min_dist)

    init = pca_project(X).coords.astype(np.float64)
    max_abs = np.abs(init).max()
    if max_abs > 0:
        init *= 10.0 / max_abs

    # 0.75 rather than the conventional 1.0: the layout refines a PCA init,
    # and a gentler first epoch keeps more of its global arrangement
    eps = _epochs_per_sample(graph.data, epochs)
    emb = optimize_layout(init, graph.row.astype(np.int64), graph.col.astype(np.int64),
                          epochs, eps, a, b, make_rng_state(seed),
                          initial_alpha=0.75)
    emb = emb - emb.mean(axis=0)
    params = {"n_neighbors": n_neighbors, "min_dist": min_dist,
              "epochs": epochs, "seed": seed}
    return Projection2D(ids=ids, coords=emb, method="umap", params=params)


def _project_or_fallback(X: np.ndarray, ids: np.ndarray, n_neighbors: int,
                         min_dist: float, epochs: int, seed: int) -> Projection2D:
    try:
        return umap_project(X, n_neighbors=n_neighbors, min_dist=min_dist,
                            epochs=epochs, seed=seed, ids=ids)
    except TooFewPoints:
        return pca_project(X, ids=ids)


@dataclass(frozen=True)
class ProjectionSet:
    centroids: Projection2D
    samples: dict[int, Projection2D]   # cluster id -> member layout


def project_bundle(clustering: ClusteringResult, X: np.ndarray,
                   n_neighbors: int = 15, min_dist: float = 0.1, epochs: int = 200,
                   seed: int = 0, mode: str = "per_cluster") -> ProjectionSet:
    """One layout over the k centroids plus one per cluster over its members.

    ``mode="per_cluster"`` fits every cluster independently (maximizes local
    structure); ``mode="global"`` fits the full dataset once and slices it,
    which keeps clusters mutually comparable but costs O(N^2) neighbor search.
    Inputs below the k-NN minimum fall back to PCA, recorded in ``method``.
    """
    if mode not in ("per_cluster", "global"):
        raise ProjectionError(f"unknown sample projection mode {mode!r}")
    k = clustering.k
    centroid_proj = _project_or_fallback(
        clustering.centroids, np.arange(k), n_neighbors, min_dist, epochs, seed)

    samples: dict[int, Projection2D] = {}
    if mode == "global":
        full = _project_or_fallback(X, np.arange(X.shape[0]),
                                    n_neighbors, min_dist, epochs, seed)
        for cid in range(k):
            members = np.flatnonzero(clustering.assignments == cid)
            samples[cid] = Projection2D(ids=members, coords=full.coords[members],
                                        method=full.method, params=full.params)
    else:
        for cid in range(k):
            members = np.flatnonzero(clustering.assignments == cid)
            samples[cid] = _project_or_fallback(
                X[members], members, n_neighbors, min_dist, epochs, seed + cid + 1)
    return ProjectionSet(centroids=centroid_proj, samples=samples)
