"""k-means over the union of both splits' embeddings.

Plain Lloyd iteration with squared-distance-proportional (k-means++) seeding.
Everything is deterministic for a fixed (X, k, seed, BLAS thread count):
seeding uses an explicit inverse-CDF draw from a PCG64 generator, distance
computations are chunked GEMMs with a fixed reduction order, and ties in
assignment always resolve to the lowest cluster id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ClusteringError(ValueError):
    pass


@dataclass(frozen=True)
class ClusteringResult:
    k: int
    assignments: np.ndarray          # (n,) int32, values in 0..k-1
    centroids: np.ndarray            # (k, d) float64
    inertia: float                   # sum of squared distances to assigned centroid
    iterations_run: int
    inertia_history: tuple[float, ...]


# Rows per GEMM chunk; bounds the (chunk x k) scratch matrix.
_CHUNK = 4096


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, (n, k), via |x|^2 + |c|^2 - 2 x.c, clamped at 0."""
    Cc = C.astype(X.dtype, copy=False)
    x2 = np.einsum("ij,ij->i", X, X, dtype=np.float64)
    c2 = np.einsum("ij,ij->i", Cc, Cc, dtype=np.float64)
    d2 = x2[:, None] + c2[None, :]
    d2 -= 2.0 * (X @ Cc.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def _assign_chunked(X: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid labels and the squared distance to that centroid."""
    n = X.shape[0]
    labels = np.empty(n, dtype=np.int32)
    best = np.empty(n, dtype=np.float64)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        d2 = _sq_dists(X[start:stop], C)
        idx = np.argmin(d2, axis=1)          # first minimum: tie -> lowest id
        labels[start:stop] = idx
        best[start:stop] = d2[np.arange(stop - start), idx]
    return labels, best


def kmeans_pp_init(X: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Choose k distinct rows of X as initial centroids.

    First row uniform, each further row with probability proportional to its
    squared distance to the nearest centroid chosen so far. If all remaining
    mass is zero (duplicate-heavy data) the lowest unchosen row is taken.
    """
    n = X.shape[0]
    if k < 1:
        raise ClusteringError(f"k must be >= 1, got {k}")
    if k > n:
        raise ClusteringError(f"k={k} exceeds sample count n={n}")

    rng = np.random.default_rng(seed)
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = _sq_dists(X, X[chosen[0]][None, :])[:, 0]
    for i in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            mask = np.ones(n, dtype=bool)
            mask[chosen[:i]] = False
            chosen[i] = int(np.flatnonzero(mask)[0])
        else:
            r = rng.random() * total
            chosen[i] = int(np.searchsorted(np.cumsum(d2), r, side="right").clip(0, n - 1))
        nd2 = _sq_dists(X, X[chosen[i]][None, :])[:, 0]
        np.minimum(d2, nd2, out=d2)
    return X[chosen].astype(np.float64)


def _repair_empty(labels: np.ndarray, best_d2: np.ndarray, centroids: np.ndarray,
                  X: np.ndarray, k: int) -> None:
    """Give every empty cluster the point currently farthest from its centroid.

    Seized points leave clusters with >= 2 members only, so no new empties
    appear. Mutates labels, best_d2 and centroids in place.
    """
    counts = np.bincount(labels, minlength=k)
    for cid in np.flatnonzero(counts == 0):
        order = np.argsort(-best_d2, kind="stable")
        for p in order:
            if counts[labels[p]] > 1:
                counts[labels[p]] -= 1
                counts[cid] += 1
                labels[p] = cid
                centroids[cid] = X[p]
                best_d2[p] = 0.0
                break


def kmeans(X: np.ndarray, k: int, seed: int = 0, tol: float = 1e-4,
           max_iter: int = 300, init_centroids: np.ndarray | None = None) -> ClusteringResult:
    """Lloyd iteration until the largest centroid shift drops below ``tol``.

    The per-iteration inertia sequence is asserted non-increasing; the
    returned inertia is recomputed from the final (assignments, centroids)
    pair. Empty clusters are repaired before each centroid update, so every
    cluster id in 0..k-1 owns at least one point.
    """
    X = np.ascontiguousarray(X)
    if X.ndim != 2:
        raise ClusteringError("X must be a 2-D matrix")
    n = X.shape[0]
    if init_centroids is not None:
        centroids = np.array(init_centroids, dtype=np.float64)
        if centroids.shape != (k, X.shape[1]):
            raise ClusteringError("init_centroids shape mismatch")
        if k > n or k < 1:
            raise ClusteringError(f"k={k} out of range for n={n}")
    else:
        centroids = kmeans_pp_init(X, k, seed)

    history: list[float] = []
    labels = np.zeros(n, dtype=np.int32)
    iterations = 0
    prev_inertia = np.inf
    for _ in range(max_iter):
        iterations += 1
        labels, best_d2 = _assign_chunked(X, centroids)
        _repair_empty(labels, best_d2, centroids, X, k)
        inertia = float(best_d2.sum())
        # Lloyd guarantee; tolerate float32 GEMM noise in the comparison only
        assert inertia <= prev_inertia * (1.0 + 1e-7) + 1e-9, \
            f"inertia increased: {prev_inertia} -> {inertia}"
        history.append(inertia)
        prev_inertia = inertia

        # group-by-label sums via sort + reduceat (fast, fixed reduction order)
        order = np.argsort(labels, kind="stable")
        starts = np.searchsorted(labels[order], np.arange(k), side="left")
        sums = np.add.reduceat(X[order].astype(np.float64, copy=False), starts, axis=0)
        counts = np.bincount(labels, minlength=k).astype(np.float64)
        new_centroids = sums / counts[:, None]

        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if shift < tol:
            break

    # final inertia against the centroids actually returned
    d2 = np.empty(n, dtype=np.float64)
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        diff = X[start:stop].astype(np.float64) - centroids[labels[start:stop]]
        d2[start:stop] = np.einsum("ij,ij->i", diff, diff)
    return ClusteringResult(k=k, assignments=labels, centroids=centroids,
                            inertia=float(d2.sum()), iterations_run=iterations,
                            inertia_history=tuple(history))


def assign(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Map each row to its nearest centroid (Euclidean, ties to lowest id)."""
    if X.shape[1] != centroids.shape[1]:
        raise ClusteringError(
            f"dimension mismatch: X has d={X.shape[1]}, centroids d={centroids.shape[1]}")
    labels, _ = _assign_chunked(np.ascontiguousarray(X), centroids)
    return labels
