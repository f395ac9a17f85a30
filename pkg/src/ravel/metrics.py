"""Quality and diversity metrics over two embedding splits.

Per-image flags: a point of one split is "supported" by the other split when
it falls inside that split's k-NN manifold estimate, the union of balls
centered on each support point with radius equal to that point's distance to
its knn_k-th nearest neighbor (self excluded). The precision flag of a
right-split image is membership in the left manifold; the recall flag of a
left-split image is membership in the right manifold. Flags are computed once
on the full splits and aggregated per cluster, so they are independent of the
cluster count.

Dataset-level Fréchet distance between Gaussian fits (m1, C1), (m2, C2):

    FD = |m1 - m2|^2 + Tr(C1 + C2 - 2 (C1 C2)^(1/2))

with the matrix square root taken through the symmetric product form
C1^(1/2) C2 C1^(1/2), which keeps the computation in real arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class MetricsError(ValueError):
    pass


class ManifoldTooSmall(MetricsError):
    """Support has fewer than knn_k + 1 points; dependent metrics are
    undefined and must be flagged, never silently zeroed."""


# ---------------------------------------------------------------------------
# k-NN manifold membership

_CHUNK = 1024


def _pairwise_sq_dists(Q: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances (|Q|, |S|) in float64 via the norm
    expansion, clamped at 0. Kept squared: sqrt is monotone, so k-th nearest
    selection and radius comparisons are done in squared space and the root
    is taken only for the few values actually stored."""
    Q64 = Q.astype(np.float64, copy=False)
    S64 = S.astype(np.float64, copy=False)
    d2 = np.einsum("ij,ij->i", Q64, Q64)[:, None] + np.einsum("ij,ij->i", S64, S64)[None, :]
    d2 -= 2.0 * (Q64 @ S64.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


@dataclass(frozen=True)
class ManifoldIndex:
    support: np.ndarray   # (m, d)
    knn_k: int
    radii: np.ndarray     # (m,) distance to the knn_k-th nearest other point


def build_manifold(support: np.ndarray, knn_k: int = 3) -> ManifoldIndex:
    """Radius of every support point: distance to its knn_k-th nearest
    neighbor within the support, self excluded."""
    support = np.ascontiguousarray(support, dtype=np.float64)  # one upfront cast
    m = support.shape[0]
    if knn_k < 1:
        raise MetricsError(f"knn_k must be >= 1, got {knn_k}")
    if m < knn_k + 1:
        raise ManifoldTooSmall(
            f"support of {m} points cannot define a {knn_k}-NN manifold "
            f"(needs at least {knn_k + 1})")

    radii = np.empty(m, dtype=np.float64)
    for start in range(0, m, _CHUNK):
        stop = min(start + _CHUNK, m)
        d2 = _pairwise_sq_dists(support[start:stop], support)
        d2[np.arange(stop - start), np.arange(start, stop)] = np.inf  # exclude self
        d2.partition(knn_k - 1, axis=1)
        radii[start:stop] = np.sqrt(d2[:, knn_k - 1])
    return ManifoldIndex(support=support, knn_k=knn_k, radii=radii)


def membership(query: np.ndarray, index: ManifoldIndex) -> bool:
    """True iff the query lies within radius of at least one support point."""
    query = np.asarray(query, dtype=np.float64)
    if query.ndim == 1:
        query = query[None, :]
    return bool(membership_mask(query, index)[0])


def membership_mask(queries: np.ndarray, index: ManifoldIndex) -> np.ndarray:
    """Vectorized membership for a (q, d) block of queries.

    Support is scanned in blocks with early exit: a query resolved by one
    block never touches later blocks. Results are identical to the full
    scan since membership is a disjunction over support points.
    """
    queries = np.ascontiguousarray(queries)
    if queries.shape[1] != index.support.shape[1]:
        raise MetricsError(
            f"dimension mismatch: query d={queries.shape[1]}, "
            f"support d={index.support.shape[1]}")
    nq = queries.shape[0]
    out = np.zeros(nq, dtype=bool)
    unresolved = np.arange(nq)
    sblock = 16384
    radii_sq = index.radii * index.radii
    for s0 in range(0, index.support.shape[0], sblock):
        s1 = min(s0 + sblock, index.support.shape[0])
        rad2 = radii_sq[s0:s1][None, :]
        sup = index.support[s0:s1]
        hits = np.zeros(unresolved.shape[0], dtype=bool)
        for q0 in range(0, unresolved.shape[0], _CHUNK):
            q1 = min(q0 + _CHUNK, unresolved.shape[0])
            d2 = _pairwise_sq_dists(queries[unresolved[q0:q1]], sup)
            hits[q0:q1] = (d2 <= rad2).any(axis=1)
        out[unresolved[hits]] = True
        unresolved = unresolved[~hits]
        if unresolved.size == 0:
            break
    return out


@dataclass(frozen=True)
class PerImageFlags:
    """Boolean support flags, aligned with the row order of each split.

    Either side is None when its opposite manifold could not be built
    (support smaller than knn_k + 1); metrics derived from that side are
    then undefined rather than zero.
    """
    precision_flags: np.ndarray | None   # per right-split image
    recall_flags: np.ndarray | None      # per left-split image
    knn_k: int


def _interleave(m: int) -> np.ndarray:
    """Coprime-stride permutation of 0..m-1. Flags are ORs over the support,
    so support order never changes a result, but an interleaved order lets
    the early-exit scan resolve most queries in its first block when the
    data is grouped (e.g. sorted by class or mixture component)."""
    stride = max(1, int(m * 0.6180339887))
    while math.gcd(stride, m) != 1:
        stride += 1
    return (np.arange(m, dtype=np.int64) * stride) % m


def per_image_flags(left: np.ndarray, right: np.ndarray, knn_k: int = 3) -> PerImageFlags:
    """Flags for both directions; each side fails independently."""
    precision = recall = None
    try:
        index = build_manifold(left[_interleave(left.shape[0])], knn_k)
        precision = membership_mask(right, index)
    except ManifoldTooSmall:
        pass
    try:
        index = build_manifold(right[_interleave(right.shape[0])], knn_k)
        recall = membership_mask(left, index)
    except ManifoldTooSmall:
        pass
    return PerImageFlags(precision_flags=precision, recall_flags=recall, knn_k=knn_k)


# ---------------------------------------------------------------------------
# Per-cluster aggregation

@dataclass(frozen=True)
class ClusterMetricsRow:
    cluster_id: int
    n_left: int
    n_right: int
    percent_split2: float
    precision: float | None
    recall: float | None
    split_centroid_distance: float | None
    median_dist_to_centroid: float

    @property
    def undefined(self) -> list[str]:
        out = []
        if self.precision is None:
            out.append("precision")
        if self.recall is None:
            out.append("recall")
        if self.split_centroid_distance is None:
            out.append("split_centroid_distance")
        return out


def cluster_metrics(assignments: np.ndarray, flags: PerImageFlags,
                    X: np.ndarray, sides: np.ndarray) -> list[ClusterMetricsRow]:
    """Aggregate per-image flags and geometry into one row per cluster.

    ``sides`` marks each row 0 (left split) or 1 (right). Undefined metrics
    stay None here; serialization renders them as 0 plus an "undefined"
    marker so degenerate clusters stay visible at the axis origin.
    """
    assignments = np.asarray(assignments)
    sides = np.asarray(sides)
    n = X.shape[0]
    if assignments.shape[0] != n or sides.shape[0] != n:
        raise MetricsError("assignments/sides must align with X rows")
    k = int(assignments.max()) + 1 if n else 0

    left_rows = np.flatnonzero(sides == 0)
    right_rows = np.flatnonzero(sides == 1)
    # spread split-local flags onto manifest rows for easy cluster slicing
    prec_by_row = np.full(n, -1, dtype=np.int8)
    rec_by_row = np.full(n, -1, dtype=np.int8)
    if flags.precision_flags is not None:
        prec_by_row[right_rows] = flags.precision_flags.astype(np.int8)
    if flags.recall_flags is not None:
        rec_by_row[left_rows] = flags.recall_flags.astype(np.int8)

    X64 = X.astype(np.float64, copy=False)
    rows: list[ClusterMetricsRow] = []
    for cid in range(k):
        members = np.flatnonzero(assignments == cid)
        msides = sides[members]
        lm = members[msides == 0]
        rm = members[msides == 1]
        n_left, n_right = len(lm), len(rm)

        centroid = X64[members].mean(axis=0)
        dists = np.linalg.norm(X64[members] - centroid, axis=1)
        median_dist = float(np.median(dists))

        precision = None
        if n_right > 0 and flags.precision_flags is not None:
            precision = float(prec_by_row[rm].mean())
        recall = None
        if n_left > 0 and flags.recall_flags is not None:
            recall = float(rec_by_row[lm].mean())
        split_dist = None
        if n_left > 0 and n_right > 0:
            split_dist = float(np.linalg.norm(X64[lm].mean(axis=0) - X64[rm].mean(axis=0)))

        rows.append(ClusterMetricsRow(
            cluster_id=cid, n_left=n_left, n_right=n_right,
            percent_split2=n_right / (n_left + n_right),
            precision=precision, recall=recall,
            split_centroid_distance=split_dist,
            median_dist_to_centroid=median_dist))
    return rows


# ---------------------------------------------------------------------------
# Dataset-level summary

def frechet_distance(mean1: np.ndarray, cov1: np.ndarray,
                     mean2: np.ndarray, cov2: np.ndarray) -> float:
    """Fréchet distance between two Gaussians given their moments.

    Covariances are symmetrized and eigenvalues clamped at zero before the
    square roots, so slightly non-PSD sample covariances are accepted. The
    result is clamped to be non-negative.
    """
    m1 = np.atleast_1d(np.asarray(mean1, dtype=np.float64))
    m2 = np.atleast_1d(np.asarray(mean2, dtype=np.float64))
    c1 = np.atleast_2d(np.asarray(cov1, dtype=np.float64))
    c2 = np.atleast_2d(np.asarray(cov2, dtype=np.float64))
    for arr in (m1, m2, c1, c2):
        if not np.isfinite(arr).all():
            raise MetricsError("non-finite moment input")

    c1 = (c1 + c1.T) / 2.0
    c2 = (c2 + c2.T) / 2.0

    vals1, vecs1 = np.linalg.eigh(c1)
    sqrt_c1 = (vecs1 * np.sqrt(np.clip(vals1, 0.0, None))) @ vecs1.T
    inner = sqrt_c1 @ c2 @ sqrt_c1
    inner = (inner + inner.T) / 2.0
    cross_vals = np.clip(np.linalg.eigvalsh(inner), 0.0, None)

    diff = m1 - m2
    fd = float(diff @ diff + np.trace(c1) + np.trace(c2) - 2.0 * np.sqrt(cross_vals).sum())
    return max(fd, 0.0)


@dataclass(frozen=True)
class DatasetSummary:
    n_total: int
    n_left: int
    n_right: int
    frechet_distance: float | None
    precision: float | None
    recall: float | None
    embedding_name: str
    mean_left: np.ndarray | None
    mean_right: np.ndarray | None
    cov_left: np.ndarray | None
    cov_right: np.ndarray | None

    @property
    def undefined(self) -> list[str]:
        out = []
        if self.frechet_distance is None:
            out.append("frechet_distance")
        if self.precision is None:
            out.append("precision")
        if self.recall is None:
            out.append("recall")
        return out


def dataset_summary(X: np.ndarray, sides: np.ndarray, flags: PerImageFlags,
                    embedding_name: str = "") -> DatasetSummary:
    """Whole-dataset counts, moments, Fréchet distance and flag means.

    Fréchet distance needs at least two samples per split for a sample
    covariance (unbiased, n-1 normalization); otherwise it is undefined.
    """
    sides = np.asarray(sides)
    left_rows = np.flatnonzero(sides == 0)
    right_rows = np.flatnonzero(sides == 1)
    X64 = X.astype(np.float64, copy=False)

    def moments(rows):
        if len(rows) < 2:
            return None, None
        sub = X64[rows]
        return sub.mean(axis=0), np.cov(sub, rowvar=False)

    mean_l, cov_l = moments(left_rows)
    mean_r, cov_r = moments(right_rows)
    fd = None
    if cov_l is not None and cov_r is not None:
        fd = frechet_distance(mean_l, cov_l, mean_r, cov_r)

    precision = None if flags.precision_flags is None else float(flags.precision_flags.mean())
    recall = None if flags.recall_flags is None else float(flags.recall_flags.mean())

    return DatasetSummary(
        n_total=int(sides.shape[0]), n_left=int(len(left_rows)), n_right=int(len(right_rows)),
        frechet_distance=fd, precision=precision, recall=recall,
        embedding_name=embedding_name,
        mean_left=mean_l, mean_right=mean_r, cov_left=cov_l, cov_right=cov_r)
