"""Ravel: cluster, score and explore two splits of embedded images.

The offline pipeline ingests a manifest plus a precomputed embedding matrix,
clusters the union of both splits, computes per-cluster quality/diversity
metrics, projects centroids and cluster members to 2-D, and freezes the
results into an immutable artifact bundle. A read-only HTTP server exposes
the bundle to the browser UI.
"""

__version__ = "0.1.0"

from ravel.clustering import ClusteringResult, assign, kmeans, kmeans_pp_init
from ravel.dataset import (DatasetError, DatasetHandle, EmbeddingMatrix, ImageRecord,
                           load_dataset, load_embeddings, parse_manifest)
from ravel.metrics import (ClusterMetricsRow, DatasetSummary, ManifoldIndex, PerImageFlags,
                           build_manifold, cluster_metrics, dataset_summary,
                           frechet_distance, membership, per_image_flags)
from ravel.projection import Projection2D, pca_project, project_bundle, umap_project
from ravel.thumbs import make_thumbnail

__all__ = [
    "__version__",
    "ClusteringResult", "assign", "kmeans", "kmeans_pp_init",
    "DatasetError", "DatasetHandle", "EmbeddingMatrix", "ImageRecord",
    "load_dataset", "load_embeddings", "parse_manifest",
    "ClusterMetricsRow", "DatasetSummary", "ManifoldIndex", "PerImageFlags",
    "build_manifold", "cluster_metrics", "dataset_summary", "frechet_distance",
    "membership", "per_image_flags",
    "Projection2D", "pca_project", "project_bundle", "umap_project",
    "make_thumbnail",
]
