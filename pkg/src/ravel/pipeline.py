"""Offline pipeline: ingest -> cluster -> metrics -> project -> bundle.

One process, sequential stages, deterministic for a fixed (config, seed,
thread count). Each k's artifacts are written independently; the bundle is
only valid once the finalization marker lands, and a failed run is renamed
to a quarantine directory so the server can never pick it up.
"""

from __future__ import annotations

import dataclasses
import json
import os
import resource
import shutil
import subprocess
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from threadpoolctl import threadpool_limits

from ravel import __version__
from ravel import bundle as bio
from ravel.clustering import kmeans
from ravel.dataset import load_dataset
from ravel.metrics import cluster_metrics, dataset_summary, per_image_flags
from ravel.projection import project_bundle
from ravel.thumbs import generate_thumbnails


class ConfigError(ValueError):
    pass


class StageFailure(RuntimeError):
    def __init__(self, stage: str, cause: BaseException, quarantine: Path | None):
        self.stage = stage
        self.cause = cause
        self.quarantine = quarantine
        loc = f" (partial outputs kept at {quarantine})" if quarantine else ""
        super().__init__(f"stage {stage!r} failed: {cause}{loc}")


@dataclass
class RunConfig:
    manifest: str
    embeddings_meta: str
    embeddings_bin: str
    output_dir: str
    image_root: str | None = None
    split_names: list[str] | None = None      # (left, right); None = manifest order
    k_list: list[int] = field(default_factory=lambda: [250, 500, 1000])
    knn_k: int = 3
    n_neighbors: int = 15
    min_dist: float = 0.1
    epochs: int = 200
    sample_projection: str = "per_cluster"    # or "global"
    seed: int = 0
    thumbnails: bool = True
    threads: int | None = None
    l2_normalize: bool = False
    overwrite: bool = False
    embedder_command: list[str] | None = None
    kmeans_tol: float = 1e-4
    kmeans_max_iter: int = 300

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict | None = None) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {unknown}")
        merged = dict(raw)
        for key, val in (overrides or {}).items():
            if val is not None:
                merged[key] = val
        missing = [k for k in ("manifest", "embeddings_meta", "embeddings_bin", "output_dir")
                   if k not in merged]
        if missing:
            raise ConfigError(f"{path}: missing required keys {missing}")
        return cls(**merged)


def resolve_threads(value: int | None) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("RAVEL_THREADS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _validate(config: RunConfig) -> None:
    if not config.k_list:
        raise ConfigError("k_list must not be empty")
    for k in config.k_list:
        if not isinstance(k, int) or k < 1:
            raise ConfigError(f"every k must be an integer >= 1, got {k!r}")
    if len(set(config.k_list)) != len(config.k_list):
        raise ConfigError("k_list contains duplicates")
    if config.sample_projection not in ("per_cluster", "global"):
        raise ConfigError(f"sample_projection must be per_cluster or global, "
                          f"got {config.sample_projection!r}")
    if config.knn_k < 1:
        raise ConfigError(f"knn_k must be >= 1, got {config.knn_k}")
    if config.split_names is not None and len(config.split_names) != 2:
        raise ConfigError("split_names must list exactly two names")


def _prepare_output(config: RunConfig) -> Path:
    out = Path(config.output_dir)
    if out.exists() and any(out.iterdir()):
        if not config.overwrite:
            raise ConfigError(f"output dir {out} is not empty; "
                              "set overwrite=true or pass a fresh directory")
        shutil.rmtree(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _quarantine(out: Path) -> Path | None:
    if not out.exists():
        return None
    target = Path(str(out).rstrip("/\\") + ".quarantine")
    n = 1
    while target.exists():
        n += 1
        target = Path(str(out).rstrip("/\\") + f".quarantine-{n}")
    out.rename(target)
    return target


def _rss_bytes() -> int:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024


def run_all(config: RunConfig) -> Path:
    """Execute every stage and finalize the bundle; returns the bundle path.

    Raises StageFailure on any stage error; partial outputs are moved to a
    quarantine directory and never carry the finalization marker.
    """
    _validate(config)
    out = _prepare_output(config)
    threads = resolve_threads(config.threads)
    started_at = time.time()
    stages: dict[str, dict] = {}
    current = {"name": "validate"}

    @contextmanager
    def stage(name: str):
        current["name"] = name
        t0 = time.perf_counter()
        yield
        stages[name] = {"seconds": round(time.perf_counter() - t0, 6),
                        "peak_rss_bytes": _rss_bytes()}

    try:
        with threadpool_limits(limits=threads):
            if config.embedder_command and not (Path(config.embeddings_meta).exists()
                                                and Path(config.embeddings_bin).exists()):
                with stage("embed"):
                    cmd = list(config.embedder_command) + [
                        config.manifest, config.embeddings_meta, config.embeddings_bin]
                    subprocess.run(cmd, check=True)

            with stage("ingest"):
                splits = tuple(config.split_names) if config.split_names else None
                handle = load_dataset(config.manifest, config.embeddings_meta,
                                      config.embeddings_bin, declared_splits=splits,
                                      l2_normalize=config.l2_normalize)
                for k in config.k_list:
                    if k > handle.n:
                        raise ConfigError(f"k={k} exceeds dataset size n={handle.n}")

            has_images = config.image_root is not None and any(
                r.path is not None for r in handle.manifest)
            if config.thumbnails and has_images:
                with stage("thumbs"):
                    report = generate_thumbnails(handle.manifest, config.image_root,
                                                 out / bio.THUMBS_DIR, threads=threads)
                stages["thumbs"].update(written=report["written"],
                                        failed=len(report["failed"]))

            X = handle.embeddings.data
            sides = handle.sides

            with stage("flags"):
                flags = per_image_flags(X[handle.left_rows()], X[handle.right_rows()],
                                        knn_k=config.knn_k)
                summary = dataset_summary(X, sides, flags,
                                          embedding_name=handle.embeddings.embedding_name)
                bio.write_flags(out / bio.FLAGS_NAME, handle.n, sides, flags)
                bio.write_moments(out / bio.MOMENTS_NAME, summary)

            cluster_info: dict[str, dict] = {}
            for k in config.k_list:
                with stage(f"cluster_{k}"):
                    result = kmeans(X, k, seed=config.seed, tol=config.kmeans_tol,
                                    max_iter=config.kmeans_max_iter)
                    bio.write_json(out / bio.clusters_file(k), {
                        "k": k,
                        "assignments": [int(a) for a in result.assignments],
                        "inertia": float(result.inertia),
                        "centroid_file": bio.centroids_file(k),
                    })
                    bio.write_f32_matrix(out / bio.centroids_file(k), result.centroids)
                    cluster_info[str(k)] = {"iterations": result.iterations_run,
                                            "inertia": float(result.inertia)}

                with stage(f"metrics_{k}"):
                    rows = cluster_metrics(result.assignments, flags, X, sides)
                    bio.write_json(out / bio.metrics_file(k), {
                        "clusters": [bio.metrics_row_json(r) for r in rows],
                        "summary": bio.summary_json(summary),
                    })

                with stage(f"project_{k}"):
                    projset = project_bundle(result, X,
                                             n_neighbors=config.n_neighbors,
                                             min_dist=config.min_dist,
                                             epochs=config.epochs, seed=config.seed,
                                             mode=config.sample_projection)
                    bio.write_json(out / bio.projection_clusters_file(k),
                                   bio.projection_json(projset.centroids))
                    sdir = out / bio.projection_samples_dir(k)
                    sdir.mkdir(exist_ok=True)
                    for cid, proj in projset.samples.items():
                        bio.write_json(sdir / f"{cid}.json",
                                       bio.projection_json(proj, splits=sides[proj.ids]))

            current["name"] = "finalize"
            t_fin = time.perf_counter()
            shutil.copyfile(config.manifest, out / bio.MANIFEST_NAME)
            cfg_dict = config.to_dict()
            cfg_hash = bio.config_hash(cfg_dict)
            # run.json must carry its own stage entry, so record before writing
            stages["finalize"] = {"seconds": round(time.perf_counter() - t_fin, 6),
                                  "peak_rss_bytes": _rss_bytes()}
            run_info = {
                "version": __version__,
                "config": cfg_dict,
                "config_hash": cfg_hash,
                "threads": threads,
                "split_names": list(handle.split_names),
                "n_total": handle.n,
                "n_left": int((sides == 0).sum()),
                "n_right": int((sides == 1).sum()),
                "dim": handle.embeddings.d,
                "embedding_name": handle.embeddings.embedding_name,
                "k_list": list(config.k_list),
                "knn_k": config.knn_k,
                "clustering": cluster_info,
                "stages": stages,
                "started_at": started_at,
                "finished_at": time.time(),
            }
            bio.write_json(out / bio.RUN_NAME, run_info)
            _fsync_dir(out)
            bio.write_marker(out, cfg_hash, __version__)
            _fsync_dir(out)
    except BaseException as exc:
        q = _quarantine(out)
        raise StageFailure(current["name"], exc, q) from exc
    return out


def _fsync_dir(path: Path) -> None:
    fd = os.open(path, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)
