"""Read-only HTTP server over a finalized artifact bundle.

Everything is loaded into an immutable in-memory view at startup (sample
projections stay on disk and are read per request; they are pure functions
of the URL). Every endpoint returns identical bytes for identical requests.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from ravel import bundle as bio
from ravel.bundle import require_finalized
from ravel.dataset import parse_manifest

_IMMUTABLE = {"Cache-Control": "public, max-age=31536000, immutable"}


@dataclass(frozen=True)
class BundleView:
    """Memory-resident index of one finalized bundle."""

    bundle_dir: Path
    run_info: dict
    split_names: tuple[str, str]
    k_list: list[int]
    summary: dict
    records: list                      # ImageRecord, row order
    record_by_id: dict
    label_index: dict[str, list[int]]
    clusters_by_k: dict[int, list[dict]]     # metric rows joined with centroid xy
    assignments_by_k: dict[int, np.ndarray]
    members_by_k: dict[int, list[np.ndarray]]
    thumb_ids: frozenset
    image_root: Path | None

    @classmethod
    def load(cls, bundle_dir: str | Path) -> "BundleView":
        bundle_dir = Path(bundle_dir)
        require_finalized(bundle_dir)
        run_info = json.loads((bundle_dir / bio.RUN_NAME).read_text(encoding="utf-8"))
        split_names = tuple(run_info["split_names"])
        k_list = [int(k) for k in run_info["k_list"]]

        records = parse_manifest(bundle_dir / bio.MANIFEST_NAME, declared_splits=split_names)
        label_index: dict[str, list[int]] = {}
        for rec in records:
            if rec.label is not None:
                label_index.setdefault(rec.label, []).append(rec.row)

        clusters_by_k: dict[int, list[dict]] = {}
        assignments_by_k: dict[int, np.ndarray] = {}
        members_by_k: dict[int, list[np.ndarray]] = {}
        summary: dict = {}
        for k in k_list:
            metrics = json.loads((bundle_dir / bio.metrics_file(k)).read_text(encoding="utf-8"))
            summary = metrics["summary"]
            proj = json.loads(
                (bundle_dir / bio.projection_clusters_file(k)).read_text(encoding="utf-8"))
            xy = {int(cid): coord for cid, coord in zip(proj["ids"], proj["coords"])}
            rows = sorted(metrics["clusters"], key=lambda r: r["id"])
            for row in rows:
                row["x"], row["y"] = xy[row["id"]]
            clusters_by_k[k] = rows

            cj = json.loads((bundle_dir / bio.clusters_file(k)).read_text(encoding="utf-8"))
            assignments = np.asarray(cj["assignments"], dtype=np.int32)
            assignments_by_k[k] = assignments
            members_by_k[k] = [np.flatnonzero(assignments == cid) for cid in range(k)]

        thumbs = bundle_dir / bio.THUMBS_DIR
        thumb_ids = frozenset(p.stem for p in thumbs.glob("*.jpg")) if thumbs.is_dir() else frozenset()
        image_root = run_info.get("config", {}).get("image_root")
        return cls(bundle_dir=bundle_dir, run_info=run_info, split_names=split_names,
                   k_list=k_list, summary=summary, records=records,
                   record_by_id={rec.id: rec for rec in records},
                   label_index=label_index, clusters_by_k=clusters_by_k,
                   assignments_by_k=assignments_by_k, members_by_k=members_by_k,
                   thumb_ids=thumb_ids,
                   image_root=Path(image_root) if image_root else None)

    def sample_coords(self, k: int, cid: int) -> dict[int, list[float]]:
        path = self.bundle_dir / bio.projection_samples_dir(k) / f"{cid}.json"
        proj = json.loads(path.read_text(encoding="utf-8"))
        return {int(r): c for r, c in zip(proj["ids"], proj["coords"])}


def create_app(bundle_dir: str | Path, ui_dir: str | Path | None = None,
               cors: bool = False, preload: bool = True) -> FastAPI:
    """Build the app. With ``preload`` (the default and what the CLI uses)
    an invalid or unfinalized bundle raises before the server can start;
    with deferred loading requests get 503 until the view is ready."""
    app = FastAPI(title="ravel", docs_url=None, redoc_url=None)
    app.state.view = BundleView.load(bundle_dir) if preload else None

    if not preload:
        def _bg_load():
            app.state.view = BundleView.load(bundle_dir)

        @app.on_event("startup")
        def _start_loader():
            threading.Thread(target=_bg_load, daemon=True).start()

    if cors:
        from fastapi.middleware.cors import CORSMiddleware
        app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["GET"],
                           allow_headers=["*"])

    def view() -> BundleView:
        v = app.state.view
        if v is None:
            raise HTTPException(status_code=503,
                                detail={"error": "bundle still loading", "retry_after_s": 1},
                                headers={"Retry-After": "1"})
        return v

    @app.get("/api/summary")
    def summary():
        v = view()
        return {**v.summary, "k_list": v.k_list, "split_names": list(v.split_names),
                "knn_k": v.run_info.get("knn_k"), "has_labels": bool(v.label_index),
                "has_thumbs": bool(v.thumb_ids)}

    def _require_k(v: BundleView, k: int) -> None:
        if k not in v.clusters_by_k:
            raise HTTPException(status_code=404,
                                detail={"error": f"k={k} not in bundle", "k_list": v.k_list})

    @app.get("/api/clusters")
    def clusters(k: int):
        v = view()
        _require_k(v, k)
        return v.clusters_by_k[k]

    @app.get("/api/clusters/{k}/{cid}/samples")
    def cluster_samples(k: int, cid: int):
        v = view()
        _require_k(v, k)
        if cid < 0 or cid >= k:
            raise HTTPException(status_code=404, detail={"error": f"cluster {cid} not in 0..{k-1}"})
        members = v.members_by_k[k][cid]
        coords = v.sample_coords(k, cid)
        recs = [v.records[r] for r in members]  # manifest order
        if v.label_index:
            # group same-class thumbnails within each split; unlabeled last
            recs.sort(key=lambda rec: (v.split_names.index(rec.split),
                                       rec.label is None, rec.label or "", rec.row))
        out = []
        for rec in recs:
            item = {"id": rec.id, "split": rec.split}
            if rec.label is not None:
                item["label"] = rec.label
            if rec.id in v.thumb_ids:
                item["thumb_url"] = f"/thumbs/{rec.id}"
            xy = coords.get(rec.row)
            item["x"], item["y"] = (xy[0], xy[1]) if xy else (0.0, 0.0)
            out.append(item)
        return out

    @app.get("/api/labels")
    def labels(q: str = ""):
        v = view()
        needle = q.lower()
        return sorted(lbl for lbl in v.label_index if needle in lbl.lower())

    @app.get("/api/label-clusters")
    def label_clusters(k: int, classes: str = ""):
        v = view()
        _require_k(v, k)
        wanted = [c for c in classes.split(",") if c]
        rows: set[int] = set()
        for cls_name in wanted:
            rows.update(v.label_index.get(cls_name, []))
        if not rows:
            return []
        hit = v.assignments_by_k[k][sorted(rows)]
        return sorted(int(c) for c in np.unique(hit))

    @app.get("/thumbs/{image_id}")
    def thumb(image_id: str):
        v = view()
        if not v.thumb_ids:
            raise HTTPException(status_code=404,
                                detail={"reason": "no_thumbnails",
                                        "error": "bundle was built without images"})
        if image_id not in v.thumb_ids:
            raise HTTPException(status_code=404, detail={"reason": "unknown_id"})
        return FileResponse(v.bundle_dir / bio.THUMBS_DIR / f"{image_id}.jpg",
                            media_type="image/jpeg", headers=_IMMUTABLE)

    @app.get("/images/{image_id}")
    def original(image_id: str):
        v = view()
        rec = v.record_by_id.get(image_id)
        if rec is None:
            raise HTTPException(status_code=404, detail={"reason": "unknown_id"})
        if v.image_root is None or rec.path is None:
            raise HTTPException(status_code=404,
                                detail={"reason": "no_images",
                                        "error": "dataset is embedding-only"})
        path = (v.image_root / rec.path).resolve()
        if not str(path).startswith(str(v.image_root.resolve()) + "/"):
            raise HTTPException(status_code=404, detail={"reason": "outside_image_root"})
        if not path.exists():
            raise HTTPException(status_code=404, detail={"reason": "missing_file"})
        media = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
        return FileResponse(path, media_type=media, headers=_IMMUTABLE)

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:
        @app.get("/")
        def index():
            return JSONResponse({"service": "ravel", "endpoints": [
                "/api/summary", "/api/clusters?k=", "/api/clusters/{k}/{cid}/samples",
                "/api/labels?q=", "/api/label-clusters?k=&classes=",
                "/thumbs/{id}", "/images/{id}"]})

    return app
