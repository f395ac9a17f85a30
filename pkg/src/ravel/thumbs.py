"""Thumbnail generation for the sample viewer."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from io import BytesIO
from pathlib import Path

from PIL import Image

log = logging.getLogger(__name__)

DEFAULT_MAX_EDGE = 150


class ThumbnailError(ValueError):
    """Image bytes could not be decoded."""


def make_thumbnail(image_bytes: bytes, max_edge: int = DEFAULT_MAX_EDGE) -> bytes:
    """Downscale an image so its longest edge is at most ``max_edge`` pixels.

    Aspect ratio is preserved and images are never upscaled; an image already
    smaller than ``max_edge`` is re-encoded at its original size. Returns JPEG
    bytes.
    """
    try:
        img = Image.open(BytesIO(image_bytes))
        img.load()
    except Exception as exc:
        raise ThumbnailError(f"undecodable image: {exc}") from exc

    w, h = img.size
    longest = max(w, h)
    if longest > max_edge:
        scale = max_edge / longest
        # round half-up keeps 900x600 -> 150x100 style arithmetic exact
        new_size = (max(1, int(w * scale + 0.5)), max(1, int(h * scale + 0.5)))
        img = img.resize(new_size, Image.LANCZOS)
    if img.mode not in ("RGB", "L"):
        img = img.convert("RGB")
    out = BytesIO()
    img.save(out, format="JPEG", quality=90)
    return out.getvalue()


def generate_thumbnails(records, image_root: str | Path, out_dir: str | Path,
                        max_edge: int = DEFAULT_MAX_EDGE, threads: int = 4) -> dict:
    """Write thumbs/{id}.jpg for every record that has a readable image.

    Undecodable or missing files are flagged and skipped; generation never
    aborts the pipeline. Returns counts plus the ids that failed.
    """
    image_root = Path(image_root)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    todo = [rec for rec in records if rec.path is not None]

    def work(rec) -> tuple[str, str]:
        src = image_root / rec.path
        if not src.exists():
            return ("missing", rec.id)
        try:
            thumb = make_thumbnail(src.read_bytes(), max_edge=max_edge)
        except ThumbnailError:
            return ("failed", rec.id)
        (out_dir / f"{rec.id}.jpg").write_bytes(thumb)
        return ("written", rec.id)

    written = 0
    missing: list[str] = []
    failed: list[str] = []
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for status, rid in pool.map(work, todo):
            if status == "written":
                written += 1
            elif status == "missing":
                missing.append(rid)
            else:
                failed.append(rid)
    if failed:
        log.warning("thumbnails: %d undecodable images (first: %s)", len(failed), failed[0])
    return {"written": written, "missing": missing, "failed": failed,
            "skipped_no_path": len(records) - len(todo)}
