from io import BytesIO

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from ravel.dataset import ImageRecord
from ravel.thumbs import ThumbnailError, generate_thumbnails, make_thumbnail


def png_bytes(w, h, color=(200, 30, 30)):
    buf = BytesIO()
    Image.new("RGB", (w, h), color).save(buf, format="PNG")
    return buf.getvalue()


def size_of(jpeg_bytes):
    return Image.open(BytesIO(jpeg_bytes)).size


def test_square_downscale_to_max_edge():
    assert size_of(make_thumbnail(png_bytes(1024, 1024))) == (150, 150)


def test_aspect_preserved():
    assert size_of(make_thumbnail(png_bytes(900, 600))) == (150, 100)


def test_small_image_never_upscaled():
    assert size_of(make_thumbnail(png_bytes(80, 80))) == (80, 80)


def test_alpha_image_converted():
    buf = BytesIO()
    Image.new("RGBA", (300, 200), (10, 20, 30, 128)).save(buf, format="PNG")
    out = make_thumbnail(buf.getvalue())
    assert size_of(out) == (150, 100)
    assert Image.open(BytesIO(out)).mode == "RGB"


def test_undecodable_raises():
    with pytest.raises(ThumbnailError):
        make_thumbnail(b"definitely not an image")


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 600), st.integers(1, 600))
def test_thumbnail_geometry_properties(w, h):
    tw, th = size_of(make_thumbnail(png_bytes(w, h)))
    assert max(tw, th) == min(150, max(w, h))
    # aspect ratio preserved up to pixel rounding
    assert abs(tw / th - w / h) <= max(w / h, 1.0) * (1.0 / min(tw, th) + 1.0 / min(w, h))


def test_generate_thumbnails_flags_and_continues(tmp_path):
    (tmp_path / "imgs").mkdir()
    (tmp_path / "imgs" / "ok.png").write_bytes(png_bytes(400, 300))
    (tmp_path / "imgs" / "bad.png").write_bytes(b"corrupt")
    records = [
        ImageRecord(id="ok", split="a", row=0, path="ok.png"),
        ImageRecord(id="bad", split="a", row=1, path="bad.png"),
        ImageRecord(id="gone", split="b", row=2, path="missing.png"),
        ImageRecord(id="noimg", split="b", row=3, path=None),
    ]
    report = generate_thumbnails(records, tmp_path / "imgs", tmp_path / "thumbs")
    assert report["written"] == 1
    assert report["failed"] == ["bad"]
    assert report["missing"] == ["gone"]
    assert report["skipped_no_path"] == 1
    assert (tmp_path / "thumbs" / "ok.jpg").exists()
    assert not (tmp_path / "thumbs" / "bad.jpg").exists()
