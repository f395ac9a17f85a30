import json
import re
import signal
import subprocess
import sys
import time
from pathlib import Path

import httpx
import pytest

from ravel.cli import main
from ravel.synth import gaussian_blobs, write_two_split_dataset


@pytest.fixture
def config_file(tmp_path):
    Xl, _ = gaussian_blobs(40, 6, 2, seed=0)
    Xr, _ = gaussian_blobs(40, 6, 2, seed=1)
    ds = write_two_split_dataset(tmp_path / "ds", Xl, Xr)
    cfg = {"manifest": ds["manifest"], "embeddings_meta": ds["embeddings_meta"],
           "embeddings_bin": ds["embeddings_bin"], "output_dir": str(tmp_path / "out"),
           "k_list": [3], "seed": 0}
    path = tmp_path / "ravel.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_exit_zero(config_file, capsys):
    assert main(["run", "--config", str(config_file)]) == 0
    out = capsys.readouterr().out
    assert "finalized" in out


def test_ingest_prints_stats(config_file, capsys):
    assert main(["ingest", "--config", str(config_file)]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["n_total"] == 80
    assert stats["dim"] == 6


def test_inspect_reports_counts(config_file, capsys, tmp_path):
    main(["run", "--config", str(config_file)])
    capsys.readouterr()
    assert main(["inspect", str(tmp_path / "out")]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["n_total"] == 80
    assert body["k_list"] == [3]
    assert body["clusters_per_k"] == {"3": 3}


def test_inspect_rejects_unfinalized(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert main(["inspect", str(tmp_path / "empty")]) == 1
    assert "not a finalized bundle" in capsys.readouterr().err


def test_run_overrides(config_file, tmp_path, capsys):
    out2 = tmp_path / "other"
    assert main(["run", "--config", str(config_file), "--out", str(out2),
                 "--k", "2", "--seed", "5", "--no-thumbs"]) == 0
    info = json.loads((out2 / "run.json").read_text())
    assert info["config"]["k_list"] == [2]
    assert info["config"]["seed"] == 5
    assert info["config"]["thumbnails"] is False


def test_failed_run_exit_one(config_file, tmp_path, capsys):
    cfg = json.loads(config_file.read_text())
    Path(cfg["embeddings_bin"]).write_bytes(b"short")
    config_file.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(config_file)]) == 1
    err = capsys.readouterr().err
    assert "stage 'ingest' failed" in err


def test_unknown_flag_exits_two(config_file):
    with pytest.raises(SystemExit) as err:
        main(["run", "--config", str(config_file), "--bogus"])
    assert err.value.code == 2


def test_unknown_command_exits_two():
    with pytest.raises(SystemExit) as err:
        main(["transmogrify"])
    assert err.value.code == 2


def test_serve_ephemeral_port_lifecycle(config_file, tmp_path):
    main(["run", "--config", str(config_file)])
    proc = subprocess.Popen(
        [sys.executable, "-m", "ravel.cli", "serve", str(tmp_path / "out"), "--port", "0"],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True)
    try:
        line = proc.stdout.readline()
        match = re.search(r"http://127\.0\.0\.1:(\d+)", line)
        assert match, f"no port announced: {line!r}"
        port = int(match.group(1))
        deadline = time.time() + 10
        body = None
        while time.time() < deadline:
            try:
                body = httpx.get(f"http://127.0.0.1:{port}/api/summary", timeout=1.0).json()
                break
            except httpx.HTTPError:
                time.sleep(0.1)
        assert body and body["n_total"] == 80
    finally:
        proc.send_signal(signal.SIGINT)
        # uvicorn drains connections, then re-raises the signal so the exit
        # status reflects the interrupt; both spellings are a clean shutdown
        assert proc.wait(timeout=10) in (0, -signal.SIGINT)


def test_serve_refuses_unfinalized(tmp_path, capsys):
    (tmp_path / "nope").mkdir()
    assert main(["serve", str(tmp_path / "nope"), "--port", "0"]) == 1
    assert "not a finalized bundle" in capsys.readouterr().err
