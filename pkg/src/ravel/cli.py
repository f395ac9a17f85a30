"""Command-line entry point: ravel run | ingest | serve | inspect."""

from __future__ import annotations

import argparse
import json
import socket
import sys
from pathlib import Path

from ravel import __version__
from ravel import bundle as bio
from ravel.dataset import DatasetError, load_dataset
from ravel.pipeline import ConfigError, RunConfig, StageFailure, run_all


def _parse_k_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid k list {text!r}; expected e.g. 250,500,1000")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ravel",
                                     description="offline evaluation pipeline and bundle server")
    parser.add_argument("--version", action="version", version=f"ravel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute the full pipeline into an artifact bundle")
    run_p.add_argument("--config", required=True, help="JSON run config")
    run_p.add_argument("--out", help="override output_dir")
    run_p.add_argument("--k", type=_parse_k_list, help="override k_list, comma separated")
    run_p.add_argument("--knn-k", type=int, dest="knn_k", help="override knn_k")
    run_p.add_argument("--seed", type=int, help="override seed")
    run_p.add_argument("--threads", type=int, help="override threads (env RAVEL_THREADS)")
    run_p.add_argument("--no-thumbs", action="store_true", help="skip thumbnail generation")

    ingest_p = sub.add_parser("ingest", help="validate dataset inputs and print stats")
    ingest_p.add_argument("--config", required=True)

    serve_p = sub.add_parser("serve", help="serve a finalized bundle over HTTP")
    serve_p.add_argument("bundle", help="bundle directory")
    serve_p.add_argument("--port", type=int, default=8000, help="0 = pick an ephemeral port")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--ui", help="static UI directory to mount at /")
    serve_p.add_argument("--cors", action="store_true", help="enable permissive CORS (dev)")

    inspect_p = sub.add_parser("inspect", help="print a bundle summary as JSON")
    inspect_p.add_argument("bundle", help="bundle directory")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    out = {"output_dir": args.out, "k_list": args.k, "knn_k": args.knn_k,
           "seed": args.seed, "threads": args.threads}
    if args.no_thumbs:
        out["thumbnails"] = False
    return out


def cmd_run(args) -> int:
    config = RunConfig.from_file(args.config, overrides=_overrides(args))
    bundle = run_all(config)
    print(f"ravel: bundle finalized at {bundle}")
    return 0


def cmd_ingest(args) -> int:
    config = RunConfig.from_file(args.config, overrides={})
    splits = tuple(config.split_names) if config.split_names else None
    handle = load_dataset(config.manifest, config.embeddings_meta, config.embeddings_bin,
                          declared_splits=splits, l2_normalize=config.l2_normalize)
    n_with_images = sum(1 for r in handle.manifest if r.path is not None)
    print(json.dumps({
        "n_total": handle.n,
        "n_left": int((handle.sides == 0).sum()),
        "n_right": int((handle.sides == 1).sum()),
        "dim": handle.embeddings.d,
        "split_names": list(handle.split_names),
        "embedding_name": handle.embeddings.embedding_name,
        "n_labels": len(handle.label_index),
        "n_with_images": n_with_images,
    }, indent=2))
    return 0


def cmd_inspect(args) -> int:
    bundle_dir = Path(args.bundle)
    bio.require_finalized(bundle_dir)
    run_info = json.loads((bundle_dir / bio.RUN_NAME).read_text(encoding="utf-8"))
    k_list = [int(k) for k in run_info["k_list"]]
    first = json.loads((bundle_dir / bio.metrics_file(k_list[0])).read_text(encoding="utf-8"))
    summary = first["summary"]
    clusters_per_k = {}
    for k in k_list:
        data = json.loads((bundle_dir / bio.metrics_file(k)).read_text(encoding="utf-8"))
        clusters_per_k[str(k)] = len(data["clusters"])
    print(json.dumps({
        "bundle": str(bundle_dir),
        "version": run_info.get("version"),
        "n_total": summary["n_total"],
        "n_left": summary["n_left"],
        "n_right": summary["n_right"],
        "frechet_distance": summary["frechet_distance"],
        "precision": summary["precision"],
        "recall": summary["recall"],
        "undefined": summary["undefined"],
        "embedding_name": summary["embedding_name"],
        "split_names": run_info.get("split_names"),
        "k_list": k_list,
        "clusters_per_k": clusters_per_k,
    }, indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from ravel.server import create_app

    app = create_app(args.bundle, ui_dir=args.ui, cors=args.cors, preload=True)
    sock = socket.create_server((args.host, args.port))
    port = sock.getsockname()[1]
    print(f"ravel: serving {args.bundle} at http://{args.host}:{port}", flush=True)
    server = uvicorn.Server(uvicorn.Config(app, log_level="warning"))
    server.run(sockets=[sock])
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "ingest":
            return cmd_ingest(args)
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "inspect":
            return cmd_inspect(args)
    except StageFailure as exc:
        print(f"ravel: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, DatasetError, bio.BundleError) as exc:
        print(f"ravel: error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
