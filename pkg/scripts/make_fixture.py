#!/usr/bin/env python3
"""Generate a synthetic two-split dataset plus a ready-to-run config.

Three kinds:
  blobs     two splits drawn from the same Gaussian mixture (healthy model)
  identity  right split is a copy of the left (perfect precision/recall)
  collapse  right split collapses component 0 onto one repeated point

With --images, writes a flat-color PNG per record so the thumbnail path and
the sample viewer can be exercised too.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ravel.synth import gaussian_blobs, mode_collapse_pair, separated_centers, \
    write_two_split_dataset


def make_images(out_dir: Path, n: int, labels, prefix: str) -> list[str]:
    from PIL import Image
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(0)
    palette = rng.integers(40, 220, size=(int(max(labels)) + 1, 3))
    paths = []
    for i in range(n):
        name = f"{prefix}_{i:06d}.png"
        color = tuple(int(c) for c in palette[int(labels[i])])
        Image.new("RGB", (256, 256), color).save(out_dir / name)
        paths.append(name)
    return paths


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("kind", choices=["blobs", "identity", "collapse"])
    parser.add_argument("out", help="output directory")
    parser.add_argument("--n", type=int, default=5000, help="points per split")
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--components", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--images", action="store_true", help="also write PNG images")
    parser.add_argument("--k", default="10,20", help="k_list for the emitted config")
    args = parser.parse_args()

    out = Path(args.out)
    if args.kind == "collapse":
        Xl, Xr, labl, labr = mode_collapse_pair(args.n, args.dim, args.components,
                                                args.seed, min_gap=60.0)
    elif args.kind == "identity":
        Xl, labl = gaussian_blobs(args.n, args.dim, args.components, args.seed)
        Xr, labr = Xl.copy(), labl.copy()
    else:
        centers = separated_centers(args.components, args.dim, args.seed, min_gap=20.0)
        Xl, labl = gaussian_blobs(args.n, args.dim, args.components, args.seed + 1,
                                  centers=centers)
        Xr, labr = gaussian_blobs(args.n, args.dim, args.components, args.seed + 2,
                                  centers=centers)

    kwargs = {}
    if args.images:
        img_dir = out / "images"
        kwargs["image_paths_left"] = make_images(img_dir, args.n, labl, "real")
        kwargs["image_paths_right"] = make_images(img_dir, args.n, labr, "generated")

    ds = write_two_split_dataset(
        out / "data", Xl, Xr, split_names=("real", "generated"),
        labels_left=[f"component_{i}" for i in labl],
        labels_right=[f"component_{i}" for i in labr],
        embedding_name=f"synthetic-{args.dim}d", **kwargs)

    config = {
        "manifest": ds["manifest"],
        "embeddings_meta": ds["embeddings_meta"],
        "embeddings_bin": ds["embeddings_bin"],
        "output_dir": str(out / "bundle"),
        "k_list": [int(k) for k in args.k.split(",")],
        "knn_k": 3,
        "seed": args.seed,
    }
    if args.images:
        config["image_root"] = str(out / "images")
    cfg_path = out / "ravel.json"
    cfg_path.parent.mkdir(parents=True, exist_ok=True)
    cfg_path.write_text(json.dumps(config, indent=2))
    print(f"dataset: {ds['n']} records in {out / 'data'}")
    print(f"config:  {cfg_path}")
    print(f"next:    ravel run --config {cfg_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
