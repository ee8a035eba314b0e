"""Write the blob/no-blob synthetic dataset as PGM files plus a manifest.

    python scripts/make_synthetic_dataset.py out/synthetic --per-class 20 --seed 0
"""

import argparse
from pathlib import Path

from landmark_ph.images import save_gray
from landmark_ph.pipeline import LABELS, DatasetManifest
from landmark_ph.synthetic import blob_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--per-class", type=int, default=20)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    args.outdir.mkdir(parents=True, exist_ok=True)
    images, labels = blob_dataset(args.per_class, args.size, args.seed)
    entries = []
    for i, (img, lab) in enumerate(zip(images, labels)):
        name = f"{LABELS[lab]}_{i:03d}.pgm"
        save_gray(args.outdir / name, img)
        entries.append((name, LABELS[lab]))
    DatasetManifest(entries).write(args.outdir / "manifest.csv")
    print(f"wrote {len(entries)} images and {args.outdir / 'manifest.csv'}")


if __name__ == "__main__":
    main()
