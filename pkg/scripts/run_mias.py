"""Full ALL_GEOMETRIES + landscape run on locally supplied Mini-MIAS ROIs.

The manifest lists 128x128 ROI files with labels normal/abnormal. The data
is not distributed with this package.

    python scripts/run_mias.py mias/manifest.csv -o mias_report.json
"""

import argparse
import json
import os

from landmark_ph.evaluation import cross_validate
from landmark_ph.images import load_gray
from landmark_ph.pipeline import AssemblyStrategy, DatasetManifest, Mode, compute_diagrams, fold_featurizer
from landmark_ph.vectorize import VectorizerConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("manifest")
    ap.add_argument("--method", default="landscape")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--parallelism", type=int, default=os.cpu_count() or 1)
    ap.add_argument("-o", "--output", default="mias_report.json")
    args = ap.parse_args()

    manifest = DatasetManifest.read(args.manifest)
    strategy = AssemblyStrategy(mode=Mode.ALL_GEOMETRIES, vectorizer=VectorizerConfig(method=args.method))
    dset = compute_diagrams([load_gray(p) for p in manifest.paths], strategy, args.parallelism, manifest.paths)
    report = cross_validate(fold_featurizer(dset, strategy), manifest.labels, k=5, seed=args.seed)
    doc = report.to_dict()
    doc.update(strategy=strategy.to_dict(), events=dset.events)
    with open(args.output, "w") as fh:
        json.dump(doc, fh, indent=1)
    print(report.to_text(), end="")


if __name__ == "__main__":
    main()
