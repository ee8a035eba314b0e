"""Command-line interface: ``landmark-ph <subcommand>``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import shutil
import signal
import sys
import tempfile
import threading
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .evaluation import InsufficientClass, UndefinedMetric, cross_validate
from .images import ImageLoadError, load_gray
from .persistence import (
    N_MAX,
    EmptyCloud,
    FinitizePolicy,
    compute_persistence,
    cubical_filtration,
    empty_diagram,
    finitize,
    pairwise_distances,
    subsample_cloud,
)
from .pipeline import (
    AssemblyStrategy,
    DatasetManifest,
    FeatureMatrix,
    Mode,
    compute_diagrams,
    featurize_dataset,
    fold_featurizer,
)
from .rips import vr_persistence
from .ulbp import GeometrySelector, extract_landmarks, selector_table, ulbp_table
from .vectorize import Method, VectorizerConfig

log = logging.getLogger("landmark_ph")

BUILD_ID = f"landmark-ph {__version__}"


class UsageError(Exception):
    pass


class AtomicOutputs:
    """Collect outputs in temp files and move them into place only on success."""

    def __init__(self):
        self._pending: list[tuple[str, str]] = []

    def __enter__(self):
        return self

    def text(self, path, content: str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(content)
        self._pending.append((tmp, str(path)))

    def directory(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = tempfile.mkdtemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        self._pending.append((tmp, str(path)))
        return Path(tmp)

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            for tmp, final in self._pending:
                if os.path.isdir(tmp) and os.path.isdir(final):
                    shutil.rmtree(final)
                os.replace(tmp, final)
        else:
            for tmp, _ in self._pending:
                if os.path.isdir(tmp):
                    shutil.rmtree(tmp, ignore_errors=True)
                elif os.path.exists(tmp):
                    os.unlink(tmp)
        return False


def _emit(outputs: AtomicOutputs, path, content: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(content)
    else:
        outputs.text(path, content)


def _selector(text: str | None) -> GeometrySelector:
    if text is None:
        raise UsageError("a --selector is required")
    try:
        return GeometrySelector.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _dims(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(d) for d in text)
    return tuple(int(d) for d in str(text).split(",") if d.strip())


def _strategy(args) -> AssemblyStrategy:
    cfg = VectorizerConfig(
        method=Method(args.method), k=args.k, samples=args.samples, resolution=args.resolution,
        sigma=args.sigma, omega=args.omega,
    )
    try:
        return AssemblyStrategy(
            mode=Mode(args.mode), lam=args.lam, dims=_dims(args.dims), vectorizer=cfg,
            finitize_policy=FinitizePolicy(args.policy), n_max=args.n_max,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# --------------------------------------------------------------------------- subcommands


def cmd_ulbp_table(args, out: AtomicOutputs) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.all:
        w.writerow(["decimal", "bits", "class"])
        for dec, (bits, cls) in enumerate(ulbp_table()):
            w.writerow([dec, bits, cls])
    else:
        w.writerow(["lambda", "xi", "name", "bits", "decimal"])
        for row in selector_table():
            w.writerow([row["lambda"], row["xi"], row["name"], row["bits"], row["decimal"]])
    _emit(out, args.output, buf.getvalue())


def cmd_landmarks(args, out: AtomicOutputs) -> None:
    sel = _selector(args.selector)
    pts = extract_landmarks(load_gray(args.image), sel)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y"])
    w.writerows(pts.tolist())
    _emit(out, args.output, buf.getvalue())


def cmd_ph(args, out: AtomicOutputs) -> None:
    image = load_gray(args.image)
    extra = {"version": BUILD_ID}
    if args.mode == "cubical":
        pd = compute_persistence(cubical_filtration(image))
        label = "cubical"
    else:
        sel = _selector(args.selector)
        label = sel.name
        pts = extract_landmarks(image, sel)
        extra["n_landmarks"] = len(pts)
        try:
            pts, stride = subsample_cloud(pts, args.n_max)
            if stride > 1:
                extra["subsampled"] = {"stride": stride, "kept": len(pts)}
            pd = vr_persistence(pairwise_distances(pts), args.eps_max)
        except EmptyCloud:
            extra["empty_cloud"] = True
            pd = empty_diagram()
    if args.policy != "none":
        pd = finitize(pd, args.policy)
    _emit(out, args.output, pd.to_json(source=str(args.image), selector=label, **extra) + "\n")


def cmd_features(args, out: AtomicOutputs) -> None:
    strategy = _strategy(args)
    manifest = DatasetManifest.read(args.manifest)
    fm = featurize_dataset(manifest, strategy, parallelism=args.parallelism)
    fm.metadata["build"] = BUILD_ID
    fm.metadata["seed"] = args.seed
    buf = io.StringIO()
    fm.write_csv(buf)
    out.text(args.output, buf.getvalue())
    meta_path = args.metadata or f"{args.output}.meta.json"
    out.text(meta_path, json.dumps(fm.metadata, indent=1, sort_keys=True) + "\n")
    if args.diagram_dir:
        tmp_dir = out.directory(args.diagram_dir)
        dset = fm.diagrams
        for i, path in enumerate(manifest.paths):
            for s, src in enumerate(dset.sources):
                pd = dset.diagrams[i][s] or finitize(empty_diagram(), strategy.finitize_policy)
                name = f"{i:05d}_{Path(path).stem}__{src}.json"
                (tmp_dir / name).write_text(pd.to_json(source=path, selector=src) + "\n")


def cmd_evaluate(args, out: AtomicOutputs) -> None:
    if bool(args.features) == bool(args.manifest):
        raise UsageError("give exactly one of --features or --manifest")
    if args.features:
        fm = FeatureMatrix.read_csv(args.features)
        labels = fm.labels
        if args.labels:
            lab_manifest = DatasetManifest.read(args.labels)
            by_path = dict(lab_manifest.entries)
            try:
                labels = np.array([1 if by_path[str(Path(n))] == "abnormal" else 0 for n in fm.names])
            except KeyError as exc:
                raise UsageError(f"no label for image {exc}") from None
        features = fm.values
        source = {"features": str(args.features)}
    else:
        strategy = _strategy(args)
        manifest = DatasetManifest.read(args.manifest)
        dset = compute_diagrams([load_gray(p) for p in manifest.paths], strategy, args.parallelism, manifest.paths)
        features = fold_featurizer(dset, strategy)
        labels = manifest.labels
        source = {"manifest": str(args.manifest), "strategy": strategy.to_dict(),
                  "calibration": "per fold, training split only"}
    report = cross_validate(features, labels, k=args.folds, seed=args.seed, C=args.C, epochs=args.epochs)
    doc = report.to_dict()
    doc.update(source)
    doc["build"] = BUILD_ID
    out.text(args.output, json.dumps(doc, indent=1) + "\n")
    text = report.to_text()
    if args.text:
        out.text(args.text, text)
    sys.stdout.write(text)


# --------------------------------------------------------------------------- parser


def _add_strategy_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("strategy")
    g.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.PER_GEOMETRY.value)
    g.add_argument("--lam", type=int, default=3, help="geometry (number of ones) for per_geometry mode")
    g.add_argument("--dims", default="0,1", help="comma-separated homology dimensions")
    g.add_argument("--method", choices=[m.value for m in Method], default=Method.STATISTICS.value)
    g.add_argument("--k", type=int, default=100, help="landscape levels")
    g.add_argument("--samples", type=int, default=100, help="landscape samples per level")
    g.add_argument("--resolution", type=int, default=30, help="persistence image side")
    g.add_argument("--sigma", type=float, default=1.0, help="persistence image Gaussian spread")
    g.add_argument("--omega", type=int, default=30, help="binning line count")
    g.add_argument("--policy", choices=[p.value for p in FinitizePolicy], default="cap")
    g.add_argument("--n-max", type=int, default=N_MAX, help="landmark-count guard")
    g.add_argument("--parallelism", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="landmark-ph", description=__doc__)
    parser.add_argument("--version", action="version", version=BUILD_ID)
    parser.add_argument("--config", help="YAML key: value file supplying flag defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ulbp-table", help="dump the 56 two-transition selectors")
    p.add_argument("--all", action="store_true", help="classify all 256 codes instead")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_ulbp_table)

    p = sub.add_parser("landmarks", help="landmark coordinates of one selector")
    p.add_argument("image")
    p.add_argument("--selector", required=True, help="e.g. G3R1 or 3,1")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_landmarks)

    p = sub.add_parser("ph", help="persistence diagram of one image")
    p.add_argument("image")
    p.add_argument("--mode", choices=["vr", "cubical"], required=True)
    p.add_argument("--selector")
    p.add_argument("--eps-max", type=float, default=None)
    p.add_argument("--n-max", type=int, default=N_MAX)
    p.add_argument("--policy", choices=["cap", "drop", "none"], default="none")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_ph)

    p = sub.add_parser("features", help="feature matrix for a manifest")
    p.add_argument("manifest")
    _add_strategy_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--metadata")
    p.add_argument("--diagram-dir")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("evaluate", help="k-fold sensitivity/specificity")
    p.add_argument("--features", help="feature matrix CSV from 'features'")
    p.add_argument("--labels", help="manifest overriding the matrix's label column")
    p.add_argument("--manifest", help="run the pipeline with per-fold range calibration")
    _add_strategy_flags(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--text")
    p.set_defaults(func=cmd_evaluate)
    return parser


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            defaults = yaml.safe_load(fh) or {}
        if not isinstance(defaults, dict):
            parser.error(f"{args.config}: expected key: value pairs")
        defaults = {k.replace("-", "_"): v for k, v in defaults.items()}
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _raise_interrupt(signum, frame):
    raise KeyboardInterrupt(f"signal {signum}")


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except SystemExit as exc:  # argparse usage errors and --version
        return exc.code if isinstance(exc.code, int) else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    on_main = threading.current_thread() is threading.main_thread()
    previous = signal.signal(signal.SIGTERM, _raise_interrupt) if on_main else None
    try:
        with AtomicOutputs() as out:
            args.func(args, out)
    except UsageError as exc:
        print(f"landmark-ph {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ImageLoadError, InsufficientClass, UndefinedMetric, ValueError, OSError) as exc:
        print(f"landmark-ph {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        print("landmark-ph: interrupted, outputs discarded", file=sys.stderr)
        return 130
    finally:
        if on_main:
            signal.signal(signal.SIGTERM, previous)
    return 0


if __name__ == "__main__":
    sys.exit(main())
