"""Image -> diagrams -> feature matrix orchestration."""

from __future__ import annotations

import csv
import enum
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .images import load_gray
from .persistence import (
    N_MAX,
    FinitizePolicy,
    PersistenceDiagram,
    compute_persistence,
    cubical_filtration,
    finitize,
    pairwise_distances,
    subsample_cloud,
)
from .rips import vr_persistence
from .ulbp import ALL_SELECTORS, GeometrySelector, as_gray_array, extract_landmarks, geometry_selectors, lbp_image
from .vectorize import FeatureVector, Segment, VectorizerConfig, vectorize

log = logging.getLogger(__name__)

LABELS = ("normal", "abnormal")
CUBICAL = "cubical"


class Mode(str, enum.Enum):
    PER_GEOMETRY = "per_geometry"
    ALL_GEOMETRIES = "all_geometries"
    CUBICAL = "cubical"


@dataclass(frozen=True)
class AssemblyStrategy:
    mode: Mode = Mode.PER_GEOMETRY
    lam: int | None = 3
    dims: tuple[int, ...] = (0, 1)
    vectorizer: VectorizerConfig = field(default_factory=VectorizerConfig)
    finitize_policy: FinitizePolicy = FinitizePolicy.CAP
    n_max: int = N_MAX

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "finitize_policy", FinitizePolicy(self.finitize_policy))
        dims = tuple(sorted(set(self.dims)))
        if not dims or any(d not in (0, 1) for d in dims):
            raise ValueError(f"dims must be a nonempty subset of {{0, 1}}, got {self.dims}")
        object.__setattr__(self, "dims", dims)
        if self.mode is Mode.PER_GEOMETRY and self.lam not in range(1, 8):
            raise ValueError(f"PER_GEOMETRY needs lambda in 1..7, got {self.lam}")

    @property
    def sources(self) -> list[str]:
        if self.mode is Mode.CUBICAL:
            return [CUBICAL]
        if self.mode is Mode.ALL_GEOMETRIES:
            return [s.name for s in ALL_SELECTORS]
        return [s.name for s in geometry_selectors(self.lam)]

    def layout(self) -> tuple[Segment, ...]:
        cfg = self.vectorizer
        return tuple(Segment(src, d, cfg.method.value, cfg.length) for src in self.sources for d in self.dims)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value, "lambda": self.lam, "dims": list(self.dims),
            "finitize_policy": self.finitize_policy.value, "n_max": self.n_max,
            "vectorizer": self.vectorizer.to_dict(),
        }


def stream_key(source: str, dim: int) -> str:
    return f"{source}/dim{dim}"


# --------------------------------------------------------------------------- manifests


@dataclass
class DatasetManifest:
    entries: list[tuple[str, str]]
    source: str = ""

    def __len__(self):
        return len(self.entries)

    @property
    def paths(self) -> list[str]:
        return [p for p, _ in self.entries]

    @property
    def labels(self) -> np.ndarray:
        """1 for abnormal (the positive class), 0 for normal."""
        return np.array([LABELS.index(lab) for _, lab in self.entries], dtype=np.int64)

    @classmethod
    def read(cls, path) -> "DatasetManifest":
        path = Path(path)
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"path", "label"} <= set(reader.fieldnames):
                raise ValueError(f"{path}: manifest needs a header with 'path' and 'label'")
            entries = []
            for row in reader:
                label = row["label"].strip().lower()
                if label not in LABELS:
                    raise ValueError(f"{path}: unknown label {row['label']!r}")
                p = Path(row["path"].strip())
                if not p.is_absolute():
                    p = path.parent / p
                entries.append((str(p), label))
        return cls(entries, source=str(path))

    def write(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["path", "label"])
            w.writerows(self.entries)


# --------------------------------------------------------------------------- diagrams


def image_diagram(image: np.ndarray, source: str, strategy: AssemblyStrategy, codes=None):
    """Finitized diagram of one (image, source) task plus event notes.

    Returns ``(None, events)`` when the selector picks no landmarks.
    """
    events: dict = {}
    if source == CUBICAL:
        pd = compute_persistence(cubical_filtration(image))
        return finitize(pd, strategy.finitize_policy), events
    points = extract_landmarks(image, GeometrySelector.parse(source), codes=codes)
    if len(points) == 0:
        events["empty_cloud"] = True
        return None, events
    points, stride = subsample_cloud(points, strategy.n_max)
    if stride > 1:
        events["subsampled"] = {"stride": stride, "kept": len(points)}
    pd = vr_persistence(pairwise_distances(points))
    return finitize(pd, strategy.finitize_policy), events


def _task(args):
    image, source, strategy = args
    return image_diagram(image, source, strategy)


@dataclass
class DiagramSet:
    """Finitized diagrams per image and source (``None`` for an empty cloud)."""

    sources: list[str]
    diagrams: list[list[PersistenceDiagram | None]]
    events: list[dict] = field(default_factory=list)
    names: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.diagrams)

    def pairs(self, image: int, source: int, dim: int) -> np.ndarray:
        pd = self.diagrams[image][source]
        return np.zeros((0, 2)) if pd is None else pd.pairs(dim)


def compute_diagrams(images: Sequence[np.ndarray], strategy: AssemblyStrategy, parallelism: int = 1,
                     names: Sequence[str] | None = None) -> DiagramSet:
    """One task per (image, source); results land in pre-sized slots by index."""
    images = [as_gray_array(im) for im in images]
    sources = strategy.sources
    names = list(names) if names is not None else [str(i) for i in range(len(images))]
    n_src = len(sources)
    results: list = [None] * (len(images) * n_src)

    if parallelism <= 1:
        for i, im in enumerate(images):
            codes = None if sources == [CUBICAL] else lbp_image(im)
            for s, src in enumerate(sources):
                results[i * n_src + s] = image_diagram(im, src, strategy, codes=codes)
    else:
        tasks = ((im, src, strategy) for im in images for src in sources)
        pool = ProcessPoolExecutor(max_workers=parallelism)
        try:
            for slot, res in enumerate(pool.map(_task, tasks, chunksize=max(1, n_src // parallelism))):
                results[slot] = res
        except BaseException:
            pool.shutdown(wait=False, cancel_futures=True)
            raise
        pool.shutdown()

    diagrams = [[results[i * n_src + s][0] for s in range(n_src)] for i in range(len(images))]
    events = []
    for i in range(len(images)):
        for s, src in enumerate(sources):
            ev = results[i * n_src + s][1]
            if ev:
                events.append({"image": names[i], "source": src, **ev})
    return DiagramSet(sources, diagrams, events, names)


# --------------------------------------------------------------------------- calibration & features


def calibrate(data, strategy: AssemblyStrategy, indices: Sequence[int] | None = None,
              parallelism: int = 1) -> VectorizerConfig:
    """Freeze per-stream ranges ``[0, max finite death]`` over the given (training) images.

    ``data`` is a :class:`DiagramSet` or a :class:`DatasetManifest`. Streams
    with no positive death fall back to ``(0, 1)`` and are listed in
    ``fallback_streams``.
    """
    if isinstance(data, DatasetManifest):
        if indices is not None:
            data = DatasetManifest([data.entries[i] for i in indices], data.source)
            indices = None
        data = compute_diagrams([load_gray(p) for p in data.paths], strategy, parallelism, names=data.paths)
    rows = range(len(data)) if indices is None else list(indices)
    if len(rows) == 0:
        raise ValueError("calibration needs at least one training image")

    ranges, fallbacks = {}, []
    for s, src in enumerate(data.sources):
        for d in strategy.dims:
            top = 0.0
            for i in rows:
                p = data.pairs(i, s, d)
                if len(p):
                    top = max(top, float(p[:, 1].max()))
            key = stream_key(src, d)
            if top > 0 and np.isfinite(top):
                ranges[key] = (0.0, top)
            else:
                ranges[key] = (0.0, 1.0)
                fallbacks.append(key)
    if fallbacks:
        log.warning("no finite deaths for %d stream(s), using range [0, 1]: %s",
                    len(fallbacks), ", ".join(fallbacks))
    return replace(strategy.vectorizer, ranges=ranges, fallback_streams=tuple(fallbacks))


def vectorize_row(dset: DiagramSet, image: int, strategy: AssemblyStrategy, cfg: VectorizerConfig) -> np.ndarray:
    parts = []
    for s, src in enumerate(dset.sources):
        for d in strategy.dims:
            parts.append(vectorize(dset.pairs(image, s, d), cfg.for_stream(stream_key(src, d))))
    return np.concatenate(parts)


def vectorize_diagrams(dset: DiagramSet, strategy: AssemblyStrategy, cfg: VectorizerConfig,
                       indices: Sequence[int] | None = None) -> np.ndarray:
    rows = range(len(dset)) if indices is None else indices
    width = sum(seg.length for seg in strategy.layout())
    out = np.zeros((len(rows), width))
    for r, i in enumerate(rows):
        out[r] = vectorize_row(dset, i, strategy, cfg)
    return out


def featurize_image(image, strategy: AssemblyStrategy, cfg: VectorizerConfig | None = None) -> FeatureVector:
    cfg = strategy.vectorizer if cfg is None else cfg
    dset = compute_diagrams([image], strategy)
    return FeatureVector(vectorize_row(dset, 0, strategy, cfg), strategy.layout())


@dataclass
class FeatureMatrix:
    values: np.ndarray
    layout: tuple[Segment, ...]
    labels: np.ndarray
    names: list[str]
    metadata: dict = field(default_factory=dict)
    diagrams: DiagramSet | None = field(default=None, repr=False)

    @property
    def columns(self) -> list[str]:
        return [c for seg in self.layout for c in seg.column_names()]

    def write_csv(self, path_or_file) -> None:
        if hasattr(path_or_file, "write"):
            self._write_rows(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                self._write_rows(fh)

    def _write_rows(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["image", "label"] + self.columns)
        for name, lab, row in zip(self.names, self.labels, self.values):
            w.writerow([name, LABELS[int(lab)]] + [repr(float(v)) for v in row])

    def write_metadata(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.metadata, fh, indent=1, sort_keys=True)

    @classmethod
    def read_csv(cls, path) -> "FeatureMatrix":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            names, labels, rows = [], [], []
            for rec in reader:
                names.append(rec[0])
                labels.append(LABELS.index(rec[1].strip().lower()))
                rows.append([float(v) for v in rec[2:]])
        values = np.array(rows, dtype=float).reshape(len(rows), len(header) - 2)
        return cls(values, (), np.array(labels, dtype=np.int64), names, {"columns": header[2:]})


def featurize_dataset(manifest: DatasetManifest, strategy: AssemblyStrategy, parallelism: int = 1,
                      cfg: VectorizerConfig | None = None) -> FeatureMatrix:
    """Feature matrix for every manifest row, calibrating on the whole manifest unless ``cfg`` is given."""
    images = [load_gray(p) for p in manifest.paths]  # fail fast on unreadable files
    dset = compute_diagrams(images, strategy, parallelism, names=manifest.paths)
    if cfg is None:
        cfg = calibrate(dset, strategy)
    values = vectorize_diagrams(dset, strategy, cfg)
    meta = {
        "version": __version__,
        "manifest": manifest.source,
        "strategy": strategy.to_dict(),
        "vectorizer": cfg.to_dict(),
        "calibration": "whole manifest" if cfg.ranges else "none",
        "subsampling_events": [e for e in dset.events if "subsampled" in e],
        "empty_cloud_events": [e for e in dset.events if e.get("empty_cloud")],
        "n_images": len(manifest),
        "n_columns": values.shape[1],
    }
    return FeatureMatrix(values, strategy.layout(), manifest.labels, manifest.paths, meta, dset)


def fold_featurizer(dset: DiagramSet, strategy: AssemblyStrategy):
    """Callable ``(train_idx, test_idx) -> (X_train, X_test)`` that calibrates on the training rows only."""

    def featurize(train_idx, test_idx):
        cfg = calibrate(dset, strategy, indices=train_idx)
        return (vectorize_diagrams(dset, strategy, cfg, train_idx),
                vectorize_diagrams(dset, strategy, cfg, test_idx))

    return featurize
