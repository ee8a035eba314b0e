"""Fixed-length vectorisations of finite persistence diagrams."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np


class NotFinitized(ValueError):
    pass


class Method(str, enum.Enum):
    LANDSCAPE = "landscape"
    IMAGE = "image"
    BINNING = "binning"
    STATISTICS = "statistics"


STAT_NAMES = (
    "mean_birth", "std_birth", "mean_death", "std_death", "mean_life", "std_life",
    "median_birth", "median_death", "median_life", "count",
)


@dataclass(frozen=True)
class VectorizerConfig:
    method: Method = Method.STATISTICS
    k: int = 100
    samples: int = 100
    resolution: int = 30
    sigma: float = 1.0
    omega: int = 30
    range: tuple[float, float] = (0.0, 1.0)
    # per-stream ranges frozen by calibration, keyed "<source>/dim<d>"
    ranges: dict = field(default_factory=dict, compare=False, hash=False)
    # streams that had no finite death in the calibration data and fell back to (0, 1)
    fallback_streams: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        a, b = self.range
        if self.k < 1 or self.samples < 2 or self.resolution < 1 or self.omega < 1:
            raise ValueError("k, resolution, omega must be >= 1 and samples >= 2")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not a < b:
            raise ValueError(f"range must satisfy a < b, got {self.range}")

    def for_stream(self, key: str) -> "VectorizerConfig":
        """Config with ``range`` set to the calibrated range of ``key`` (if any)."""
        if key in self.ranges:
            return replace(self, range=tuple(self.ranges[key]))
        return self

    @property
    def length(self) -> int:
        return {
            Method.LANDSCAPE: self.k * self.samples,
            Method.IMAGE: self.resolution ** 2,
            Method.BINNING: self.omega,
            Method.STATISTICS: len(STAT_NAMES),
        }[self.method]

    def to_dict(self) -> dict:
        return {
            "method": self.method.value, "k": self.k, "samples": self.samples,
            "resolution": self.resolution, "sigma": self.sigma, "omega": self.omega,
            "range": list(self.range), "ranges": {k: list(v) for k, v in self.ranges.items()},
            "fallback_streams": list(self.fallback_streams),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "VectorizerConfig":
        doc = dict(doc)
        doc["range"] = tuple(doc.get("range", (0.0, 1.0)))
        doc["ranges"] = {k: tuple(v) for k, v in doc.get("ranges", {}).items()}
        doc["fallback_streams"] = tuple(doc.get("fallback_streams", ()))
        return cls(**doc)


@dataclass(frozen=True)
class Segment:
    source: str  # selector name or "cubical"
    dim: int
    method: str
    length: int

    def column_names(self) -> list[str]:
        return [f"{self.source}/dim{self.dim}/{self.method}/{i}" for i in range(self.length)]


@dataclass
class FeatureVector:
    values: np.ndarray
    layout: tuple[Segment, ...]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if len(self.values) != sum(s.length for s in self.layout):
            raise ValueError("values length does not match layout")

    @classmethod
    def concat(cls, parts: list["FeatureVector"]) -> "FeatureVector":
        if not parts:
            return cls(np.zeros(0), ())
        return cls(np.concatenate([p.values for p in parts]), tuple(s for p in parts for s in p.layout))

    def column_names(self) -> list[str]:
        return [name for s in self.layout for name in s.column_names()]


def _finite_pairs(pairs) -> np.ndarray:
    a = np.asarray(pairs, dtype=float).reshape(-1, 2)
    if not np.all(np.isfinite(a)):
        raise NotFinitized("diagram has essential (infinite) pairs; finitize it first")
    return a


def landscape(pairs, cfg: VectorizerConfig) -> np.ndarray:
    """Levels 1..k of the persistence landscape sampled on ``samples`` points of ``cfg.range``.

    Level ``k`` at ``t`` is the k-th largest of ``max(0, min(t - b, d - t))``
    over the pairs (multiplicity counts), zero when fewer than k pairs cover t.
    Output is level-major.
    """
    a = _finite_pairs(pairs)
    grid = np.linspace(cfg.range[0], cfg.range[1], cfg.samples)
    out = np.zeros((cfg.k, cfg.samples))
    if len(a):
        tents = np.minimum(grid[None, :] - a[:, :1], a[:, 1:] - grid[None, :])
        tents = np.maximum(tents, 0.0)
        tents = -np.sort(-tents, axis=0)
        m = min(cfg.k, len(a))
        out[:m] = tents[:m]
    return out.reshape(-1)


def persistence_image(pairs, cfg: VectorizerConfig) -> np.ndarray:
    """Weighted Gaussian surface in birth/persistence coordinates, sampled at cell centres.

    The grid covers ``[a, b]`` (birth, columns) by ``[0, b - a]``
    (persistence, rows); flattened row-major. Weight is persistence divided
    by ``b - a``; the Gaussian has unit height.
    """
    a = _finite_pairs(pairs)
    lo, hi = cfg.range
    span = hi - lo
    res = cfg.resolution
    out = np.zeros((res, res))
    if len(a):
        birth = a[:, 0]
        pers = a[:, 1] - a[:, 0]
        weight = pers / span
        cell = span / res
        xs = lo + (np.arange(res) + 0.5) * cell
        ys = (np.arange(res) + 0.5) * cell
        two_var = 2.0 * cfg.sigma ** 2
        gx = np.exp(-((xs[None, :] - birth[:, None]) ** 2) / two_var)  # (n, res)
        gy = np.exp(-((ys[None, :] - pers[:, None]) ** 2) / two_var)
        out = np.einsum("n,ny,nx->yx", weight, gy, gx)
    return out.reshape(-1)


def betti_binning(pairs, cfg: VectorizerConfig) -> np.ndarray:
    """Number of bars with ``birth <= v < death`` at ``omega`` equidistant lines spanning the range."""
    a = _finite_pairs(pairs)
    lines = np.linspace(cfg.range[0], cfg.range[1], cfg.omega)
    if not len(a):
        return np.zeros(cfg.omega)
    hit = (a[:, :1] <= lines[None, :]) & (lines[None, :] < a[:, 1:])
    return hit.sum(axis=0).astype(float)


def barcode_statistics(pairs, cfg: VectorizerConfig | None = None) -> np.ndarray:
    """Means, population stds, medians of birth/death/lifespan, then the bar count."""
    a = _finite_pairs(pairs)
    if not len(a):
        return np.zeros(len(STAT_NAMES))
    b, d = a[:, 0], a[:, 1]
    life = d - b
    return np.array([
        b.mean(), b.std(), d.mean(), d.std(), life.mean(), life.std(),
        np.median(b), np.median(d), np.median(life), float(len(a)),
    ])


_DISPATCH = {
    Method.LANDSCAPE: landscape,
    Method.IMAGE: persistence_image,
    Method.BINNING: betti_binning,
    Method.STATISTICS: barcode_statistics,
}


def vectorize(pairs, cfg: VectorizerConfig) -> np.ndarray:
    return _DISPATCH[cfg.method](pairs, cfg)


def vectorize_segment(pairs, cfg: VectorizerConfig, source: str, dim: int) -> FeatureVector:
    values = vectorize(pairs, cfg)
    return FeatureVector(values, (Segment(source, dim, cfg.method.value, len(values)),))
