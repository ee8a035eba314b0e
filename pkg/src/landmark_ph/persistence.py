"""Filtrations and persistent homology in dimensions 0 and 1 over Z/2."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .ulbp import as_gray_array

INF = math.inf

#: default landmark-count guard, see :func:`subsample_cloud`
N_MAX = 1000


class EmptyCloud(ValueError):
    pass


class InvalidFiltration(ValueError):
    pass


class FinitizePolicy(str, enum.Enum):
    CAP = "cap"
    DROP = "drop"


@dataclass
class Filtration:
    """Cells in filtration order.

    ``boundaries[j]`` holds indices (all ``< j``) of the codimension-1 faces
    of cell ``j``. ``labels`` are vertex tuples for simplices and
    doubled-grid coordinates for cubes; they are informational only.
    """

    dims: np.ndarray
    values: np.ndarray
    boundaries: list[tuple[int, ...]]
    labels: list[tuple] = field(default_factory=list)
    scale_max: float = 0.0
    kind: str = "vr"

    def __len__(self):
        return len(self.boundaries)

    def validate(self) -> None:
        dims, values = self.dims, self.values
        if not (len(dims) == len(values) == len(self.boundaries)):
            raise InvalidFiltration("dims, values and boundaries differ in length")
        if len(values) and np.any(np.diff(values) < 0):
            raise InvalidFiltration("filtration values decrease along the order")
        for j, bd in enumerate(self.boundaries):
            d = dims[j]
            if d == 0 and bd:
                raise InvalidFiltration(f"vertex {j} has a boundary")
            for i in bd:
                if not 0 <= i < j:
                    raise InvalidFiltration(f"cell {j} has face {i} that does not precede it")
                if dims[i] != d - 1:
                    raise InvalidFiltration(f"cell {j} of dim {d} has face {i} of dim {dims[i]}")
                if values[i] > values[j]:
                    raise InvalidFiltration(f"face {i} enters after its coface {j}")


def _sorted_pairs(pairs) -> np.ndarray:
    a = np.asarray(pairs, dtype=float).reshape(-1, 2)
    if len(a) == 0:
        return np.zeros((0, 2))
    # birth, then death; stable so insertion order breaks exact ties
    order = np.lexsort((a[:, 1], a[:, 0]))
    return a[order]


@dataclass
class PersistenceDiagram:
    """Pairs per dimension as ``(k, 2)`` arrays; ``inf`` marks an essential class."""

    dim0: np.ndarray
    dim1: np.ndarray
    scale_max: float = 0.0
    finitize_policy: str | None = None

    def __post_init__(self):
        self.dim0 = _sorted_pairs(self.dim0)
        self.dim1 = _sorted_pairs(self.dim1)

    def pairs(self, dim: int) -> np.ndarray:
        if dim == 0:
            return self.dim0
        if dim == 1:
            return self.dim1
        raise ValueError(f"only dimensions 0 and 1 are tracked, got {dim}")

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.dim0)) and np.all(np.isfinite(self.dim1)))

    def same_pairs(self, other: "PersistenceDiagram", atol: float = 0.0) -> bool:
        """Multiset equality of both dimensions (``scale_max`` ignored)."""
        for d in (0, 1):
            a, b = self.pairs(d), other.pairs(d)
            if a.shape != b.shape:
                return False
            if atol == 0.0:
                if not np.array_equal(a, b):
                    return False
            elif not np.allclose(a, b, rtol=0.0, atol=atol):
                return False
        return True

    def to_dict(self, source: str = "", selector: str = "cubical", **extra) -> dict:
        def enc(pairs):
            return [[float(b), "inf" if math.isinf(d) else float(d)] for b, d in pairs]

        doc = {
            "source": source,
            "selector": selector,
            "scale_max": float(self.scale_max),
            "finitize_policy": self.finitize_policy,
            "dim0": enc(self.dim0),
            "dim1": enc(self.dim1),
        }
        doc.update(extra)
        return doc

    def to_json(self, source: str = "", selector: str = "cubical", **extra) -> str:
        return json.dumps(self.to_dict(source, selector, **extra), indent=1)

    @classmethod
    def from_dict(cls, doc: dict) -> "PersistenceDiagram":
        def dec(rows):
            return [(float(b), INF if d == "inf" else float(d)) for b, d in rows]

        return cls(
            dec(doc["dim0"]),
            dec(doc["dim1"]),
            scale_max=float(doc["scale_max"]),
            finitize_policy=doc.get("finitize_policy"),
        )


def empty_diagram(scale_max: float = 0.0) -> PersistenceDiagram:
    return PersistenceDiagram(np.zeros((0, 2)), np.zeros((0, 2)), scale_max=scale_max)


# --------------------------------------------------------------------------- point clouds


def pairwise_distances(cloud) -> np.ndarray:
    pts = np.asarray(cloud, dtype=float)
    if pts.size == 0:
        raise EmptyCloud("point cloud is empty")
    pts = pts.reshape(len(pts), -1)
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def subsample_cloud(points: np.ndarray, n_max: int = N_MAX) -> tuple[np.ndarray, int]:
    """Keep every ``ceil(n / n_max)``-th point in scan order; returns (points, stride)."""
    n = len(points)
    if n <= n_max:
        return points, 1
    stride = math.ceil(n / n_max)
    return points[::stride], stride


def vr_filtration(d: np.ndarray, eps_max: float | None = None) -> Filtration:
    """Explicit Vietoris-Rips filtration up to triangles.

    Cells are ordered by (value, dimension, vertex tuple). Intended for small
    clouds; :func:`landmark_ph.rips.vr_persistence` handles large ones.
    """
    d = np.asarray(d, dtype=float)
    n = len(d)
    if eps_max is None:
        eps_max = float(d.max()) if n else 0.0
    if eps_max < 0:
        raise ValueError("eps_max must be nonnegative")

    cells: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 0, (i,)) for i in range(n)]
    for i, j in combinations(range(n), 2):
        if d[i, j] <= eps_max:
            cells.append((float(d[i, j]), 1, (i, j)))
    for i, j, k in combinations(range(n), 3):
        v = max(d[i, j], d[i, k], d[j, k])
        if v <= eps_max:
            cells.append((float(v), 2, (i, j, k)))
    cells.sort()

    index = {c[2]: pos for pos, c in enumerate(cells)}
    boundaries = []
    for _, _, verts in cells:
        if len(verts) == 1:
            boundaries.append(())
        else:
            boundaries.append(tuple(index[f] for f in combinations(verts, len(verts) - 1)))
    return Filtration(
        dims=np.array([c[1] for c in cells], dtype=np.int64),
        values=np.array([c[0] for c in cells], dtype=float),
        boundaries=boundaries,
        labels=[c[2] for c in cells],
        scale_max=float(eps_max),
        kind="vr",
    )


# --------------------------------------------------------------------------- images


def _double_axis(a: np.ndarray, axis: int) -> np.ndarray:
    # odd slots hold the pixels, even slots the min of the (one or two) adjacent pixels
    a = np.moveaxis(a, axis, 0)
    s = a.shape[0]
    out = np.empty((2 * s + 1,) + a.shape[1:], dtype=a.dtype)
    out[1::2] = a
    out[0] = a[0]
    out[-1] = a[-1]
    if s > 1:
        out[2:-1:2] = np.minimum(a[:-1], a[1:])
    return np.moveaxis(out, 0, axis)


def cubical_filtration(image) -> Filtration:
    """Sublevel filtration with pixels as top cells and faces valued by the min of their cofaces.

    Axes of length 1 are collapsed, so a 1 x n image is a chain of 1-cubes
    and a 1 x 1 image is a single vertex.
    """
    a = as_gray_array(image).astype(float)
    live = [ax for ax in range(a.ndim) if a.shape[ax] > 1]
    vals = a
    for ax in live:
        vals = _double_axis(vals, ax)
    shape = vals.shape
    coords = np.indices(shape).reshape(len(shape), -1).T
    flat_vals = vals.reshape(-1)
    odd = coords[:, live] % 2 == 1 if live else np.zeros((len(coords), 0), dtype=bool)
    dims = odd.sum(axis=1).astype(np.int64)

    order = np.lexsort((np.arange(len(flat_vals)), dims, flat_vals))
    new_pos = np.empty_like(order)
    new_pos[order] = np.arange(len(order))
    strides = [int(np.prod(shape[ax + 1:])) for ax in range(len(shape))]

    boundaries: list[tuple[int, ...]] = []
    labels = []
    for old in order:
        bd = []
        for col, ax in enumerate(live):
            if odd[old, col]:
                bd.append(int(new_pos[old - strides[ax]]))
                bd.append(int(new_pos[old + strides[ax]]))
        boundaries.append(tuple(sorted(bd)))
        labels.append(tuple(int(c) for c in coords[old]))
    return Filtration(
        dims=dims[order],
        values=flat_vals[order],
        boundaries=boundaries,
        labels=labels,
        scale_max=float(a.max()),
        kind="cubical",
    )


# --------------------------------------------------------------------------- reduction


def compute_persistence(f: Filtration) -> PersistenceDiagram:
    """Standard column reduction over Z/2 with clearing.

    Columns are reduced from the top dimension down so that any column known
    to be a pivot of a higher-dimensional column is zeroed without work.
    Zero-length pairs are dropped; unpaired cells give essential classes.
    """
    f.validate()
    n = len(f)
    dims, values = f.dims, f.values
    pivot_owner: dict[int, int] = {}  # low row -> column that owns it
    reduced: dict[int, set[int]] = {}
    paired = np.zeros(n, dtype=bool)
    pairs: list[tuple[int, int]] = []

    top = int(dims.max()) if n else 0
    for d in range(top, 0, -1):
        for j in np.flatnonzero(dims == d):
            if paired[j]:
                continue  # cleared: column j is a pivot of a higher column, so it reduces to zero
            col = set(f.boundaries[j])
            while col:
                low = max(col)
                owner = pivot_owner.get(low)
                if owner is None:
                    break
                col ^= reduced[owner]
            if col:
                low = max(col)
                pivot_owner[low] = j
                reduced[j] = col
                paired[low] = paired[j] = True
                pairs.append((low, j))

    out: dict[int, list[tuple[float, float]]] = {0: [], 1: []}
    for i, j in pairs:
        d = int(dims[i])
        if d in out and values[j] > values[i]:
            out[d].append((float(values[i]), float(values[j])))
    for i in np.flatnonzero(~paired):
        d = int(dims[i])
        if d in out:
            out[d].append((float(values[i]), INF))
    return PersistenceDiagram(out[0], out[1], scale_max=f.scale_max)


def finitize(pd: PersistenceDiagram, policy: FinitizePolicy | str = FinitizePolicy.CAP) -> PersistenceDiagram:
    """Replace essential classes: CAP sets death to ``scale_max``, DROP removes them."""
    policy = FinitizePolicy(policy)

    def fix(pairs):
        inf = np.isinf(pairs[:, 1])
        if policy is FinitizePolicy.DROP:
            return pairs[~inf]
        out = pairs.copy()
        out[inf, 1] = pd.scale_max
        return out

    return PersistenceDiagram(fix(pd.dim0), fix(pd.dim1), scale_max=pd.scale_max, finitize_policy=policy.value)
