"""Vietoris-Rips persistence for landmark clouds without materialising triangles.

Dimension 0 comes from Kruskal's algorithm on the edge order. Dimension 1 is
computed by reducing the coboundary matrix of the edges (persistent
cohomology), processing edges from last to first. Merge edges are cleared,
unmodified columns are regenerated on demand instead of stored, and the
complex is only built up to the enclosing radius: beyond it some vertex is
adjacent to every other, the 2-skeleton is a cone, and every pair born
there has zero length.
"""

from __future__ import annotations

import numpy as np

from .persistence import INF, PersistenceDiagram, pairwise_distances


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            ra, rb = rb, ra
        self.parent[ra] = rb
        return True


def enclosing_radius(d: np.ndarray) -> float:
    return float(d.max(axis=1).min())


def vr_persistence(d: np.ndarray, eps_max: float | None = None) -> PersistenceDiagram:
    """Dimension 0 and 1 diagram of the Rips filtration of distance matrix ``d``.

    ``eps_max`` defaults to the largest distance and is reported as
    ``scale_max``; it only truncates the computation when it is below the
    enclosing radius.
    """
    d = np.asarray(d, dtype=float)
    n = len(d)
    if n == 0:
        return PersistenceDiagram([], [], scale_max=0.0 if eps_max is None else float(eps_max))
    if eps_max is None:
        eps_max = float(d.max())
    threshold = min(float(eps_max), enclosing_radius(d))

    iu, ju = np.triu_indices(n, k=1)
    ev = d[iu, ju]
    keep = ev <= threshold
    iu, ju, ev = iu[keep], ju[keep], ev[keep]
    order = np.lexsort((ju, iu, ev))
    iu, ju, ev = iu[order], ju[order], ev[order]
    n_edges = len(ev)

    rank = np.full((n, n), n_edges, dtype=np.int64)
    rank[iu, ju] = rank[ju, iu] = np.arange(n_edges)

    dim0: list[tuple[float, float]] = []
    uf = UnionFind(n)
    merge = np.zeros(n_edges, dtype=bool)
    for r in range(n_edges):
        if uf.union(int(iu[r]), int(ju[r])):
            merge[r] = True
            if ev[r] > 0:
                dim0.append((0.0, float(ev[r])))
    roots = {uf.find(v) for v in range(n)}
    dim0.extend((0.0, INF) for _ in roots)

    everyone = np.arange(n)

    def coboundary(r: int) -> np.ndarray:
        # triangles (i, j, k) keyed by (rank of their longest edge) * n + opposite vertex,
        # which is a valid filtration order on triangles
        i, j = int(iu[r]), int(ju[r])
        ks = everyone[(everyone != i) & (everyone != j)]
        rik, rjk = rank[i, ks], rank[j, ks]
        ok = (rik < n_edges) & (rjk < n_edges)
        ks, rik, rjk = ks[ok], rik[ok], rjk[ok]
        top = np.maximum(np.maximum(rik, rjk), r)
        opposite = np.where(top == r, ks, np.where(top == rik, j, i))
        return np.sort(top * n + opposite)

    none = n_edges * n  # larger than any triangle key
    first = _smallest_cofacets(iu, ju, rank, n_edges, none)

    pivots: dict[int, tuple[int, np.ndarray | None]] = {}
    dim1: list[tuple[float, float]] = []
    for r in range(n_edges - 1, -1, -1):
        if merge[r]:
            continue
        low = int(first[r])
        if low != none and low not in pivots:
            # the unreduced column already has a free pivot; regenerate it only if someone collides
            pivots[low] = (r, None)
            death = float(ev[low // n])
            if death > ev[r]:
                dim1.append((float(ev[r]), death))
            continue
        col = coboundary(r) if low != none else np.zeros(0, dtype=np.int64)
        touched = False
        while col.size:
            hit = pivots.get(int(col[0]))
            if hit is None:
                break
            other_edge, other_col = hit
            if other_col is None:
                other_col = coboundary(other_edge)
            col = np.setxor1d(col, other_col, assume_unique=True)
            touched = True
        birth = float(ev[r])
        if col.size:
            low = int(col[0])
            pivots[low] = (r, col if touched else None)
            death = float(ev[low // n])
            if death > birth:
                dim1.append((birth, death))
        else:
            dim1.append((birth, INF))
    return PersistenceDiagram(dim0, dim1, scale_max=float(eps_max))


def _smallest_cofacets(iu, ju, rank, n_edges: int, none: int, chunk_cells: int = 2_000_000) -> np.ndarray:
    """Key of the earliest triangle containing each edge (``none`` if there is none)."""
    n = len(rank)
    out = np.full(n_edges, none, dtype=np.int64)
    ks = np.arange(n)[None, :]
    step = max(1, chunk_cells // max(n, 1))
    for lo in range(0, n_edges, step):
        hi = min(n_edges, lo + step)
        i = iu[lo:hi, None]
        j = ju[lo:hi, None]
        r = np.arange(lo, hi)[:, None]
        rik = rank[iu[lo:hi]]
        rjk = rank[ju[lo:hi]]
        # rank[i, i] == n_edges, so k == i or k == j is excluded here too
        ok = (rik < n_edges) & (rjk < n_edges)
        top = np.maximum(np.maximum(rik, rjk), r)
        opposite = np.where(top == r, ks, np.where(top == rik, j, i))
        keys = np.where(ok, top * n + opposite, none)
        out[lo:hi] = keys.min(axis=1)
    return out


def cloud_persistence(points, eps_max: float | None = None) -> PersistenceDiagram:
    return vr_persistence(pairwise_distances(points), eps_max)
