"""Brute-force persistence from persistent Betti numbers (test support).

Shares nothing with the column reduction except the :class:`Filtration`
input: for every pair of filtration values (s, t) the persistent Betti
number is obtained from Z/2 matrix ranks, and pair multiplicities follow by
inclusion-exclusion.
"""

from __future__ import annotations

import numpy as np

from .persistence import INF, Filtration, PersistenceDiagram

MAX_CELLS = 300


class OracleTooLarge(ValueError):
    pass


def gf2_rank(rows: list[int]) -> int:
    """Rank over Z/2 of a matrix given as row bitmasks."""
    basis: dict[int, int] = {}  # leading bit -> row
    for row in rows:
        while row:
            lead = row.bit_length() - 1
            if lead not in basis:
                basis[lead] = row
                break
            row ^= basis[lead]
    return len(basis)


def _rank_of(f: Filtration, cols: list[int], row_mask: set[int]) -> int:
    # rank of the boundary submatrix with the given columns, keeping only rows in row_mask
    bits = []
    for j in cols:
        m = 0
        for i in f.boundaries[j]:
            if i in row_mask:
                m ^= 1 << i
        bits.append(m)
    return gf2_rank(bits)


def persistent_betti(f: Filtration, p: int, s: float, t: float) -> int:
    """Rank of H_p(K_s) -> H_p(K_t) for s <= t."""
    dims, values = f.dims, f.values
    in_s = values <= s
    in_t = values <= t
    cells_p_s = [int(i) for i in np.flatnonzero(in_s & (dims == p))]
    cells_p_t = set(int(i) for i in np.flatnonzero(in_t & (dims == p)))
    boundary_p_s = [int(j) for j in np.flatnonzero(in_s & (dims == p))]
    cofaces_t = [int(j) for j in np.flatnonzero(in_t & (dims == p + 1))]

    # dim Z_p(K_s) = |C_p(K_s)| - rank(boundary_p on K_s)
    rows_below = set(int(i) for i in np.flatnonzero(in_s & (dims == p - 1)))
    z = len(cells_p_s) - (_rank_of(f, boundary_p_s, rows_below) if p > 0 else 0)
    # dim(B_p(K_t) ∩ C_p(K_s)) = rank(M) - rank(M restricted to rows of K_t \ K_s)
    rank_all = _rank_of(f, cofaces_t, cells_p_t)
    rank_outside = _rank_of(f, cofaces_t, cells_p_t - set(cells_p_s))
    return z - (rank_all - rank_outside)


def oracle_persistence(f: Filtration) -> PersistenceDiagram:
    if len(f) > MAX_CELLS:
        raise OracleTooLarge(f"{len(f)} cells exceeds the oracle limit of {MAX_CELLS}")
    f.validate()
    levels = sorted(set(float(v) for v in f.values))
    m = len(levels)
    out: dict[int, list[tuple[float, float]]] = {0: [], 1: []}
    for p in (0, 1):
        cache: dict[tuple[int, int], int] = {}

        def beta(i: int, j: int) -> int:
            if i < 0:
                return 0
            key = (i, j)
            if key not in cache:
                cache[key] = persistent_betti(f, p, levels[i], levels[j])
            return cache[key]

        for i in range(m):
            for j in range(i + 1, m):
                mu = beta(i, j - 1) - beta(i, j) - beta(i - 1, j - 1) + beta(i - 1, j)
                out[p].extend([(levels[i], levels[j])] * mu)
            essential = beta(i, m - 1) - beta(i - 1, m - 1)
            out[p].extend([(levels[i], INF)] * essential)
    return PersistenceDiagram(out[0], out[1], scale_max=f.scale_max)
