"""Uniform local binary patterns and landmark extraction.

Codes are kept as 8-character bit strings. Character ``i`` (0-based) is the
comparison result for the ``i+1``-th neighbour of the 3x3 patch, walking
clockwise from the top-left corner::

    1 2 3
    8 c 4
    7 6 5

A bit is 1 when ``neighbour - centre >= 0`` (ties count as 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

N_BITS = 8

# (row, col) offsets of the eight neighbours in clockwise order from top-left
NEIGHBOUR_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1),
)

LbpCode = str


def _check_code(code: LbpCode) -> None:
    if len(code) != N_BITS or any(c not in "01" for c in code):
        raise ValueError(f"not an 8-bit code: {code!r}")


@dataclass(frozen=True, order=True)
class GeometrySelector:
    """Address of one two-transition code: ``lam`` ones, rotation ``xi``."""

    lam: int
    xi: int

    def __post_init__(self):
        if not 1 <= self.lam <= 7:
            raise ValueError(f"lambda must be in 1..7, got {self.lam}")
        if not 1 <= self.xi <= 8:
            raise ValueError(f"xi must be in 1..8, got {self.xi}")

    @property
    def code(self) -> LbpCode:
        return selector_code(self)

    @property
    def name(self) -> str:
        return f"G{self.lam}R{self.xi}"

    @classmethod
    def parse(cls, text: str) -> "GeometrySelector":
        """Parse ``G3R1`` / ``3,1`` / ``3:1`` forms."""
        t = text.strip().upper()
        try:
            if t.startswith("G") and "R" in t:
                lam, xi = t[1:].split("R", 1)
            else:
                lam, xi = t.replace(":", ",").split(",", 1)
            return cls(int(lam), int(xi))
        except ValueError as exc:
            raise ValueError(f"bad selector {text!r}: {exc}") from None


def lbp_code(patch) -> LbpCode:
    """LBP bit string of a 3x3 patch."""
    p = np.asarray(patch, dtype=np.int64)
    if p.size != 9:
        raise ValueError("patch must have exactly 9 values")
    p = p.reshape(3, 3)
    c = p[1, 1]
    return "".join("1" if p[1 + dr, 1 + dc] - c >= 0 else "0" for dr, dc in NEIGHBOUR_OFFSETS)


def lbp_decimal(code: LbpCode) -> int:
    """Decimal value with weight ``2**(i-1)`` on bit ``i``, i.e. in [0, 255]."""
    _check_code(code)
    return sum(1 << i for i, c in enumerate(code) if c == "1")


def code_from_decimal(value: int) -> LbpCode:
    if not 0 <= value <= 255:
        raise ValueError(f"decimal code out of range: {value}")
    return "".join("1" if value >> i & 1 else "0" for i in range(N_BITS))


def circular_transitions(code: LbpCode) -> int:
    _check_code(code)
    return sum(code[i] != code[(i + 1) % N_BITS] for i in range(N_BITS))


def rotate_left(code: LbpCode, k: int = 1) -> LbpCode:
    k %= N_BITS
    return code[k:] + code[:k]


def selector_code(selector: GeometrySelector) -> LbpCode:
    # R1 puts the lam ones in the last lam positions; R_xi is R1 rotated left xi-1 times
    base = "0" * (N_BITS - selector.lam) + "1" * selector.lam
    return rotate_left(base, selector.xi - 1)


ALL_SELECTORS: tuple[GeometrySelector, ...] = tuple(
    GeometrySelector(lam, xi) for lam in range(1, 8) for xi in range(1, 9)
)
_CODE_TO_SELECTOR = {s.code: s for s in ALL_SELECTORS}


def geometry_of(code: LbpCode) -> GeometrySelector | None:
    """Selector for a two-transition code, ``None`` for anything else."""
    _check_code(code)
    return _CODE_TO_SELECTOR.get(code)


def geometry_selectors(lam: int) -> tuple[GeometrySelector, ...]:
    return tuple(GeometrySelector(lam, xi) for xi in range(1, 9))


def classify(code: LbpCode) -> str:
    """``"G<l>R<x>"`` for two-transition codes, ``"flat0"``/``"flat1"``, or ``"nonuniform"``."""
    sel = geometry_of(code)
    if sel is not None:
        return sel.name
    if code == "0" * N_BITS:
        return "flat0"
    if code == "1" * N_BITS:
        return "flat1"
    return "nonuniform"


def ulbp_table() -> list[tuple[LbpCode, str]]:
    """All 256 codes in decimal order with their classification."""
    return [(c, classify(c)) for c in (code_from_decimal(v) for v in range(256))]


def selector_table() -> list[dict]:
    """The 56 two-transition selectors as rows (lambda, xi, bits, decimal)."""
    return [
        {"lambda": s.lam, "xi": s.xi, "name": s.name, "bits": s.code, "decimal": lbp_decimal(s.code)}
        for s in ALL_SELECTORS
    ]


def as_gray_array(image) -> np.ndarray:
    a = np.asarray(image)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D grayscale image, got shape {a.shape}")
    if a.dtype.kind not in "iuf" or a.size and (a.min() < 0 or a.max() > 255):
        raise ValueError("pixel values must be numeric and within [0, 255]")
    return a


def lbp_image(image) -> np.ndarray:
    """Decimal LBP code of every pixel, zero-padded by one ring.

    Equivalent to scanning 3x3 windows with stride 1 over the padded image.
    """
    a = as_gray_array(image).astype(np.int64)
    h, w = a.shape
    padded = np.pad(a, 1, mode="constant", constant_values=0)
    codes = np.zeros((h, w), dtype=np.int64)
    for i, (dr, dc) in enumerate(NEIGHBOUR_OFFSETS):
        neighbour = padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        codes |= (neighbour >= a).astype(np.int64) << i
    return codes


def extract_landmarks(image, selector: GeometrySelector, codes: np.ndarray | None = None) -> np.ndarray:
    """Pixel centres whose code matches ``selector``, as an ``(n, 2)`` array of (x, y).

    Rows are in row-major scan order. Pass a precomputed ``codes`` map from
    :func:`lbp_image` to avoid recomputing it for every selector.
    """
    if codes is None:
        codes = lbp_image(image)
    rows, cols = np.nonzero(codes == lbp_decimal(selector.code))
    return np.column_stack([cols, rows]).astype(np.int64)


def landmark_histogram(image, selectors: Iterable[GeometrySelector] = ALL_SELECTORS) -> dict[str, int]:
    codes = lbp_image(image)
    return {s.name: int(np.count_nonzero(codes == lbp_decimal(s.code))) for s in selectors}
