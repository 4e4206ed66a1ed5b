"""Virtual grid geometry: cells, the eight neighbor moves, position mapping."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

SQRT2 = math.sqrt(2.0)

# Relative slack used when comparing r against 2*sqrt(2)*d, so that ranges
# quoted to a few decimals (r = 1414.2 for 1000*sqrt(2)) are accepted.
RANGE_RTOL = 1e-4


class Cell(NamedTuple):
    x: int
    y: int

    def __str__(self) -> str:
        return f"({self.x},{self.y})"


class Position(NamedTuple):
    px: float
    py: float


class Move(Enum):
    """One of the eight cell-to-cell moves, valued by its (dx, dy) step."""

    PX = (1, 0)
    NX = (-1, 0)
    PY = (0, 1)
    NY = (0, -1)
    PXPY = (1, 1)
    PXNY = (1, -1)
    NXPY = (-1, 1)
    NXNY = (-1, -1)

    @property
    def dx(self) -> int:
        return self.value[0]

    @property
    def dy(self) -> int:
        return self.value[1]

    @classmethod
    def from_delta(cls, dx: int, dy: int) -> "Move":
        return cls((dx, dy))

    def inverse(self) -> "Move":
        return Move((-self.dx, -self.dy))

    def swapped(self) -> "Move":
        return Move((self.dy, self.dx))

    def mirrored(self, mirror_x: bool, mirror_y: bool) -> "Move":
        return Move((-self.dx if mirror_x else self.dx, -self.dy if mirror_y else self.dy))

    def __str__(self) -> str:
        parts = []
        if self.dx:
            parts.append("+x" if self.dx > 0 else "-x")
        if self.dy:
            parts.append("+y" if self.dy > 0 else "-y")
        return "<" + ",".join(parts) + ">"


@dataclass(frozen=True)
class GridConfig:
    """A k x k grid of square cells of side ``d`` over a ``delta`` x ``delta`` region.

    ``r`` is the common radio range. Construction fails unless every node can
    reach every node in its eight neighbor cells (r >= 2*sqrt(2)*d) and the
    grid covers the region.
    """

    k: int
    d: float
    delta: float
    r: float

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.d <= 0 or self.delta <= 0 or self.r <= 0:
            raise ValueError("d, delta and r must be positive")
        if self.r < 2 * SQRT2 * self.d * (1 - RANGE_RTOL):
            raise ValueError(
                f"range r={self.r} cannot reach all neighbor cells of side d={self.d}; "
                f"need r >= {2 * SQRT2 * self.d:.4f}"
            )
        if self.k * self.d < self.delta * (1 - 1e-12):
            raise ValueError(f"grid of {self.k} cells of side {self.d} does not cover delta={self.delta}")

    @classmethod
    def from_range(cls, delta: float, r: float) -> "GridConfig":
        """Largest cells allowed by ``r``; the cell side is re-derived as delta/k."""
        k = cells_from_range(delta, r)
        return cls(k=k, d=delta / k, delta=delta, r=r)

    def contains(self, c: Cell) -> bool:
        return 0 <= c.x < self.k and 0 <= c.y < self.k

    def cells(self):
        for y in range(self.k):
            for x in range(self.k):
                yield Cell(x, y)

    def cell_center(self, c: Cell) -> Position:
        return Position((c.x + 0.5) * self.d, (c.y + 0.5) * self.d)


def cell_of(pos: Position, cfg: GridConfig) -> Cell:
    """Map a position inside the region to its cell; the far edge belongs to cell k-1."""
    x = min(int(math.floor(pos[0] / cfg.d)), cfg.k - 1)
    y = min(int(math.floor(pos[1] / cfg.d)), cfg.k - 1)
    return Cell(max(x, 0), max(y, 0))


def apply_move(c: Cell, m: Move, cfg: Optional[GridConfig] = None) -> Optional[Cell]:
    """Step ``c`` by ``m``. With ``cfg`` given, returns None when the step leaves the grid."""
    out = Cell(c.x + m.dx, c.y + m.dy)
    if cfg is not None and not cfg.contains(out):
        return None
    return out


def chebyshev(a: Cell, b: Cell) -> int:
    return max(abs(a.x - b.x), abs(a.y - b.y))


def are_neighbor_cells(a: Cell, b: Cell) -> bool:
    return chebyshev(a, b) == 1


def neighbor_cells(c: Cell, cfg: Optional[GridConfig] = None) -> list[Cell]:
    out = [Cell(c.x + m.dx, c.y + m.dy) for m in Move]
    if cfg is not None:
        out = [n for n in out if cfg.contains(n)]
    return out


def cells_from_range(delta: float, r: float) -> int:
    """Number of cells per side when the cell side is maximal, d = r / (2*sqrt(2))."""
    if delta <= 0 or r <= 0:
        raise ValueError("delta and r must be positive")
    ratio = 2 * SQRT2 * delta / r
    k = math.ceil(ratio * (1 - RANGE_RTOL))
    if k < 1:
        raise ValueError(f"range r={r} gives k < 1 for delta={delta}")
    return k
