"""Cell-disjoint path construction between two grid cells.

Every source/destination pair is reduced to one of four canonical cases with
the destination up-right of the source and |dx| >= |dy|. Each case has eight
fixed move programs organised in up to four phases (source exit, diagonal,
horizontal, destination entry). Phase lengths may depend on the canonical
deltas; they are stored as linear forms ``(a, b, c)`` meaning ``a*dx + b*dy + c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

from .grid import Cell, GridConfig, Move, apply_move

MAX_PATHS = 8


class Phase(IntEnum):
    SOURCE_EXIT = 1
    DIAGONAL = 2
    STRAIGHT = 3
    DESTINATION_ENTRY = 4


class SameCellError(ValueError):
    """Source and destination share a cell; there is nothing to route."""


_MOVES = {
    "+x": Move.PX, "-x": Move.NX, "+y": Move.PY, "-y": Move.NY,
    "++": Move.PXPY, "+-": Move.PXNY, "-+": Move.NXPY, "--": Move.NXNY,
}


def _seq(text: str) -> tuple[tuple[Move, tuple[int, int, int]], ...]:
    """Parse ``"-x -+ ++*3"`` into constant-count runs."""
    out = []
    for tok in text.split():
        name, _, count = tok.partition("*")
        out.append((_MOVES[name], (0, 0, int(count or 1))))
    return tuple(out)


# common middle sections, as (move, linear count) runs
_DIAG_DY_1 = ((Move.PXPY, (0, 1, -1)),)   # <+x,+y>^(dy-1)
_HORIZ_1 = ((Move.PX, (1, -1, -1)),)      # <+x>^(dx-dy-1)
_HORIZ_2 = ((Move.PX, (1, 0, -2)),)       # <+x>^(dx-2)


def _case1(exit_: str, entry: str):
    return {Phase.SOURCE_EXIT: _seq(exit_), Phase.DIAGONAL: _DIAG_DY_1,
            Phase.STRAIGHT: _HORIZ_1, Phase.DESTINATION_ENTRY: _seq(entry)}


def _case2(exit_: str, entry: str):
    return {Phase.SOURCE_EXIT: _seq(exit_), Phase.STRAIGHT: _HORIZ_2,
            Phase.DESTINATION_ENTRY: _seq(entry)}


def _case3(exit_: str, entry: str):
    return {Phase.SOURCE_EXIT: _seq(exit_), Phase.DESTINATION_ENTRY: _seq(entry)}


def _case4(exit_: str, entry: str):
    return {Phase.SOURCE_EXIT: _seq(exit_), Phase.DIAGONAL: _DIAG_DY_1,
            Phase.DESTINATION_ENTRY: _seq(entry)}


# TABLES[case][path - 1] -> {phase: runs}; canonical orientation dx >= dy >= 0.
TABLES = {
    1: [
        _case1("++", "+x"),
        _case1("+x", "++"),
        _case1("+y ++", "+-"),
        _case1("+-", "++ +y"),
        _case1("-+ ++*2", "+- -y"),
        _case1("-y +-", "++*2 -+"),
        _case1("-x -+ ++*3", "+-*2 --"),
        _case1("-- +-*2", "++*3 -+ -x"),
    ],
    2: [
        _case2("+x", "+x"),
        _case2("++", "+-"),
        _case2("+-", "++"),
        _case2("+y ++", "+- -y"),
        _case2("-y +-", "++ +y"),
        _case2("-+ ++*2", "+-*2 --"),
        _case2("-- +-*2", "++*2 -+"),
        _case2("-x -+ ++*3", "+-*3 -- -x"),
    ],
    3: [
        _case3("+x", ""),
        _case3("++", "-y"),
        _case3("+-", "+y"),
        _case3("+y", "+-"),
        _case3("-y", "++"),
        _case3("-+ ++", "+x +- --"),
        _case3("-- +-", "+x ++ -+"),
        _case3("-x -+ ++*2", "+x +-*2 -- -x"),
    ],
    4: [
        _case4("++", ""),
        _case4("+x", "+y"),
        _case4("+y", "+x"),
        _case4("+-", "++ -+"),
        _case4("-+ ++", "+-"),
        _case4("-y +-", "++*2 -+ -x"),
        _case4("-x -+ ++*2", "+- -y"),
        _case4("-- +-*2", "++*3 -+*2 --"),
    ],
}


@dataclass(frozen=True)
class CaseId:
    """Canonical case plus the symmetry that maps it onto the actual pair.

    Canonical moves are turned into actual ones by swapping x/y first (when
    ``swap``) and then negating the mirrored axes.
    """

    case: int
    swap: bool = False
    mirror_x: bool = False
    mirror_y: bool = False

    def to_actual(self, m: Move) -> Move:
        if self.swap:
            m = m.swapped()
        return m.mirrored(self.mirror_x, self.mirror_y)

    def flags(self) -> int:
        return (self.swap << 2) | (self.mirror_x << 1) | int(self.mirror_y)

    @classmethod
    def from_flags(cls, case: int, flags: int) -> "CaseId":
        return cls(case, bool(flags & 4), bool(flags & 2), bool(flags & 1))

    def __str__(self) -> str:
        tags = [t for t, on in (("swap", self.swap), ("mirror-x", self.mirror_x),
                                ("mirror-y", self.mirror_y)) if on]
        return f"case {self.case}" + (f" [{', '.join(tags)}]" if tags else "")


def canonical_deltas(source: Cell, dest: Cell) -> tuple[int, int]:
    """|deltas| sorted so the first is the larger one."""
    a, b = abs(dest.x - source.x), abs(dest.y - source.y)
    return (a, b) if a >= b else (b, a)


def classify(source: Cell, dest: Cell) -> Optional[CaseId]:
    """Return the case for the pair, or None when both are the same cell."""
    dx, dy = dest.x - source.x, dest.y - source.y
    if dx == 0 and dy == 0:
        return None
    swap = abs(dy) > abs(dx)
    u, v = canonical_deltas(source, dest)
    if v == 0:
        case = 3 if u == 1 else 2
    elif u == v:
        case = 4
    else:
        case = 1
    return CaseId(case, swap, dx < 0, dy < 0)


def repeat_count(form: tuple[int, int, int], dx: int, dy: int) -> int:
    a, b, c = form
    return max(a * dx + b * dy + c, 0)


@dataclass(frozen=True)
class PathSpec:
    """One of the eight move programs for a concrete source/destination pair.

    ``phases`` holds the canonical runs; ``dx``/``dy`` are the canonical deltas
    that fix the variable repetition counts.
    """

    case_id: CaseId
    path_index: int
    dx: int
    dy: int
    phases: dict

    def phase_moves(self, phase: Phase) -> list[Move]:
        """Canonical moves of one phase, repetitions expanded."""
        out: list[Move] = []
        for move, form in self.phases.get(phase, ()):
            out.extend([move] * repeat_count(form, self.dx, self.dy))
        return out

    def canonical_moves(self) -> list[Move]:
        out: list[Move] = []
        for phase in Phase:
            out.extend(self.phase_moves(phase))
        return out

    def moves(self) -> list[Move]:
        return [self.case_id.to_actual(m) for m in self.canonical_moves()]

    @property
    def name(self) -> str:
        return f"pi{self.case_id.case}{self.path_index}"


def build_paths(source: Cell, dest: Cell) -> list[PathSpec]:
    case_id = classify(source, dest)
    if case_id is None:
        raise SameCellError(f"source and destination are both cell {source}")
    dx, dy = canonical_deltas(source, dest)
    return [PathSpec(case_id, i + 1, dx, dy, phases)
            for i, phases in enumerate(TABLES[case_id.case])]


def expand(spec: PathSpec, source: Cell) -> list[Cell]:
    cells = [source]
    for m in spec.moves():
        cells.append(apply_move(cells[-1], m))
    return cells


def feasible_paths(source: Cell, dest: Cell, cfg: GridConfig) -> list[tuple[int, list[Cell]]]:
    """Expanded paths that stay inside the grid, in path-index order."""
    out = []
    for spec in build_paths(source, dest):
        cells = expand(spec, source)
        if all(cfg.contains(c) for c in cells):
            out.append((spec.path_index, cells))
    return out


# Excess of each path over the minimum length, by case, as the constructions
# actually produce. Case 1/2/3 and the minimum are the longer canonical delta.
LENGTH_OFFSETS = {
    1: (0, 0, 1, 1, 3, 3, 6, 6),
    2: (0, 0, 0, 2, 2, 4, 4, 8),
    3: (0, 1, 1, 1, 1, 4, 4, 8),
    4: (0, 1, 1, 2, 2, 5, 5, 8),
}


def path_length(case: int, path_index: int, dx: int, dy: int = 0) -> int:
    """Closed-form hop count of path ``path_index`` in canonical case ``case``."""
    base = max(abs(dx), abs(dy))
    return base + LENGTH_OFFSETS[case][path_index - 1]


def disjointness_violations(paths: list[list[Cell]]) -> list[tuple[int, int, set]]:
    """Pairs of paths (by position) sharing a cell other than their endpoints."""
    bad = []
    inner = [set(p[1:-1]) for p in paths]
    ends = {paths[0][0], paths[0][-1]} if paths else set()
    for i in range(len(paths)):
        # an interior cell equal to an endpoint is also a violation
        own = inner[i] & ends
        if own:
            bad.append((i, i, own))
        for j in range(i + 1, len(paths)):
            shared = inner[i] & inner[j]
            if shared:
                bad.append((i, j, shared))
    return bad
