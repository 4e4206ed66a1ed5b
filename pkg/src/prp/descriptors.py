"""Stateless per-hop forwarding with <case, path, phase, step> descriptors.

A packet carries a descriptor pointing at the next move of its path. A
gateway looks the descriptor up, applies the move to its own cell and writes
the successor descriptor into the forwarded packet. The lookup is derived
from the canonical path tables, so every case and path is covered.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

from .grid import Cell, Move, apply_move
from .paths import TABLES, CaseId, Phase, SameCellError, canonical_deltas, classify, repeat_count

END_OF_PATH = 0


class InvalidDescriptor(ValueError):
    pass


@dataclass(frozen=True)
class RoutingDescriptor:
    case_id: CaseId
    path: int
    phase: int
    step: int
    dx: int
    dy: int

    @property
    def at_end(self) -> bool:
        return self.phase == END_OF_PATH

    def to_bytes(self) -> bytes:
        """Four bytes: case | flags << 3, path, phase, step."""
        if not 0 <= self.step <= 255:
            raise InvalidDescriptor(f"step {self.step} does not fit in one byte")
        head = self.case_id.case | (self.case_id.flags() << 3)
        return struct.pack("<4B", head, self.path, self.phase, self.step)

    @classmethod
    def from_bytes(cls, raw: bytes, dx: int, dy: int) -> "RoutingDescriptor":
        """Decode the wire form; the deltas travel implicitly with the packet's endpoints."""
        head, path, phase, step = struct.unpack("<4B", raw)
        return cls(CaseId.from_flags(head & 0x7, head >> 3), path, phase, step, dx, dy)

    def __str__(self) -> str:
        if self.at_end:
            return f"<{self.case_id.case}, {self.path}, end>"
        return f"<{self.case_id.case}, {self.path}, {self.phase}, {self.step}>"


class RoutingTableEntry(NamedTuple):
    next_move: Move  # canonical orientation
    next_phase: int  # END_OF_PATH after the final move
    next_step: Optional[int]


def _phase_length(case: int, path: int, phase: int, dx: int, dy: int) -> int:
    runs = TABLES[case][path - 1].get(Phase(phase), ())
    return sum(repeat_count(form, dx, dy) for _, form in runs)


def _first_phase_from(case: int, path: int, phase: int, dx: int, dy: int) -> int:
    """First phase >= ``phase`` holding at least one move, else END_OF_PATH."""
    for p in range(phase, Phase.DESTINATION_ENTRY + 1):
        if _phase_length(case, path, p, dx, dy) > 0:
            return p
    return END_OF_PATH


def initial_descriptor(source: Cell, dest: Cell, path_index: int) -> RoutingDescriptor:
    case_id = classify(source, dest)
    if case_id is None:
        raise SameCellError(f"source and destination are both cell {source}")
    if not 1 <= path_index <= 8:
        raise InvalidDescriptor(f"path index {path_index} out of range")
    dx, dy = canonical_deltas(source, dest)
    phase = _first_phase_from(case_id.case, path_index, Phase.SOURCE_EXIT, dx, dy)
    return RoutingDescriptor(case_id, path_index, phase, 1, dx, dy)


def lookup(desc: RoutingDescriptor) -> RoutingTableEntry:
    case, path = desc.case_id.case, desc.path
    if case not in TABLES or not 1 <= path <= 8 or desc.at_end:
        raise InvalidDescriptor(f"no table entry for {desc}")
    length = _phase_length(case, path, desc.phase, desc.dx, desc.dy)
    if not 1 <= desc.step <= length:
        raise InvalidDescriptor(f"step {desc.step} outside phase {desc.phase} of length {length}")
    remaining = desc.step
    move = None
    for m, form in TABLES[case][path - 1][Phase(desc.phase)]:
        remaining -= repeat_count(form, desc.dx, desc.dy)
        if remaining <= 0:
            move = m
            break
    if desc.step < length:
        return RoutingTableEntry(move, desc.phase, desc.step + 1)
    if desc.phase == Phase.DESTINATION_ENTRY:
        return RoutingTableEntry(move, END_OF_PATH, None)
    nxt = _first_phase_from(case, path, desc.phase + 1, desc.dx, desc.dy)
    return RoutingTableEntry(move, nxt, None if nxt == END_OF_PATH else 1)


def next_cell(current: Cell, desc: RoutingDescriptor) -> tuple[Cell, RoutingDescriptor]:
    """Apply the descriptor's move to ``current``; the returned descriptor is
    ``at_end`` once the destination cell has been reached."""
    entry = lookup(desc)
    cell = apply_move(current, desc.case_id.to_actual(entry.next_move))
    return cell, replace(desc, phase=entry.next_phase, step=entry.next_step or 0)


def routing_table(case_id: CaseId, path: int, dx: int, dy: int) -> list[tuple[int, int, Move, int, Optional[int]]]:
    """Materialise every (phase, step) row of one path for the given deltas."""
    rows = []
    desc = RoutingDescriptor(case_id, path, _first_phase_from(case_id.case, path, 1, dx, dy), 1, dx, dy)
    while not desc.at_end:
        entry = lookup(desc)
        rows.append((desc.phase, desc.step, entry.next_move, entry.next_phase, entry.next_step))
        desc = replace(desc, phase=entry.next_phase, step=entry.next_step or 0)
    return rows


def route_cells(source: Cell, dest: Cell, path_index: int) -> list[Cell]:
    """Cells visited by iterating next_cell from the source."""
    desc = initial_descriptor(source, dest, path_index)
    cells = [source]
    while not desc.at_end:
        cell, desc = next_cell(cells[-1], desc)
        cells.append(cell)
    return cells
