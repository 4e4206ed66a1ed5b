"""Per-node protocol logic: gateway election, cell-exit broadcast, parallel routing.

A :class:`PRPNode` is a single-threaded actor. Each handler mutates the node
and returns whatever it wants transmitted; the caller owns the radio.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence, Union

from .descriptors import initial_descriptor, next_cell
from .grid import Cell, GridConfig, Position, are_neighbor_cells
from .packets import Beacon, CellExit, GatewayRoute
from .paths import MAX_PATHS, feasible_paths

SEQ_MOD = 1 << 32
REPLAY_WINDOW = 64
DEFAULT_BEACON_PERIOD = 1.0
GATEWAY_EXPIRY_PERIODS = 3


class UnknownDestination(LookupError):
    pass


class RoutingFault(RuntimeError):
    """A descriptor walked a packet off the grid."""


class ReplayWindow:
    """Duplicate filter for one origin's 32-bit broadcast sequence numbers.

    Remembers the highest sequence seen plus a bitmap of the 64 below it;
    anything older than the window is treated as already seen.
    """

    __slots__ = ("highest", "mask")

    def __init__(self) -> None:
        self.highest: Optional[int] = None
        self.mask = 0

    def accept(self, seq: int) -> bool:
        seq %= SEQ_MOD
        if self.highest is None:
            self.highest, self.mask = seq, 1
            return True
        ahead = (seq - self.highest) % SEQ_MOD
        if 0 < ahead < SEQ_MOD // 2:
            self.mask = ((self.mask << ahead) | 1) & ((1 << REPLAY_WINDOW) - 1)
            self.highest = seq
            return True
        behind = (self.highest - seq) % SEQ_MOD
        if behind >= REPLAY_WINDOW or self.mask & (1 << behind):
            return False
        self.mask |= 1 << behind
        return True


class GatewayEntry(NamedTuple):
    node: int
    energy: int
    refreshed: float


@dataclass
class Delivered:
    payload_id: int
    source: int
    dest: int


@dataclass
class Dropped:
    payload_id: int
    reason: str
    cell: Optional[Cell] = None


@dataclass
class RouteBatch:
    """What a source emits for one message."""

    packets: list = field(default_factory=list)
    direct: list = field(default_factory=list)
    dropped: list = field(default_factory=list)
    paths_used: int = 0


@dataclass
class PRPNode:
    id: int
    pos: Position
    cell: Cell
    energy: int
    cfg: GridConfig
    beacon_period: float = DEFAULT_BEACON_PERIOD
    seq: int = 0
    location: dict = field(default_factory=dict)
    gateways: dict = field(default_factory=dict)
    seen: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.location[self.id] = self.cell

    @property
    def active(self) -> bool:
        return self.energy > 0

    # -- gateway election ----------------------------------------------------

    def beacon(self, now: float) -> Optional[Beacon]:
        if not self.active:
            return None
        b = Beacon(self.id, self.energy, self.cell)
        # a node never hears itself, so it records its own beacon directly
        self.on_beacon(b, now)
        return b

    def on_beacon(self, b: Beacon, now: float) -> None:
        if b.cell != self.cell and not are_neighbor_cells(b.cell, self.cell):
            return
        # the sender has left any other cell it was recorded as gateway for
        for c in [c for c, e in self.gateways.items() if e.node == b.sender and c != b.cell]:
            del self.gateways[c]
        entry = self._live_entry(b.cell, now)
        if entry is None or b.energy > entry.energy or b.sender == entry.node:
            self.gateways[b.cell] = GatewayEntry(b.sender, b.energy, now)

    def _live_entry(self, cell: Cell, now: float) -> Optional[GatewayEntry]:
        entry = self.gateways.get(cell)
        if entry is not None and now - entry.refreshed > GATEWAY_EXPIRY_PERIODS * self.beacon_period:
            del self.gateways[cell]
            return None
        return entry

    def gateway_of(self, cell: Cell, now: float) -> Optional[int]:
        entry = self._live_entry(cell, now)
        return None if entry is None else entry.node

    def is_gateway(self, now: float) -> bool:
        g = self.gateway_of(self.cell, now)
        return g is None or g == self.id

    # -- location tracking ---------------------------------------------------

    def on_cell_change(self, new_cell: Cell, now: float) -> CellExit:
        """Adopt ``new_cell`` and return the cell-exit packet to broadcast."""
        self.cell = new_cell
        self.gateways = {c: e for c, e in self.gateways.items()
                         if c == new_cell or are_neighbor_cells(c, new_cell)}
        return self.announce()

    def announce(self) -> CellExit:
        """Broadcast the current cell under a fresh sequence number."""
        self.location[self.id] = self.cell
        self.seq = (self.seq + 1) % SEQ_MOD
        self.seen.setdefault(self.id, ReplayWindow()).accept(self.seq)
        return CellExit(self.id, self.cell, self.seq)

    def on_broadcast(self, p: CellExit, now: float) -> tuple[bool, Optional[CellExit]]:
        """Returns (accepted, packet to re-broadcast or None)."""
        if not self.seen.setdefault(p.origin, ReplayWindow()).accept(p.seq):
            return False, None
        self.location[p.origin] = p.new_cell
        if not self.is_gateway(now):
            return True, None
        if (abs(self.cell.x - p.new_cell.x) + abs(self.cell.y - p.new_cell.y)) % 2:
            return True, None
        return True, p

    # -- data routing ----------------------------------------------------------

    def source_route(self, dest_id: int, payloads: Sequence[int], n: int, now: float) -> RouteBatch:
        """Scatter ``payloads`` round-robin over the first ``n`` feasible disjoint paths."""
        dest_cell = self.location.get(dest_id)
        if dest_cell is None:
            raise UnknownDestination(f"node {self.id} has no location for node {dest_id}")
        batch = RouteBatch()
        if dest_cell == self.cell:
            batch.direct = list(payloads)
            return batch
        options = feasible_paths(self.cell, dest_cell, self.cfg)
        n = max(1, min(n, MAX_PATHS, len(options)))
        batch.paths_used = n
        hops = []
        for path_index, _ in options[:n]:
            cell, desc = next_cell(self.cell, initial_descriptor(self.cell, dest_cell, path_index))
            hops.append((cell, desc, self.gateway_of(cell, now)))
        for j, payload in enumerate(payloads):
            cell, desc, gw = hops[j % n]
            if gw is None:
                batch.dropped.append(Dropped(payload, "no_gateway", cell))
            else:
                batch.packets.append(GatewayRoute(gw, payload, self.id, dest_id, desc, cell))
        return batch

    def on_gateway_route(self, p: GatewayRoute, now: float) -> Union[GatewayRoute, Delivered, Dropped]:
        if p.dest == self.id:
            return Delivered(p.payload_id, p.source, p.dest)
        if p.at_cell is not None and p.at_cell != self.cell:
            return Dropped(p.payload_id, "stale_gateway", p.at_cell)
        if p.descriptor is None or p.descriptor.at_end:
            if self.location.get(p.dest) != self.cell:
                return Dropped(p.payload_id, "stale_location", self.cell)
            return replace(p, dest_gateway=p.dest, at_cell=None)
        cell, desc = next_cell(self.cell, p.descriptor)
        if not self.cfg.contains(cell):
            raise RoutingFault(f"{p.descriptor} at {self.cell} leads off the grid to {cell}")
        gw = self.gateway_of(cell, now)
        if gw is None:
            return Dropped(p.payload_id, "no_gateway", cell)
        return replace(p, dest_gateway=gw, descriptor=desc, at_cell=cell)
