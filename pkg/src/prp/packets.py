"""The three packet classes and their little-endian trace encodings.

    Beacon        [type:1][id:4][energy:4][x:2][y:2]            local broadcast
    CellExit      [type:1][id:4][x:2][y:2][seq:4]               global broadcast
    GatewayRoute  [type:1][gw:4][payload:4][src:4][dst:4][desc:4]  unicast
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Optional, Union

from .descriptors import RoutingDescriptor
from .grid import Cell

BEACON, CELL_EXIT, GATEWAY_ROUTE = 1, 2, 3

_BEACON = struct.Struct("<BIIHH")
_CELL_EXIT = struct.Struct("<BIHHI")
_ROUTE = struct.Struct("<BIIII4s")


@dataclass(frozen=True)
class Beacon:
    sender: int
    energy: int
    cell: Cell

    kind = "beacon"

    def to_bytes(self) -> bytes:
        return _BEACON.pack(BEACON, self.sender, self.energy, self.cell.x, self.cell.y)


@dataclass(frozen=True)
class CellExit:
    origin: int
    new_cell: Cell
    seq: int

    kind = "cell_exit"

    def to_bytes(self) -> bytes:
        return _CELL_EXIT.pack(CELL_EXIT, self.origin, self.new_cell.x, self.new_cell.y, self.seq)


@dataclass(frozen=True)
class GatewayRoute:
    """Unicast data hop. ``at_cell`` is the cell the sender expects the
    addressee to occupy; it is simulator-side state and not part of the wire form.
    A missing descriptor (all-zero on the wire) marks a same-cell hand-over."""

    dest_gateway: int
    payload_id: int
    source: int
    dest: int
    descriptor: Optional[RoutingDescriptor]
    at_cell: Optional[Cell] = None

    kind = "gateway_route"

    def to_bytes(self) -> bytes:
        return _ROUTE.pack(GATEWAY_ROUTE, self.dest_gateway, self.payload_id, self.source,
                           self.dest, self.descriptor.to_bytes() if self.descriptor else bytes(4))


Packet = Union[Beacon, CellExit, GatewayRoute]


def decode(raw: bytes, deltas: tuple[int, int] = (0, 0)) -> Packet:
    """Inverse of ``to_bytes``. Descriptor deltas are not on the wire and come from ``deltas``."""
    if not raw:
        raise ValueError("empty packet")
    kind = raw[0]
    if kind == BEACON:
        _, sender, energy, x, y = _BEACON.unpack(raw)
        return Beacon(sender, energy, Cell(x, y))
    if kind == CELL_EXIT:
        _, origin, x, y, seq = _CELL_EXIT.unpack(raw)
        return CellExit(origin, Cell(x, y), seq)
    if kind == GATEWAY_ROUTE:
        _, gw, payload, src, dst, desc = _ROUTE.unpack(raw)
        descriptor = RoutingDescriptor.from_bytes(desc, *deltas) if any(desc) else None
        return GatewayRoute(gw, payload, src, dst, descriptor)
    raise ValueError(f"unknown packet type {kind}")
