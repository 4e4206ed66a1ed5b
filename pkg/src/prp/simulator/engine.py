"""Deterministic discrete-event engine hosting PRP nodes.

Events run in (time, insertion order). The radio is an ideal closed disk of
radius r with optional independent loss per receiver; every hop takes tau.
Random streams for placement, beacon phase, mobility, loss and traffic are
separate so that changing one knob does not reshuffle the others.
"""

from __future__ import annotations

import heapq
import json
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from ..grid import Cell, Position, cell_of
from ..packets import Beacon, CellExit, GatewayRoute
from ..protocol import Delivered, Dropped, PRPNode, UnknownDestination
from .metrics import Metrics
from .mobility import RandomWaypoint
from .scenario import Flow, Scenario

# closed-disk slack so that a receiver at exactly r is in range
RANGE_EPS = 1e-9


@dataclass
class _Message:
    time: float
    source: int
    dest: int
    payloads: list
    delivered: set = field(default_factory=set)
    last: float = 0.0


@dataclass
class BroadcastRecord:
    origin: int
    cell: Cell
    accepted: set = field(default_factory=set)
    forwarders: list = field(default_factory=list)
    duplicates: int = 0
    last_accept: float = 0.0


class Simulator:
    def __init__(self, scenario: Scenario, trace: bool = False):
        self.sc = scenario
        self.cfg = scenario.grid
        seed = scenario.seed
        self.rng_place = random.Random(f"{seed}:place")
        self.rng_phase = random.Random(f"{seed}:phase")
        self.rng_loss = random.Random(f"{seed}:loss")
        self.rng_traffic = random.Random(f"{seed}:traffic")
        self.mobility = None
        if scenario.mobility.enabled:
            m = scenario.mobility
            self.mobility = RandomWaypoint(self.cfg.delta, m.speed_min, m.speed_max, m.pause,
                                           random.Random(f"{seed}:mobility"))
        self.metrics = Metrics(seed=seed)
        self.trace: Optional[list[str]] = [] if trace else None
        self.now = 0.0
        self._heap: list = []
        self._order = 0
        self._txq: dict[int, deque] = {}
        self._busy: set[int] = set()
        self._payloads: dict[int, int] = {}  # payload id -> message index
        self._finished: set[int] = set()
        self.messages: list[_Message] = []
        self.broadcasts: dict[tuple[int, int], BroadcastRecord] = {}
        self.nodes = self._place_nodes()
        self.metrics.initial_energy = [n.energy for n in self.nodes]
        # cell index for neighbour lookup; a disk of radius r spans this many cells each way
        self._reach = math.ceil((self.cfg.r + RANGE_EPS) / self.cfg.d)
        self._members: dict[tuple, set] = {}
        for n in self.nodes:
            self._members.setdefault(tuple(n.cell), set()).add(n.id)
        self._started = False

    # -- setup -------------------------------------------------------------------

    def _place_nodes(self) -> list[PRPNode]:
        sc, cfg, rng = self.sc, self.cfg, self.rng_place
        if sc.positions is not None:
            positions = [Position(*p) for p in sc.positions]
        elif sc.placement == "per_cell":
            positions = [self._point_in(c) for c in cfg.cells() for _ in range(sc.per_cell)]
        else:
            positions = [Position(rng.uniform(0, cfg.delta), rng.uniform(0, cfg.delta))
                         for _ in range(sc.nodes)]
        nodes = []
        for i, pos in enumerate(positions):
            energy = rng.randint(sc.energy_min, sc.energy_max)
            nodes.append(PRPNode(i, pos, cell_of(pos, cfg), energy, cfg, beacon_period=sc.beacon_period))
        return nodes

    def _point_in(self, c: Cell) -> Position:
        cfg, rng = self.cfg, self.rng_place
        while True:
            pos = Position(rng.uniform(c.x * cfg.d, min((c.x + 1) * cfg.d, cfg.delta)),
                           rng.uniform(c.y * cfg.d, min((c.y + 1) * cfg.d, cfg.delta)))
            # a draw landing on the far edge belongs to the next cell
            if cell_of(pos, cfg) == c:
                return pos

    def schedule(self, t: float, kind: str, *args) -> None:
        heapq.heappush(self._heap, (t, self._order, kind, args))
        self._order += 1

    def _start(self) -> None:
        if self._started:
            return
        self._started = True
        sc = self.sc
        for n in self.nodes:
            self.schedule(self.rng_phase.uniform(0, sc.beacon_period), "beacon", n.id)
        if sc.location_bootstrap == "oracle":
            for n in self.nodes:
                n.location.update({m.id: m.cell for m in self.nodes})
        else:
            for n in self.nodes:
                self.schedule(2 * sc.beacon_period + self.rng_phase.uniform(0, sc.beacon_period),
                              "announce", n.id)
        if self.mobility is not None:
            self.schedule(sc.mobility.tick, "mobility")
        flows = list(sc.traffic)
        rt = sc.random_traffic
        if rt is not None:
            for i in range(rt.count):
                src, dst = self.rng_traffic.sample(range(len(self.nodes)), 2)
                flows.append(Flow(rt.start + i * rt.spacing, src, dst, rt.m, rt.n, rt.size))
        for f in flows:
            self.schedule(f.time, "flow", f)

    # -- public control ------------------------------------------------------------

    def send(self, t: float, source: int, dest: int, m: int = 1, n: int = 8) -> None:
        self.schedule(t, "flow", Flow(t, source, dest, m, n))

    def announce(self, t: float, node_id: int) -> None:
        """Have ``node_id`` broadcast its current cell at time ``t``."""
        self.schedule(t, "announce", node_id)

    def run(self, until: Optional[float] = None) -> Metrics:
        self._start()
        end = self.sc.duration if until is None else until
        while self._heap and self._heap[0][0] <= end:
            t, _, kind, args = heapq.heappop(self._heap)
            self.now = t
            self.metrics.events += 1
            getattr(self, f"_on_{kind}")(t, *args)
        self.now = max(self.now, end)
        self.metrics.residual_energy = [n.energy for n in self.nodes]
        return self.metrics

    # -- radio ----------------------------------------------------------------------

    def in_range(self, a: PRPNode, b: PRPNode) -> bool:
        return math.hypot(a.pos.px - b.pos.px, a.pos.py - b.pos.py) <= self.cfg.r + RANGE_EPS

    def _can_tx(self, n: PRPNode) -> bool:
        return n.active and n.energy >= self.sc.tx_cost

    def _can_rx(self, n: PRPNode) -> bool:
        return n.active and n.energy >= self.sc.rx_cost

    def receivers(self, sender_id: int, packet) -> list[int]:
        """Nodes that would hear ``packet`` from ``sender_id`` now, before loss."""
        sender = self.nodes[sender_id]
        if isinstance(packet, GatewayRoute):
            target = self.nodes[packet.dest_gateway]
            ok = target.id != sender_id and self._can_rx(target) and self.in_range(sender, target)
            return [target.id] if ok else []
        c, reach = sender.cell, self._reach
        ids = [i for x in range(c.x - reach, c.x + reach + 1) for y in range(c.y - reach, c.y + reach + 1)
               for i in self._members.get((x, y), ())]
        ids.sort()
        return [i for i in ids if i != sender_id and self._can_rx(self.nodes[i])
                and self.in_range(sender, self.nodes[i])]

    def transmit(self, t: float, sender_id: int, packet) -> None:
        if self.sc.queue_mode:
            self._txq.setdefault(sender_id, deque()).append(packet)
            if sender_id not in self._busy:
                self._on_service(t, sender_id)
        else:
            self._emit(t, sender_id, packet)

    def _on_service(self, t: float, node_id: int) -> None:
        q = self._txq.get(node_id)
        if not q:
            self._busy.discard(node_id)
            return
        self._busy.add(node_id)
        self._emit(t, node_id, q.popleft())
        self.schedule(t + self.sc.tau, "service", node_id)

    def _emit(self, t: float, sender_id: int, packet) -> None:
        sender = self.nodes[sender_id]
        unicast = isinstance(packet, GatewayRoute)
        if not self._can_tx(sender):
            if unicast:
                self._drop(t, sender_id, packet.payload_id, "energy")
            return
        sender.energy -= self.sc.tx_cost
        self.metrics.tx_count += 1
        if unicast:
            self.metrics.unicasts_sent += 1
        self._trace(t, sender_id, "tx", packet)
        targets = self.receivers(sender_id, packet)
        if unicast and not targets:
            self._drop(t, sender_id, packet.payload_id, self._unreachable_cause(packet))
            return
        if self.sc.loss > 0:
            heard = []
            for rid in targets:
                if self.rng_loss.random() >= self.sc.loss:
                    heard.append(rid)
                elif unicast:
                    self._drop(t, sender_id, packet.payload_id, "loss")
            targets = heard
        if targets:
            self.schedule(t + self.sc.tau, "arrive", tuple(targets), packet, sender_id)

    def _unreachable_cause(self, p: GatewayRoute) -> str:
        target = self.nodes[p.dest_gateway]
        if p.at_cell is not None and target.cell != p.at_cell:
            return "stale_gateway"
        if p.dest_gateway == p.dest and (p.descriptor is None or p.descriptor.at_end):
            return "stale_location"
        return "unreachable"

    # -- event handlers ---------------------------------------------------------------

    def _on_beacon(self, t: float, node_id: int) -> None:
        node = self.nodes[node_id]
        if self._can_tx(node):
            b = node.beacon(t)
            if b is not None:
                self.metrics.beacons_sent += 1
                self.transmit(t, node_id, b)
        self.schedule(t + self.sc.beacon_period, "beacon", node_id)

    def _on_announce(self, t: float, node_id: int) -> None:
        node = self.nodes[node_id]
        self._originate(t, node, node.announce())

    def _originate(self, t: float, node: PRPNode, p: CellExit) -> None:
        self.metrics.broadcasts_originated += 1
        self.broadcasts[(p.origin, p.seq)] = BroadcastRecord(p.origin, p.new_cell)
        self.transmit(t, node.id, p)

    def _on_mobility(self, t: float) -> None:
        dt = self.sc.mobility.tick
        for node in self.nodes:
            if not node.active:
                continue
            node.pos = self.mobility.step(node.id, node.pos, t - dt, dt)
            cell = cell_of(node.pos, self.cfg)
            if cell != node.cell:
                self._members[tuple(node.cell)].discard(node.id)
                self._members.setdefault(tuple(cell), set()).add(node.id)
                self._trace_event(t, node.id, "cell_change", {"from": list(node.cell), "to": list(cell)})
                self._originate(t, node, node.on_cell_change(cell, t))
        self.schedule(t + dt, "mobility")

    def _on_flow(self, t: float, f: Flow) -> None:
        idx = len(self.messages)
        base = len(self._payloads) + 1
        payloads = list(range(base, base + f.m))
        msg = _Message(t, f.source, f.dest, payloads)
        self.messages.append(msg)
        for pid in payloads:
            self._payloads[pid] = idx
        self.metrics.messages_sent += 1
        self.metrics.payloads_sent += f.m
        src = self.nodes[f.source]
        try:
            batch = src.source_route(f.dest, payloads, f.n, t)
        except UnknownDestination:
            for pid in payloads:
                self._drop(t, f.source, pid, "unknown_destination")
            return
        for d in batch.dropped:
            self._drop(t, f.source, d.payload_id, self._refine(d))
        for pkt in batch.packets:
            self.transmit(t, f.source, pkt)
        for pid in batch.direct:
            if f.dest == f.source:
                self._deliver(t, f.dest, pid)
            else:
                self.transmit(t, f.source, GatewayRoute(f.dest, pid, f.source, f.dest, None))

    def _on_arrive(self, t: float, targets: tuple, packet, sender_id: int) -> None:
        for rid in targets:
            self._receive(t, rid, packet)

    def _receive(self, t: float, node_id: int, packet) -> None:
        node = self.nodes[node_id]
        if not self._can_rx(node):
            if isinstance(packet, GatewayRoute):
                self._drop(t, node_id, packet.payload_id, "energy")
            return
        node.energy -= self.sc.rx_cost
        self.metrics.rx_count += 1
        if isinstance(packet, Beacon):
            node.on_beacon(packet, t)
        elif isinstance(packet, CellExit):
            accepted, fwd = node.on_broadcast(packet, t)
            rec = self.broadcasts.get((packet.origin, packet.seq))
            if accepted:
                self.metrics.broadcasts_accepted += 1
                if rec is not None:
                    rec.accepted.add(node_id)
                    rec.last_accept = t
            else:
                self.metrics.broadcasts_duplicate += 1
                if rec is not None:
                    rec.duplicates += 1
            if fwd is not None:
                self.metrics.broadcasts_forwarded += 1
                if rec is not None:
                    rec.forwarders.append(node_id)
                self.transmit(t, node_id, fwd)
        else:
            self._trace(t, node_id, "rx", packet)
            out = node.on_gateway_route(packet, t)
            if isinstance(out, Delivered):
                self._deliver(t, node_id, out.payload_id)
            elif isinstance(out, Dropped):
                self._drop(t, node_id, out.payload_id, self._refine(out))
            else:
                self.transmit(t, node_id, out)

    # -- bookkeeping -----------------------------------------------------------------

    def _refine(self, d: Dropped) -> str:
        """Tell a truly empty next cell apart from a merely unknown gateway."""
        if d.reason == "no_gateway" and d.cell is not None:
            if not any(n.active and n.cell == d.cell for n in self.nodes):
                return "empty_cell"
        return d.reason

    def _deliver(self, t: float, node_id: int, pid: int) -> None:
        if pid in self._finished:
            return
        self._finished.add(pid)
        msg = self.messages[self._payloads[pid]]
        m = self.metrics
        m.payloads_delivered += 1
        m.delays.append(t - msg.time)
        if not msg.delivered:
            m.messages_delivered += 1
        msg.delivered.add(pid)
        msg.last = t
        if len(msg.delivered) == len(msg.payloads):
            m.messages_completed += 1
            m.completion_times.append(t - msg.time)
        self._trace_event(t, node_id, "deliver", {"payload": pid})

    def _drop(self, t: float, node_id: int, pid: int, cause: str) -> None:
        if pid in self._finished:
            return
        self._finished.add(pid)
        self.metrics.drops[cause] += 1
        self._trace_event(t, node_id, "drop", {"payload": pid, "cause": cause})

    def _trace(self, t: float, node_id: int, event: str, packet) -> None:
        if self.trace is None:
            return
        fields = {"kind": packet.kind, "wire": packet.to_bytes().hex()}
        if isinstance(packet, GatewayRoute):
            fields.update(gw=packet.dest_gateway, payload=packet.payload_id,
                          desc=str(packet.descriptor) if packet.descriptor else None)
        elif isinstance(packet, CellExit):
            fields.update(origin=packet.origin, cell=list(packet.new_cell), seq=packet.seq)
        else:
            fields.update(sender=packet.sender, energy=packet.energy, cell=list(packet.cell))
        self._trace_event(t, node_id, event, fields)

    def _trace_event(self, t: float, node_id: int, event: str, fields: dict) -> None:
        if self.trace is not None:
            self.trace.append(json.dumps({"t": t, "node": node_id, "event": event, **fields},
                                         separators=(",", ":")))

    def trace_text(self) -> str:
        return "".join(line + "\n" for line in self.trace or ())


def run(scenario: Scenario, trace: bool = False) -> tuple[Metrics, list[str]]:
    sim = Simulator(scenario, trace=trace)
    metrics = sim.run()
    return metrics, sim.trace or []
