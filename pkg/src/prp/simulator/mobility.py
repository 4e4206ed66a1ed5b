from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..grid import Position


@dataclass
class _Leg:
    target: Position
    speed: float
    pause_until: float = -1.0


class RandomWaypoint:
    """Random-waypoint motion inside a ``delta`` x ``delta`` square.

    Each node heads for a uniform random waypoint at a speed drawn uniformly
    from [speed_min, speed_max], pauses there for ``pause`` seconds, then
    draws a new waypoint and speed.
    """

    def __init__(self, delta: float, speed_min: float, speed_max: float, pause: float, rng: random.Random):
        self.delta = delta
        self.speed_min = speed_min
        self.speed_max = speed_max
        self.pause = pause
        self.rng = rng
        self.legs: dict[int, _Leg] = {}

    def _new_leg(self) -> _Leg:
        target = Position(self.rng.uniform(0, self.delta), self.rng.uniform(0, self.delta))
        return _Leg(target, self.rng.uniform(self.speed_min, self.speed_max))

    def step(self, node_id: int, pos: Position, now: float, dt: float) -> Position:
        """Advance one node from ``now`` to ``now + dt``."""
        leg = self.legs.get(node_id)
        if leg is None:
            leg = self.legs[node_id] = self._new_leg()
        t, end = now, now + dt
        px, py = pos
        while t < end:
            if leg.pause_until >= 0:
                if leg.pause_until >= end:
                    break
                t = leg.pause_until
                leg = self.legs[node_id] = self._new_leg()
            if leg.speed <= 0:
                break
            gap = math.hypot(leg.target.px - px, leg.target.py - py)
            reach = leg.speed * (end - t)
            if reach < gap:
                frac = reach / gap
                px += (leg.target.px - px) * frac
                py += (leg.target.py - py) * frac
                break
            px, py = leg.target
            t += gap / leg.speed
            leg.pause_until = t + self.pause
        return Position(min(max(px, 0.0), self.delta), min(max(py, 0.0), self.delta))
