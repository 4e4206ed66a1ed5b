from __future__ import annotations

import csv
import io
import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

DROP_CAUSES = ("no_gateway", "empty_cell", "stale_gateway", "stale_location", "loss",
               "unreachable", "unknown_destination", "energy")


def _ratio(a: int, b: int) -> Optional[float]:
    return a / b if b else None


@dataclass
class Metrics:
    seed: int = 0
    payloads_sent: int = 0
    payloads_delivered: int = 0
    messages_sent: int = 0
    messages_delivered: int = 0  # at least one payload arrived
    messages_completed: int = 0  # every payload arrived
    delays: list = field(default_factory=list)
    completion_times: list = field(default_factory=list)
    beacons_sent: int = 0
    broadcasts_originated: int = 0
    broadcasts_forwarded: int = 0
    broadcasts_accepted: int = 0
    broadcasts_duplicate: int = 0
    unicasts_sent: int = 0
    tx_count: int = 0
    rx_count: int = 0
    drops: Counter = field(default_factory=Counter)
    initial_energy: list = field(default_factory=list)
    residual_energy: list = field(default_factory=list)
    events: int = 0

    @property
    def delivery_ratio(self) -> Optional[float]:
        return _ratio(self.payloads_delivered, self.payloads_sent)

    @property
    def message_delivery_ratio(self) -> Optional[float]:
        return _ratio(self.messages_delivered, self.messages_sent)

    def row(self) -> dict:
        def mean(xs):
            return statistics.fmean(xs) if xs else None

        out = {
            "seed": self.seed,
            "payloads_sent": self.payloads_sent,
            "payloads_delivered": self.payloads_delivered,
            "delivery_ratio": self.delivery_ratio,
            "messages_sent": self.messages_sent,
            "messages_delivered": self.messages_delivered,
            "message_delivery_ratio": self.message_delivery_ratio,
            "messages_completed": self.messages_completed,
            "mean_delay": mean(self.delays),
            "max_delay": max(self.delays) if self.delays else None,
            "mean_completion_time": mean(self.completion_times),
            "max_completion_time": max(self.completion_times) if self.completion_times else None,
            "beacons_sent": self.beacons_sent,
            "broadcasts_originated": self.broadcasts_originated,
            "broadcasts_forwarded": self.broadcasts_forwarded,
            "broadcasts_accepted": self.broadcasts_accepted,
            "broadcasts_duplicate": self.broadcasts_duplicate,
            "unicasts_sent": self.unicasts_sent,
            "tx_count": self.tx_count,
            "rx_count": self.rx_count,
        }
        for cause in DROP_CAUSES:
            out[f"drop_{cause}"] = self.drops.get(cause, 0)
        out["energy_initial_total"] = sum(self.initial_energy)
        out["energy_residual_total"] = sum(self.residual_energy)
        out["energy_residual_min"] = min(self.residual_energy) if self.residual_energy else None
        out["residual_energy"] = ";".join(str(e) for e in self.residual_energy)
        out["events"] = self.events
        return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def metrics_csv(rows: list[dict]) -> str:
    """CSV text for a list of ``Metrics.row()`` dicts (or any dicts sharing keys)."""
    buf = io.StringIO()
    if not rows:
        return ""
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([_fmt(v) for v in r.values()])
    return buf.getvalue()
