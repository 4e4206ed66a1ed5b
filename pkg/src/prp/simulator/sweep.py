"""Repeated-seed parameter sweeps with analytical bounds alongside.

Each point of a sweep runs the same scenario under several seeds and reports
mean and standard error of the delivery ratios together with the static and
mobile delivery-probability bounds evaluated at the point's parameters.
"""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace
from typing import Optional, Sequence

from ..analysis import AssumptionViolated, delivery_prob_mobile, delivery_prob_static, exit_probability
from ..grid import GridConfig
from .engine import run
from .scenario import Mobility, RandomTraffic, Scenario, ScenarioError

SWEEP_COLUMNS = (
    "axis", "value", "nodes", "k", "density", "seeds",
    "message_ratio_mean", "message_ratio_stderr", "payload_ratio_mean", "payload_ratio_stderr",
    "mean_delay", "p_exit", "bound_static", "bound_mobile",
)


def with_axis(base: Scenario, axis: str, value: float) -> Scenario:
    """Copy of ``base`` with one numeric field changed.

    ``axis`` is a top-level field (``nodes``, ``loss``, ...), a dotted field of
    ``grid`` or ``mobility`` (``mobility.speed_max``), or ``density``, which
    sets the node count to round(density * k^2) under uniform placement.
    """
    if axis == "density":
        n = max(1, round(value * base.grid.k ** 2))
        return replace(base, nodes=n, placement="uniform", positions=None)
    head, _, tail = axis.partition(".")
    if tail:
        if head not in ("grid", "mobility"):
            raise ScenarioError(f"{axis}: not a numeric scenario field")
        inner = getattr(base, head)
        current = getattr(inner, tail, None)
        if isinstance(current, bool) or not isinstance(current, (int, float)):
            raise ScenarioError(f"{axis}: not a numeric scenario field")
        value = type(current)(value) if isinstance(current, int) else float(value)
        try:
            if head == "grid":
                changes = {tail: value}
                if tail == "k":
                    changes["delta"] = value * inner.d
                inner = replace(inner, **changes)
            else:
                inner = replace(inner, **{tail: value})
        except ValueError as exc:
            raise ScenarioError(f"{axis}: {exc}") from None
        return replace(base, **{head: inner})
    names = {f.name for f in fields(Scenario)}
    current = getattr(base, axis, None) if axis in names else None
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise ScenarioError(f"{axis}: not a numeric scenario field")
    if isinstance(current, int):
        if value != int(value):
            raise ScenarioError(f"{axis}: expected an integer, got {value!r}")
        value = int(value)
    else:
        value = float(value)
    return replace(base, **{axis: value})


def exit_prob_for(sc: Scenario) -> Optional[float]:
    """Per-beacon-period cell-exit probability implied by the mobility model.

    Uses the mean waypoint speed. None when the model's assumption
    (distance moved per period below half a cell diagonal) does not hold.
    """
    mob: Mobility = sc.mobility
    if not mob.enabled:
        return 0.0
    speed = (mob.speed_min + mob.speed_max) / 2
    try:
        return exit_probability(sc.grid.d, speed, sc.beacon_period)
    except AssumptionViolated:
        return None


def _run_row(sc: Scenario) -> dict:
    metrics, _ = run(sc)
    return metrics.row()


def _mean_se(xs: Sequence[float]) -> tuple[Optional[float], Optional[float]]:
    if not xs:
        return None, None
    if len(xs) == 1:
        return xs[0], 0.0
    return statistics.fmean(xs), statistics.stdev(xs) / math.sqrt(len(xs))


def run_point(sc: Scenario, seeds: Sequence[int], pool: Optional[ProcessPoolExecutor] = None) -> list[dict]:
    jobs = [replace(sc, seed=s) for s in seeds]
    return list(pool.map(_run_row, jobs)) if pool else [_run_row(j) for j in jobs]


def summarize(axis: str, value: float, sc: Scenario, rows: list[dict]) -> dict:
    k = sc.grid.k
    msg = [r["message_delivery_ratio"] for r in rows if r["message_delivery_ratio"] is not None]
    pay = [r["delivery_ratio"] for r in rows if r["delivery_ratio"] is not None]
    delays = [r["mean_delay"] for r in rows if r["mean_delay"] is not None]
    p = exit_prob_for(sc)
    static = delivery_prob_static(sc.nodes, k)
    out = dict.fromkeys(SWEEP_COLUMNS)
    out.update(axis=axis, value=value, nodes=sc.nodes, k=k, density=sc.nodes / k ** 2, seeds=len(rows),
               mean_delay=statistics.fmean(delays) if delays else None, p_exit=p,
               bound_static=static,
               bound_mobile=None if p is None else delivery_prob_mobile(sc.nodes, k, p))
    out["message_ratio_mean"], out["message_ratio_stderr"] = _mean_se(msg)
    out["payload_ratio_mean"], out["payload_ratio_stderr"] = _mean_se(pay)
    return out


def sweep(base: Scenario, axis: str, values: Sequence[float], seeds: Sequence[int],
          workers: int = 1) -> list[dict]:
    """One summary row per value, in the order given. Results do not depend on ``workers``."""
    points = [with_axis(base, axis, v) for v in values]  # validate every point before running any
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return [summarize(axis, v, sc, run_point(sc, seeds, pool)) for v, sc in zip(values, points)]
    return [summarize(axis, v, sc, run_point(sc, seeds)) for v, sc in zip(values, points)]


def measure_delivery(base: Scenario, densities: Sequence[float], seeds: Sequence[int],
                     workers: int = 1) -> list[dict]:
    """Delivery ratio against node density, with the static and mobile bounds per point."""
    return sweep(base, "density", densities, seeds, workers)


def delivery_scenario(k: int = 10, density: float = 3.0, messages: int = 20, seed: int = 1,
                      d: float = 100.0, mobility: Optional[Mobility] = None) -> Scenario:
    """Standard measurement setup: uniform placement, r = 2*sqrt(2)*d, random pairs.

    Traffic starts after every node has beaconed once, so gateway tables are
    settled; each message is 8 payloads scattered over up to 8 paths.
    """
    grid = GridConfig(k=k, d=d, delta=k * d, r=2 * math.sqrt(2) * d)
    rt = RandomTraffic(count=messages, start=1.5, spacing=0.05, m=8, n=8)
    end = rt.start + messages * rt.spacing + 1.0
    return Scenario(grid=grid, nodes=max(2, round(density * k * k)), random_traffic=rt, seed=seed,
                    duration=end, mobility=mobility or Mobility())
