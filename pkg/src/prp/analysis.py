"""Closed-form performance bounds and the curve data behind them."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .grid import SQRT2
from .paths import LENGTH_OFFSETS

# Path-length excess over the minimum as published. Case 4 paths 6 and 7 are
# printed as +4, but the constructions need +5 (see LENGTH_OFFSETS).
PUBLISHED_EXCESS = {
    1: (0, 0, 1, 1, 3, 3, 6, 6),
    2: (0, 0, 0, 2, 2, 4, 4, 8),
    3: (0, 1, 1, 1, 1, 4, 4, 8),
    4: (0, 1, 1, 2, 2, 4, 4, 8),
}


class AssumptionViolated(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisParams:
    N: float = 100
    k: float = 10
    delta: float = 500.0
    r: float = 200.0
    d: float = 100.0
    s_speed: float = 1.0
    t: float = 1.0
    p: float = 0.0
    M: float = 2 ** 20
    s_frag: float = 2 ** 10
    tau: float = 0.008

    def __post_init__(self) -> None:
        for name in ("N", "k", "delta", "r", "d", "M", "s_frag", "tau"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.s_speed < 0 or self.t < 0:
            raise ValueError("speed and transmission time must be non-negative")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


def path_length_table(case: int, dx: int, dy: int = 0, published: bool = False) -> list[int]:
    base = max(abs(dx), abs(dy))
    offsets = PUBLISHED_EXCESS[case] if published else LENGTH_OFFSETS[case]
    return [base + o for o in offsets]


def mean_excess(case: int, published: bool = False) -> float:
    offsets = PUBLISHED_EXCESS[case] if published else LENGTH_OFFSETS[case]
    return sum(offsets) / len(offsets)


def nonempty_probability(N: float, k: float) -> float:
    """Chance that a given cell holds at least one of N uniformly placed nodes."""
    if k <= 1:
        return 1.0
    return -math.expm1(N * math.log1p(-1.0 / (k * k)))


def _at_least_one_of_eight(single: float) -> float:
    return 1.0 - (1.0 - single) ** 8


def delivery_prob_static(N: float, k: float) -> float:
    """Lower bound on delivery over eight disjoint paths with no mobility."""
    return _at_least_one_of_eight(nonempty_probability(N, k) ** (k + 3))


def delivery_prob_mobile(N: float, k: float, p: float) -> float:
    """Same bound when each forwarding gateway leaves its cell with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    single = nonempty_probability(N, k) ** (k + 3) * (1.0 - p) ** (k + 3)
    return _at_least_one_of_eight(single)


def exit_probability(d: float, s_speed: float, t: float) -> float:
    """Probability a node crosses out of its cell while sending one packet."""
    d_avg = d * SQRT2 / 2
    if s_speed * t > d_avg:
        raise AssumptionViolated(
            f"node covers {s_speed * t:g} m per packet, more than the mean exit distance {d_avg:.2f} m"
        )
    return s_speed * t / d_avg


def message_delay_bound(M: float, s_frag: float, tau: float, k: float) -> float:
    """Upper bound on the time to push M bytes as s_frag-byte packets over 8 paths."""
    return (M / s_frag) * tau * (k + 8) / 8


def single_path_delay(M: float, s_frag: float, tau: float, k: float) -> float:
    """Store-and-forward time of the same message over one shortest path (<= k hops)."""
    return (M / s_frag) * tau * k


def k_from_range(delta: float, r: float) -> float:
    """Non-integral grid side with maximal cells, as used by the continuous curves."""
    return 2 * SQRT2 * delta / r


def broadcast_cost(delta: float, r: float) -> tuple[float, float]:
    """(packets generated, delay in hops) of one parity-pruned broadcast."""
    k = k_from_range(delta, r)
    # the originator always sends one copy, even in a single-cell grid
    return max(k * k / 2, 1.0), k


# -- curve emission -----------------------------------------------------------

FIG9_DENSITIES = [0.25 * i for i in range(1, 25)]
FIG9_KS = (10, 15, 20)
FIG12_PS = (0.0, 0.05, 0.1)
RANGES = list(range(100, 701, 10))


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[float]], fixed: dict) -> Path:
    try:
        with open(path, "w", newline="") as fh:
            fh.write("# " + " ".join(f"{k}={v}" for k, v in fixed.items()) + "\n")
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([f"{v:.10g}" for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def figure_rows(fig: str, N: float = 100, delta: float = 500.0, k: float = 10,
                M: float = 2 ** 20, s_frag: float = 2 ** 10, tau: float = 0.008):
    """Header, rows and fixed parameters of one figure's data."""
    if fig == "fig9":
        header = ["density"] + [f"Pd_k{k_}" for k_ in FIG9_KS]
        rows = [[dens] + [delivery_prob_static(dens * k_ * k_, k_) for k_ in FIG9_KS]
                for dens in FIG9_DENSITIES]
        return header, rows, {"eq": "static"}
    if fig == "fig10":
        rows = [[r, k_from_range(delta, r), delivery_prob_static(N, k_from_range(delta, r))]
                for r in RANGES]
        return ["r", "k", "Pd"], rows, {"N": N, "delta": delta}
    if fig == "fig11":
        rows = []
        for r in RANGES:
            kk = k_from_range(delta, r)
            rows.append([r, kk, message_delay_bound(M, s_frag, tau, kk), single_path_delay(M, s_frag, tau, kk)])
        return ["r", "k", "T_parallel", "T_single"], rows, {"M": M, "s": s_frag, "tau": tau, "delta": delta}
    if fig == "fig12":
        header = ["density"] + [f"Pd_p{p:g}" for p in FIG12_PS]
        rows = [[dens] + [delivery_prob_mobile(dens * k * k, k, p) for p in FIG12_PS]
                for dens in FIG9_DENSITIES]
        return header, rows, {"k": k}
    if fig == "fig13":
        rows = [[r, k_from_range(delta, r), broadcast_cost(delta, r)[0]] for r in RANGES]
        return ["r", "k", "packets"], rows, {"delta": delta}
    raise KeyError(f"unknown figure {fig!r}; expected one of fig9..fig13")


FIGURES = ("fig9", "fig10", "fig11", "fig12", "fig13")


def emit_figures(outdir: str | Path, figures: Sequence[str] = FIGURES, **params) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for fig in figures:
        header, rows, fixed = figure_rows(fig, **params)
        written.append(_write_csv(outdir / f"{fig}.csv", header, rows, fixed))
    return written
