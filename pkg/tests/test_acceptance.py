"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records a one-line verdict through the ``report`` fixture; the
lines are repeated in the terminal summary.
"""

import time

from prp import analysis
from prp.grid import Cell
from prp.paths import build_paths, canonical_deltas, disjointness_violations, expand
from prp.simulator import metrics_csv, run
from prp.simulator.sweep import delivery_scenario, measure_delivery
from prp.verify import (
    broadcast_counts, check_descriptors, check_determinism, delay_run, determinism_scenario,
)

LIMIT = 12
SRC = Cell(0, 0)


def offsets():
    for x in range(-LIMIT, LIMIT + 1):
        for y in range(-LIMIT, LIMIT + 1):
            if (x, y) != (0, 0):
                yield Cell(x, y)


def test_01_disjointness_sweep(report):
    t0 = time.perf_counter()
    violations, cases, ends = [], set(), 0
    for dest in offsets():
        specs = build_paths(SRC, dest)
        cases.add((specs[0].case_id.case, specs[0].case_id.flags()))
        expanded = [expand(s, SRC) for s in specs]
        ends += sum(c[-1] != dest for c in expanded)
        violations += [(dest, i, j) for i, j, _ in disjointness_violations(expanded)]
    elapsed = time.perf_counter() - t0
    ok = not violations and not ends and elapsed < 10 and {c for c, _ in cases} == {1, 2, 3, 4}
    report(1, "disjointness sweep", ok,
           f"{len(violations)} violations, {ends} bad endpoints, {len(cases)} case/symmetry variants, {elapsed:.2f}s")
    assert ok


def test_02_lengths_match_published_table(report):
    mismatches = []
    for dest in offsets():
        specs = build_paths(SRC, dest)
        case = specs[0].case_id.case
        dx, dy = canonical_deltas(SRC, dest)
        table = analysis.path_length_table(case, dx, dy, published=True)
        mismatches += [(case, s.path_index, dx, dy, len(s.moves()), t)
                       for s, t in zip(specs, table) if len(s.moves()) != t]
    rows = sorted({(c, i) for c, i, *_ in mismatches})
    detail = f"{len(mismatches)} mismatches" + (f" in (case, path) {rows}" if rows else "")
    report(2, "length agreement with published table", not mismatches, detail)
    assert not mismatches


def test_03_descriptor_oracle_equivalence(report):
    ok, detail = check_descriptors(LIMIT)
    report(3, "descriptor iteration equals expansion", ok, detail)
    assert ok


def test_04_static_delivery_probability(report):
    ref = analysis.delivery_prob_static(675, 15)
    by_k = {k: analysis.delivery_prob_static(3 * k * k, k) for k in range(10, 21)}
    low = {k: round(v, 5) for k, v in by_k.items() if v < 0.95}
    ok = 0.97 <= ref <= 0.99 and not low
    report(4, "static delivery probability", ok, f"Pd(675,15)={ref:.5f}, below 0.95 at density 3: {low or 'none'}")
    assert 0.97 <= ref <= 0.99
    assert not low


def test_05_exit_probability(report):
    p = analysis.exit_probability(100, 1, 1)
    ok = abs(p - 0.01414) <= 0.0005
    report(5, "cell exit probability", ok, f"p={p:.6f}")
    assert ok


def test_06_mobile_delivery_probability(report):
    v = analysis.delivery_prob_mobile(675, 15, 0.1)
    report(6, "mobile delivery probability at p=0.1", v > 0.80, f"Pd(675,15,0.1)={v:.5f}")
    assert v > 0.80


def test_07_broadcast_count(report):
    ok, parts = True, []
    for k in (4, 8, 12):
        counts = broadcast_counts(k)
        copies = [c for _, c, _ in counts]
        full = all(r == k * k - 1 for _, _, r in counts)
        good = full and all(k * k / 2 - k <= c <= k * k / 2 + k for c in copies)
        ok &= good
        parts.append(f"k={k} copies {min(copies)}..{max(copies)} full={full}")
    report(7, "broadcast copy count and coverage", ok, "; ".join(parts))
    assert ok


def test_08_delay_bound(report):
    t0 = time.perf_counter()
    parts, ok = [], True
    for k in (10, 15):
        _, _, done, bound = delay_run(k, fragments=1024, frag_size=1024, tau=0.008)
        good = done is not None and done <= bound
        ok &= good
        parts.append(f"k={k} {done if done is None else round(done, 3)}s <= {bound:.3f}s")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    report(8, "queue-mode transfer delay", ok, "; ".join(parts) + f"; {elapsed:.1f}s")
    assert ok


def test_09_simulation_vs_static_bound(report):
    rows = measure_delivery(delivery_scenario(k=10), [1, 2, 3, 4], seeds=range(1, 31))
    ok = all(r["message_ratio_mean"] >= r["bound_static"] - 0.05 for r in rows)
    detail = "; ".join(f"density {r['value']}: {r['message_ratio_mean']:.3f} vs {r['bound_static']:.3f}"
                       for r in rows)
    report(9, "simulated delivery vs static bound", ok, detail)
    assert ok


def test_10_determinism(report):
    a = run(determinism_scenario(), trace=True)
    b = run(determinism_scenario(), trace=True)
    same_csv = metrics_csv([a[0].row()]) == metrics_csv([b[0].row()])
    same_trace = "\n".join(a[1]).encode() == "\n".join(b[1]).encode()
    ok = same_csv and same_trace and bool(a[1]) and check_determinism()[0]
    report(10, "determinism", ok, f"csv identical={same_csv}, trace identical={same_trace}")
    assert ok
