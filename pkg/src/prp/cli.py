"""Command-line entry point: ``prp {paths,analyze,simulate,sweep,verify}``.

Exit codes: 0 success, 1 usage or input error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import analysis
from .grid import SQRT2, Cell, GridConfig
from .paths import SameCellError, build_paths, classify, disjointness_violations, expand, feasible_paths
from .simulator.engine import Simulator
from .simulator.metrics import metrics_csv
from .simulator.scenario import ScenarioError, load_scenario
from .simulator.sweep import SWEEP_COLUMNS, sweep

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _cell(text: str) -> Cell:
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a cell as x,y, got {text!r}") from None
    return Cell(x, y)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from None


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows([("" if v is None else repr(v) if isinstance(v, float) else v) for v in row] for row in rows)
    return buf.getvalue()


# -- paths ---------------------------------------------------------------------------


def cmd_paths(args) -> int:
    src, dst = args.source, args.dest
    case_id = classify(src, dst)
    if case_id is None:
        raise UsageError(f"source and destination are the same cell {src}")
    cfg = None
    if args.k is not None:
        if args.k < 1:
            raise UsageError("--k must be >= 1")
        cfg = GridConfig(k=args.k, d=1.0, delta=float(args.k), r=2 * SQRT2)
        for c in (src, dst):
            if not cfg.contains(c):
                raise UsageError(f"cell {c} lies outside the {args.k}x{args.k} grid")
    specs = build_paths(src, dst)
    spec0 = specs[0]
    published = analysis.path_length_table(case_id.case, spec0.dx, spec0.dy, published=True)
    feasible = {i for i, _ in feasible_paths(src, dst, cfg)} if cfg else {s.path_index for s in specs}
    print(f"{src} -> {dst}: {case_id}, deltas ({spec0.dx},{spec0.dy})")
    for spec, pub in zip(specs, published):
        cells = expand(spec, src)
        mark = "" if spec.path_index in feasible else "  [leaves grid]"
        moves = " ".join(str(m) for m in spec.moves())
        print(f"  {spec.name}  length {len(cells) - 1} (table {pub}){mark}")
        print(f"    moves: {moves}")
        print(f"    cells: {' '.join(str(c) for c in cells)}")
    chosen = [expand(s, src) for s in specs if s.path_index in feasible]
    bad = disjointness_violations(chosen)
    print(f"feasible: {len(feasible)} of {len(specs)}")
    print(f"disjoint: {'true' if not bad else 'false'}")
    for i, j, shared in bad:
        print(f"  paths {i + 1} and {j + 1} share {sorted(shared)}")
    return EXIT_OK


# -- analyze ----------------------------------------------------------------------------

FORMULAS = {
    "exit-prob": (("p",), lambda a: [analysis.exit_probability(a.d, a.s, a.t)]),
    "delivery-static": (("Pd",), lambda a: [analysis.delivery_prob_static(a.N, a.k)]),
    "delivery-mobile": (("Pd",), lambda a: [analysis.delivery_prob_mobile(a.N, a.k, a.p)]),
    "delay-bound": (("T_parallel", "T_single"),
                    lambda a: [analysis.message_delay_bound(a.M, a.frag, a.tau, a.k),
                               analysis.single_path_delay(a.M, a.frag, a.tau, a.k)]),
    "broadcast-cost": (("packets", "k"), lambda a: list(analysis.broadcast_cost(a.delta, a.r))),
}


def cmd_analyze(args) -> int:
    target = args.target
    if target in FORMULAS:
        header, fn = FORMULAS[target]
        try:
            values = fn(args)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        _write(_csv_text(header, [values]), args.out)
        return EXIT_OK
    params = dict(N=args.N, delta=args.delta, k=args.k, M=args.M, s_frag=args.frag, tau=args.tau)
    if target == "all":
        outdir = args.out or "."
        try:
            for path in analysis.emit_figures(outdir, **params):
                print(path)
        except OSError as exc:
            raise UsageError(str(exc)) from None
        return EXIT_OK
    try:
        header, rows, fixed = analysis.figure_rows(target, **params)
    except KeyError:
        known = ", ".join(list(analysis.FIGURES) + ["all"] + list(FORMULAS))
        raise UsageError(f"unknown figure or formula {target!r}; choose from {known}") from None
    comment = "# " + " ".join(f"{k}={v}" for k, v in fixed.items()) + "\n"
    _write(comment + _csv_text(header, rows), args.out)
    return EXIT_OK


# -- simulate / sweep ------------------------------------------------------------------------


def _scenario(args):
    try:
        sc = load_scenario(args.scenario)
        if args.seed is not None:
            sc = sc.with_changes(seed=args.seed)
    except ScenarioError as exc:
        raise UsageError(str(exc)) from None
    return sc


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    sim = Simulator(sc, trace=args.trace)
    metrics = sim.run()
    _write(metrics_csv([metrics.row()]), args.out)
    if args.trace:
        if args.trace_file:
            _write(sim.trace_text(), args.trace_file)
        else:
            sys.stderr.write(sim.trace_text())
    return EXIT_OK


def cmd_sweep(args) -> int:
    sc = _scenario(args)
    if args.seeds < 1:
        raise UsageError("--seeds must be >= 1")
    seeds = range(sc.seed, sc.seed + args.seeds)
    try:
        rows = sweep(sc, args.axis, args.values, seeds, workers=args.workers)
    except ScenarioError as exc:
        raise UsageError(str(exc)) from None
    _write(_csv_text(SWEEP_COLUMNS, [[r[c] for c in SWEEP_COLUMNS] for r in rows]), args.out)
    return EXIT_OK


# -- verify ---------------------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .verify import CHECKS, run_check

    numbers = args.only or sorted(CHECKS)
    unknown = [n for n in numbers if n not in CHECKS]
    if unknown:
        raise UsageError(f"no such check: {unknown[0]} (have 1..{max(CHECKS)})")
    failed = 0
    for n in numbers:
        res = run_check(n)
        print(res.line(), flush=True)
        failed += not res.passed
    print(f"{len(numbers) - failed} passed, {failed} failed")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="prp", description="Parallel routing on a virtual grid: paths, bounds, simulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("paths", help="list the 8 disjoint paths between two cells")
    sp.add_argument("source", type=_cell, help="source cell as x,y")
    sp.add_argument("dest", type=_cell, help="destination cell as x,y")
    sp.add_argument("--k", type=int, help="grid side in cells; paths leaving it are marked infeasible")
    sp.set_defaults(func=cmd_paths)

    sa = sub.add_parser("analyze", help="emit figure data or evaluate one formula")
    sa.add_argument("target", help="fig9..fig13, all, or one of: " + ", ".join(FORMULAS))
    sa.add_argument("--out", help="output file (directory for 'all'); stdout by default")
    sa.add_argument("--N", type=float, default=100, help="node count")
    sa.add_argument("--k", type=float, default=10, help="grid side in cells")
    sa.add_argument("--p", type=float, default=0.0, help="per-period cell-exit probability")
    sa.add_argument("--d", type=float, default=100.0, help="cell side (m)")
    sa.add_argument("--s", type=float, default=1.0, help="node speed (m/s)")
    sa.add_argument("--t", type=float, default=1.0, help="transmission interval (s)")
    sa.add_argument("--delta", type=float, default=500.0, help="region side (m)")
    sa.add_argument("--r", type=float, default=200.0, help="radio range (m)")
    sa.add_argument("--M", type=float, default=2 ** 20, help="message size (bytes)")
    sa.add_argument("--frag", type=float, default=2 ** 10, help="fragment size (bytes)")
    sa.add_argument("--tau", type=float, default=0.008, help="one-hop delay (s)")
    sa.set_defaults(func=cmd_analyze)

    ss = sub.add_parser("simulate", help="run one scenario and print its metrics CSV")
    ss.add_argument("scenario", help="scenario JSON file")
    ss.add_argument("--seed", type=int, help="override the scenario seed")
    ss.add_argument("--out", help="metrics CSV path; stdout by default")
    ss.add_argument("--trace", action="store_true", help="record the event trace")
    ss.add_argument("--trace-file", help="trace path; stderr by default")
    ss.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="vary one numeric scenario field over repeated seeds")
    sw.add_argument("scenario", help="scenario JSON file")
    sw.add_argument("--axis", required=True, help="field name, grid.X / mobility.X, or density")
    sw.add_argument("--values", required=True, type=_floats, help="comma-separated values")
    sw.add_argument("--seeds", type=int, default=10, help="runs per point")
    sw.add_argument("--seed", type=int, help="first seed (default: the scenario's)")
    sw.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    sw.add_argument("--out", help="CSV path; stdout by default")
    sw.set_defaults(func=cmd_sweep)

    sv = sub.add_parser("verify", help="run the acceptance checks")
    sv.add_argument("--only", type=lambda s: [int(v) for v in s.split(",")], help="comma-separated check numbers")
    sv.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, SameCellError) as exc:
        print(f"prp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
