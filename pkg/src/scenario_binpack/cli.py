#!/usr/bin/env python3
"""Command-line front end.

Usage:
    bpps gen --out suite/                      # all twelve classes, 10 replicates
    bpps gen --out small/ --n 10 --d-mode n --replicates 3
    bpps solve suite/bpps_n10_d5_s0.txt --algo bp --tlimit 30
    bpps bench suite/ --algo vns --algo bp --workers 4 --out results/
    bpps bounds suite/bpps_n50_d25_s3.txt
    bpps gen-theorem3 --d 10 --out worst_d10.txt

Defaults come from ``BPPS_*`` environment variables (see config.py). Machine
output (JSON records, CSV rows) goes to stdout; tables and logs go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from .approx import build_ratio_worst_case, is_minimal, ratio_bound, vbpp_bpps_ratio
from .bench import (
    ALGORITHMS,
    CSV_COLUMNS,
    D_MODES,
    FILE_PATTERN,
    STANDARD_N,
    BenchClass,
    SolveOptions,
    bench_rows,
    generate_suite,
    run_algorithm,
    run_bench,
    standard_classes,
    write_bench,
)
from .bounds import best_dff_lambda, lb_continuous, lb_root
from .config import BppsSettings, configure_logging, get_settings
from .exceptions import BppsError
from .formats import read_instance, serialize_solution, write_instance

console = Console(stderr=True)


def build_parser(settings: BppsSettings) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bpps", description="Bin packing with scenarios: generate, solve, benchmark."
    )
    parser.add_argument("--log-level", default=settings.log_level, help="structlog level")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate seeded instance classes")
    gen.add_argument("--out", type=Path, required=True, help="Output directory")
    gen.add_argument("--n", type=int, action="append", help=f"Item counts (default {STANDARD_N})")
    gen.add_argument("--d-mode", choices=D_MODES, action="append", help="d relative to n")
    gen.add_argument("--d", type=int, help="Explicit scenario count (overrides --d-mode)")
    gen.add_argument("--replicates", type=int, default=settings.bench_replicates)
    gen.add_argument("--seed", type=int, default=settings.seed, help="Base seed")

    def add_budget_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=settings.seed, help="VNS shake seed")
        p.add_argument("--tmax", type=float, default=settings.vns_t_max, help="VNS time limit (s)")
        p.add_argument("--cmax", type=int, default=settings.vns_c_max, help="VNS non-improving limit")
        p.add_argument(
            "--tlimit", type=float, default=settings.bp_time_limit, help="Branch-and-price limit (s)"
        )
        p.add_argument(
            "--no-warm-columns",
            action="store_true",
            help="vns+bp: use the VNS packing only as incumbent, not as columns",
        )

    solve = sub.add_parser("solve", help="Solve one instance file")
    solve.add_argument("instance", type=Path)
    solve.add_argument("--algo", choices=ALGORITHMS, default="bp")
    solve.add_argument("--out", type=Path, help="Also write the JSON record here")
    add_budget_flags(solve)

    bench = sub.add_parser("bench", help="Run algorithms over a generated suite")
    bench.add_argument("suite", type=Path)
    bench.add_argument("--algo", choices=ALGORITHMS, action="append", help="Repeatable (default bp)")
    bench.add_argument("--workers", type=int, default=settings.bench_workers)
    bench.add_argument("--out", type=Path, help="Directory for instances.csv and summary.csv")
    add_budget_flags(bench)

    bounds = sub.add_parser("bounds", help="Print lower bounds of an instance")
    bounds.add_argument("instance", type=Path)

    worst = sub.add_parser("gen-theorem3", help="Write the sqrt(d) ratio worst case")
    worst.add_argument("--d", type=int, required=True)
    worst.add_argument("--capacity", type=int, default=100)
    worst.add_argument("--out", type=Path, required=True)
    return parser


def _options(args: argparse.Namespace, settings: BppsSettings) -> SolveOptions:
    return SolveOptions.from_settings(
        settings,
        t_max=args.tmax,
        c_max=args.cmax,
        time_limit=args.tlimit,
        seed=args.seed,
        warm_columns=not args.no_warm_columns,
    )


def cmd_gen(args: argparse.Namespace) -> int:
    ns = args.n or list(STANDARD_N)
    if args.n is None and args.d is None and args.d_mode is None:
        classes = standard_classes(replicates=args.replicates, base_seed=args.seed)
    elif args.d is not None:
        classes = [BenchClass(n=n, d=args.d, replicates=args.replicates, base_seed=args.seed) for n in ns]
    else:
        classes = [
            BenchClass.from_mode(n, mode, args.replicates, args.seed)
            for n in ns
            for mode in (args.d_mode or D_MODES)
        ]
    paths = generate_suite(classes, args.out)
    console.print(f"[green]Wrote {len(paths)} instances[/green] to [bold]{args.out}[/bold]")
    return 0


def cmd_solve(args: argparse.Namespace, settings: BppsSettings) -> int:
    instance = read_instance(args.instance)
    outcome = run_algorithm(instance, args.algo, _options(args, settings))
    metadata = dict(
        algorithm=outcome.algorithm,
        time_s=outcome.time_s,
        status=outcome.status,
        lower_bound=outcome.lb,
        nodes=outcome.nodes,
        cols=outcome.cols,
        **outcome.metadata,
    )
    record = serialize_solution(instance, outcome.solution, metadata)
    print(record)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(record + "\n", encoding="utf-8")

    match = FILE_PATTERN.match(args.instance.name)
    class_id = f"n{instance.n}_d{instance.d}" if match else args.instance.stem
    seed = int(match.group(3)) if match else args.seed
    row = [
        class_id, instance.n, instance.d, seed, outcome.algorithm, outcome.ub, outcome.lb,
        outcome.gap, outcome.time_s, outcome.nodes, outcome.cols, outcome.status,
    ]
    pd.DataFrame([row], columns=CSV_COLUMNS).to_csv(sys.stdout, index=False)

    colour = "green" if outcome.status == "optimal" else "yellow"
    console.print(
        Panel.fit(
            f"[bold]Algorithm:[/bold] {outcome.algorithm}\n"
            f"[bold]Worst-case bins:[/bold] {outcome.ub}\n"
            f"[bold]Lower bound:[/bold] {outcome.lb}\n"
            f"[bold]Total bins:[/bold] {outcome.solution.n_bins}\n"
            f"[bold]Time:[/bold] {outcome.time_s:.3f} s\n"
            f"[bold]Status:[/bold] [{colour}]{outcome.status}[/{colour}]",
            title=instance.name or str(args.instance),
            border_style=colour,
        )
    )
    return 0


def render_summary(summary: pd.DataFrame) -> Table:
    table = Table(title="Benchmark summary")
    for name, style in [
        ("class", "cyan"),
        ("algo", "blue"),
        ("runs", None),
        ("gap %", "magenta"),
        ("time s", None),
        ("|OPT|", "green"),
        ("nodes", None),
        ("cols", None),
        ("failed", "red"),
    ]:
        table.add_column(name, style=style, justify="left" if name in ("class", "algo") else "right")
    for row in bench_rows(summary):
        table.add_row(
            row.class_id,
            row.algo,
            str(row.runs),
            f"{row.gap:.2f}",
            f"{row.time_s:.2f}",
            str(row.opt),
            f"{row.nodes:.1f}",
            f"{row.cols:.1f}",
            str(row.failed),
        )
    return table


def cmd_bench(args: argparse.Namespace, settings: BppsSettings) -> int:
    rows, summary = run_bench(
        args.suite, args.algo or ["bp"], _options(args, settings), workers=args.workers
    )
    if args.out:
        instances_path, summary_path = write_bench(rows, summary, args.out)
        console.print(f"Wrote [bold]{instances_path}[/bold] and [bold]{summary_path}[/bold]")
    else:
        rows.to_csv(sys.stdout, index=False)
    console.print(render_summary(summary))
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    lam, dff = best_dff_lambda(instance)
    table = Table(title=f"Lower bounds: {instance.name or args.instance}")
    table.add_column("bound", style="cyan")
    table.add_column("value", justify="right", style="green")
    table.add_row("continuous", str(lb_continuous(instance)))
    table.add_row(f"dff (lambda={lam})", str(dff))
    table.add_row("root", str(lb_root(instance)))
    Console().print(table)
    return 0


def cmd_gen_theorem3(args: argparse.Namespace) -> int:
    instance, solution = build_ratio_worst_case(args.d, args.capacity)
    path = write_instance(instance, args.out)
    ratio = vbpp_bpps_ratio(instance, solution)
    console.print(
        Panel.fit(
            f"[bold]Items:[/bold] {instance.n}\n"
            f"[bold]Scenarios:[/bold] {instance.d}\n"
            f"[bold]Singletons minimal:[/bold] {is_minimal(instance, solution)}\n"
            f"[bold]Ratio:[/bold] {ratio:.4f} (bound {ratio_bound(instance.d):.4f})",
            title=str(path),
            border_style="cyan",
        )
    )
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    args = build_parser(settings).parse_args(argv)
    configure_logging(args.log_level, settings.log_json)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "solve":
            return cmd_solve(args, settings)
        if args.command == "bench":
            return cmd_bench(args, settings)
        if args.command == "bounds":
            return cmd_bounds(args)
        return cmd_gen_theorem3(args)
    except (BppsError, OSError) as e:
        console.print(
            Panel.fit(f"[red]{e}[/red]", title=type(e).__name__, border_style="red")
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
