#!/usr/bin/env python3
"""Instance classes, algorithm dispatch and the benchmark harness.

The harness generates seeded instance classes (n in {10, 50, 100, 200},
d in {n/2, n, 2n}), runs any set of algorithms on a generated suite and
aggregates the per-instance rows into per-class means with pandas.
"""

from __future__ import annotations

import re
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, Iterator, List, Literal, Optional, Sequence, Tuple

import pandas as pd
import structlog
from pydantic import BaseModel, Field, model_validator

from .approx import approx_solve, ratio_bound, vbpp_bpps_ratio
from .bounds import lb_root
from .core import val_bpps, val_vbpp
from .enumeration import solve_enumeration
from .exact import BranchAndPriceConfig, branch_and_price
from .exceptions import BppsError, InvalidParameterError
from .formats import read_instance, write_instance
from .generator import derive_seed, generate_instance
from .heuristic import VnsConfig, ffd_construct, vns
from .models import Instance, Solution

logger = structlog.get_logger(__name__)

Algorithm = Literal["ffd", "vns", "ff-approx", "bp", "vns+bp", "enum"]
ALGORITHMS: Tuple[str, ...] = ("ffd", "vns", "ff-approx", "bp", "vns+bp", "enum")
HEURISTICS = ("ffd", "vns", "ff-approx")
EXACT = ("bp", "vns+bp", "enum")

STANDARD_N = (10, 50, 100, 200)
D_MODES = ("0.5n", "n", "2n")

CSV_COLUMNS = [
    "class", "n", "d", "seed", "algo", "ub", "lb", "gap", "time_s", "nodes", "cols", "status",
]
SUMMARY_COLUMNS = ["class", "algo", "runs", "gap", "time_s", "opt", "nodes", "cols", "failed"]

FILE_PATTERN = re.compile(r"^bpps_n(\d+)_d(\d+)_s(\d+)\.txt$")


class BenchClass(BaseModel):
    """One instance class: n items, d scenarios, seeded replicates."""

    n: int = Field(ge=1)
    d: int = Field(ge=1)
    replicates: int = Field(default=10, ge=1)
    base_seed: int = Field(default=0, ge=0)

    @classmethod
    def from_mode(cls, n: int, mode: str, replicates: int = 10, base_seed: int = 0) -> BenchClass:
        if mode not in D_MODES:
            raise InvalidParameterError(f"d mode must be one of {D_MODES}, got {mode!r}")
        if mode == "0.5n":
            if n % 2:
                raise InvalidParameterError(f"d = n/2 needs an even n, got {n}")
            d = n // 2
        else:
            d = n if mode == "n" else 2 * n
        return cls(n=n, d=d, replicates=replicates, base_seed=base_seed)

    @property
    def class_id(self) -> str:
        return f"n{self.n}_d{self.d}"

    @property
    def class_index(self) -> int:
        """Stable index mixed into every replicate's seed."""
        return self.n * 100_000 + self.d

    def seed(self, replicate: int) -> int:
        return derive_seed(self.base_seed, self.class_index, replicate)

    def file_name(self, replicate: int) -> str:
        return f"bpps_n{self.n}_d{self.d}_s{replicate}.txt"

    def instances(self) -> Iterator[Tuple[int, Instance]]:
        for r in range(self.replicates):
            name = self.file_name(r)[: -len(".txt")]
            yield r, generate_instance(self.n, self.d, self.seed(r), name=name)


def standard_classes(
    ns: Sequence[int] = STANDARD_N, replicates: int = 10, base_seed: int = 0
) -> List[BenchClass]:
    """The n x {n/2, n, 2n} grid; twelve classes with the default n values."""
    return [BenchClass.from_mode(n, m, replicates, base_seed) for n in ns for m in D_MODES]


def generate_suite(classes: Sequence[BenchClass], out_dir: Path | str) -> List[Path]:
    """Write every replicate of every class; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for cls in classes:
        for r, instance in cls.instances():
            paths.append(write_instance(instance, out / cls.file_name(r)))
    logger.info("bench.suite_written", files=len(paths), out=str(out))
    return paths


def gap_percent(ub: int, lb: int) -> float:
    """(UB - LB) / UB in percent; 0 when UB is 0 or the bounds meet."""
    if ub <= 0 or lb >= ub:
        return 0.0
    return 100.0 * (ub - lb) / ub


class SolveOptions(BaseModel):
    """Budgets shared by every algorithm of one run."""

    t_max: float = Field(default=60.0, gt=0, description="VNS wall-clock limit (s)")
    c_max: int = Field(default=500, gt=0, description="VNS non-improving iteration limit")
    time_limit: float = Field(default=120.0, gt=0, description="Branch-and-price limit (s)")
    seed: int = Field(default=0, ge=0)
    warm_columns: bool = True
    bp: BranchAndPriceConfig = Field(default_factory=BranchAndPriceConfig)

    @classmethod
    def from_settings(cls, settings, **overrides: Any) -> SolveOptions:
        values: Dict[str, Any] = dict(
            t_max=settings.vns_t_max,
            c_max=settings.vns_c_max,
            time_limit=settings.bp_time_limit,
            seed=settings.seed,
            bp=BranchAndPriceConfig.from_settings(settings),
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def vns_config(self, t_max: Optional[float] = None) -> VnsConfig:
        return VnsConfig(t_max=t_max or self.t_max, c_max=self.c_max, seed=self.seed)

    def bp_config(self, time_limit: Optional[float] = None) -> BranchAndPriceConfig:
        return self.bp.model_copy(
            update=dict(time_limit=time_limit or self.time_limit, warm_columns=self.warm_columns)
        )


class SolveOutcome(BaseModel):
    """Result of one algorithm on one instance."""

    algorithm: str
    solution: Solution
    ub: int
    lb: int
    status: Literal["optimal", "gap"]
    time_s: float
    nodes: int = 0
    cols: int = 0
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @property
    def gap(self) -> float:
        return gap_percent(self.ub, self.lb)


def _outcome(
    instance: Instance, algorithm: str, solution: Solution, lb: int, start: float, **extra: Any
) -> SolveOutcome:
    ub = val_bpps(instance, solution)
    lb = min(lb, ub)
    return SolveOutcome(
        algorithm=algorithm,
        solution=solution,
        ub=ub,
        lb=lb,
        status="optimal" if lb >= ub else "gap",
        time_s=time.perf_counter() - start,
        **extra,
    )


def run_algorithm(
    instance: Instance, algorithm: str, options: Optional[SolveOptions] = None
) -> SolveOutcome:
    """Dispatch one algorithm by name.

    Heuristics report the root bound (continuous and DFF) as their lower
    bound. ``vns+bp`` spends up to ``t_max`` on VNS and gives the rest of
    ``time_limit`` to branch and price, warm-started from the VNS packing.

    Raises:
        InvalidParameterError: For an unknown algorithm name.
    """
    options = options or SolveOptions()
    start = time.perf_counter()
    if algorithm == "ffd":
        return _outcome(instance, algorithm, ffd_construct(instance), lb_root(instance), start)
    if algorithm == "ff-approx":
        solution = approx_solve(instance)
        metadata: Dict[str, Any] = {"val_vbpp": val_vbpp(solution), "ratio_bound": ratio_bound(instance.d)}
        if solution.bins:
            metadata["ratio"] = vbpp_bpps_ratio(instance, solution)
        return _outcome(instance, algorithm, solution, lb_root(instance), start, metadata=metadata)
    if algorithm == "vns":
        solution, stats = vns(instance, config=options.vns_config())
        return _outcome(
            instance,
            algorithm,
            solution,
            lb_root(instance),
            start,
            metadata={"iterations": stats.iterations, "improvements": stats.improvements},
        )
    if algorithm in ("bp", "vns+bp"):
        warm = None
        metadata = {}
        budget = options.time_limit
        if algorithm == "vns+bp":
            warm, vstats = vns(instance, config=options.vns_config(min(options.t_max, budget)))
            metadata["vns_ub"] = val_bpps(instance, warm)
            metadata["vns_time_s"] = vstats.time_s
            budget = max(budget - (time.perf_counter() - start), 1e-3)
        solution, stats = branch_and_price(instance, warm, options.bp_config(budget))
        metadata.update(
            root_lb=stats.root_lb,
            root_lp=stats.root_lp,
            columns_generated=stats.columns_generated,
            rmp_ip_calls=stats.rmp_ip_calls,
            ub_history=stats.ub_history,
        )
        return _outcome(
            instance,
            algorithm,
            solution,
            stats.lb,
            start,
            nodes=stats.nodes,
            cols=stats.total_columns,
            metadata=metadata,
        )
    if algorithm == "enum":
        solution = solve_enumeration(instance)
        return _outcome(instance, algorithm, solution, val_bpps(instance, solution), start)
    raise InvalidParameterError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


def discover_suite(suite_dir: Path | str) -> List[Tuple[str, int, int, int, Path]]:
    """(class id, n, d, replicate, path) for every suite file, sorted."""
    found = []
    for path in sorted(Path(suite_dir).iterdir()):
        match = FILE_PATTERN.match(path.name)
        if match:
            n, d, r = (int(g) for g in match.groups())
            found.append((f"n{n}_d{d}", n, d, r, path))
    found.sort(key=lambda t: (t[1], t[2], t[3]))
    return found


def _run_task(task: Tuple[str, int, int, int, str, str, SolveOptions]) -> Dict[str, Any]:
    class_id, n, d, replicate, path, algorithm, options = task
    row: Dict[str, Any] = dict(
        zip(CSV_COLUMNS, [class_id, n, d, replicate, algorithm, None, None, None, None, 0, 0, "error"])
    )
    try:
        outcome = run_algorithm(read_instance(path), algorithm, options)
    except BppsError as exc:
        logger.error("bench.run_failed", path=path, algorithm=algorithm, error=str(exc))
        return row
    row.update(
        ub=outcome.ub,
        lb=outcome.lb,
        gap=outcome.gap,
        time_s=outcome.time_s,
        nodes=outcome.nodes,
        cols=outcome.cols,
        status=outcome.status,
    )
    return row


def share_exact_bounds(rows: pd.DataFrame) -> pd.DataFrame:
    """Raise heuristic lower bounds to the best exact bound of the same instance.

    Upper bounds are untouched; gap and status are recomputed.
    """
    df = rows.copy()
    done = df["status"] != "error"
    exact = df[done & df["algo"].isin(EXACT)]
    if exact.empty:
        return df
    best = exact.groupby(["class", "seed"])["lb"].max()
    for idx in df.index[done & df["algo"].isin(HEURISTICS)]:
        key = (df.at[idx, "class"], df.at[idx, "seed"])
        if key in best.index:
            lb = int(min(max(df.at[idx, "lb"], best[key]), df.at[idx, "ub"]))
            ub = int(df.at[idx, "ub"])
            df.at[idx, "lb"] = lb
            df.at[idx, "gap"] = gap_percent(ub, lb)
            df.at[idx, "status"] = "optimal" if lb >= ub else "gap"
    return df


class BenchRow(BaseModel):
    """Per-class, per-algorithm means over completed runs."""

    class_id: str
    algo: str
    runs: int = Field(ge=0)
    gap: float = Field(ge=0, le=100, description="Mean gap in percent")
    time_s: float = Field(ge=0)
    opt: int = Field(ge=0, description="Runs closed with gap 0")
    nodes: float = Field(ge=0)
    cols: float = Field(ge=0)
    failed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def check_counts(self) -> BenchRow:
        if self.opt > self.runs:
            raise ValueError(f"{self.opt} optimal runs out of {self.runs}")
        return self


def bench_rows(summary: pd.DataFrame) -> List[BenchRow]:
    """Typed view of a summary frame; classes with no completed run are skipped."""
    out = []
    for record in summary.to_dict("records"):
        if not record["runs"]:
            continue
        out.append(BenchRow(class_id=record.pop("class"), **record))
    return out


def summarize(rows: pd.DataFrame) -> pd.DataFrame:
    """Per (class, algorithm) means over completed runs."""
    df = rows.copy()
    df["failed"] = df["status"] == "error"
    df["opt"] = df["status"] == "optimal"
    done = df[~df["failed"]]
    grouped = done.groupby(["class", "algo"], sort=False)
    summary = grouped.agg(
        runs=("ub", "size"),
        gap=("gap", "mean"),
        time_s=("time_s", "mean"),
        opt=("opt", "sum"),
        nodes=("nodes", "mean"),
        cols=("cols", "mean"),
    ).reset_index()
    failed = df.groupby(["class", "algo"], sort=False)["failed"].sum().reset_index()
    summary = failed.merge(summary, on=["class", "algo"], how="left")
    summary["runs"] = summary["runs"].fillna(0).astype(int)
    summary["opt"] = summary["opt"].fillna(0).astype(int)
    summary["failed"] = summary["failed"].astype(int)
    return summary[SUMMARY_COLUMNS]


def run_bench(
    suite_dir: Path | str,
    algorithms: Sequence[str],
    options: Optional[SolveOptions] = None,
    workers: int = 1,
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Run every algorithm on every suite instance.

    Instances are distributed over ``workers`` processes; rows come back in
    suite order regardless of the worker count.

    Returns:
        (per-instance rows with CSV_COLUMNS, per-class summary)
    """
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise InvalidParameterError(f"unknown algorithm(s) {unknown}; expected {ALGORITHMS}")
    options = options or SolveOptions()
    files = discover_suite(suite_dir)
    if not files:
        raise InvalidParameterError(f"no bpps_n*_d*_s*.txt files in {suite_dir}")
    tasks = [
        (class_id, n, d, r, str(path), algo, options)
        for class_id, n, d, r, path in files
        for algo in algorithms
    ]
    log = logger.bind(tasks=len(tasks), workers=workers)
    log.info("bench.start")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    rows = share_exact_bounds(pd.DataFrame(results, columns=CSV_COLUMNS))
    log.info("bench.done", failed=int((rows["status"] == "error").sum()))
    return rows, summarize(rows)


def write_bench(rows: pd.DataFrame, summary: pd.DataFrame, out_dir: Path | str) -> Tuple[Path, Path]:
    """Write instances.csv and summary.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    instances_path, summary_path = out / "instances.csv", out / "summary.csv"
    rows.to_csv(instances_path, index=False)
    summary.to_csv(summary_path, index=False, float_format="%.4f")
    return instances_path, summary_path
