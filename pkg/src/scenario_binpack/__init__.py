#!/usr/bin/env python3
"""scenario-binpack: exact, heuristic and approximate solvers for bin packing with scenarios."""

from __future__ import annotations

import structlog

from .approx import (
    VbppInstance,
    approx_solve,
    build_ratio_worst_case,
    build_theorem3_instance,
    first_fit_vbpp,
    is_minimal,
    minimalize,
    ratio_bound,
    to_vbpp,
    vbpp_bpps_ratio,
)
from .bench import BenchClass, SolveOptions, SolveOutcome, run_algorithm, run_bench
from .bounds import DffParam, best_dff_lambda, dff_fekete, lb_continuous, lb_dff, lb_root
from .branching import BranchState
from .config import BppsSettings, configure_logging, get_settings
from .core import check_feasible, ensure_feasible, val_bpps, val_vbpp
from .enumeration import solve_enumeration
from .exact import BranchAndPriceConfig, SearchStats, branch_and_price
from .exceptions import (
    BppsError,
    InfeasibleSolutionError,
    InstanceFormatError,
    InvalidParameterError,
    SolverError,
)
from .formats import (
    parse_instance,
    parse_solution_record,
    read_instance,
    serialize_instance,
    serialize_solution,
    write_instance,
)
from .generator import derive_seed, generate_instance
from .heuristic import VnsConfig, VnsStats, ffd_construct, fitness, local_search, vns
from .lp import Basis, LpModel, LpProblem, LpSolution, fix_variable_upper, solve_lp
from .models import Instance, Pattern, Solution, SolutionRecord, ValidationReport
from .pricing import DualSolution, price

if not structlog.is_configured():
    # stderr at WARNING until the caller configures logging
    configure_logging()

__all__ = [
    "BenchClass",
    "Basis",
    "BppsError",
    "BppsSettings",
    "BranchAndPriceConfig",
    "BranchState",
    "DffParam",
    "DualSolution",
    "InfeasibleSolutionError",
    "Instance",
    "InstanceFormatError",
    "InvalidParameterError",
    "LpModel",
    "LpProblem",
    "LpSolution",
    "Pattern",
    "SearchStats",
    "Solution",
    "SolutionRecord",
    "SolveOptions",
    "SolveOutcome",
    "SolverError",
    "ValidationReport",
    "VbppInstance",
    "VnsConfig",
    "VnsStats",
    "approx_solve",
    "best_dff_lambda",
    "branch_and_price",
    "build_ratio_worst_case",
    "build_theorem3_instance",
    "check_feasible",
    "configure_logging",
    "derive_seed",
    "dff_fekete",
    "ensure_feasible",
    "ffd_construct",
    "first_fit_vbpp",
    "fitness",
    "fix_variable_upper",
    "generate_instance",
    "get_settings",
    "is_minimal",
    "lb_continuous",
    "lb_dff",
    "lb_root",
    "local_search",
    "minimalize",
    "parse_instance",
    "parse_solution_record",
    "price",
    "ratio_bound",
    "read_instance",
    "run_algorithm",
    "run_bench",
    "serialize_instance",
    "serialize_solution",
    "solve_enumeration",
    "solve_lp",
    "to_vbpp",
    "val_bpps",
    "val_vbpp",
    "vbpp_bpps_ratio",
    "vns",
    "write_instance",
]
