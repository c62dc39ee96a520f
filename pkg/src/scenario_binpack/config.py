#!/usr/bin/env python3
"""Configuration management for scenario-binpack.

Handles environment-based solver settings and logging setup.
"""

from __future__ import annotations

import logging
import sys
from functools import lru_cache

import structlog
from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class BppsSettings(BaseSettings):
    """Solver defaults, overridable through ``BPPS_*`` variables or ``.env``."""

    model_config = SettingsConfigDict(
        env_prefix="BPPS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    log_level: str = Field(default="WARNING", description="Logging level")
    log_json: bool = Field(default=False, description="Render logs as JSON lines")

    seed: int = Field(default=0, ge=0, description="Base PRNG seed")
    vns_t_max: float = Field(default=60.0, gt=0, description="VNS wall-clock limit (s)")
    vns_c_max: int = Field(
        default=500, gt=0, description="VNS non-improving iteration limit"
    )
    bp_time_limit: float = Field(
        default=120.0, gt=0, description="Branch-and-price wall-clock limit (s)"
    )
    rmp_ip_time_limit: float = Field(
        default=2.0, gt=0, description="Per-node restricted master IP budget (s)"
    )
    rmp_ip_node_limit: int = Field(
        default=100_000, gt=0, description="Per-node restricted master IP node cap"
    )
    pricing_node_limit: int = Field(
        default=2_000_000, gt=0, description="Pricing search node cap per call"
    )

    lp_tol_feas: float = Field(default=1e-7, description="Primal feasibility tolerance")
    lp_tol_dual: float = Field(default=1e-7, description="Dual feasibility tolerance")
    lp_max_iterations: int = Field(default=50_000, gt=0)
    lp_stall_threshold: int = Field(
        default=50, gt=0, description="Degenerate pivots before Bland's rule"
    )
    lp_refactor_every: int = Field(default=64, gt=0)

    bench_workers: int = Field(default=1, ge=1)
    bench_replicates: int = Field(default=10, ge=1)

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Normalize and check the level name."""
        level = v.strip().upper()
        if level not in logging.getLevelNamesMapping():
            raise ValueError(f"unknown log level {v!r}")
        return level

    @field_validator("lp_tol_feas", "lp_tol_dual")
    @classmethod
    def validate_tolerance(cls, v: float) -> float:
        """Tolerances are safety nets, not tuning knobs."""
        if not 0 < v <= 1e-3:
            raise ValueError("tolerance must lie in (0, 1e-3]")
        return v


@lru_cache(maxsize=1)
def get_settings() -> BppsSettings:
    """Return the process-wide settings instance."""
    return BppsSettings()


def configure_logging(level: str = "WARNING", json: bool = False) -> None:
    """Wire structlog to stderr with the given level."""
    renderer = (
        structlog.processors.JSONRenderer()
        if json
        else structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty())
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.getLevelNamesMapping()[level.upper()]
        ),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
