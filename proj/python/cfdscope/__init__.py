"""Lid-driven cavity flow solver with baseline and optimized code paths."""

from ._core import (
    DimensionError,
    RegionStats,
    RunResult,
    SimConfig,
    SnapshotFormatError,
    SolverBreakdown,
    SolveStats,
    StepRecord,
    compare_snapshots,
    laplacian,
    read_snapshot,
    run,
    scaling_sweep,
    set_thread_count,
    solve_pressure,
    thread_count,
)

__all__ = [
    "DimensionError",
    "RegionStats",
    "RunResult",
    "SimConfig",
    "SnapshotFormatError",
    "SolverBreakdown",
    "SolveStats",
    "StepRecord",
    "compare_snapshots",
    "config",
    "laplacian",
    "read_snapshot",
    "run",
    "scaling_sweep",
    "set_thread_count",
    "solve_pressure",
    "thread_count",
]

__version__ = "0.1.0"


def config(**fields) -> SimConfig:
    """SimConfig with the given fields overridden, validated."""
    cfg = SimConfig()
    for name, value in fields.items():
        if not hasattr(cfg, name):
            raise AttributeError(f"SimConfig has no field {name!r}")
        setattr(cfg, name, value)
    cfg.validate()
    return cfg
