"""Simulation and analysis of piecewise recursive sequences with dynamic thresholds."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DomainError,
    Regime,
    ScalarMapSpec,
    State,
    SystemSpec,
    ThresholdMapSpec,
    eval_map,
    eval_threshold,
    step,
)
from .sim import Trace, detect_limit, simulate, sync_gap, transitions, visitation  # noqa: E402

__all__ = [
    "DomainError", "Regime", "ScalarMapSpec", "State", "SystemSpec", "ThresholdMapSpec",
    "eval_map", "eval_threshold", "step", "Trace", "detect_limit", "simulate", "sync_gap",
    "transitions", "visitation",
]
