"""Ramsey measurement simulation and the linewidth sweep."""

from src.ramsey.curve import RamseyCurve
from src.ramsey.simulate import RamseyConfig, check_sweep_span, simulate_ramsey
from src.ramsey.sweep import (
    DoubletCalibration,
    SweepAnalysis,
    SweepPoint,
    SweepResult,
    SweepRow,
    analyse_curve,
    calibrate_split,
    points_from_speeds,
    sweep_linewidth,
)

__all__ = [
    "DoubletCalibration",
    "RamseyConfig",
    "RamseyCurve",
    "SweepAnalysis",
    "SweepPoint",
    "SweepResult",
    "SweepRow",
    "analyse_curve",
    "calibrate_split",
    "check_sweep_span",
    "points_from_speeds",
    "simulate_ramsey",
    "sweep_linewidth",
]
