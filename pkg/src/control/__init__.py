"""Sample-and-hold correction loop and noise-reduction efficiency."""

from src.control.efficiency import efficiency
from src.control.loop import (
    ControlRun,
    EfficiencyPoint,
    efficiency_curve,
    hold_indices,
    run_loop,
    update_instants,
)
from src.control.policy import ControlPolicy, ControlSection, Scheme

__all__ = [
    "ControlPolicy",
    "ControlRun",
    "ControlSection",
    "EfficiencyPoint",
    "Scheme",
    "efficiency",
    "efficiency_curve",
    "hold_indices",
    "run_loop",
    "update_instants",
]
