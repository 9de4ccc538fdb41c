"""Frequency trackers and their estimate streams."""

from src.noise.trace import NoiseTrace
from src.tracking.config import LiaConfig, OdmrConfig, TrackerConfig, TrackerSection
from src.tracking.estimates import (
    Estimate,
    EstimateFlag,
    EstimateStream,
    stream_from_arrays,
)
from src.tracking.lockin import lia_track
from src.tracking.odmr import odmr_track


def track(trace: NoiseTrace, cfg: TrackerConfig, seed: int) -> EstimateStream:
    """Run the tracker matching the config variant."""
    if isinstance(cfg, OdmrConfig):
        return odmr_track(trace, cfg, seed)
    return lia_track(trace, cfg, seed)


__all__ = [
    "Estimate",
    "EstimateFlag",
    "EstimateStream",
    "LiaConfig",
    "OdmrConfig",
    "TrackerConfig",
    "TrackerSection",
    "lia_track",
    "odmr_track",
    "stream_from_arrays",
    "track",
]
