"""Lock-in (LIA) tracker.

Modelled as a trailing moving average of the true offset plus Gaussian
measurement noise of sigma_floor / sqrt(window). An estimate issued at t
summarises [t - w, t], so t_eff = t - w/2 and the latency is w/2.
"""

from __future__ import annotations

import math

import numpy as np

from src.config.constants import DRIFT
from src.exceptions import CoverageError, ParameterError
from src.noise.trace import NoiseTrace
from src.observability.logging import TrackingLogger
from src.observability.metrics import record_estimates
from src.tracking.config import LiaConfig
from src.tracking.estimates import Estimate, EstimateFlag, EstimateStream
from src.utils.seeding import derive_rng

METHOD = "lia"


def _grid_multiple(name: str, value: float, dt_s: float) -> int:
    ratio = value / dt_s
    steps = round(ratio)
    if steps < 1 or abs(ratio - steps) > DRIFT.GRID_SNAP_REL * max(1.0, ratio):
        raise ParameterError(name, value, f"must be a positive multiple of the trace dt ({dt_s:g} s)")
    return int(steps)


def lia_track(trace: NoiseTrace, cfg: LiaConfig, seed: int) -> EstimateStream:
    """Estimates every update_period_s, starting once a full window is available.

    Args:
        trace: True resonance offset
        cfg: Window, cadence and noise settings
        seed: Root seed; noise uses the (seed, "tracker", "lia") stream

    Raises:
        ParameterError: window or update period not on the trace grid
        CoverageError: trace shorter than one window
    """
    window_steps = _grid_multiple("window_s", cfg.window_s, trace.dt_s)
    update_steps = _grid_multiple("update_period_s", cfg.update_period_s, trace.dt_s)
    last_index = len(trace) - 1
    if window_steps > last_index:
        raise CoverageError("lia_track", cfg.window_s, trace.duration_s)

    stops = np.arange(window_steps, last_index + 1, update_steps)
    t_stop = trace.t0_s + stops * trace.dt_s
    t_start = trace.t0_s + (stops - window_steps) * trace.dt_s
    truth = trace.mean_over(t_start, t_stop)

    sigma = cfg.sigma_hz
    rng = derive_rng(seed, "tracker", METHOD)
    noise = sigma * rng.standard_normal(stops.size) if sigma > 0 else np.zeros(stops.size)
    measured = truth + noise

    log = TrackingLogger(METHOD)
    held_value = 0.0
    entries: list[Estimate] = []
    for t_avail, true_mean, value in zip(t_stop, truth, measured, strict=True):
        t_eff = float(t_avail) - 0.5 * cfg.window_s
        if math.fabs(true_mean) > cfg.capture_range_hz:
            log.estimate_held(float(t_avail), EstimateFlag.OUT_OF_CAPTURE.value, "offset beyond capture range")
            entries.append(Estimate(float(t_avail), t_eff, held_value, sigma, EstimateFlag.OUT_OF_CAPTURE))
            continue
        held_value = float(value)
        entries.append(Estimate(float(t_avail), t_eff, held_value, sigma))

    stream = EstimateStream(entries=tuple(entries), method=METHOD, cadence_s=cfg.update_period_s)
    lost = stream.count(EstimateFlag.OUT_OF_CAPTURE)
    log.tracking_completed(len(stream), 0, lost)
    record_estimates(METHOD, EstimateFlag.VALID.value, len(stream) - lost)
    record_estimates(METHOD, EstimateFlag.OUT_OF_CAPTURE.value, lost)
    return stream
