"""ODMR sweep tracker.

Once per period the drive is swept across n_points frequencies centred
on the tracker's current centre. Each point sees the resonance offset
averaged over its own dwell interval; counts follow
Poisson(rate * dwell * (1 - contrast * L)), with L the unit-height
Lorentzian. The dip centre is recovered by a Lorentzian fit.

Timing for period k starting at s_k = t0 + k * period:
    sweep     [s_k, s_k + n * dwell]
    t_eff   = s_k + n * dwell / 2
    t_avail = s_k + period
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

from src.config.constants import DRIFT
from src.exceptions import CoverageError, FitError
from src.noise.trace import NoiseTrace
from src.observability.logging import TrackingLogger
from src.observability.metrics import record_estimates
from src.spectral.lorentzian import LorentzPeak, fit_lineshape
from src.tracking.config import OdmrConfig
from src.tracking.estimates import Estimate, EstimateFlag, EstimateStream
from src.utils.seeding import derive_rng

METHOD = "odmr"


def sweep_counts(
    freqs_hz: NDArray[np.float64],
    resonance_hz: NDArray[np.float64],
    cfg: OdmrConfig,
    rng: np.random.Generator | None,
) -> NDArray[np.float64]:
    """Photon counts per sweep point; expectation values when rng is None."""
    detuning = (freqs_hz - resonance_hz) / cfg.effective_linewidth_hz
    mean = cfg.count_rate_hz * cfg.effective_dwell_s * (1.0 - cfg.contrast / (1.0 + detuning**2))
    if rng is None:
        return mean
    return rng.poisson(mean).astype(np.float64)


def _vertex(freqs: NDArray[np.float64], counts: NDArray[np.float64]) -> float:
    """Parabolic vertex through the minimum and its neighbours."""
    i = int(np.clip(np.argmin(counts), 1, counts.size - 2))
    y0, y1, y2 = counts[i - 1], counts[i], counts[i + 1]
    curvature = y0 - 2.0 * y1 + y2
    if curvature <= 0:
        raise FitError("odmr_vertex", "no dip curvature")
    step = freqs[i] - freqs[i - 1]
    return float(freqs[i] + 0.5 * step * (y0 - y2) / curvature)


def locate_dip(freqs: NDArray[np.float64], counts: NDArray[np.float64], cfg: OdmrConfig) -> tuple[float, float]:
    """(centre, 1-sigma) of the dip.

    Raises:
        FitError: the fit failed or degenerated
    """
    if freqs.size < 5:
        return _vertex(freqs, counts), cfg.range_hz / (freqs.size - 1)
    dip = float(np.max(counts)) - counts
    seed_idx = int(np.argmin(counts))  # first index: lower frequency on ties
    init = [LorentzPeak(
        center_hz=float(freqs[seed_idx]),
        hwhm_hz=cfg.effective_linewidth_hz,
        amplitude=float(dip[seed_idx]) or 1.0,
    )]
    fit = fit_lineshape(freqs, dip, n_peaks=1, init=init)
    peak = fit.peaks[0]
    return peak.center_hz, peak.center_sigma_hz


def odmr_track(trace: NoiseTrace, cfg: OdmrConfig, seed: int) -> EstimateStream:
    """One estimate per period from a simulated ODMR sweep.

    Args:
        trace: True resonance offset
        cfg: Sweep settings
        seed: Root seed; counts use the (seed, "tracker", "odmr") stream

    Returns:
        floor(duration / period) estimates

    Raises:
        CoverageError: trace shorter than one period
    """
    periods = int(math.floor(trace.duration_s / cfg.period_s * (1 + DRIFT.GRID_SNAP_REL)))
    if periods < 1:
        raise CoverageError("odmr_track", cfg.period_s, trace.duration_s)

    rng = derive_rng(seed, "tracker", METHOD) if cfg.shot_noise else None
    log = TrackingLogger(METHOD)
    dwell = cfg.effective_dwell_s
    offsets = np.linspace(-0.5 * cfg.range_hz, 0.5 * cfg.range_hz, cfg.n_points)
    edges = np.arange(cfg.n_points + 1) * dwell

    centre = cfg.f0_hz
    last_sigma = cfg.range_hz / (cfg.n_points - 1)
    entries: list[Estimate] = []
    for k in range(periods):
        start = trace.t0_s + k * cfg.period_s
        freqs = centre + offsets
        resonance = trace.mean_over(start + edges[:-1], start + edges[1:])
        counts = sweep_counts(freqs, resonance, cfg, rng)

        t_eff = start + 0.5 * cfg.sweep_duration_s
        t_avail = start + cfg.period_s
        try:
            est, sigma = locate_dip(freqs, counts, cfg)
            if not (freqs[0] <= est <= freqs[-1]):
                raise FitError("odmr", f"centre {est:g} Hz outside sweep")
        except FitError as exc:
            log.estimate_held(t_avail, EstimateFlag.HELD.value, exc.message)
            entries.append(Estimate(t_avail, t_eff, centre, last_sigma, EstimateFlag.HELD))
            continue
        centre, last_sigma = est, sigma
        entries.append(Estimate(t_avail, t_eff, est, sigma))

    stream = EstimateStream(entries=tuple(entries), method=METHOD, cadence_s=cfg.period_s)
    held = stream.count(EstimateFlag.HELD)
    log.tracking_completed(len(stream), held, 0)
    record_estimates(METHOD, EstimateFlag.VALID.value, len(stream) - held)
    record_estimates(METHOD, EstimateFlag.HELD.value, held)
    return stream
