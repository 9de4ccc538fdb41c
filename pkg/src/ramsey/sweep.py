"""Linewidth sweep - Ramsey linewidth and T2* versus update speed.

Each point runs tracker -> control loop -> Ramsey simulation on the
residual -> spectrum -> Lorentzian and decay fits. Points are independent
jobs with their own readout stream (seed, "ramsey", j); a point that
fails is kept as a flagged row.
"""

from __future__ import annotations

import math
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from src.config.constants import DRIFT
from src.control.loop import run_loop
from src.control.policy import ControlPolicy, Scheme
from src.exceptions import DriftCtlError, FitError, ParameterError, UndefinedEfficiencyError
from src.noise.generators import NoiseSpec, generate
from src.noise.trace import NoiseTrace
from src.observability.logging import SweepLogger
from src.observability.metrics import record_stage, record_sweep_point
from src.predictor.models import PredictorKind, PredictorModel, bind_trace
from src.ramsey.curve import RamseyCurve
from src.ramsey.simulate import RamseyConfig, check_sweep_span, simulate_ramsey
from src.spectral.lorentzian import fit_lorentzian, select_peak_count
from src.spectral.ramsey_fit import fit_ramsey_decay
from src.spectral.spectrum import WindowName, fft_spectrum
from src.tracking import track
from src.tracking.config import LiaConfig, TrackerConfig
from src.tracking.estimates import EstimateStream
from src.utils.io import csv_text

SWEEP_HEADER = ("nu_hz", "l_hz", "l_sigma_hz", "t2_star_s", "flag")
SWEEP_DETAIL_HEADER = SWEEP_HEADER + ("label", "scheme", "efficiency", "preferred_peaks")

FLAG_OK = "ok"
FLAG_T2_UNRELIABLE = "t2_unreliable"
FLAG_FAILED = "failed"


class SweepAnalysis(BaseModel):
    """How each point's Ramsey curve is reduced to (l, T2*).

    The spectrum window defaults to boxcar: a fringe record is largest at
    its first sample, where a Hann taper is zero.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    decay_exponent: float | None = Field(default=None, gt=0)
    fit_half_width_hz: float | None = Field(default=None, gt=0)
    window: WindowName = "boxcar"
    zero_pad_factor: int = Field(default=8, ge=1)
    select_peaks: bool = False


class DoubletCalibration(BaseModel):
    """Split the Ramsey line by a multiple of one point's single-line width."""

    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    reference: str = Field(..., min_length=1, description="Label of the point whose width sets the split")
    split_factor: float = Field(default=DRIFT.DOUBLET_SPLIT_FACTOR, gt=0)


@dataclass(frozen=True, eq=False)
class SweepPoint:
    """One (scheme, tau) configuration.

    Attributes:
        label: Row label
        scheme: Correction scheme
        update_period_s: tau; nu = 1/tau
        tracker: Tracker for feedback/feedforward (sweep default when None)
        horizon_s: Feedforward lead (None cancels the tracker latency)
    """

    label: str
    scheme: Scheme
    update_period_s: float
    tracker: TrackerConfig | None = None
    horizon_s: float | None = None

    @property
    def nu_hz(self) -> float:
        return 1.0 / self.update_period_s

    @property
    def needs_estimates(self) -> bool:
        return self.scheme in (Scheme.FEEDBACK, Scheme.FEEDFORWARD)


@dataclass(frozen=True)
class SweepRow:
    """Result of one sweep point; NaN fields when the point failed."""

    nu_hz: float
    l_hz: float
    l_sigma_hz: float
    t2_star_s: float
    flag: str
    label: str
    scheme: str
    efficiency: float = math.nan
    preferred_peaks: int = 0
    error: dict[str, Any] | None = None

    @property
    def failed(self) -> bool:
        return self.flag == FLAG_FAILED

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "nu_hz": self.nu_hz,
            "l_hz": self.l_hz,
            "l_sigma_hz": self.l_sigma_hz,
            "t2_star_s": self.t2_star_s,
            "flag": self.flag,
            "label": self.label,
            "scheme": self.scheme,
            "efficiency": self.efficiency,
            "preferred_peaks": self.preferred_peaks,
        }
        if self.error is not None:
            doc["error"] = self.error
        return doc


@dataclass
class SweepResult:
    """Rows in input order plus the Ramsey curves of successful points."""

    rows: list[SweepRow]
    curves: dict[str, RamseyCurve] = field(default_factory=dict)

    @property
    def failed(self) -> int:
        return sum(row.failed for row in self.rows)

    def law_points(self) -> list[tuple[float, float]]:
        """(nu, l) of every successful row, ready for fit_linewidth_law."""
        return [(r.nu_hz, r.l_hz) for r in self.rows if not r.failed]

    def to_csv(self, detailed: bool = False) -> str:
        header = SWEEP_DETAIL_HEADER if detailed else SWEEP_HEADER
        return csv_text(header, (tuple(r.to_dict()[h] for h in header) for r in self.rows))


def points_from_speeds(
    speeds_hz: Sequence[float],
    scheme: Scheme,
    tracker: TrackerConfig | None = None,
    horizon_s: float | None = None,
) -> list[SweepPoint]:
    """Uniform-scheme sweep over update speeds."""
    points = []
    for nu in speeds_hz:
        if not (math.isfinite(nu) and nu > 0):
            raise ParameterError("speeds_hz", nu, "must be finite and > 0")
        points.append(SweepPoint(f"{scheme.value}@{nu:g}Hz", scheme, 1.0 / nu, tracker, horizon_s))
    return points


def fit_window(ramsey: RamseyConfig, analysis: SweepAnalysis) -> tuple[float, float] | None:
    if ramsey.bias_hz <= 0:
        return None
    half = analysis.fit_half_width_hz or 0.5 * ramsey.bias_hz
    return (max(ramsey.bias_hz - half, 0.0), ramsey.bias_hz + half)


def analyse_curve(
    curve: RamseyCurve,
    ramsey: RamseyConfig,
    analysis: SweepAnalysis | None = None,
) -> tuple[float, float, float, bool, int]:
    """(l_hz, l_sigma_hz, t2_star_s, t2_reliable, preferred_peaks) of one curve.

    Raises:
        FitError: Lorentzian or decay fit failed
        InvalidTraceError: the grid is not uniform
    """
    analysis = analysis or SweepAnalysis()
    spectrum = fft_spectrum(
        curve.signal,
        curve.step_s,
        window=analysis.window,
        zero_pad_factor=analysis.zero_pad_factor,
    )
    window = fit_window(ramsey, analysis)
    if analysis.select_peaks:
        selection = select_peak_count(spectrum, window=window)
        line_fit, preferred = selection.one, selection.preferred
    else:
        line_fit, preferred = fit_lorentzian(spectrum, 1, window=window), 1
    peak = line_fit.peaks[0]
    exponent = analysis.decay_exponent or ramsey.decay_exponent
    decay = fit_ramsey_decay(curve, decay_exponent=exponent)
    return peak.hwhm_hz, peak.hwhm_sigma_hz, decay.t2_star_s, decay.reliable, preferred


def _failed_row(point: SweepPoint, exc: DriftCtlError, eta: float = math.nan) -> SweepRow:
    return SweepRow(
        nu_hz=point.nu_hz,
        l_hz=math.nan,
        l_sigma_hz=math.nan,
        t2_star_s=math.nan,
        flag=FLAG_FAILED,
        label=point.label,
        scheme=point.scheme.value,
        efficiency=eta,
        error=exc.to_dict(),
    )


def sweep_linewidth(
    noise: NoiseTrace | NoiseSpec,
    points: Sequence[SweepPoint],
    ramsey: RamseyConfig,
    seed: int,
    tracker: TrackerConfig | None = None,
    predictor: PredictorModel | None = None,
    analysis: SweepAnalysis | None = None,
    max_workers: int = 1,
    duration_s: float = DRIFT.DEFAULT_DURATION_S,
    dt_s: float = DRIFT.DEFAULT_DT_S,
) -> SweepResult:
    """Ramsey linewidth and T2* for every sweep point.

    Args:
        noise: Trace, or a noise spec generated with duration_s and dt_s
        points: Sweep points, evaluated concurrently, returned in order
        ramsey: Acquisition settings; start_s defaults to each loop's warm-up end
        seed: Root seed (noise, tracker and readout streams)
        tracker: Default tracker for points that carry none
        predictor: Forecaster for feedforward points; oracles are bound to the trace
        analysis: Spectrum and fit options
        max_workers: Threads evaluating points concurrently

    Raises:
        ParameterError: tau below the trace dt, a grid pass too slow for tau,
            or a feedforward point without a predictor

    Usage:
        points = points_from_speeds([0.0033, 0.1, 0.2], Scheme.IDEAL_FEEDBACK)
        result = sweep_linewidth(spec, points, RamseyConfig(), seed=1)
        fit_linewidth_law(result.law_points())
    """
    analysis = analysis or SweepAnalysis()
    trace = noise if isinstance(noise, NoiseTrace) else generate(noise, duration_s, dt_s, label="sweep")
    default_tracker: TrackerConfig = tracker or LiaConfig()

    for point in points:
        if point.update_period_s < trace.dt_s * (1 - DRIFT.GRID_SNAP_REL):
            raise ParameterError("update_period_s", point.update_period_s, f"below trace dt={trace.dt_s:g} s")
        check_sweep_span(ramsey, point.update_period_s)
        if point.scheme is Scheme.FEEDFORWARD and predictor is None:
            raise ParameterError("predictor", None, f"feedforward point {point.label!r} needs a predictor")

    if predictor is not None and predictor.kind is PredictorKind.ORACLE and predictor.oracle_trace is None:
        predictor = bind_trace(predictor, trace)

    streams: dict[TrackerConfig, EstimateStream | DriftCtlError] = {}
    for point in points:
        cfg = point.tracker or default_tracker
        if point.needs_estimates and cfg not in streams:
            try:
                streams[cfg] = track(trace, cfg, seed)
            except DriftCtlError as exc:
                streams[cfg] = exc

    log = SweepLogger(len(points))

    def evaluate(job: tuple[int, SweepPoint]) -> tuple[SweepRow, RamseyCurve | None]:
        index, point = job
        started = time.perf_counter()
        eta = math.nan
        try:
            estimates = None
            if point.needs_estimates:
                found = streams[point.tracker or default_tracker]
                if isinstance(found, DriftCtlError):
                    raise found
                estimates = found
            policy = ControlPolicy(
                scheme=point.scheme,
                update_period_s=point.update_period_s,
                predictor=predictor if point.scheme is Scheme.FEEDFORWARD else None,
                horizon_s=point.horizon_s,
            )
            run = run_loop(trace, estimates, policy)
            try:
                eta = run.efficiency()
            except UndefinedEfficiencyError:
                eta = math.nan
            cfg = ramsey
            if ramsey.start_s is None:
                cfg = ramsey.model_copy(update={"start_s": run.warmup_end_s})
            curve = simulate_ramsey(run.residual, cfg, seed, stream=index)
            l_hz, l_sigma, t2, reliable, preferred = analyse_curve(curve, ramsey, analysis)
        except DriftCtlError as exc:
            record_sweep_point("failed")
            log.point_failed(point.label, point.nu_hz, exc.to_dict())
            return _failed_row(point, exc, eta), None
        finally:
            record_stage("sweep_point", time.perf_counter() - started)

        record_sweep_point("ok")
        log.point_completed(point.label, point.nu_hz, l_hz, t2)
        row = SweepRow(
            nu_hz=point.nu_hz,
            l_hz=l_hz,
            l_sigma_hz=l_sigma,
            t2_star_s=t2,
            flag=FLAG_OK if reliable else FLAG_T2_UNRELIABLE,
            label=point.label,
            scheme=point.scheme.value,
            efficiency=eta,
            preferred_peaks=preferred,
        )
        return row, curve

    jobs = list(enumerate(points))
    if max_workers <= 1:
        outcomes = [evaluate(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(evaluate, jobs))

    result = SweepResult(rows=[row for row, _ in outcomes])
    for row, curve in outcomes:
        if curve is not None:
            result.curves[row.label] = curve
    return result


def calibrate_split(
    trace: NoiseTrace,
    points: Sequence[SweepPoint],
    ramsey: RamseyConfig,
    seed: int,
    calibration: DoubletCalibration,
    tracker: TrackerConfig | None = None,
    predictor: PredictorModel | None = None,
    analysis: SweepAnalysis | None = None,
) -> float:
    """split_factor times the single-line width of the reference point.

    The reference point is run once with line_split_hz = 0 and a one-line fit.

    Raises:
        ParameterError: no point carries the reference label
        FitError: the reference point failed

    Usage:
        split = calibrate_split(trace, points, ramsey, 7, DoubletCalibration(reference="lia_feedforward"))
        sweep_linewidth(trace, points, ramsey.model_copy(update={"line_split_hz": split}), 7)
    """
    reference = next((p for p in points if p.label == calibration.reference), None)
    if reference is None:
        raise ParameterError("doublet.reference", calibration.reference, "no sweep point has this label")
    single_line = ramsey.model_copy(update={"line_split_hz": 0.0})
    one_peak = (analysis or SweepAnalysis()).model_copy(update={"select_peaks": False})
    row = sweep_linewidth(
        trace, [reference], single_line, seed, tracker=tracker, predictor=predictor, analysis=one_peak
    ).rows[0]
    if row.failed:
        reason = row.error["message"] if row.error else "unknown error"
        raise FitError("doublet_calibration", f"reference point {reference.label!r} failed: {reason}")
    split = calibration.split_factor * row.l_hz
    SweepLogger(1).split_calibrated(reference.label, row.l_hz, split)
    return split
