"""Closed-loop engine - sample-and-hold corrections.

Corrections change only at the update instants t_k = t0 + k * tau and
hold until the next one, so sample i sees the correction of the latest
t_k <= t_i. The residual is trace - correction on the trace's own grid.

Before the first usable estimate the correction is 0 (warm-up); those
samples are excluded from the efficiency unless asked for.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray

from src.config.constants import DRIFT
from src.control.efficiency import efficiency
from src.control.policy import ControlPolicy, Scheme
from src.exceptions import DriftCtlError, OracleBindingError, ParameterError
from src.noise.trace import NoiseTrace
from src.observability.logging import ControlLogger
from src.observability.metrics import update_efficiency
from src.predictor.models import PredictorKind, predict
from src.tracking.estimates import EstimateFlag, EstimateStream
from src.utils.io import csv_text

Array = NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class ControlRun:
    """Outcome of one loop simulation.

    Attributes:
        scheme: Scheme used
        update_period_s: tau
        update_times: t_k, one per correction
        corrections: Correction in effect from t_k on
        original: Input trace
        residual: original - correction, same grid
        estimates: Stream the loop consumed (None for ideal/open loop)
        warmup_end_s: First t_k whose correction came from the scheme
        held_updates: Updates that used a flagged (held) estimate
        predictor_failures: Updates where the predictor failed and the
            previous correction was kept
        horizon_steps: Forecast step applied per update (feedforward; else 0)
    """

    scheme: Scheme
    update_period_s: float
    update_times: Array
    corrections: Array
    original: NoiseTrace
    residual: NoiseTrace
    estimates: EstimateStream | None
    warmup_end_s: float
    held_updates: int = 0
    predictor_failures: int = 0
    horizon_steps: int = 0

    @property
    def warmup_samples(self) -> int:
        """Samples strictly before warmup_end_s."""
        pos = self.original.grid_position(self.warmup_end_s)
        return int(min(max(math.ceil(float(pos)), 0), len(self.original)))

    def efficiency(self, include_warmup: bool = False) -> float:
        start = 0 if include_warmup else self.warmup_samples
        if start >= len(self.original):
            start = len(self.original) - 1
        return efficiency(self.original, self.residual, start_index=start)

    def corrections_csv(self) -> str:
        """`t_s,correction_hz` step points."""
        return csv_text(
            ("t_s", "correction_hz"),
            ((float(t), float(c)) for t, c in zip(self.update_times, self.corrections, strict=True)),
        )

    def residual_csv(self) -> str:
        """`time_s,original_hz,residual_hz` per sample."""
        return csv_text(
            ("time_s", "original_hz", "residual_hz"),
            (
                (float(t), float(o), float(r))
                for t, o, r in zip(self.original.times, self.original.values, self.residual.values, strict=True)
            ),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "scheme": self.scheme.value,
            "update_period_s": self.update_period_s,
            "updates": int(self.update_times.size),
            "warmup_end_s": self.warmup_end_s,
            "held_updates": self.held_updates,
            "predictor_failures": self.predictor_failures,
            "horizon_steps": self.horizon_steps,
            "estimate_latency_s": self.estimates.latency_s if self.estimates else 0.0,
            "residual_rms_hz": self.residual.rms(),
            "original_rms_hz": self.original.rms(),
        }


def update_instants(trace: NoiseTrace, update_period_s: float) -> Array:
    """t0 + k * tau for every k with t_k within the trace."""
    count = int(math.floor(trace.duration_s / update_period_s * (1 + DRIFT.GRID_SNAP_REL))) + 1
    return trace.t0_s + np.arange(count) * update_period_s


def hold_indices(trace: NoiseTrace, update_period_s: float) -> NDArray[np.int64]:
    """Index k of the correction in effect at each sample."""
    ratio = np.arange(len(trace)) * (trace.dt_s / update_period_s)
    nearest = np.rint(ratio)
    tol = DRIFT.GRID_SNAP_REL * np.maximum(1.0, nearest)
    snapped = np.where(np.abs(ratio - nearest) <= tol, nearest, ratio)
    return np.floor(snapped).astype(np.int64)


def _require_estimates(policy: ControlPolicy, estimates: EstimateStream | None) -> EstimateStream:
    if estimates is None:
        raise ParameterError("estimates", None, f"{policy.scheme.value} needs an estimate stream")
    return estimates


def run_loop(
    trace: NoiseTrace,
    estimates: EstimateStream | None,
    policy: ControlPolicy,
) -> ControlRun:
    """Simulate the correction loop over the whole trace.

    Args:
        trace: True resonance offset
        estimates: Tracker output (feedback and feedforward)
        policy: Scheme, tau and predictor

    Raises:
        ParameterError: feedback/feedforward without estimates
        OracleBindingError: oracle predictor without a bound trace
    """
    scheme = policy.scheme
    times = update_instants(trace, policy.update_period_s)
    corrections = np.zeros(times.size)
    log = ControlLogger(scheme.value)
    warmup_end = float(trace.t0_s)
    held = failures = steps_used = 0

    if scheme is Scheme.IDEAL_FEEDBACK:
        corrections = np.asarray(trace.value_at(times), dtype=np.float64)
    elif scheme is Scheme.FEEDBACK:
        stream = _require_estimates(policy, estimates)
        values = stream.values
        usable = [e.flag is EstimateFlag.VALID for e in stream.entries]
        index = stream.available_indices(times)
        ready = np.flatnonzero(index >= 0)
        corrections[ready] = values[index[ready]]
        held = sum(not usable[j] for j in index[ready])
        warmup_end = float(times[ready[0]]) if ready.size else float(trace.t_end_s)
    elif scheme is Scheme.FEEDFORWARD:
        stream = _require_estimates(policy, estimates)
        model = policy.predictor
        assert model is not None
        if model.kind is PredictorKind.ORACLE and model.oracle_trace is None:
            raise OracleBindingError()
        cadence = stream.cadence_s
        if not (math.isfinite(cadence) and cadence > 0):
            raise ParameterError("cadence_s", cadence, "feedforward needs a positive estimate cadence")
        values = stream.values
        t_eff = stream.t_eff
        usable = [e.flag is EstimateFlag.VALID for e in stream.entries]
        index = stream.available_indices(times)
        first = None
        previous = 0.0
        for k, j in enumerate(index):
            if j + 1 < model.m:
                continue
            first = k if first is None else first
            lead = float(times[k]) - t_eff[j] if policy.horizon_s is None else policy.horizon_s
            step = int(min(max(round(lead / cadence), 1), model.n))
            try:
                forecast = predict(
                    model,
                    values[j - model.m + 1 : j + 1],
                    t_last_s=float(t_eff[j]),
                    cadence_s=cadence,
                )
                value = float(forecast[step - 1])
                if not math.isfinite(value):
                    raise ValueError(f"non-finite prediction {value}")
            except (DriftCtlError, ValueError) as exc:
                failures += 1
                log.predictor_failed(float(times[k]), str(exc))
                corrections[k] = previous
                continue
            corrections[k] = previous = value
            steps_used = step
            held += not usable[j]
        warmup_end = float(times[first]) if first is not None else float(trace.t_end_s)

    applied = corrections[np.minimum(hold_indices(trace, policy.update_period_s), times.size - 1)]
    residual = trace.with_values(trace.values - applied, label=f"residual:{scheme.value}")
    run = ControlRun(
        scheme=scheme,
        update_period_s=policy.update_period_s,
        update_times=times,
        corrections=corrections,
        original=trace,
        residual=residual,
        estimates=estimates if scheme in (Scheme.FEEDBACK, Scheme.FEEDFORWARD) else None,
        warmup_end_s=warmup_end,
        held_updates=int(held),
        predictor_failures=failures,
        horizon_steps=steps_used,
    )
    log.loop_completed(policy.update_period_s, int(times.size), warmup_end - trace.t0_s, residual.rms())
    return run


@dataclass(frozen=True)
class EfficiencyPoint:
    """eta at one update speed."""

    nu_hz: float
    update_period_s: float
    efficiency: float


def efficiency_curve(
    trace: NoiseTrace,
    speeds_hz: list[float] | tuple[float, ...],
    scheme: Scheme,
    estimates: EstimateStream | None = None,
    policy_template: ControlPolicy | None = None,
    include_warmup: bool = False,
    max_workers: int = 1,
) -> list[EfficiencyPoint]:
    """eta for each update speed nu = 1/tau, in input order.

    Args:
        trace: True resonance offset
        speeds_hz: Update speeds; each tau = 1/nu must be >= trace dt
        scheme: Correction scheme
        estimates: Shared tracker output (feedback/feedforward)
        policy_template: Supplies predictor and horizon for feedforward
        include_warmup: Count warm-up samples in eta
        max_workers: Threads evaluating speeds concurrently

    Raises:
        ParameterError: a speed is non-positive or tau < dt
    """
    for nu in speeds_hz:
        if not (math.isfinite(nu) and nu > 0):
            raise ParameterError("speed_hz", nu, "must be finite and > 0")
        if 1.0 / nu < trace.dt_s * (1 - DRIFT.GRID_SNAP_REL):
            raise ParameterError("speed_hz", nu, f"period 1/nu is shorter than dt={trace.dt_s:g} s")

    def evaluate(nu: float) -> EfficiencyPoint:
        policy = ControlPolicy(
            scheme=scheme,
            update_period_s=1.0 / nu,
            predictor=policy_template.predictor if policy_template else None,
            horizon_s=policy_template.horizon_s if policy_template else None,
        )
        run = run_loop(trace, estimates, policy)
        eta = run.efficiency(include_warmup=include_warmup)
        return EfficiencyPoint(nu_hz=float(nu), update_period_s=1.0 / nu, efficiency=eta)

    if max_workers <= 1:
        points = [evaluate(nu) for nu in speeds_hz]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            points = list(pool.map(evaluate, speeds_hz))
    if points:
        update_efficiency(scheme.value, points[-1].efficiency)
    return points
