"""Ramsey measurement simulator.

Each shot at wall-clock time s with free evolution t sees the detuning
delta = bias_hz + residual(s) and has bright-state population

    p = 1/2 * [1 + exp(-(t / T2)^p_exp) * cos(2 pi delta t)]

With line_split_hz > 0 the cosine is replaced by the mean of two lines
at delta +- split/2. Shots run in wall-clock order with one shot per
shot_wall_time_s; interleaved acquisition cycles through the grid once
per sweep, sequential acquisition finishes one grid point before the
next.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config.constants import DRIFT
from src.exceptions import CoverageError, ParameterError
from src.noise.trace import NoiseTrace
from src.ramsey.curve import RamseyCurve
from src.utils.seeding import derive_rng

Array = NDArray[np.float64]

# Shots simulated per vectorised block
_CHUNK_SHOTS = 1 << 20


class RamseyConfig(BaseModel):
    """Ramsey acquisition settings.

    The free-evolution grid is `t_evol_s` when given, otherwise
    start, start + step, ... up to stop inclusive.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    bias_hz: float = Field(default=DRIFT.RAMSEY_BIAS_HZ, ge=0)
    t_evol_s: tuple[float, ...] | None = None
    t_evol_start_s: float = Field(default=20e-9, gt=0)
    t_evol_stop_s: float = Field(default=6e-6, gt=0)
    t_evol_step_s: float = Field(default=20e-9, gt=0)
    shots_per_point: int | None = Field(default=None, ge=1)
    shot_wall_time_s: float = Field(default=DRIFT.SHOT_WALL_TIME_S, gt=0)
    intrinsic_t2_s: float | None = Field(default=20e-6, gt=0)
    decay_exponent: float = Field(default=1.0, gt=0)
    readout: Literal["ideal", "projective", "photon"] = "ideal"
    contrast: float = Field(default=0.3, gt=0, le=1)
    photons_per_shot: float = Field(default=0.05, gt=0)
    line_split_hz: float = Field(default=0.0, ge=0)
    acquisition: Literal["interleaved", "sequential"] = "interleaved"
    max_sweep_fraction: float = Field(default=DRIFT.MAX_SWEEP_FRACTION, gt=0)
    start_s: float | None = None

    @model_validator(mode="after")
    def _check_grid(self) -> RamseyConfig:
        if self.t_evol_s is not None:
            grid = np.asarray(self.t_evol_s)
            if grid.size == 0 or grid[0] <= 0 or np.any(np.diff(grid) <= 0):
                raise ValueError("t_evol_s must be non-empty, positive and ascending")
        elif self.t_evol_stop_s < self.t_evol_start_s:
            raise ValueError("t_evol_stop_s must be >= t_evol_start_s")
        return self

    def grid(self) -> Array:
        """Free-evolution times in seconds."""
        if self.t_evol_s is not None:
            return np.asarray(self.t_evol_s, dtype=np.float64)
        count = int(math.floor((self.t_evol_stop_s - self.t_evol_start_s) / self.t_evol_step_s + 1e-9)) + 1
        return self.t_evol_start_s + np.arange(count) * self.t_evol_step_s

    @property
    def sweep_wall_time_s(self) -> float:
        """Wall-clock span of one pass over the grid."""
        return self.grid().size * self.shot_wall_time_s


def check_sweep_span(cfg: RamseyConfig, update_period_s: float) -> None:
    """Require one grid pass to fit in max_sweep_fraction of an update period.

    Raises:
        ParameterError: the pass is too slow for the update period
    """
    limit = cfg.max_sweep_fraction * update_period_s
    if cfg.sweep_wall_time_s > limit * (1 + DRIFT.GRID_SNAP_REL):
        raise ParameterError(
            "shot_wall_time_s",
            cfg.shot_wall_time_s,
            f"one grid pass takes {cfg.sweep_wall_time_s:g} s, over {limit:g} s "
            f"({cfg.max_sweep_fraction:g} of the {update_period_s:g} s update period)",
        )


def _shots_per_point(cfg: RamseyConfig, points: int, start_s: float, residual: NoiseTrace) -> int:
    available = residual.t_end_s - start_s
    if cfg.shots_per_point is not None:
        required = (cfg.shots_per_point * points - 1) * cfg.shot_wall_time_s
        if required > available * (1 + DRIFT.GRID_SNAP_REL) + DRIFT.GRID_SNAP_REL:
            raise CoverageError("simulate_ramsey", required, max(available, 0.0))
        return cfg.shots_per_point
    fill = int(math.floor((available / cfg.shot_wall_time_s + 1.0) / points + 1e-9))
    if fill < 1:
        raise CoverageError("simulate_ramsey", (points - 1) * cfg.shot_wall_time_s, max(available, 0.0))
    return fill


def _population(cfg: RamseyConfig, t: Array, delta: Array) -> Array:
    phase = 2.0 * math.pi * t
    if cfg.line_split_hz > 0:
        half = 0.5 * cfg.line_split_hz
        fringe = 0.5 * (np.cos(phase * (delta + half)) + np.cos(phase * (delta - half)))
    else:
        fringe = np.cos(phase * delta)
    if cfg.intrinsic_t2_s is not None:
        fringe = fringe * np.exp(-((t / cfg.intrinsic_t2_s) ** cfg.decay_exponent))
    return 0.5 * (1.0 + fringe)


def _read_out(cfg: RamseyConfig, p: Array, rng: np.random.Generator) -> Array:
    if cfg.readout == "ideal":
        return p
    if cfg.readout == "projective":
        return (rng.random(p.shape) < p).astype(np.float64)
    # Photon counts; the dark state is dimmer by `contrast`. Rescaled to an unbiased population estimate.
    mean = cfg.photons_per_shot * (1.0 - cfg.contrast * (1.0 - p))
    counts = rng.poisson(mean).astype(np.float64)
    return 1.0 - (1.0 - counts / cfg.photons_per_shot) / cfg.contrast


def simulate_ramsey(
    residual: NoiseTrace,
    cfg: RamseyConfig,
    seed: int,
    stream: int = 0,
) -> RamseyCurve:
    """Average Ramsey shots taken under a residual-detuning trace.

    Args:
        residual: Detuning left after correction, Hz
        cfg: Acquisition settings
        seed: Root seed; readout draws use the (seed, "ramsey", stream) stream
        stream: Sub-stream index (the sweep point)

    Raises:
        CoverageError: the trace ends before the last shot

    Usage:
        curve = simulate_ramsey(run.residual, RamseyConfig(shots_per_point=200), seed=7)
        fit_ramsey_decay(curve).t2_star_s
    """
    grid = cfg.grid()
    points = grid.size
    start = residual.t0_s if cfg.start_s is None else cfg.start_s
    if start < residual.t0_s - DRIFT.GRID_SNAP_REL * max(1.0, abs(residual.t0_s)):
        raise CoverageError("simulate_ramsey", residual.t0_s - start, 0.0)
    shots = _shots_per_point(cfg, points, start, residual)
    rng = derive_rng(seed, "ramsey", stream)

    total = np.zeros(points)
    total_sq = np.zeros(points)
    column = np.arange(points, dtype=np.float64)
    rows_per_chunk = max(1, _CHUNK_SHOTS // points)
    for r0 in range(0, shots, rows_per_chunk):
        rows = np.arange(r0, min(r0 + rows_per_chunk, shots), dtype=np.float64)[:, None]
        if cfg.acquisition == "interleaved":
            index = rows * points + column
        else:
            index = column * shots + rows
        wall = start + index * cfg.shot_wall_time_s
        delta = cfg.bias_hz + residual.value_at(wall)
        values = _read_out(cfg, _population(cfg, grid[None, :], delta), rng)
        total += values.sum(axis=0)
        total_sq += (values**2).sum(axis=0)

    mean = total / shots
    if shots > 1:
        var = np.maximum(total_sq - shots * mean**2, 0.0) / (shots - 1)
        stderr = np.sqrt(var / shots)
    else:
        stderr = np.zeros(points)
    return RamseyCurve(
        t_evol_s=grid,
        signal=mean,
        stderr=stderr,
        shots_per_point=shots,
        start_s=float(start),
        end_s=float(start + (shots * points - 1) * cfg.shot_wall_time_s),
        acquisition=cfg.acquisition,
    )
