"""Tracker configuration schemas."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config.constants import DRIFT


class OdmrConfig(BaseModel):
    """ODMR sweep tracker.

    A Lorentzian dip is swept across [centre - range/2, centre + range/2]
    once per period. When `dwell_s` is omitted the sweep fills the whole
    period; `linewidth_hz` (HWHM) defaults to range_hz * 0.2.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    f0_hz: float = Field(default=0.0, description="Initial sweep centre (Hz offset)")
    range_hz: float = Field(default=200e3, gt=0, description="Sweep span")
    n_points: int = Field(default=41, ge=3, description="Sweep points")
    dwell_s: float | None = Field(default=None, gt=0, description="Per-point dwell")
    period_s: float = Field(default=DRIFT.ODMR_PERIOD_S, gt=0, description="Tracking period")
    contrast: float = Field(default=0.1, gt=0, le=1, description="Dip depth")
    count_rate_hz: float = Field(default=1e5, gt=0, description="Off-resonance photon rate")
    linewidth_hz: float | None = Field(default=None, gt=0, description="Dip HWHM")
    shot_noise: bool = Field(default=True, description="Poisson counts; False = noiseless limit")

    @model_validator(mode="after")
    def _check_sweep_fits(self) -> OdmrConfig:
        limit = self.period_s * (1 + DRIFT.GRID_SNAP_REL)
        if self.dwell_s is not None and self.dwell_s * self.n_points > limit:
            raise ValueError("dwell_s * n_points exceeds period_s")
        return self

    @property
    def effective_dwell_s(self) -> float:
        return self.dwell_s if self.dwell_s is not None else self.period_s / self.n_points

    @property
    def sweep_duration_s(self) -> float:
        return self.effective_dwell_s * self.n_points

    @property
    def effective_linewidth_hz(self) -> float:
        if self.linewidth_hz is not None:
            return self.linewidth_hz
        return self.range_hz * DRIFT.ODMR_LINEWIDTH_FRACTION

    @property
    def latency_s(self) -> float:
        """End of period minus sweep midpoint."""
        return self.period_s - 0.5 * self.sweep_duration_s


class LiaConfig(BaseModel):
    """Lock-in tracker: trailing moving average plus Gaussian noise."""

    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    window_s: float = Field(default=DRIFT.LIA_WINDOW_S, gt=0, description="Detection window w")
    update_period_s: float = Field(default=DRIFT.LIA_UPDATE_PERIOD_S, gt=0, description="Cadence")
    sigma_floor_hz: float = Field(default=0.0, ge=0, description="Noise at 1 s integration")
    capture_range_hz: float = Field(default=1e6, gt=0, description="Max trackable offset")

    @property
    def latency_s(self) -> float:
        return 0.5 * self.window_s

    @property
    def sigma_hz(self) -> float:
        return self.sigma_floor_hz / self.window_s**0.5


TrackerConfig = OdmrConfig | LiaConfig


class TrackerSection(BaseModel):
    """`tracker` block of a run config."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    method: Literal["odmr", "lia"] = "lia"
    odmr: OdmrConfig = Field(default_factory=OdmrConfig)
    lia: LiaConfig = Field(default_factory=LiaConfig)

    @property
    def selected(self) -> TrackerConfig:
        return self.odmr if self.method == "odmr" else self.lia
