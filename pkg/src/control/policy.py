"""Control policies - how each correction value is chosen."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from src.exceptions import ParameterError
from src.predictor.models import PredictorModel


class Scheme(Enum):
    """Correction schemes."""

    FEEDBACK = "feedback"  # latest available estimate
    FEEDFORWARD = "feedforward"  # predicted value from the latest M estimates
    IDEAL_FEEDBACK = "ideal_feedback"  # true value at the update instant
    OPEN_LOOP = "open_loop"  # no correction

    @classmethod
    def parse(cls, name: str) -> Scheme:
        """Accept CLI short forms `ideal` and `open`."""
        aliases = {"ideal": cls.IDEAL_FEEDBACK, "open": cls.OPEN_LOOP}
        if name in aliases:
            return aliases[name]
        try:
            return cls(name)
        except ValueError as exc:
            raise ParameterError("scheme", name, f"must be one of {[s.value for s in cls]}") from exc


@dataclass(frozen=True, eq=False)
class ControlPolicy:
    """Scheme, update period and (feedforward) predictor.

    Attributes:
        scheme: Correction scheme
        update_period_s: Sample-and-hold period tau
        predictor: Forecaster (feedforward only)
        horizon_s: Lead of the applied prediction past the newest estimate's
            effective time; None targets the update instant itself, which
            cancels the tracker latency

    Usage:
        policy = ControlPolicy(Scheme.FEEDBACK, update_period_s=10.0)
        run = run_loop(trace, estimates, policy)
    """

    scheme: Scheme
    update_period_s: float
    predictor: PredictorModel | None = None
    horizon_s: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.update_period_s) and self.update_period_s > 0):
            raise ParameterError("update_period_s", self.update_period_s, "must be finite and > 0")
        if self.scheme is Scheme.FEEDFORWARD:
            if self.predictor is None:
                raise ParameterError("predictor", None, "feedforward needs a predictor")
            if self.horizon_s is not None and not self.horizon_s >= 0:
                raise ParameterError("horizon_s", self.horizon_s, "must be >= 0")

    @property
    def update_speed_hz(self) -> float:
        return 1.0 / self.update_period_s


class ControlSection(BaseModel):
    """`control` block of a run config."""

    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    scheme: Literal["feedback", "feedforward", "ideal_feedback", "open_loop"] = "feedback"
    update_period_s: float = Field(default=10.0, gt=0)
    horizon_s: float | None = Field(default=None, ge=0)
    include_warmup: bool = False
    model_path: str | None = None
    speeds_hz: tuple[float, ...] = Field(default=(), description="Extra update speeds for the efficiency curve")

    @property
    def selected_scheme(self) -> Scheme:
        return Scheme(self.scheme)
