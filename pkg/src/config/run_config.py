"""Run configuration - the JSON document every CLI command reads.

One object with `seed` (required) and optional sections. Unknown keys
are rejected so that typos fail loudly, with the dotted path of the
offending field in the error.

Example:
    {
      "seed": 7,
      "noise": {"duration_s": 20000, "dt_s": 1.0,
                "components": [{"kind": "ou", "relaxation_rate": 0.001, "stationary_std": 30000}]},
      "tracker": {"method": "lia", "lia": {"window_s": 20}},
      "control": {"scheme": "feedback", "update_period_s": 10}
    }
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.config.constants import DRIFT
from src.config.validation import parse_model
from src.control.policy import ControlSection, Scheme
from src.exceptions import InvalidConfigError, MissingConfigError
from src.noise.generators import MAX_SEED, NoiseComponent, NoiseSpec
from src.predictor.training import TrainConfig
from src.ramsey.simulate import RamseyConfig
from src.ramsey.sweep import DoubletCalibration, SweepAnalysis, SweepPoint
from src.tracking.config import TrackerSection

_STRICT = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class NoiseSection(BaseModel):
    """Synthetic trace: components on a uniform grid."""

    model_config = _STRICT

    components: list[NoiseComponent] = Field(default_factory=list)
    duration_s: float = Field(default=DRIFT.DEFAULT_DURATION_S, gt=0)
    dt_s: float = Field(default=DRIFT.DEFAULT_DT_S, gt=0)

    def spec(self, seed: int) -> NoiseSpec:
        return NoiseSpec(components=list(self.components), seed=seed)


class PredictorSection(BaseModel):
    """Forecaster for the feedforward scheme.

    An lstm is loaded from `control.model_path` when set, otherwise it is
    trained on the tracker estimates of an independent history trace
    (same noise components, seed stream "history").
    """

    model_config = _STRICT

    kind: Literal["lstm", "persistence", "linear_extrap", "oracle"] = "persistence"
    m: int = Field(default=60, ge=1)
    n: int = Field(default=20, ge=1)
    hidden: int = Field(default=16, ge=1)
    train: TrainConfig = Field(default_factory=TrainConfig)
    history_duration_s: float | None = Field(default=None, gt=0)


class SweepPointConfig(BaseModel):
    """One sweep point; give exactly one of update_period_s and speed_hz."""

    model_config = _STRICT

    label: str | None = None
    scheme: Literal["feedback", "feedforward", "ideal_feedback", "open_loop"]
    update_period_s: float | None = Field(default=None, gt=0)
    speed_hz: float | None = Field(default=None, gt=0)
    tracker: Literal["odmr", "lia"] | None = None
    horizon_s: float | None = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _one_timing(self) -> SweepPointConfig:
        if (self.update_period_s is None) == (self.speed_hz is None):
            raise ValueError("give exactly one of update_period_s and speed_hz")
        return self

    @property
    def period_s(self) -> float:
        if self.update_period_s is not None:
            return self.update_period_s
        assert self.speed_hz is not None
        return 1.0 / self.speed_hz


class SweepSection(BaseModel):
    """Explicit points, or a uniform scheme over `speeds_hz`.

    With `doublet` set, the Ramsey line split is calibrated from the
    reference point before the sweep runs.
    """

    model_config = _STRICT

    points: list[SweepPointConfig] = Field(default_factory=list)
    speeds_hz: list[float] = Field(default_factory=list)
    scheme: Literal["feedback", "feedforward", "ideal_feedback", "open_loop"] = "ideal_feedback"
    horizon_s: float | None = Field(default=None, ge=0)
    analysis: SweepAnalysis = Field(default_factory=SweepAnalysis)
    doublet: DoubletCalibration | None = None
    fit_law: bool = True
    law_with_offset: bool = True

    @model_validator(mode="after")
    def _speeds_positive(self) -> SweepSection:
        if any(not nu > 0 for nu in self.speeds_hz):
            raise ValueError("speeds_hz must be > 0")
        return self

    def build_points(self, tracker: TrackerSection) -> list[SweepPoint]:
        """Resolve configs into SweepPoints, explicit points first."""
        points: list[SweepPoint] = []
        for i, p in enumerate(self.points):
            scheme = Scheme(p.scheme)
            cfg = None if p.tracker is None else (tracker.odmr if p.tracker == "odmr" else tracker.lia)
            label = p.label or f"p{i}:{scheme.value}@{1.0 / p.period_s:g}Hz"
            points.append(SweepPoint(label, scheme, p.period_s, cfg, p.horizon_s))
        scheme = Scheme(self.scheme)
        for nu in self.speeds_hz:
            points.append(SweepPoint(f"{scheme.value}@{nu:g}Hz", scheme, 1.0 / nu, None, self.horizon_s))
        return points


class FitSection(BaseModel):
    """Options of the standalone `fit` command."""

    model_config = _STRICT

    with_offset: bool = True
    peaks: Literal[1, 2] = 1
    window_hz: tuple[float, float] | None = None
    decay_exponent: float = Field(default=1.0, gt=0)


class RunConfig(BaseModel):
    """Top-level run configuration."""

    model_config = _STRICT

    seed: int = Field(..., ge=0, le=MAX_SEED)
    out_dir: str | None = None
    noise: NoiseSection | None = None
    trace_path: str | None = None
    tracker: TrackerSection = Field(default_factory=TrackerSection)
    control: ControlSection = Field(default_factory=ControlSection)
    predictor: PredictorSection = Field(default_factory=PredictorSection)
    ramsey: RamseyConfig = Field(default_factory=RamseyConfig)
    sweep: SweepSection = Field(default_factory=SweepSection)
    fit: FitSection = Field(default_factory=FitSection)

    @model_validator(mode="after")
    def _one_source(self) -> RunConfig:
        if self.noise is not None and self.trace_path is not None:
            raise ValueError("give either noise or trace_path, not both")
        return self

    def with_overrides(self, seed: int | None = None, scheme: str | None = None) -> RunConfig:
        """Apply CLI --seed and --scheme."""
        update: dict[str, Any] = {}
        if seed is not None:
            update["seed"] = seed
        if scheme is not None:
            chosen = Scheme.parse(scheme).value
            update["control"] = self.control.model_copy(update={"scheme": chosen})
            update["sweep"] = self.sweep.model_copy(update={"scheme": chosen})
        return self.model_copy(update=update) if update else self

    def resolved(self) -> dict[str, Any]:
        """JSON-ready form with every default filled in."""
        return self.model_dump(mode="json")


def load_run_config(path: str | Path) -> RunConfig:
    """Read and validate a run config JSON file.

    Raises:
        MissingConfigError: file absent, or a required field missing
        InvalidConfigError: unreadable JSON or any schema violation
    """
    source = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise MissingConfigError(source, "config file not found") from exc
    except OSError as exc:
        raise InvalidConfigError(source, None, f"cannot read: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(source, None, f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_model(RunConfig, data)
