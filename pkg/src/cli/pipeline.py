"""Pipeline stages shared by the CLI commands.

Each helper reads what it needs from the RunContext's config, records
input provenance and stage timings, and returns domain objects.
"""

from __future__ import annotations

import time
from collections.abc import Iterator
from contextlib import contextmanager

from src.cli.context import RunContext
from src.control.policy import Scheme
from src.exceptions import MissingConfigError
from src.noise.generators import NoiseSpec, generate
from src.noise.trace import NoiseTrace, load_trace
from src.observability.metrics import record_stage
from src.predictor.dataset import build_dataset
from src.predictor.models import (
    PredictorKind,
    PredictorModel,
    baseline_model,
    bind_trace,
    load_model,
    model_to_dict,
)
from src.predictor.training import TrainingReport, train
from src.tracking import track
from src.tracking.estimates import EstimateStream
from src.utils.seeding import derive_int_seed


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Time a block into driftctl_stage_seconds."""
    started = time.perf_counter()
    try:
        yield
    finally:
        record_stage(name, time.perf_counter() - started)


def load_input_trace(ctx: RunContext) -> NoiseTrace:
    """The trace at `trace_path`, or one generated from `noise`.

    Raises:
        MissingConfigError: neither is configured
    """
    cfg = ctx.config
    if cfg.trace_path is not None:
        return load_trace(ctx.add_input(cfg.trace_path))
    if cfg.noise is None:
        raise MissingConfigError("noise", "give a noise section or trace_path")
    with stage("generate"):
        return generate(cfg.noise.spec(cfg.seed), cfg.noise.duration_s, cfg.noise.dt_s, label="noise")


def history_trace(ctx: RunContext) -> NoiseTrace:
    """Independent realisation of the configured noise for predictor training."""
    cfg = ctx.config
    if cfg.noise is None:
        raise MissingConfigError(
            "control.model_path", "an lstm needs a trained model file or a noise section to train on"
        )
    duration = cfg.predictor.history_duration_s or cfg.noise.duration_s
    spec = NoiseSpec(components=list(cfg.noise.components), seed=derive_int_seed(cfg.seed, "history"))
    with stage("generate"):
        return generate(spec, duration, cfg.noise.dt_s, label="history")


def estimates_for(ctx: RunContext, trace: NoiseTrace) -> EstimateStream:
    with stage("track"):
        return track(trace, ctx.config.tracker.selected, ctx.seed)


def train_on(ctx: RunContext, series: EstimateStream) -> tuple[PredictorModel, TrainingReport]:
    """Train the configured LSTM on a stream's estimate values."""
    pcfg = ctx.config.predictor
    dataset = build_dataset(series.values, pcfg.m, pcfg.n, validation_fraction=pcfg.train.validation_fraction)
    with stage("train"):
        return train(dataset, pcfg.hidden, pcfg.train)


def predictor_for(ctx: RunContext, trace: NoiseTrace) -> PredictorModel:
    """Forecaster for feedforward runs.

    Order: `control.model_path` if set; a baseline of `predictor.kind`;
    otherwise an lstm trained on a history trace (written as
    history_model.json).
    """
    cfg = ctx.config
    if cfg.control.model_path is not None:
        return load_model(ctx.add_input(cfg.control.model_path))
    kind = PredictorKind(cfg.predictor.kind)
    if kind is PredictorKind.ORACLE:
        return bind_trace(baseline_model(kind, cfg.predictor.m, cfg.predictor.n), trace)
    if kind is not PredictorKind.LSTM:
        return baseline_model(kind, cfg.predictor.m, cfg.predictor.n)

    model, report = train_on(ctx, estimates_for(ctx, history_trace(ctx)))
    ctx.write_json("history_model.json", model_to_dict(model))
    ctx.write_text("history_training.csv", report.to_csv())
    return model


def needs_predictor(schemes: list[Scheme]) -> bool:
    return Scheme.FEEDFORWARD in schemes
