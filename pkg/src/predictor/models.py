"""Predictor models - LSTM forecaster and baseline policies.

Kinds:
- lstm: LSTM + fully connected read-out on normalised inputs
- persistence: repeats the last input
- linear_extrap: least-squares line through the inputs, extrapolated
- oracle: reads the true future from a bound trace (tests and bounds only)

Models are immutable; predict() is safe to call from many threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.config.constants import DRIFT
from src.exceptions import ModelError, ModelFormatError, OracleBindingError
from src.noise.trace import NoiseTrace
from src.predictor.dataset import Normalization, build_dataset
from src.predictor.lstm import GATES, LstmWeights, forward
from src.utils.io import atomic_write_text

Array = NDArray[np.float64]


class PredictorKind(Enum):
    """Forecaster families."""

    LSTM = "lstm"
    PERSISTENCE = "persistence"
    ORACLE = "oracle"
    LINEAR_EXTRAP = "linear_extrap"


@dataclass(frozen=True, eq=False)
class PredictorModel:
    """M-in / N-out forecaster.

    Attributes:
        kind: Model family
        m: Input length (samples at the estimate cadence)
        n: Output length
        hidden: LSTM width (0 for baselines)
        weights: LSTM weights (lstm only)
        norm: Input normalisation (lstm only)
        oracle_trace: Trace the oracle reads from (oracle only, set by bind_trace)

    Usage:
        model = PredictorModel(kind=PredictorKind.PERSISTENCE, m=5, n=3)
        predict(model, recent)        # last value repeated 3 times
    """

    kind: PredictorKind
    m: int
    n: int
    hidden: int = 0
    weights: LstmWeights | None = None
    norm: Normalization | None = None
    oracle_trace: NoiseTrace | None = None

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ModelError(f"m and n must be >= 1, got m={self.m}, n={self.n}")
        if self.kind is PredictorKind.LSTM:
            if self.weights is None or self.norm is None:
                raise ModelError("lstm model needs weights and normalisation")
            if self.weights.hidden != self.hidden or self.weights.n_out != self.n:
                raise ModelError(
                    "weight shapes disagree with (hidden, n)",
                    details={
                        "hidden": self.hidden,
                        "n": self.n,
                        "weights_hidden": self.weights.hidden,
                        "weights_n": self.weights.n_out,
                    },
                )
        elif self.weights is not None:
            raise ModelError(f"{self.kind.value} model carries no weights")

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "m": self.m, "n": self.n, "hidden": self.hidden}


def baseline_model(kind: PredictorKind | str, m: int, n: int) -> PredictorModel:
    """Weightless model of a baseline kind."""
    kind = PredictorKind(kind)
    if kind is PredictorKind.LSTM:
        raise ModelError("lstm models come from train() or load_model()")
    return PredictorModel(kind=kind, m=m, n=n)


def bind_trace(model: PredictorModel, trace: NoiseTrace) -> PredictorModel:
    """Attach the true trace to an oracle model."""
    if model.kind is not PredictorKind.ORACLE:
        raise OracleBindingError(f"cannot bind a trace to a {model.kind.value} model")
    return replace(model, oracle_trace=trace)


def lstm_forward(model: PredictorModel, recent: ArrayLike) -> Array:
    """Normalise, run the LSTM over M steps, de-normalise N outputs.

    Raises:
        ModelError: model is not an LSTM or input length differs from M
    """
    if model.kind is not PredictorKind.LSTM or model.weights is None or model.norm is None:
        raise ModelError(f"lstm_forward needs an lstm model, got {model.kind.value}")
    x = np.asarray(recent, dtype=np.float64).reshape(-1)
    if x.size != model.m:
        raise ModelError(f"expected {model.m} inputs, got {x.size}")
    out, _ = forward(model.weights, model.norm.normalize(x)[None, :])
    return model.norm.denormalize(out[0])


def _linear_extrap(x: Array, n: int) -> Array:
    if x.size == 1:
        return np.full(n, x[0])
    steps = np.arange(x.size, dtype=np.float64)
    slope, intercept = np.polyfit(steps, x, 1)
    future = np.arange(x.size, x.size + n, dtype=np.float64)
    return intercept + slope * future


def predict(
    model: PredictorModel,
    recent: ArrayLike,
    t_last_s: float | None = None,
    cadence_s: float | None = None,
) -> Array:
    """Forecast N values following `recent`.

    Args:
        model: Any predictor kind
        recent: The M most recent values, oldest first
        t_last_s: Time the last value refers to (oracle only)
        cadence_s: Spacing of the forecast steps (oracle only)

    Returns:
        N values; step k targets t_last_s + k * cadence_s

    Raises:
        ModelError: wrong input length
        OracleBindingError: oracle without a bound trace or timing
    """
    x = np.asarray(recent, dtype=np.float64).reshape(-1)
    if x.size != model.m:
        raise ModelError(f"expected {model.m} inputs, got {x.size}")

    if model.kind is PredictorKind.LSTM:
        return lstm_forward(model, x)
    if model.kind is PredictorKind.PERSISTENCE:
        return np.full(model.n, x[-1])
    if model.kind is PredictorKind.LINEAR_EXTRAP:
        return _linear_extrap(x, model.n)

    if model.oracle_trace is None:
        raise OracleBindingError()
    if t_last_s is None or cadence_s is None:
        raise OracleBindingError("oracle prediction needs t_last_s and cadence_s")
    times = t_last_s + np.arange(1, model.n + 1) * cadence_s
    return np.asarray(model.oracle_trace.value_at(times), dtype=np.float64)


def evaluate_horizons(
    model: PredictorModel,
    series: ArrayLike,
    metric: str = "mae",
) -> Array:
    """Error per horizon step 1..N over all stride-1 windows of `series`.

    Args:
        model: lstm, persistence or linear_extrap
        series: Held-out values at the model's cadence
        metric: "mae" (mean absolute) or "mse" (mean squared)
    """
    if model.kind is PredictorKind.ORACLE:
        raise ModelError("oracle models have no held-out error")
    data = build_dataset(series, model.m, model.n, norm=Normalization(0.0, 1.0))
    inputs, targets = data.inputs, data.targets
    if model.kind is PredictorKind.LSTM:
        assert model.weights is not None and model.norm is not None
        out, _ = forward(model.weights, model.norm.normalize(inputs))
        preds = model.norm.denormalize(out)
    else:
        preds = np.stack([predict(model, row) for row in inputs])
    err = preds - targets
    if metric == "mse":
        return np.asarray(np.mean(err**2, axis=0), dtype=np.float64)
    if metric == "mae":
        return np.asarray(np.mean(np.abs(err), axis=0), dtype=np.float64)
    raise ModelError(f"unknown metric {metric!r}")


# -----------------------------------------------------------------------------
# Persistence
# -----------------------------------------------------------------------------


def model_to_dict(model: PredictorModel) -> dict[str, Any]:
    """JSON document; weights are per gate, row-major."""
    doc: dict[str, Any] = {
        "format_version": DRIFT.MODEL_FORMAT_VERSION,
        "kind": model.kind.value,
        "m": model.m,
        "n": model.n,
        "hidden": model.hidden,
    }
    if model.kind is PredictorKind.LSTM:
        assert model.weights is not None and model.norm is not None
        doc["norm"] = {"mean_hz": model.norm.mean_hz, "scale_hz": model.norm.scale_hz}
        gates: dict[str, Any] = {}
        for name in GATES:
            w, u, b = model.weights.gate(name)
            gates[name] = {"W": w.tolist(), "U": u.tolist(), "b": b.tolist()}
        doc["weights"] = {
            "gates": gates,
            "fc": {"V": model.weights.v.tolist(), "c": model.weights.c.tolist()},
        }
    return doc


def model_from_dict(doc: dict[str, Any], source: str = "<memory>") -> PredictorModel:
    """Inverse of model_to_dict.

    Raises:
        ModelFormatError: unknown format_version or malformed document
        ModelError: shapes inconsistent with (hidden, n)
    """
    version = doc.get("format_version")
    if version != DRIFT.MODEL_FORMAT_VERSION:
        raise ModelFormatError(source, f"unsupported format_version {version!r}")
    try:
        kind = PredictorKind(doc["kind"])
        m, n, hidden = int(doc["m"]), int(doc["n"]), int(doc.get("hidden", 0))
        if kind is not PredictorKind.LSTM:
            return PredictorModel(kind=kind, m=m, n=n)
        gates = doc["weights"]["gates"]
        fc = doc["weights"]["fc"]
        weights = LstmWeights(
            w=np.concatenate([np.asarray(gates[g]["W"], dtype=np.float64) for g in GATES]),
            u=np.concatenate([np.asarray(gates[g]["U"], dtype=np.float64).reshape(-1, hidden) for g in GATES]),
            b=np.concatenate([np.asarray(gates[g]["b"], dtype=np.float64) for g in GATES]),
            v=np.asarray(fc["V"], dtype=np.float64).reshape(-1, hidden),
            c=np.asarray(fc["c"], dtype=np.float64),
        )
        norm = Normalization(float(doc["norm"]["mean_hz"]), float(doc["norm"]["scale_hz"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(source, f"malformed model document: {exc}") from exc
    return PredictorModel(kind=kind, m=m, n=n, hidden=hidden, weights=weights, norm=norm)


def save_model(model: PredictorModel, path: str | Path) -> Path:
    """Atomically write the model JSON."""
    if model.kind is PredictorKind.ORACLE:
        raise ModelError("oracle models are not persisted")
    text = json.dumps(model_to_dict(model), indent=2, sort_keys=True)
    return atomic_write_text(path, text + "\n")


def load_model(path: str | Path) -> PredictorModel:
    """Read a model JSON written by save_model."""
    source = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ModelFormatError(source, f"cannot open: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(source, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError(source, "top level must be an object")
    return model_from_dict(doc, source)


def prediction_bound(model: PredictorModel) -> float:
    """Upper bound on |prediction - mean_hz| implied by tanh saturation."""
    if model.weights is None or model.norm is None:
        return math.inf
    per_output = np.sum(np.abs(model.weights.v), axis=1) + np.abs(model.weights.c)
    return float(model.norm.scale_hz * np.max(per_output))
