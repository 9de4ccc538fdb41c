"""LSTM training - BPTT, Adam, early stopping, gradient checking.

Loss is the mean squared error over every target of every window, on
the normalised scale. Training is single-threaded; initialisation and
shuffle order come from the (seed, "train") stream, so a given dataset
and TrainConfig always produce the same weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field

from src.config.constants import DRIFT
from src.exceptions import DatasetSizeError, ModelError, ParameterError, TrainingError
from src.observability.logging import TrainingLogger
from src.observability.metrics import record_training_epoch
from src.predictor.dataset import WindowDataset
from src.predictor.lstm import LstmWeights, backward, forward, init_weights
from src.predictor.models import PredictorKind, PredictorModel
from src.utils.io import csv_text
from src.utils.seeding import derive_rng

Array = NDArray[np.float64]


class TrainConfig(BaseModel):
    """Optimiser settings."""

    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    epochs: int = Field(default=200, ge=1)
    learning_rate: float = Field(default=1e-2, gt=0)
    batch_size: int = Field(default=32, ge=1)
    seed: int = Field(default=0, ge=0)
    validation_fraction: float = Field(default=0.2, gt=0, lt=1)
    gradient_clip_norm: float = Field(default=1.0, gt=0)
    early_stop_patience: int = Field(default=DRIFT.EARLY_STOP_PATIENCE, ge=1)


@dataclass
class TrainingReport:
    """Per-epoch losses and stopping metadata."""

    initial_train_loss: float
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False

    @property
    def epochs_run(self) -> int:
        return len(self.train_loss)

    @property
    def best_val_loss(self) -> float:
        return self.val_loss[self.best_epoch - 1] if self.val_loss else math.inf

    @property
    def final_train_loss(self) -> float:
        """Train loss of the returned (best-validation) weights."""
        return self.train_loss[self.best_epoch - 1] if self.train_loss else self.initial_train_loss

    def to_dict(self) -> dict[str, Any]:
        return {
            "initial_train_loss": self.initial_train_loss,
            "final_train_loss": self.final_train_loss,
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "epochs_run": self.epochs_run,
            "stopped_early": self.stopped_early,
        }

    def to_csv(self) -> str:
        return csv_text(
            ("epoch", "train_loss", "val_loss"),
            ((i + 1, t, v) for i, (t, v) in enumerate(zip(self.train_loss, self.val_loss, strict=True))),
        )


# -----------------------------------------------------------------------------
# Loss and gradients
# -----------------------------------------------------------------------------


def loss_and_gradients(
    weights: LstmWeights,
    inputs: Array,
    targets: Array,
    loss_scale: float = 1.0,
) -> tuple[float, LstmWeights]:
    """loss_scale * MSE and its exact gradient by backpropagation through time.

    Args:
        weights: Network weights
        inputs: (B, M) normalised inputs
        targets: (B, N) normalised targets
        loss_scale: Multiplier applied to the loss and every gradient
    """
    x = np.atleast_2d(inputs)
    y = np.atleast_2d(targets)
    out, cache = forward(weights, x)
    err = out - y
    loss = loss_scale * float(np.mean(err**2))
    d_out = (2.0 * loss_scale / err.size) * err
    return loss, backward(weights, cache, d_out)


def loss_only(weights: LstmWeights, inputs: Array, targets: Array) -> float:
    out, _ = forward(weights, np.atleast_2d(inputs))
    return float(np.mean((out - np.atleast_2d(targets)) ** 2))


def numerical_gradient(
    weights: LstmWeights,
    inputs: Array,
    targets: Array,
    step: float = DRIFT.GRAD_CHECK_STEP,
) -> Array:
    """Central finite differences of the MSE w.r.t. every flattened parameter."""
    base = weights.flatten()
    hidden, n_out = weights.hidden, weights.n_out
    grad = np.empty_like(base)
    for k in range(base.size):
        shifted = base.copy()
        shifted[k] = base[k] + step
        up = loss_only(LstmWeights.unflatten(shifted, hidden, n_out), inputs, targets)
        shifted[k] = base[k] - step
        down = loss_only(LstmWeights.unflatten(shifted, hidden, n_out), inputs, targets)
        grad[k] = (up - down) / (2.0 * step)
    return grad


def grad_check(
    arch: tuple[int, int, int],
    seed: int,
    window: tuple[Array, Array] | None = None,
) -> float:
    """Max relative error between BPTT and finite-difference gradients.

    Args:
        arch: (H, M, N), at most (8, 10, 4)
        seed: Seeds weights and, when `window` is None, a random window
        window: Optional (inputs of length M, targets of length N)

    Returns:
        max |a - n| / max(|a|, |n|, GRAD_CHECK_FLOOR) over all parameters
    """
    hidden, m, n = arch
    if not (1 <= hidden <= 8 and 1 <= m <= 10 and 1 <= n <= 4):
        raise ParameterError("arch", arch, "grad_check is limited to H<=8, M<=10, N<=4")
    rng = derive_rng(seed, "grad_check")
    weights = init_weights(hidden, n, rng)
    # Non-trivial biases so every gate is away from its initial point
    weights = LstmWeights(
        w=weights.w,
        u=weights.u,
        b=weights.b + rng.uniform(-0.5, 0.5, weights.b.size),
        v=weights.v,
        c=rng.uniform(-0.5, 0.5, n),
    )
    if window is None:
        inputs = rng.standard_normal((1, m))
        targets = rng.standard_normal((1, n))
    else:
        inputs = np.asarray(window[0], dtype=np.float64).reshape(1, m)
        targets = np.asarray(window[1], dtype=np.float64).reshape(1, n)

    _, analytic = loss_and_gradients(weights, inputs, targets)
    a = analytic.flatten()
    num = numerical_gradient(weights, inputs, targets)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(num)), DRIFT.GRAD_CHECK_FLOOR)
    return float(np.max(np.abs(a - num) / denom))


# -----------------------------------------------------------------------------
# Training loop
# -----------------------------------------------------------------------------


@dataclass
class _Adam:
    lr: float
    m: Array
    v: Array
    t: int = 0

    def step(self, params: Array, grad: Array) -> Array:
        self.t += 1
        self.m = DRIFT.ADAM_BETA1 * self.m + (1.0 - DRIFT.ADAM_BETA1) * grad
        self.v = DRIFT.ADAM_BETA2 * self.v + (1.0 - DRIFT.ADAM_BETA2) * grad**2
        m_hat = self.m / (1.0 - DRIFT.ADAM_BETA1**self.t)
        v_hat = self.v / (1.0 - DRIFT.ADAM_BETA2**self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + DRIFT.ADAM_EPS)


def _as_model(weights: LstmWeights, dataset: WindowDataset) -> PredictorModel:
    return PredictorModel(
        kind=PredictorKind.LSTM,
        m=dataset.m,
        n=dataset.n,
        hidden=weights.hidden,
        weights=weights,
        norm=dataset.norm,
    )


def train(
    dataset: WindowDataset,
    hidden: int,
    cfg: TrainConfig | None = None,
) -> tuple[PredictorModel, TrainingReport]:
    """Fit an LSTM forecaster to a window dataset.

    The dataset is split chronologically at its own train_windows, or by
    cfg.validation_fraction when it was built without a hold-out; the
    weights with the lowest validation MSE are returned.

    Args:
        dataset: Windows from build_dataset (M and N are taken from it)
        hidden: LSTM width H
        cfg: Optimiser settings

    Raises:
        DatasetSizeError: fewer than 2 windows
        TrainingError: loss became non-finite; carries the best model so far

    Usage:
        data = build_dataset(series, m=60, n=10, validation_fraction=0.2)
        model, report = train(data, hidden=32, cfg=TrainConfig(seed=3))
    """
    cfg = cfg or TrainConfig()
    if len(dataset) < 2:
        raise DatasetSizeError(dataset.series_length, dataset.m, dataset.n)

    k = len(dataset)
    if 0 < dataset.train_windows < k:
        cut = dataset.train_windows
    else:
        cut = k - min(max(int(round(k * cfg.validation_fraction)), 1), k - 1)
    x_train, y_train = dataset.inputs[:cut], dataset.targets[:cut]
    x_val, y_val = dataset.inputs[cut:], dataset.targets[cut:]

    log = TrainingLogger(hidden, dataset.m, dataset.n)
    rng = derive_rng(cfg.seed, "train")
    weights = init_weights(hidden, dataset.n, rng)
    params = weights.flatten()
    adam = _Adam(lr=cfg.learning_rate, m=np.zeros_like(params), v=np.zeros_like(params))

    report = TrainingReport(initial_train_loss=loss_only(weights, x_train, y_train))
    best_params, best_val = params.copy(), math.inf
    since_best = 0

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(x_train.shape[0])
        try:
            for start in range(0, order.size, cfg.batch_size):
                batch = order[start : start + cfg.batch_size]
                current = LstmWeights.unflatten(params, hidden, dataset.n)
                loss, grads = loss_and_gradients(current, x_train[batch], y_train[batch])
                if not math.isfinite(loss):
                    raise FloatingPointError(f"non-finite batch loss {loss}")
                grad = grads.flatten()
                norm = float(np.linalg.norm(grad))
                if norm > cfg.gradient_clip_norm:
                    grad = grad * (cfg.gradient_clip_norm / norm)
                params = adam.step(params, grad)
            current = LstmWeights.unflatten(params, hidden, dataset.n)
        except (FloatingPointError, ModelError) as exc:
            log.training_diverged(epoch, str(exc))
            last = _as_model(LstmWeights.unflatten(best_params, hidden, dataset.n), dataset)
            raise TrainingError(epoch, str(exc), last_model=last) from exc

        train_loss = loss_only(current, x_train, y_train)
        val_loss = loss_only(current, x_val, y_val)
        if not (math.isfinite(train_loss) and math.isfinite(val_loss)):
            log.training_diverged(epoch, "non-finite epoch loss")
            last = _as_model(LstmWeights.unflatten(best_params, hidden, dataset.n), dataset)
            raise TrainingError(epoch, "non-finite epoch loss", last_model=last)

        report.train_loss.append(train_loss)
        report.val_loss.append(val_loss)
        record_training_epoch()
        log.epoch_completed(epoch, train_loss, val_loss)

        if val_loss < best_val:
            best_val, best_params, report.best_epoch = val_loss, params.copy(), epoch
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.early_stop_patience:
                report.stopped_early = True
                log.early_stopped(epoch, report.best_epoch, best_val)
                break

    best = LstmWeights.unflatten(best_params, hidden, dataset.n)
    return _as_model(best, dataset), report
