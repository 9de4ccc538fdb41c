"""Forecasters for the feedforward scheme: LSTM and baselines."""

from src.predictor.dataset import Normalization, WindowDataset, build_dataset
from src.predictor.lstm import GATES, LstmWeights, init_weights
from src.predictor.models import (
    PredictorKind,
    PredictorModel,
    baseline_model,
    bind_trace,
    evaluate_horizons,
    load_model,
    lstm_forward,
    model_from_dict,
    model_to_dict,
    predict,
    prediction_bound,
    save_model,
)
from src.predictor.training import TrainConfig, TrainingReport, grad_check, train

__all__ = [
    "GATES",
    "LstmWeights",
    "Normalization",
    "PredictorKind",
    "PredictorModel",
    "TrainConfig",
    "TrainingReport",
    "WindowDataset",
    "baseline_model",
    "bind_trace",
    "build_dataset",
    "evaluate_horizons",
    "grad_check",
    "init_weights",
    "load_model",
    "lstm_forward",
    "model_from_dict",
    "model_to_dict",
    "predict",
    "prediction_bound",
    "save_model",
    "train",
]
