"""Tests for the forecasting predictor.

Tests cover:
- Window dataset construction, split and normalisation
- LSTM forward pass against hand computation
- BPTT gradients against finite differences
- Training determinism, loss reduction and divergence handling
- Baseline and oracle predictions
- Per-horizon evaluation
- Model JSON persistence
"""

import json

import numpy as np
import pytest
from scipy.special import expit

from src.exceptions import (
    DatasetSizeError,
    ModelError,
    ModelFormatError,
    OracleBindingError,
    ParameterError,
    TrainingError,
)
from src.noise.trace import NoiseTrace
from src.predictor import (
    GATES,
    LstmWeights,
    Normalization,
    PredictorKind,
    PredictorModel,
    TrainConfig,
    baseline_model,
    bind_trace,
    build_dataset,
    evaluate_horizons,
    grad_check,
    init_weights,
    load_model,
    lstm_forward,
    model_to_dict,
    predict,
    prediction_bound,
    save_model,
    train,
)
from src.predictor.training import loss_and_gradients, numerical_gradient


def _sine(length: int = 400) -> np.ndarray:
    return 100.0 * np.sin(2 * np.pi * np.arange(length) / 50.0)


def _single_unit_model(w, b, v, c, norm=Normalization(0.0, 1.0), m=1):
    weights = LstmWeights(
        w=np.asarray(w, dtype=float),
        u=np.zeros((4, 1)),
        b=np.asarray(b, dtype=float),
        v=np.asarray(v, dtype=float).reshape(-1, 1),
        c=np.asarray(c, dtype=float),
    )
    return PredictorModel(
        kind=PredictorKind.LSTM, m=m, n=weights.n_out, hidden=1, weights=weights, norm=norm
    )


class TestDataset:
    """Tests for build_dataset."""

    def test_window_count_and_content(self):
        """k = len - M - N + 1 stride-1 windows."""
        data = build_dataset(np.arange(10.0), m=3, n=2, norm=Normalization(0.0, 1.0))
        assert len(data) == 6
        np.testing.assert_array_equal(data.inputs[0], [0, 1, 2])
        np.testing.assert_array_equal(data.targets[0], [3, 4])
        np.testing.assert_array_equal(data.inputs[-1], [5, 6, 7])
        np.testing.assert_array_equal(data.targets[-1], [8, 9])

    def test_normalisation_sees_training_portion_only(self):
        """Held-out windows do not leak into the mean."""
        data = build_dataset(np.arange(10.0), m=3, n=2, validation_fraction=0.5)
        assert data.train_windows == 3
        assert data.norm.mean_hz == pytest.approx(3.0)
        np.testing.assert_allclose(data.raw_inputs()[1], [1, 2, 3])

    def test_split(self):
        """Chronological split at train_windows."""
        data = build_dataset(_sine(), m=10, n=3, validation_fraction=0.2)
        head, tail = data.split()
        assert len(head) + len(tail) == len(data)
        assert len(head) == data.train_windows
        np.testing.assert_array_equal(tail.inputs[0], data.inputs[data.train_windows])

    def test_minimum_hold_out(self):
        """A positive fraction always holds out at least one window."""
        data = build_dataset(np.arange(6.0), m=3, n=2, validation_fraction=0.01)
        assert data.train_windows == 1

    def test_too_short(self):
        """Series shorter than M + N."""
        with pytest.raises(DatasetSizeError):
            build_dataset(np.arange(4.0), m=3, n=2)

    def test_bad_fraction(self):
        """validation_fraction in [0, 1)."""
        with pytest.raises(ParameterError, match="validation_fraction"):
            build_dataset(np.arange(10.0), m=3, n=2, validation_fraction=1.0)

    def test_constant_series_scale_floor(self):
        """Zero variance does not divide by zero."""
        data = build_dataset(np.full(20, 5.0), m=3, n=2)
        assert data.norm.scale_hz > 0
        assert np.all(data.inputs == 0.0)

    def test_offset_invariant(self):
        """A constant offset moves the mean, not the normalised windows."""
        base = build_dataset(_sine(), m=6, n=2, validation_fraction=0.2)
        shifted = build_dataset(_sine() + 2.5e5, m=6, n=2, validation_fraction=0.2)
        assert shifted.norm.mean_hz == pytest.approx(base.norm.mean_hz + 2.5e5)
        assert shifted.norm.scale_hz == pytest.approx(base.norm.scale_hz, rel=1e-9)
        np.testing.assert_allclose(shifted.inputs, base.inputs, atol=1e-8)
        np.testing.assert_allclose(shifted.targets, base.targets, atol=1e-8)


class TestLstmForward:
    """Tests for the forward pass."""

    def test_zero_weights_output_bias(self):
        """Zero gates leave h = 0, so the output is the read-out bias."""
        model = _single_unit_model(
            w=np.zeros(4), b=np.zeros(4), v=[0.0, 0.0], c=[0.5, -1.0], norm=Normalization(100.0, 10.0), m=4
        )
        np.testing.assert_allclose(lstm_forward(model, [1.0, 2.0, 3.0, 4.0]), [105.0, 90.0])

    def test_single_step_by_hand(self):
        """One step through the gate equations."""
        model = _single_unit_model(w=[1.0, 0.0, 0.0, 2.0], b=np.zeros(4), v=[2.0], c=[0.0])
        x = 0.5
        i, o, g = expit(x * 1.0), expit(0.0), np.tanh(x * 2.0)
        h = o * np.tanh(i * g)
        np.testing.assert_allclose(lstm_forward(model, [x]), [2.0 * h])

    def test_wrong_input_length(self, small_model):
        """Input must have M values."""
        with pytest.raises(ModelError, match="expected 10 inputs"):
            lstm_forward(small_model, np.zeros(9))

    def test_requires_lstm(self):
        """Baselines have no forward pass."""
        with pytest.raises(ModelError, match="needs an lstm model"):
            lstm_forward(baseline_model("persistence", 3, 1), np.zeros(3))


class TestGradCheck:
    """Tests for grad_check."""

    @pytest.mark.parametrize("arch", [(1, 1, 1), (4, 5, 2), (8, 10, 4)])
    def test_bptt_matches_finite_differences(self, arch):
        """Relative gradient error below 1e-4."""
        assert grad_check(arch, seed=3) < 1e-4

    def test_given_window(self):
        """A supplied window is used as-is."""
        window = (np.linspace(-1, 1, 6), np.array([0.3, -0.2]))
        assert grad_check((3, 6, 2), seed=1, window=window) < 1e-4

    def test_zero_gradient_window(self):
        """Zero inputs and targets at initial weights: both gradients vanish."""
        weights = init_weights(4, 2, np.random.default_rng(0))
        inputs, targets = np.zeros((1, 5)), np.zeros((1, 2))
        loss, analytic = loss_and_gradients(weights, inputs, targets)
        assert loss == 0.0
        assert np.max(np.abs(analytic.flatten())) < 1e-8
        assert np.max(np.abs(numerical_gradient(weights, inputs, targets))) < 1e-8

    def test_arch_limit(self):
        """Architectures above (8, 10, 4) are refused."""
        with pytest.raises(ParameterError, match="arch"):
            grad_check((16, 10, 4), seed=0)


class TestTraining:
    """Tests for train()."""

    def test_small_model_shape(self, small_model):
        """Model takes M and N from the dataset."""
        assert small_model.kind is PredictorKind.LSTM
        assert (small_model.m, small_model.n, small_model.hidden) == (10, 3, 4)
        assert np.all(np.isfinite(predict(small_model, _sine()[:10])))

    def test_deterministic(self):
        """Same data and config give identical weights."""
        data = build_dataset(_sine(), m=8, n=2, validation_fraction=0.2)
        cfg = TrainConfig(epochs=3, seed=11)
        a, _ = train(data, hidden=3, cfg=cfg)
        b, _ = train(data, hidden=3, cfg=cfg)
        np.testing.assert_array_equal(a.weights.flatten(), b.weights.flatten())

    def test_seed_changes_weights(self):
        """Different seeds start from different weights."""
        data = build_dataset(_sine(), m=8, n=2, validation_fraction=0.2)
        a, _ = train(data, hidden=3, cfg=TrainConfig(epochs=1, seed=1))
        b, _ = train(data, hidden=3, cfg=TrainConfig(epochs=1, seed=2))
        assert not np.array_equal(a.weights.flatten(), b.weights.flatten())

    def test_loss_decreases(self):
        """Training lowers the loss on a learnable series."""
        data = build_dataset(_sine(), m=10, n=1, validation_fraction=0.2)
        _, report = train(data, hidden=8, cfg=TrainConfig(epochs=30, seed=0))
        assert report.final_train_loss < report.initial_train_loss
        assert 1 <= report.best_epoch <= report.epochs_run <= 30

    def test_constant_series_converges(self):
        """A flat series trains to zero validation loss and forecasts the constant."""
        data = build_dataset(np.full(120, 7.0e3), m=6, n=2, validation_fraction=0.2)
        model, report = train(data, hidden=3, cfg=TrainConfig(epochs=50, seed=2))
        assert report.epochs_run <= 50
        assert report.best_val_loss < 1e-10
        np.testing.assert_allclose(predict(model, np.full(6, 7.0e3)), 7.0e3, rtol=1e-9)

    def test_report_outputs(self):
        """CSV has one row per epoch; summary has stopping metadata."""
        data = build_dataset(_sine(), m=5, n=1, validation_fraction=0.2)
        _, report = train(data, hidden=2, cfg=TrainConfig(epochs=4, seed=0))
        lines = report.to_csv().splitlines()
        assert lines[0] == "epoch,train_loss,val_loss"
        assert len(lines) == report.epochs_run + 1
        assert set(report.to_dict()) >= {"best_epoch", "best_val_loss", "epochs_run", "stopped_early"}

    def test_early_stopping(self):
        """Patience 1 stops as soon as validation stops improving."""
        data = build_dataset(_sine(), m=5, n=1, validation_fraction=0.2)
        _, report = train(data, hidden=2, cfg=TrainConfig(epochs=200, learning_rate=0.5, early_stop_patience=1))
        assert report.stopped_early
        assert report.epochs_run == report.best_epoch + 1

    def test_too_few_windows(self):
        """One window cannot be split."""
        with pytest.raises(DatasetSizeError):
            train(build_dataset(np.arange(5.0), m=3, n=2), hidden=2)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergence_raises_with_last_model(self):
        """A non-finite loss stops training and keeps the best weights."""
        data = build_dataset(_sine(), m=5, n=1, validation_fraction=0.2)
        with pytest.raises(TrainingError) as info:
            train(data, hidden=4, cfg=TrainConfig(epochs=5, learning_rate=1e308, gradient_clip_norm=1e300))
        assert info.value.epoch == 1
        assert isinstance(info.value.last_model, PredictorModel)


class TestBaselines:
    """Tests for persistence, linear extrapolation and the oracle."""

    def test_persistence(self):
        """Last value repeated N times."""
        np.testing.assert_array_equal(predict(baseline_model("persistence", 3, 2), [1.0, 2.0, 7.0]), [7.0, 7.0])

    def test_linear_extrap(self):
        """Line through the inputs, continued."""
        model = baseline_model(PredictorKind.LINEAR_EXTRAP, 4, 3)
        np.testing.assert_allclose(predict(model, [1.0, 3.0, 5.0, 7.0]), [9.0, 11.0, 13.0])

    def test_linear_extrap_single_input(self):
        """M = 1 degenerates to persistence."""
        np.testing.assert_array_equal(predict(baseline_model("linear_extrap", 1, 2), [4.0]), [4.0, 4.0])

    def test_oracle_reads_bound_trace(self, ramp_trace):
        """Step k targets t_last + k * cadence."""
        oracle = bind_trace(baseline_model("oracle", 1, 3), ramp_trace)
        np.testing.assert_allclose(predict(oracle, [0.0], t_last_s=10.0, cadence_s=2.0), [12.0, 14.0, 16.0])

    def test_oracle_unbound(self):
        """No trace, no forecast."""
        with pytest.raises(OracleBindingError):
            predict(baseline_model("oracle", 1, 3), [0.0], t_last_s=0.0, cadence_s=1.0)

    def test_oracle_needs_timing(self, ramp_trace):
        """Oracle needs t_last_s and cadence_s."""
        oracle = bind_trace(baseline_model("oracle", 1, 3), ramp_trace)
        with pytest.raises(OracleBindingError, match="t_last_s"):
            predict(oracle, [0.0])

    def test_bind_only_oracle(self, ramp_trace):
        """Binding a trace to a persistence model is refused."""
        with pytest.raises(OracleBindingError):
            bind_trace(baseline_model("persistence", 1, 1), ramp_trace)

    def test_no_lstm_baseline(self):
        """LSTM models come from training."""
        with pytest.raises(ModelError, match="train"):
            baseline_model("lstm", 3, 1)

    def test_lstm_requires_weights(self):
        """An LSTM model without weights is invalid."""
        with pytest.raises(ModelError, match="weights"):
            PredictorModel(kind=PredictorKind.LSTM, m=3, n=1, hidden=2)

    def test_wrong_input_length(self):
        """Baselines check M too."""
        with pytest.raises(ModelError, match="expected 3 inputs"):
            predict(baseline_model("persistence", 3, 1), [1.0, 2.0])


class TestEvaluateHorizons:
    """Tests for evaluate_horizons."""

    def test_persistence_on_ramp(self):
        """Persistence error grows by the slope per step."""
        series = 2.0 * np.arange(50)
        model = baseline_model("persistence", 3, 2)
        np.testing.assert_allclose(evaluate_horizons(model, series), [2.0, 4.0])
        np.testing.assert_allclose(evaluate_horizons(model, series, metric="mse"), [4.0, 16.0])

    def test_linear_extrap_exact_on_ramp(self):
        """A line is predicted exactly."""
        series = 2.0 * np.arange(50)
        np.testing.assert_allclose(evaluate_horizons(baseline_model("linear_extrap", 3, 2), series), 0.0, atol=1e-9)

    def test_lstm(self, small_model):
        """One error per horizon step."""
        errors = evaluate_horizons(small_model, _sine(200))
        assert errors.shape == (3,)
        assert np.all(np.isfinite(errors))

    def test_oracle_refused(self, ramp_trace):
        """Oracle has no held-out error."""
        with pytest.raises(ModelError, match="oracle"):
            evaluate_horizons(bind_trace(baseline_model("oracle", 1, 1), ramp_trace), np.arange(10.0))

    def test_unknown_metric(self):
        """Only mae and mse."""
        with pytest.raises(ModelError, match="metric"):
            evaluate_horizons(baseline_model("persistence", 1, 1), np.arange(10.0), metric="rmse")


class TestPersistence:
    """Tests for model JSON files."""

    def test_round_trip_predictions(self, small_model, tmp_path):
        """A loaded model predicts exactly what the saved one did."""
        path = save_model(small_model, tmp_path / "model.json")
        loaded = load_model(path)
        recent = _sine()[100:110]
        np.testing.assert_array_equal(predict(loaded, recent), predict(small_model, recent))
        assert loaded.describe() == small_model.describe()

    def test_document_layout(self, small_model):
        """Weights are stored per gate with a read-out block."""
        doc = model_to_dict(small_model)
        assert doc["format_version"] == 1
        assert set(doc["weights"]["gates"]) == set(GATES)
        assert np.asarray(doc["weights"]["gates"]["f"]["U"]).shape == (4, 4)
        assert np.asarray(doc["weights"]["fc"]["V"]).shape == (3, 4)

    def test_baseline_round_trip(self, tmp_path):
        """Baselines persist without weights."""
        loaded = load_model(save_model(baseline_model("linear_extrap", 6, 2), tmp_path / "m.json"))
        assert loaded.kind is PredictorKind.LINEAR_EXTRAP
        assert (loaded.m, loaded.n) == (6, 2)

    def test_oracle_not_saved(self, ramp_trace, tmp_path):
        """Oracle models are not persisted."""
        with pytest.raises(ModelError, match="oracle"):
            save_model(bind_trace(baseline_model("oracle", 1, 1), ramp_trace), tmp_path / "m.json")

    def test_unsupported_version(self, small_model, tmp_path):
        """Unknown format_version is rejected."""
        doc = model_to_dict(small_model)
        doc["format_version"] = 99
        path = tmp_path / "m.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelFormatError, match="format_version"):
            load_model(path)

    def test_invalid_json(self, tmp_path):
        """Unparseable files are format errors."""
        path = tmp_path / "m.json"
        path.write_text("{not json")
        with pytest.raises(ModelFormatError, match="invalid JSON"):
            load_model(path)

    def test_missing_file(self, tmp_path):
        """Missing files are format errors."""
        with pytest.raises(ModelFormatError, match="cannot open"):
            load_model(tmp_path / "absent.json")

    def test_missing_gate(self, small_model, tmp_path):
        """A truncated document reports what is malformed."""
        doc = model_to_dict(small_model)
        del doc["weights"]["gates"]["o"]
        path = tmp_path / "m.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ModelFormatError, match="malformed"):
            load_model(path)


class TestPredictionBound:
    """Tests for prediction_bound."""

    def test_baselines_unbounded(self):
        """Baselines have no saturation bound."""
        assert prediction_bound(baseline_model("persistence", 1, 1)) == float("inf")

    def test_lstm_predictions_within_bound(self, small_model):
        """tanh saturation caps the output around the mean."""
        bound = prediction_bound(small_model)
        rng = np.random.default_rng(0)
        for _ in range(20):
            out = predict(small_model, rng.normal(0, 1e6, 10))
            assert np.all(np.abs(out - small_model.norm.mean_hz) <= bound + 1e-9)

    def test_oracle_trace_values(self):
        """Bound oracle reads interpolated values."""
        trace = NoiseTrace(dt_s=2.0, values=[0.0, 10.0, 20.0])
        oracle = bind_trace(baseline_model("oracle", 1, 1), trace)
        np.testing.assert_allclose(predict(oracle, [0.0], t_last_s=0.0, cadence_s=1.0), [5.0])
