"""Tests for noise generation and trace I/O.

Tests cover:
- Sample counts and determinism
- OU stationary variance
- Power-law rms, band limits and Nyquist checks
- Sine and constant components, the component sum rule
- NoiseTrace helpers (value_at, mean_over, with_values)
- CSV save/load and format errors
- resample
"""

import numpy as np
import pytest

from src.exceptions import InvalidTraceError, NyquistError, ParameterError, TraceFormatError
from src.noise import (
    NoiseSpec,
    NoiseTrace,
    component_signal,
    generate,
    load_trace,
    resample,
    sample_count,
    save_trace,
)
from src.spectral.spectrum import loglog_slope, psd


def _spec(*components, seed=1) -> NoiseSpec:
    return NoiseSpec.from_dict({"components": list(components), "seed": seed})


class TestGenerate:
    """Tests for generate."""

    def test_sample_count(self):
        """floor(duration/dt) + 1 samples."""
        trace = generate(_spec(), 10000.0, 1.0)
        assert len(trace) == 10001
        assert sample_count(0.3, 0.1) == 4
        assert trace.duration_s == 10000.0

    def test_empty_spec_is_zero(self):
        """No components, flat zero trace."""
        assert not np.any(generate(_spec(), 100.0, 1.0).values)

    def test_deterministic(self, ou_spec):
        """Same seed, identical trace."""
        a = generate(ou_spec, 500.0, 1.0)
        b = generate(ou_spec, 500.0, 1.0)
        np.testing.assert_array_equal(a.values, b.values)

    def test_seed_changes_trace(self):
        """Different seeds differ."""
        comp = {"kind": "ou", "relaxation_rate": 0.01, "stationary_std": 500.0}
        a = generate(_spec(comp, seed=1), 500.0, 1.0)
        b = generate(_spec(comp, seed=2), 500.0, 1.0)
        assert not np.array_equal(a.values, b.values)

    def test_bad_grid(self):
        """duration below dt or non-positive dt."""
        with pytest.raises(ParameterError, match="dt_s"):
            generate(_spec(), 10.0, 0.0)
        with pytest.raises(ParameterError, match="duration_s"):
            generate(_spec(), 0.5, 1.0)

    def test_sum_rule(self):
        """generate equals the left-to-right sum of component signals."""
        spec = _spec(
            {"kind": "ou", "relaxation_rate": 0.05, "stationary_std": 100.0},
            {"kind": "sine", "amplitude": 30.0, "frequency": 0.01},
            {"kind": "power_law", "exponent": 1.0, "rms_amplitude": 20.0, "low_cutoff": 0.001, "high_cutoff": 0.5},
            {"kind": "constant", "offset": 7.0},
            seed=11,
        )
        trace = generate(spec, 999.0, 1.0)
        total = np.zeros(len(trace))
        for i, comp in enumerate(spec.components):
            total = total + component_signal(comp, len(trace), 1.0, spec.seed, i)
        np.testing.assert_array_equal(trace.values, total)

    def test_component_streams_independent(self):
        """Adding a component does not change the others' draws."""
        ou = {"kind": "ou", "relaxation_rate": 0.05, "stationary_std": 100.0}
        alone = generate(_spec(ou, seed=4), 300.0, 1.0)
        with_const = generate(_spec(ou, {"kind": "constant", "offset": 5.0}, seed=4), 300.0, 1.0)
        np.testing.assert_allclose(with_const.values - alone.values, 5.0, rtol=0, atol=1e-9)


class TestOU:
    """Tests for the OU component."""

    def test_stationary_std(self):
        """Mean sample std over 10 seeds within 10% of 500 Hz."""
        comp = {"kind": "ou", "relaxation_rate": 0.01, "stationary_std": 500.0}
        stds = [float(np.std(generate(_spec(comp, seed=s), 10000.0, 1.0).values)) for s in range(10)]
        assert np.mean(stds) == pytest.approx(500.0, rel=0.1)

    def test_dt_independent_variance(self):
        """Exact discretization keeps the variance at coarse dt."""
        comp = {"kind": "ou", "relaxation_rate": 0.5, "stationary_std": 10.0}
        trace = generate(_spec(comp, seed=3), 40000.0, 4.0)
        assert float(np.std(trace.values)) == pytest.approx(10.0, rel=0.05)

    def test_zero_std(self):
        """Zero stationary std gives zeros."""
        comp = {"kind": "ou", "relaxation_rate": 0.1, "stationary_std": 0.0}
        assert not np.any(generate(_spec(comp), 100.0, 1.0).values)


class TestPowerLaw:
    """Tests for the power-law component."""

    def test_rms_exact(self):
        """Rescaled to the requested rms."""
        comp = {"kind": "power_law", "exponent": 2.0, "rms_amplitude": 1500.0, "low_cutoff": 1e-3, "high_cutoff": 0.5}
        trace = generate(_spec(comp), 8191.0, 1.0)
        assert trace.rms() == pytest.approx(1500.0, rel=1e-9)
        assert abs(float(np.mean(trace.values))) < 1e-6 * 1500.0

    def test_spectral_slope(self):
        """PSD slope follows -alpha inside the band."""
        comp = {"kind": "power_law", "exponent": 1.0, "rms_amplitude": 1.0, "low_cutoff": 1e-3, "high_cutoff": 0.5}
        trace = generate(_spec(comp, seed=9), 65535.0, 1.0)
        assert loglog_slope(psd(trace, segments=16), 0.01, 0.3) == pytest.approx(-1.0, abs=0.2)

    def test_nyquist(self):
        """Band above 1/(2 dt) raises NyquistError."""
        comp = {"kind": "power_law", "exponent": 1.0, "rms_amplitude": 1.0, "low_cutoff": 0.1, "high_cutoff": 0.8}
        with pytest.raises(NyquistError, match="Nyquist"):
            generate(_spec(comp), 1000.0, 1.0)

    def test_empty_band(self):
        """Band narrower than one bin."""
        comp = {"kind": "power_law", "exponent": 1.0, "rms_amplitude": 1.0, "low_cutoff": 1e-6, "high_cutoff": 2e-6}
        with pytest.raises(ParameterError, match="no frequency bins"):
            generate(_spec(comp), 100.0, 1.0)

    def test_band_order(self):
        """low_cutoff must be below high_cutoff."""
        with pytest.raises(ParameterError, match="low_cutoff"):
            _spec({"kind": "power_law", "exponent": 1.0, "rms_amplitude": 1.0, "low_cutoff": 0.3, "high_cutoff": 0.2})


class TestDeterministicComponents:
    """Tests for sine and constant components."""

    def test_sine(self):
        """A sin(2 pi f t + phase) on the grid."""
        trace = generate(_spec({"kind": "sine", "amplitude": 2.0, "frequency": 0.25, "phase": 0.0}), 4.0, 1.0)
        np.testing.assert_allclose(trace.values, [0.0, 2.0, 0.0, -2.0, 0.0], atol=1e-12)

    def test_sine_above_nyquist(self):
        """A sine faster than 1/(2 dt) raises NyquistError naming the frequency."""
        with pytest.raises(NyquistError) as info:
            generate(_spec({"kind": "sine", "amplitude": 1.0, "frequency": 0.6}), 100.0, 1.0)
        assert info.value.parameter == "frequency"
        assert info.value.details["nyquist_hz"] == 0.5

    def test_sine_at_nyquist_allowed(self):
        """f = 1/(2 dt) is still representable."""
        trace = generate(_spec({"kind": "sine", "amplitude": 1.0, "frequency": 0.5, "phase": 0.5}), 10.0, 1.0)
        assert len(trace) == 11

    def test_constant(self):
        """Constant offset everywhere."""
        trace = generate(_spec({"kind": "constant", "offset": -3.5}), 10.0, 0.5)
        assert np.all(trace.values == -3.5)


class TestNoiseTrace:
    """Tests for NoiseTrace helpers."""

    def test_value_at_grid_and_between(self, ramp_trace):
        """Exact on the grid, linear in between, clamped outside."""
        assert float(ramp_trace.value_at(12.0)) == 12.0
        assert float(ramp_trace.value_at(12.25)) == pytest.approx(12.25)
        assert float(ramp_trace.value_at(-5.0)) == 0.0
        assert float(ramp_trace.value_at(5000.0)) == 1000.0

    def test_value_at_snaps(self, ramp_trace):
        """Float error near a grid time still hits the sample."""
        t = 0.1 * 3 * 100  # 30.000000000000004
        assert float(ramp_trace.value_at(t)) == 30.0

    def test_mean_over(self, ramp_trace):
        """Exact mean of the interpolant."""
        assert float(ramp_trace.mean_over(2.5, 7.5)) == pytest.approx(5.0)
        assert float(ramp_trace.mean_over(0.0, 1000.0)) == pytest.approx(500.0)

    def test_mean_over_needs_span(self, ramp_trace):
        """Empty interval."""
        with pytest.raises(InvalidTraceError, match="t_stop > t_start"):
            ramp_trace.mean_over(5.0, 5.0)

    def test_read_only(self, ramp_trace):
        """Values cannot be mutated."""
        with pytest.raises(ValueError):
            ramp_trace.values[0] = 1.0

    def test_invalid_values(self):
        """Empty or non-finite values."""
        with pytest.raises(InvalidTraceError, match="non-empty"):
            NoiseTrace(dt_s=1.0, values=np.array([]))
        with pytest.raises(InvalidTraceError, match="non-finite value at sample 1"):
            NoiseTrace(dt_s=1.0, values=np.array([0.0, np.nan]))
        with pytest.raises(InvalidTraceError, match="dt_s"):
            NoiseTrace(dt_s=0.0, values=np.zeros(3))

    def test_with_values(self, ramp_trace):
        """Same grid, new values and label."""
        other = ramp_trace.with_values(np.zeros(len(ramp_trace)), label="zero")
        assert other.dt_s == ramp_trace.dt_s
        assert other.label == "zero"
        assert other.rms() == 0.0


class TestTraceFiles:
    """Tests for save_trace and load_trace."""

    def test_round_trip_bit_exact(self, tmp_path, ou_trace):
        """%.17g keeps every bit."""
        path = save_trace(ou_trace, tmp_path / "trace.csv")
        loaded = load_trace(path)
        np.testing.assert_array_equal(loaded.values, ou_trace.values)
        assert loaded.dt_s == ou_trace.dt_s
        assert loaded.label == "trace.csv"

    def test_header(self, tmp_path):
        """Header must match."""
        path = tmp_path / "t.csv"
        path.write_text("t,f\n0,1\n1,2\n")
        with pytest.raises(TraceFormatError, match="header") as info:
            load_trace(path)
        assert info.value.row == 1

    def test_non_numeric_row(self, tmp_path):
        """Bad rows report their line number."""
        path = tmp_path / "t.csv"
        path.write_text("time_s,freq_offset_hz\n0,1\n1,abc\n")
        with pytest.raises(TraceFormatError, match="non-numeric") as info:
            load_trace(path)
        assert info.value.row == 3

    def test_non_monotone(self, tmp_path):
        """Time must increase."""
        path = tmp_path / "t.csv"
        path.write_text("time_s,freq_offset_hz\n0,1\n1,2\n1,3\n")
        with pytest.raises(TraceFormatError, match="strictly increasing"):
            load_trace(path)

    def test_non_uniform(self, tmp_path):
        """Jitter beyond tolerance."""
        path = tmp_path / "t.csv"
        path.write_text("time_s,freq_offset_hz\n0,1\n1,2\n2.5,3\n")
        with pytest.raises(TraceFormatError, match="non-uniform") as info:
            load_trace(path)
        assert info.value.row == 4

    def test_too_short(self, tmp_path):
        """One sample cannot define dt."""
        path = tmp_path / "t.csv"
        path.write_text("time_s,freq_offset_hz\n0,1\n")
        with pytest.raises(TraceFormatError, match="at least two samples"):
            load_trace(path)

    def test_offset_start(self, tmp_path):
        """t0 is read from the first row."""
        path = tmp_path / "t.csv"
        path.write_text("time_s,freq_offset_hz\n10,1\n12,2\n14,3\n")
        trace = load_trace(path)
        assert trace.t0_s == 10.0
        assert trace.dt_s == 2.0
        assert float(trace.value_at(13.0)) == 2.5


class TestResample:
    """Tests for resample."""

    def test_coarser(self, ramp_trace):
        """Every other sample of a ramp."""
        out = resample(ramp_trace, 2.0)
        assert len(out) == 501
        np.testing.assert_array_equal(out.values, np.arange(0.0, 1001.0, 2.0))

    def test_finer(self):
        """Midpoints interpolate linearly."""
        trace = NoiseTrace(dt_s=1.0, values=np.array([0.0, 2.0, 4.0]))
        out = resample(trace, 0.5)
        np.testing.assert_allclose(out.values, [0.0, 1.0, 2.0, 3.0, 4.0])

    def test_keeps_ends(self, ou_trace):
        """First sample kept; last kept when the duration divides."""
        out = resample(ou_trace, 4.0)
        assert out.values[0] == ou_trace.values[0]
        assert out.values[-1] == ou_trace.values[-1]

    def test_refine_then_coarsen_restores(self, ou_trace):
        """Halving dt then restoring it gives back the original samples."""
        fine = resample(ou_trace, ou_trace.dt_s / 2)
        assert len(fine) == 2 * len(ou_trace) - 1
        back = resample(fine, ou_trace.dt_s)
        assert len(back) == len(ou_trace)
        np.testing.assert_array_equal(back.values, ou_trace.values)

    def test_bad_dt(self, ramp_trace):
        """dt must be positive."""
        with pytest.raises(InvalidTraceError, match="dt_new"):
            resample(ramp_trace, -1.0)
