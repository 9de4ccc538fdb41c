"""CLI subcommands.

Each cmd_* takes a RunContext, writes its artifacts through it and
fills ctx.summary. Errors propagate as DriftCtlError subclasses; main()
maps them onto exit codes.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any

import numpy as np

from src.cli.context import RunContext
from src.cli.pipeline import (
    estimates_for,
    load_input_trace,
    needs_predictor,
    predictor_for,
    stage,
    train_on,
)
from src.control.loop import ControlRun, efficiency_curve, run_loop
from src.control.policy import ControlPolicy, Scheme
from src.exceptions import (
    FitError,
    InvalidConfigError,
    MissingConfigError,
    PartialSweepError,
    TraceFormatError,
    TrainingError,
)
from src.noise.generators import generate
from src.noise.trace import trace_to_csv
from src.predictor.dataset import build_dataset
from src.predictor.models import (
    PredictorKind,
    PredictorModel,
    baseline_model,
    evaluate_horizons,
    model_to_dict,
)
from src.ramsey.curve import RamseyCurve
from src.ramsey.simulate import check_sweep_span, simulate_ramsey
from src.ramsey.sweep import calibrate_split, fit_window, sweep_linewidth
from src.spectral.linewidth import fit_linewidth_law
from src.spectral.lorentzian import fit_lorentzian, select_peak_count
from src.spectral.ramsey_fit import fit_ramsey_decay
from src.spectral.spectrum import Spectrum, fft_spectrum, psd
from src.tracking.estimates import EstimateFlag
from src.utils.io import csv_text, read_csv_columns

# -----------------------------------------------------------------------------
# generate / track
# -----------------------------------------------------------------------------


def cmd_generate(ctx: RunContext) -> None:
    """Generate the configured noise trace and save it as trace.csv."""
    noise = ctx.config.noise
    if noise is None:
        raise MissingConfigError("noise", "generate needs a noise section")
    with stage("generate"):
        trace = generate(noise.spec(ctx.seed), noise.duration_s, noise.dt_s, label="noise")
    ctx.write_text("trace.csv", trace_to_csv(trace))
    ctx.summary.update({
        "samples": len(trace),
        "dt_s": trace.dt_s,
        "duration_s": trace.duration_s,
        "rms_hz": trace.rms(),
    })


def cmd_track(ctx: RunContext) -> None:
    """Run the configured tracker and save estimates.csv."""
    trace = load_input_trace(ctx)
    stream = estimates_for(ctx, trace)
    ctx.write_text("estimates.csv", stream.to_csv())
    valid = np.array([e.flag is EstimateFlag.VALID for e in stream.entries], dtype=bool)
    tracking_rms = math.nan
    if valid.any():
        err = stream.values[valid] - trace.value_at(stream.t_eff[valid])
        tracking_rms = float(np.sqrt(np.mean(err**2)))
    ctx.summary.update({
        "method": stream.method,
        "estimates": len(stream),
        "valid": stream.count(EstimateFlag.VALID),
        "held": stream.count(EstimateFlag.HELD),
        "out_of_capture": stream.count(EstimateFlag.OUT_OF_CAPTURE),
        "latency_s": stream.latency_s,
        "cadence_s": stream.cadence_s,
        "tracking_rms_hz": tracking_rms,
    })


# -----------------------------------------------------------------------------
# loop
# -----------------------------------------------------------------------------


def _run_configured_loop(ctx: RunContext) -> tuple[ControlRun, ControlPolicy]:
    control = ctx.config.control
    scheme = control.selected_scheme
    trace = load_input_trace(ctx)
    estimates = estimates_for(ctx, trace) if scheme in (Scheme.FEEDBACK, Scheme.FEEDFORWARD) else None
    predictor = predictor_for(ctx, trace) if needs_predictor([scheme]) else None
    policy = ControlPolicy(scheme, control.update_period_s, predictor, control.horizon_s)
    with stage("loop"):
        return run_loop(trace, estimates, policy), policy


def cmd_loop(ctx: RunContext) -> None:
    """Closed-loop simulation: corrections, residual, PSDs and efficiency."""
    control = ctx.config.control
    run, policy = _run_configured_loop(ctx)
    eta = run.efficiency(include_warmup=control.include_warmup)

    ctx.write_text("corrections.csv", run.corrections_csv())
    ctx.write_text("residual.csv", run.residual_csv())
    ctx.write_text("psd_original.csv", psd(run.original).to_csv())
    ctx.write_text("psd_residual.csv", psd(run.residual).to_csv())
    ctx.write_json("loop.json", {**run.to_dict(), "efficiency": eta})

    if control.speeds_hz:
        estimates = run.estimates
        curve = efficiency_curve(
            run.original,
            list(control.speeds_hz),
            policy.scheme,
            estimates=estimates,
            policy_template=policy,
            include_warmup=control.include_warmup,
            max_workers=ctx.parallel,
        )
        ctx.write_text(
            "efficiency_curve.csv",
            csv_text(
                ("nu_hz", "update_period_s", "efficiency"),
                ((p.nu_hz, p.update_period_s, p.efficiency) for p in curve),
            ),
        )
    ctx.summary.update({
        "scheme": run.scheme.value,
        "update_period_s": run.update_period_s,
        "efficiency": eta,
        "residual_rms_hz": run.residual.rms(),
        "original_rms_hz": run.original.rms(),
        "predictor_failures": run.predictor_failures,
    })


# -----------------------------------------------------------------------------
# train
# -----------------------------------------------------------------------------


def _horizon_rows(model: PredictorModel, held_out: np.ndarray) -> list[tuple[int, float, float]]:
    if held_out.size < model.m + model.n:
        return []
    lstm_err = evaluate_horizons(model, held_out)
    persistence_err = evaluate_horizons(baseline_model(PredictorKind.PERSISTENCE, model.m, model.n), held_out)
    return [(k + 1, float(a), float(b)) for k, (a, b) in enumerate(zip(lstm_err, persistence_err, strict=True))]


def cmd_train(ctx: RunContext) -> None:
    """Train the LSTM on the tracker estimates of the input trace."""
    pcfg = ctx.config.predictor
    trace = load_input_trace(ctx)
    stream = estimates_for(ctx, trace)
    try:
        model, report = train_on(ctx, stream)
    except TrainingError as exc:
        if isinstance(exc.last_model, PredictorModel):
            ctx.write_json("model_partial.json", model_to_dict(exc.last_model))
        raise

    ctx.write_json("model.json", model_to_dict(model))
    ctx.write_text("training.csv", report.to_csv())
    ctx.write_json("training.json", report.to_dict())

    dataset = build_dataset(stream.values, pcfg.m, pcfg.n, validation_fraction=pcfg.train.validation_fraction)
    held_out = stream.values[dataset.train_windows :]
    rows = _horizon_rows(model, held_out)
    if rows:
        ctx.write_text("horizon_errors.csv", csv_text(("step", "lstm_mae_hz", "persistence_mae_hz"), rows))
    ctx.summary.update({
        "windows": len(dataset),
        "train_windows": dataset.train_windows,
        **report.to_dict(),
    })


# -----------------------------------------------------------------------------
# ramsey / sweep
# -----------------------------------------------------------------------------


def cmd_ramsey(ctx: RunContext) -> None:
    """Ramsey curve under the configured loop's residual, with its fits."""
    cfg = ctx.config
    run, policy = _run_configured_loop(ctx)
    if policy.scheme is not Scheme.OPEN_LOOP:
        check_sweep_span(cfg.ramsey, policy.update_period_s)
    ramsey = cfg.ramsey if cfg.ramsey.start_s is not None else cfg.ramsey.model_copy(
        update={"start_s": run.warmup_end_s}
    )
    with stage("ramsey"):
        curve = simulate_ramsey(run.residual, ramsey, ctx.seed)
    ctx.write_text("ramsey_curve.csv", curve.to_csv())

    analysis = cfg.sweep.analysis
    spectrum = fft_spectrum(
        curve.signal, curve.step_s, window=analysis.window, zero_pad_factor=analysis.zero_pad_factor
    )
    ctx.write_text("ramsey_spectrum.csv", spectrum.to_csv())
    window = fit_window(cfg.ramsey, analysis)
    selection = select_peak_count(spectrum, window=window)
    decay = fit_ramsey_decay(curve, analysis.decay_exponent or cfg.ramsey.decay_exponent)
    ctx.write_json("ramsey_fit.json", {
        "curve": curve.to_dict(),
        "spectrum": spectrum.to_dict(),
        "lineshape": selection.to_dict(),
        "decay": decay.to_dict(),
        "loop": run.to_dict(),
    })
    ctx.summary.update({
        "scheme": run.scheme.value,
        "shots_per_point": curve.shots_per_point,
        "l_hz": selection.one.peaks[0].hwhm_hz,
        "t2_star_s": decay.t2_star_s,
        "preferred_peaks": selection.preferred,
    })


def cmd_sweep(ctx: RunContext) -> None:
    """Linewidth versus update speed, plus the fitted linewidth law.

    Raises:
        PartialSweepError: after writing all rows, when any point failed
    """
    cfg = ctx.config
    points = cfg.sweep.build_points(cfg.tracker)
    if not points:
        raise InvalidConfigError("sweep", None, "no points: give sweep.points or sweep.speeds_hz")
    trace = load_input_trace(ctx)
    predictor = predictor_for(ctx, trace) if needs_predictor([p.scheme for p in points]) else None

    ramsey = cfg.ramsey
    if cfg.sweep.doublet is not None:
        with stage("calibrate"):
            split = calibrate_split(
                trace,
                points,
                ramsey,
                ctx.seed,
                cfg.sweep.doublet,
                tracker=cfg.tracker.selected,
                predictor=predictor,
                analysis=cfg.sweep.analysis,
            )
        ramsey = ramsey.model_copy(update={"line_split_hz": split})
        ctx.summary["line_split_hz"] = split

    result = sweep_linewidth(
        trace,
        points,
        ramsey,
        ctx.seed,
        tracker=cfg.tracker.selected,
        predictor=predictor,
        analysis=cfg.sweep.analysis,
        max_workers=ctx.parallel,
    )
    ctx.write_text("sweep.csv", result.to_csv())
    ctx.write_text("sweep_detail.csv", result.to_csv(detailed=True))
    ctx.write_json("sweep.json", {"rows": [r.to_dict() for r in result.rows]})
    ctx.summary.update({"points": len(result.rows), "failed": result.failed})
    if cfg.sweep.analysis.select_peaks:
        ctx.summary["preferred_peaks"] = {r.label: r.preferred_peaks for r in result.rows}

    law_points = result.law_points()
    if cfg.sweep.fit_law and len({nu for nu, _ in law_points}) >= 3:
        try:
            law = fit_linewidth_law(law_points, with_offset=cfg.sweep.law_with_offset)
        except FitError as exc:
            ctx.summary["law_error"] = exc.to_dict()
        else:
            ctx.write_json("law.json", law.to_dict())
            ctx.summary.update({"n": law.n, "n_sigma": law.n_sigma, "d_hz": law.d, "d_sigma_hz": law.d_sigma})

    if result.failed:
        raise PartialSweepError(result.failed, len(result.rows))


# -----------------------------------------------------------------------------
# fit
# -----------------------------------------------------------------------------


def _floats(cells: list[str], source: str, column: str) -> np.ndarray:
    try:
        return np.array([float(c) for c in cells], dtype=np.float64)
    except ValueError as exc:
        raise TraceFormatError(source, None, f"non-numeric value in column {column}: {exc}") from exc


def _fit_law_file(ctx: RunContext, path: Path) -> dict[str, Any]:
    cols = read_csv_columns(ctx.add_input(path), ("nu_hz", "l_hz"))
    nu = _floats(cols["nu_hz"], str(path), "nu_hz")
    width = _floats(cols["l_hz"], str(path), "l_hz")
    keep = np.isfinite(nu) & np.isfinite(width)
    if "flag" in cols:
        keep &= np.array([f != "failed" for f in cols["flag"]], dtype=bool)
    points = list(zip(nu[keep], width[keep], strict=True))
    law = fit_linewidth_law(points, with_offset=ctx.config.fit.with_offset)
    ctx.write_json("law_fit.json", law.to_dict())
    return {"n": law.n, "n_sigma": law.n_sigma, "d_hz": law.d, "d_sigma_hz": law.d_sigma}


def _fit_spectrum_file(ctx: RunContext, path: Path, peaks: int) -> dict[str, Any]:
    source = str(path)
    cols = read_csv_columns(ctx.add_input(path), ("freq_hz",))
    value_col = "psd_hz2_per_hz" if "psd_hz2_per_hz" in cols else "amplitude"
    if value_col not in cols:
        raise TraceFormatError(source, 1, "need an amplitude or psd_hz2_per_hz column")
    spectrum = Spectrum(
        freqs_hz=_floats(cols["freq_hz"], source, "freq_hz"),
        amps=_floats(cols[value_col], source, value_col),
        window="unknown",
        zero_pad_factor=1,
        convention="psd" if value_col == "psd_hz2_per_hz" else "amplitude",
    )
    window = ctx.config.fit.window_hz
    fit = fit_lorentzian(spectrum, peaks, window=window)
    selection = select_peak_count(spectrum, window=window)
    ctx.write_json("spectrum_fit.json", {"fit": fit.to_dict(), "selection": selection.to_dict()})
    return {
        "peaks": [p.to_dict() for p in fit.peaks],
        "preferred_peaks": selection.preferred,
    }


def _fit_ramsey_file(ctx: RunContext, path: Path) -> dict[str, Any]:
    curve = RamseyCurve.from_csv(ctx.add_input(path))
    decay = fit_ramsey_decay(curve, ctx.config.fit.decay_exponent)
    ctx.write_json("ramsey_fit.json", decay.to_dict())
    return {"t2_star_s": decay.t2_star_s, "freq_hz": decay.freq_hz, "reliable": decay.reliable}


def cmd_fit(
    ctx: RunContext,
    law: Path | None = None,
    spectrum: Path | None = None,
    peaks: int | None = None,
    ramsey: Path | None = None,
) -> None:
    """Standalone fits on CSV files from earlier commands."""
    if law is None and spectrum is None and ramsey is None:
        raise InvalidConfigError("fit", None, "give --law, --spectrum or --ramsey")
    if law is not None:
        ctx.summary["law"] = _fit_law_file(ctx, law)
    if spectrum is not None:
        ctx.summary["spectrum"] = _fit_spectrum_file(ctx, spectrum, peaks or ctx.config.fit.peaks)
    if ramsey is not None:
        ctx.summary["ramsey"] = _fit_ramsey_file(ctx, ramsey)
