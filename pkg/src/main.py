"""driftctl - command-line entry point.

Subcommands: generate, track, loop, train, ramsey, sweep, fit.

Exit codes:
    0  success
    2  configuration error
    3  input error (files, traces, datasets)
    4  numerical error (fits, training, partial sweeps)

Logs go to stderr; a JSON summary of the run goes to stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections.abc import Callable, Sequence
from pathlib import Path

import numpy as np
import scipy

from src import __version__
from src.cli import commands
from src.cli.context import RunContext
from src.config.constants import DRIFT
from src.config.run_config import RunConfig, load_run_config
from src.config.settings import Settings, get_settings
from src.exceptions import ConfigurationError, DriftCtlError, InputError
from src.observability.logging import RunLogger, bind_run, configure_logging, unbind_run
from src.observability.metrics import record_command, set_build_info, write_metrics_file

COMMANDS: dict[str, Callable[[RunContext], None]] = {
    "generate": commands.cmd_generate,
    "track": commands.cmd_track,
    "loop": commands.cmd_loop,
    "train": commands.cmd_train,
    "ramsey": commands.cmd_ramsey,
    "sweep": commands.cmd_sweep,
}

_HELP = {
    "generate": "generate a noise trace",
    "track": "track a trace with ODMR or lock-in",
    "loop": "run the correction loop and report efficiency",
    "train": "train the LSTM predictor",
    "ramsey": "simulate a Ramsey measurement under the loop residual",
    "sweep": "linewidth and T2* versus update speed",
    "fit": "standalone law, spectrum or Ramsey fits",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftctl", description="Frequency drift correction simulator")
    parser.add_argument("--version", action="version", version=f"driftctl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in (*COMMANDS, "fit"):
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", type=Path, required=name != "fit", help="run config JSON")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--parallel", type=int, help="worker threads")
        if name in ("loop", "ramsey", "sweep"):
            p.add_argument("--scheme", help="override the correction scheme")
        if name == "fit":
            p.add_argument("--law", type=Path, help="sweep CSV with nu_hz and l_hz columns")
            p.add_argument("--spectrum", type=Path, help="spectrum CSV with freq_hz and amplitude")
            p.add_argument("--peaks", type=int, choices=(1, 2), help="Lorentzian peak count")
            p.add_argument("--ramsey", type=Path, help="Ramsey curve CSV")
    return parser


def _status(exc: DriftCtlError) -> str:
    if isinstance(exc, ConfigurationError):
        return "config_error"
    if isinstance(exc, InputError):
        return "input_error"
    return "numeric_error"


def _load_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_run_config(args.config) if args.config is not None else RunConfig(seed=args.seed or 0)
    return cfg.with_overrides(seed=args.seed, scheme=getattr(args, "scheme", None))


def _out_dir(args: argparse.Namespace, cfg: RunConfig, settings: Settings) -> Path:
    if args.out is not None:
        return Path(args.out)
    if cfg.out_dir is not None:
        return Path(cfg.out_dir)
    return Path(settings.output_root) / args.command


def _emit(payload: dict[str, object]) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=True, default=str)
    sys.stdout.write("\n")


def run(args: argparse.Namespace, settings: Settings) -> int:
    """Execute one parsed command; returns the exit code."""
    log = RunLogger(args.command)
    ctx: RunContext | None = None
    started = time.perf_counter()
    try:
        cfg = _load_config(args)
        ctx = RunContext(
            command=args.command,
            config=cfg,
            out_dir=_out_dir(args, cfg, settings),
            parallel=args.parallel or settings.default_parallel,
        )
        bind_run(ctx.config_hash[:12], args.command)
        log.command_started({"seed": ctx.seed, "out_dir": str(ctx.out_dir)})

        if args.command == "fit":
            commands.cmd_fit(ctx, law=args.law, spectrum=args.spectrum, peaks=args.peaks, ramsey=args.ramsey)
        else:
            COMMANDS[args.command](ctx)
    except DriftCtlError as exc:
        error = exc.to_dict()
        log.command_failed(error, exc.exit_code)
        record_command(args.command, _status(exc))
        if ctx is not None and ctx.outputs:
            ctx.summary["error"] = error
            _finish(ctx, settings)
        _emit({"command": args.command, "status": "error", "exit_code": exc.exit_code, "error": error})
        return exc.exit_code
    finally:
        unbind_run()

    assert ctx is not None
    record_command(args.command, "ok")
    _finish(ctx, settings)
    log.command_finished(time.perf_counter() - started, len(ctx.outputs))
    _emit({"command": args.command, "status": "ok", "out_dir": str(ctx.out_dir), "summary": ctx.summary})
    return DRIFT.EXIT_OK


def _finish(ctx: RunContext, settings: Settings) -> None:
    ctx.write_manifest()
    if settings.metrics_enabled:
        write_metrics_file(ctx.out_dir / "metrics.prom")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    configure_logging(level=settings.log_level, json_format=settings.log_json)
    set_build_info(__version__, np.__version__, scipy.__version__)
    return run(args, settings)


if __name__ == "__main__":
    sys.exit(main())
