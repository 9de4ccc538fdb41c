"""Command implementations behind the driftctl CLI."""

from __future__ import annotations

from src.cli.commands import (
    cmd_fit,
    cmd_generate,
    cmd_loop,
    cmd_ramsey,
    cmd_sweep,
    cmd_track,
    cmd_train,
)
from src.cli.context import MANIFEST_NAME, RunContext

__all__ = [
    "MANIFEST_NAME",
    "RunContext",
    "cmd_fit",
    "cmd_generate",
    "cmd_loop",
    "cmd_ramsey",
    "cmd_sweep",
    "cmd_track",
    "cmd_train",
]
