"""Command context - output directory, provenance and the run manifest.

Every artifact goes through RunContext.write_text so that it is written
atomically and its hash lands in manifest.json. Manifests carry no
timestamps: re-running a command reproduces them byte for byte.
"""

from __future__ import annotations

import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pydantic
import scipy

from src import __version__
from src.config.run_config import RunConfig
from src.observability.logging import RunLogger
from src.utils.io import atomic_write_text, sha256_file, sha256_json, write_json

MANIFEST_NAME = "manifest.json"


def package_versions() -> dict[str, str]:
    """Versions that can change numerical results."""
    return {
        "driftctl": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
        "python": platform.python_version(),
    }


@dataclass
class RunContext:
    """State shared by one CLI command invocation.

    Attributes:
        command: Subcommand name
        config: Validated config with CLI overrides applied
        out_dir: Output directory (created on first write)
        parallel: Worker threads for concurrent stages
        inputs: Input path -> sha256
        outputs: Output file name -> sha256
        summary: Key results, echoed on stdout and stored in the manifest

    Usage:
        ctx = RunContext("track", cfg, Path("runs/track"))
        ctx.write_text("estimates.csv", stream.to_csv())
        ctx.write_manifest()
    """

    command: str
    config: RunConfig
    out_dir: Path
    parallel: int = 1
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._log = RunLogger(self.command)

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def config_hash(self) -> str:
        return sha256_json(self.config.resolved())

    def add_input(self, path: str | Path) -> Path:
        """Record an input file's hash; returns the path unchanged."""
        self.inputs[str(path)] = sha256_file(path)
        return Path(path)

    def write_text(self, name: str, text: str) -> Path:
        """Atomically write an artifact and record its hash."""
        path = atomic_write_text(self.out_dir / name, text)
        digest = sha256_file(path)
        self.outputs[name] = digest
        self._log.artifact_written(str(path), digest)
        return path

    def write_json(self, name: str, payload: Any) -> Path:
        path = write_json(self.out_dir / name, payload)
        digest = sha256_file(path)
        self.outputs[name] = digest
        self._log.artifact_written(str(path), digest)
        return path

    def manifest(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "config": self.config.resolved(),
            "config_hash": self.config_hash,
            "seed": self.seed,
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": dict(sorted(self.outputs.items())),
            "versions": package_versions(),
            "summary": self.summary,
        }

    def write_manifest(self) -> Path:
        return write_json(self.out_dir / MANIFEST_NAME, self.manifest())
