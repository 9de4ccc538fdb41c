"""File helpers: atomic writes, hashing, CSV formatting."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

from src.exceptions import TraceFormatError

FLOAT_FORMAT = "%.17g"


def format_float(value: float) -> str:
    """Format a float with full double precision."""
    return FLOAT_FORMAT % value


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write text via a temp file in the same directory, then rename.

    Returns:
        The final path.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(f"{target.name}.tmp-{os.getpid()}")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, target)
    return target


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Render rows as LF-terminated CSV; floats use %.17g."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float):
                cells.append(format_float(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Atomically write a CSV file."""
    return atomic_write_text(path, csv_text(header, rows))


def write_json(path: str | Path, payload: Any) -> Path:
    """Atomically write pretty, key-sorted JSON."""
    return atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def sha256_file(path: str | Path) -> str:
    """Hex SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def sha256_json(payload: Any) -> str:
    """Hex SHA-256 of canonical JSON (sorted keys, compact)."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def read_csv_columns(path: str | Path, required: Sequence[str]) -> dict[str, list[str]]:
    """Read a headed CSV into column name -> raw cell strings.

    Raises:
        TraceFormatError: unreadable file, missing column or ragged row
    """
    source = str(path)
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise TraceFormatError(source, None, f"cannot open: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        missing = [name for name in required if name not in header]
        if missing:
            raise TraceFormatError(source, 1, f"missing column(s) {', '.join(missing)}")
        columns: dict[str, list[str]] = {name: [] for name in header}
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise TraceFormatError(source, line_no, f"expected {len(header)} columns, got {len(row)}")
            for name, cell in zip(header, row, strict=True):
                columns[name].append(cell.strip())
    return columns
