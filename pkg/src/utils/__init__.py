"""Utilities module."""

from src.utils.io import (
    atomic_write_text,
    csv_text,
    format_float,
    sha256_file,
    sha256_json,
    write_csv,
    write_json,
)
from src.utils.seeding import derive_int_seed, derive_rng, derive_seed_sequence

__all__ = [
    # File helpers
    "atomic_write_text",
    "csv_text",
    "format_float",
    "sha256_file",
    "sha256_json",
    "write_csv",
    "write_json",
    # Seeding
    "derive_int_seed",
    "derive_rng",
    "derive_seed_sequence",
]
