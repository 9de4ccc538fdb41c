"""Schema validation helpers.

Converts pydantic ValidationErrors into the driftctl error hierarchy so
that every schema failure names the dotted field path it came from.
"""

from __future__ import annotations

from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

from src.exceptions import (
    ConfigurationError,
    InvalidConfigError,
    MissingConfigError,
    ParameterError,
)

ModelT = TypeVar("ModelT", bound=BaseModel)

# Both take (key, value, reason)
FieldErrorClass = type[InvalidConfigError] | type[ParameterError]


def field_path(loc: tuple[int | str, ...], prefix: str = "") -> str:
    """Join a pydantic error location into `a.b.0.c` form.

    Discriminator tags (the `ou` in `components.0.ou.stationary_std`)
    are kept so the failing variant is visible.
    """
    parts = [str(p) for p in loc]
    if prefix:
        parts.insert(0, prefix)
    return ".".join(parts)


def to_config_error(
    exc: ValidationError,
    prefix: str = "",
    error_cls: FieldErrorClass = InvalidConfigError,
) -> ConfigurationError:
    """Map the first validation error onto a ConfigurationError."""
    first = exc.errors()[0]
    path = field_path(tuple(first["loc"]), prefix) or "<root>"
    if first["type"] == "missing":
        return MissingConfigError(path)
    return error_cls(path, first.get("input"), first["msg"])


def parse_model(
    model_cls: type[ModelT],
    data: Any,
    prefix: str = "",
    error_cls: FieldErrorClass = InvalidConfigError,
) -> ModelT:
    """Validate `data` against `model_cls`.

    Raises:
        MissingConfigError: a required field is absent
        InvalidConfigError: (or `error_cls`) any other schema violation
    """
    try:
        return model_cls.model_validate(data)
    except ValidationError as exc:
        raise to_config_error(exc, prefix, error_cls) from exc
