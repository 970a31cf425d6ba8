"""Error types shared across the package.

Every failure mode carries a stable machine-readable name so callers (and the
CLI exit path) can dispatch on it without parsing messages.
"""

from __future__ import annotations


class WavefanError(Exception):
    """Numerical or contract failure with a stable identifier in `name`."""

    def __init__(self, name: str, message: str = "", **context):
        self.name = name
        self.context = context
        text = name if not message else f"{name}: {message}"
        super().__init__(text)


class ConfigError(ValueError):
    """Bad run configuration (CLI exit code 2)."""
