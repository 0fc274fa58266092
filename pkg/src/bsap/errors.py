"""Package-wide error types with CLI exit-code significance."""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid configuration or CLI arguments (exit code 2)."""


class ResourceLimitError(RuntimeError):
    """Request exceeds the dense-simulation guard rails (exit code 3)."""
