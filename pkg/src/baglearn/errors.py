"""Exception types shared across the package."""


class BaglearnError(Exception):
    """Base class for all package errors."""


class DataError(BaglearnError):
    """Invalid or inconsistent dataset content (empty bags, mismatched dimensions, ...)."""


class FormatError(BaglearnError):
    """Malformed file content (bad IDX magic, broken JSONL line, truncation)."""


class ConfigError(BaglearnError):
    """Invalid configuration value or unknown parameter name."""


class ShapeError(BaglearnError):
    """Array shape inconsistent with the declared layer sizes."""


class NumericError(BaglearnError):
    """Non-finite values encountered during training."""
