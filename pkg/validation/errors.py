# validation/errors.py
# Comments in English only

from __future__ import annotations


class TdaError(Exception):
    """Root of every error raised by the tdalab modules."""


class TdaInputError(TdaError, ValueError):
    pass


class TdaSizeError(TdaInputError):
    """A configured cap (grid points, cloud points, cells) was exceeded."""


class TdaNumericError(TdaError, ArithmeticError):
    pass


class TdaConsistencyError(TdaError, RuntimeError):
    """Two independent computations of the same quantity disagree."""


class UnsupportedFeatureError(TdaError, NotImplementedError):
    pass


class ConfigError(TdaInputError):
    pass
