"""Shared exception types.

InputError covers malformed data (files, triplets, dimensions) and maps to
CLI exit code 2; ConfigError covers bad parameter combinations and maps to 3.
"""


class InputError(ValueError):
    pass


class StructuralError(InputError):
    """Matrix violates the every-row/column-nonzero requirement."""


class ConfigError(ValueError):
    pass
