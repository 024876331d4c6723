"""Exception hierarchy.

Errors fall into three categories that the CLI maps to distinct exit codes:
configuration, input data, and numerical failure.
"""


class DroughtError(Exception):
    """Base class for every error raised by this package."""

    category = "error"
    exit_code = 1


class ConfigError(DroughtError, ValueError):
    category = "config"
    exit_code = 2


class InputError(DroughtError, ValueError):
    category = "input"
    exit_code = 3


class SchemaError(InputError):
    category = "schema"


class ParseError(InputError):
    category = "parse"


class EmptyInputError(InputError):
    category = "empty-input"


class ConflictError(InputError):
    category = "conflict"


class RangeError(InputError):
    category = "range"


class DimensionError(InputError):
    category = "dimension"


class NumericalError(DroughtError, ArithmeticError):
    category = "numerical"
    exit_code = 4


class InsufficientDataError(NumericalError):
    category = "insufficient-data"


class UndefinedScoreError(NumericalError):
    category = "undefined-score"


class DegenerateSpreadError(NumericalError):
    category = "degenerate-spread"
