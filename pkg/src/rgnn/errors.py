"""Exception types shared across the package.

The CLI maps these onto exit codes, so loaders, solvers and the model
reader raise the specific class rather than a bare ValueError.
"""


class ConfigError(ValueError):
    """A run configuration violates the schema or a value constraint."""


class DataError(ValueError):
    """A dataset file is malformed or its contents are unusable."""


class NumericError(ArithmeticError):
    """A numeric computation produced non-finite values or an unsolvable system."""


class ModelFormatError(RuntimeError):
    """A model file is corrupt, truncated, or fails its checksum."""


class ModelVersionError(ModelFormatError):
    """A model file carries a format version this build cannot read."""
