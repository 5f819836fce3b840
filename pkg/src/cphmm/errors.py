"""Exception hierarchy shared by all pipeline stages.

Three broad categories map onto CLI exit codes: configuration problems
(exit 2), data problems (exit 3) and computation problems (exit 4).
"""


class CphmmError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CphmmError):
    """Invalid run configuration or invalid API parameters."""


class DataError(CphmmError):
    """Invalid, incomplete or inconsistent input data."""


class ComputeError(CphmmError):
    """A numeric computation failed or produced an unusable result."""


# --- configuration -----------------------------------------------------------

class ParamError(ConfigError):
    """API called with out-of-range parameters."""


class SpecError(ConfigError):
    """Synthetic-dataset spec is invalid or unsatisfiable."""


# --- data --------------------------------------------------------------------

class MissingExecutionError(DataError):
    """A (gesture, execution) sequence file is absent from the dataset."""


class ShapeError(DataError):
    """A sequence file has the wrong number of rows or ragged rows."""


class ParseError(DataError):
    """A cell in a sequence file is not a finite decimal number."""


class LengthError(DataError):
    """A sequence is too short for the requested operation."""


class ZeroVarianceError(DataError):
    """A sequence is constant and cannot be deviation-normalized."""


class DegenerateInputError(DataError):
    """Fewer distinct values than requested clusters."""


class EmptyInputError(DataError):
    """An operation that needs at least one element received none."""


class EmptyTrainingSetError(DataError):
    """Training was requested with no sequences."""


class EmptyModelSetError(DataError):
    """Classification was requested with no models."""


class SymbolOutOfRangeError(DataError):
    """A symbol sequence contains a symbol outside the model's alphabet."""


class IncompleteGridError(DataError):
    """The symbol-sequence grid is missing (gesture, sensor, execution,
    cluster-count) combinations required to build training pairs."""


class ModelLoadError(DataError):
    """A serialized model file is malformed."""


class AlphabetMismatchError(DataError):
    """Models or sequences disagree on alphabet size."""


class IoError(DataError):
    """Reading or writing dataset/report files failed."""


# --- computation -------------------------------------------------------------

class NonFiniteError(ComputeError):
    """A value that must be finite (or -inf) is NaN or +inf."""
