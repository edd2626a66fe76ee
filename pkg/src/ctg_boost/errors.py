"""Exception hierarchy.

``DataError`` subclasses map to CLI exit code 2, ``TrainingError`` subclasses
to exit code 3.
"""


class CtgError(Exception):
    """Base class for every error raised by ctg_boost."""


class DataError(CtgError):
    pass


class MissingColumnError(DataError):
    def __init__(self, name):
        super().__init__(f"missing column {name!r}")
        self.name = name


class UnparsableCellError(DataError):
    def __init__(self, row, col, value):
        super().__init__(f"row {row}, column {col!r}: cannot parse {value!r} as a real")
        self.row = row
        self.col = col


class InvalidLabelError(DataError):
    def __init__(self, row, value):
        super().__init__(f"row {row}: label {value!r} is not one of 1.0, 2.0, 3.0")
        self.row = row
        self.value = value


class NonFiniteValueError(DataError):
    def __init__(self, row, col):
        super().__init__(f"row {row}, column {col!r}: non-finite value")
        self.row = row
        self.col = col


class EmptyDatasetError(DataError):
    pass


class TooFewSamplesError(DataError):
    def __init__(self, message, label=None):
        super().__init__(message)
        self.label = label


class FoldsExceedClassCountError(DataError):
    pass


class LengthMismatchError(CtgError, ValueError):
    pass


class LabelOutOfRangeError(CtgError, ValueError):
    pass


class EmptyMatrixError(CtgError, ValueError):
    pass


class TrainingError(CtgError):
    pass


class SingleClassDatasetError(TrainingError):
    pass


class NonFiniteInputError(CtgError, ValueError):
    pass


class ModelFileError(TrainingError):
    pass


class VersionMismatchError(ModelFileError):
    pass


class CorruptModelError(ModelFileError):
    pass


class UnknownParamError(CtgError, ValueError):
    pass
