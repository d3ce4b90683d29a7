"""Exception types shared across the package."""


class RnnBenchError(Exception):
    """Base class for all errors raised by this package."""


class InvalidShapeError(RnnBenchError):
    """Operands have incompatible or degenerate shapes."""


class NumericFaultError(RnnBenchError):
    """A tensor contains NaN/Inf where finite values are required."""


class InvalidConfigError(RnnBenchError):
    """A configuration value is out of range or inconsistent."""


class InvalidLabelError(RnnBenchError):
    """A class label is outside the configured range."""


class EmptyInputError(RnnBenchError):
    """An operation received an empty sequence where m >= 1 is required."""


class ContractViolationError(RnnBenchError):
    """Caller combined values that do not belong together."""


class ParseError(RnnBenchError):
    """A file does not follow its declared format.

    Carries a position: byte offset for binary files, line number for
    text files.
    """

    def __init__(self, message, *, offset=None, line=None):
        pos = []
        if offset is not None:
            pos.append(f"byte offset {offset}")
        if line is not None:
            pos.append(f"line {line}")
        if pos:
            message = f"{message} ({', '.join(pos)})"
        super().__init__(message)
        self.offset = offset
        self.line = line


class DimensionError(RnnBenchError):
    """Loaded vector dimensionality differs from the expected one."""


class IntegrityError(RnnBenchError):
    """A loaded corpus does not match its published statistics."""


class DivergedError(RnnBenchError):
    """Training produced a non-finite loss."""

    def __init__(self, message, *, epoch=None, example_index=None):
        super().__init__(message)
        self.epoch = epoch
        self.example_index = example_index
