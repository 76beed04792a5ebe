class TlsRelaxError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(TlsRelaxError):
    """Bad configuration text or a field that fails validation."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None, column: int | None = None):
        self.key = key
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f" (line {line}, column {column or 1})"
        if key is not None:
            location += f" [key: {key}]"
        super().__init__(f"{message}{location}")


class SimulationError(TlsRelaxError):
    """Failure while building operators or propagating a state."""


class SectorMembershipError(SimulationError, ValueError):
    """A configuration does not belong to the requested sector."""


class DimensionMismatchError(SimulationError, ValueError):
    """Operand dimensions or layouts disagree."""


class FitError(TlsRelaxError):
    """A decay or scaling fit could not be carried out."""


class OutputError(TlsRelaxError):
    """Reading or writing a result file failed."""
