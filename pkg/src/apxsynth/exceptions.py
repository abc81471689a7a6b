"""Exception hierarchy shared by all apxsynth modules."""


class ApxsynthError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(ApxsynthError):
    """A parameter is outside the range the tool supports."""


class ArityError(ApxsynthError):
    """Widths or port counts of two objects do not line up."""


class ResourceGuardError(ApxsynthError):
    """An exhaustive operation was requested above its input-size cap."""


class NetlistError(ApxsynthError):
    """Base class for netlist-text problems; carries a 1-based line number."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class NetlistSyntaxError(NetlistError):
    pass


class CyclicDefinitionError(NetlistError):
    pass


class UndefinedSignalError(NetlistError):
    pass


class DuplicateIdentifierError(NetlistError):
    pass


class ParameterShapeError(ApxsynthError):
    """A parameter assignment does not match its template's dimensions."""


class FamilyMismatchError(ApxsynthError):
    """A shared-family value was passed where nonshared was required, or vice versa."""


class InfeasibleBoundsError(ApxsynthError):
    """Proxy bounds that no assignment can make use of (e.g. ITS > 0 with PIT = 0)."""


class SolverNotFoundError(ApxsynthError):
    """The configured solver executable could not be started."""


class SolverProtocolError(ApxsynthError):
    """The solver produced output this tool cannot interpret."""
