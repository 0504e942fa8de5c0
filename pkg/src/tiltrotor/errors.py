"""Exception hierarchy. Each error maps to a CLI exit code."""


class TiltrotorError(Exception):
    exit_code = 1


class DomainError(TiltrotorError, ValueError):
    """An input lies outside the domain an operation is defined on."""

    exit_code = 4


class ConfigParseError(TiltrotorError):
    exit_code = 2

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ConfigValidationError(TiltrotorError):
    exit_code = 3

    def __init__(self, field, constraint):
        self.field = field
        self.constraint = constraint
        super().__init__(f"{field}: {constraint}")


class ControlFault(TiltrotorError):
    """A control law was asked to operate where its formulas are singular."""

    exit_code = 4


class SimulationFailure(TiltrotorError):
    """The integrated state left the valid envelope (non-finite or |theta| >= pi/2)."""

    exit_code = 4


class SolverError(TiltrotorError):
    """Newton-Raphson failed to converge on the induced velocity."""

    exit_code = 5

    def __init__(self, message, last_iterate, residual):
        self.last_iterate = last_iterate
        self.residual = residual
        super().__init__(f"{message} (last iterate {last_iterate!r}, residual {residual!r})")
