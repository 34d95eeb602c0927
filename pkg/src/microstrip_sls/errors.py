"""Exception hierarchy shared by the library and the CLI."""


class MicrostripSLSError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class DomainError(MicrostripSLSError, ValueError):
    """An input lies outside the mathematical domain of a formula."""


class SingularityError(DomainError):
    """A formula would divide by zero (or cross its pole) for these inputs."""


class GeometryError(MicrostripSLSError, ValueError):
    """Inputs produce a non-physical patch geometry."""


class ModelRangeError(MicrostripSLSError, ValueError):
    """A frequency falls outside the surrogate model's validity window."""

    exit_code = 2


class InputError(MicrostripSLSError, ValueError):
    """Malformed input to a planning routine."""


class SizeGuardError(InputError):
    """Exhaustive enumeration refused because the instance is too large."""


class ValidationError(MicrostripSLSError, ValueError):
    """A scenario record violates an invariant; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ScenarioParseError(MicrostripSLSError):
    """Scenario file is not syntactically valid."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ScenarioIOError(MicrostripSLSError, OSError):
    exit_code = 3
