"""Shared exception types."""


class GamesynthError(Exception):
    """Base class for errors raised by this package."""


class CapacityError(GamesynthError):
    """A construction exceeded its configured state bound."""

    def __init__(self, what: str, count: int, bound: int):
        super().__init__(f"{what} exceeded capacity: {count} > {bound}")
        self.count = count
        self.bound = bound


class AlphabetError(GamesynthError):
    """A label or proposition fell outside the declared alphabet."""


class ParamError(GamesynthError):
    """Invalid parameter to a generator or distribution."""


class FormatError(GamesynthError):
    """Malformed explicit model file. Carries file name and 1-based line."""

    def __init__(self, filename: str, line: int, message: str):
        super().__init__(f"{filename}:{line}: {message}")
        self.filename = filename
        self.line = line
        self.reason = message


class ScenarioError(GamesynthError):
    """Invalid scenario description (bad JSON schema, unknown keys, ...)."""
