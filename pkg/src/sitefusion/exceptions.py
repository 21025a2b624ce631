"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Input data or parameters violate an operation's preconditions."""


class DegenerateDataError(ValueError):
    """Training data cannot support a fit (e.g. a single class present)."""


class UndefinedMetricError(ValueError):
    """A metric is undefined for the given data (e.g. F1 without positives)."""


class ParseError(ValueError):
    """A file could not be parsed; message names the file and line."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class ConfigError(ValueError):
    """Configuration failed schema validation."""

    def __init__(self, message, keys=()):
        self.keys = list(keys)
        super().__init__(message + (": " + ", ".join(self.keys) if self.keys else ""))
