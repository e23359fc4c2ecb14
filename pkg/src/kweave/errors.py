"""Exception types shared across the package."""


class KweaveError(Exception):
    """Base class for all package errors."""


class GraphError(KweaveError):
    """Structural problem in the graph: unknown ids, bad endpoints, bad values."""


class GraphFormatError(KweaveError):
    """A persisted graph or index file is malformed or has the wrong version."""


class ParseError(KweaveError):
    """Source document could not be parsed.

    Carries the position so CLI errors can be reported as file:line.
    """

    def __init__(self, message: str, line: int | None = None, source: str = ""):
        self.line = line
        self.source = source
        prefix = ""
        if source:
            prefix = source
            if line is not None:
                prefix += f":{line}"
            prefix += ": "
        elif line is not None:
            prefix = f"line {line}: "
        super().__init__(prefix + message)


class ConfigError(KweaveError):
    """Invalid configuration value (score weights, thresholds, modes)."""
