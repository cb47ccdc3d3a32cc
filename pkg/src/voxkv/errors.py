"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration, rejected input, or malformed artifact."""


class CapacityError(RuntimeError):
    """A configured resource budget (e.g. the block arena) was exceeded."""


class TraceFormatError(ConfigError):
    """Malformed trace file; carries the offending 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"trace line {line_no}: {message}")
        self.line_no = line_no
