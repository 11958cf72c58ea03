"""Exception hierarchy shared across the engine."""


class AdjforgeError(Exception):
    """Base class for all engine errors."""


class UnsupportedOperationError(AdjforgeError):
    """Operation falls outside the representable expression class."""


class UnboundAtomError(AdjforgeError, KeyError):
    """Numeric evaluation hit an atom or parameter with no assigned value."""


class ConfigurationError(AdjforgeError):
    """Inconsistent session-level setup (truncation orders, solved forms, names)."""


class ParseError(AdjforgeError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
