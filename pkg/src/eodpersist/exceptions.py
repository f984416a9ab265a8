class DomainError(ValueError):
    """An input violates a precondition of a persistence operation."""


class ParseError(DomainError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NoWindowsError(DomainError):
    pass


class FitError(DomainError):
    """Raised when a power-law fit cannot be formed on the requested range."""


class ConfigError(DomainError):
    pass
