"""
Exception hierarchy shared by the simulator modules and the CLI.

The CLI maps ConfigError to exit code 2 and DomainError to exit code 3.
"""


class DmaError(ValueError):
    """Base class for every error raised by this package"""


class ConfigError(DmaError):
    """Invalid configuration, unknown keys or bad command-line usage"""


class ParseError(ConfigError):
    """Malformed input file; carries the 1-based line number when known"""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DomainError(DmaError):
    """A numerical operation was called outside its domain"""


class BelowCutoffError(DomainError):
    """Frequency at or below the TE10 cutoff of the feed"""


class NoBeamError(DomainError):
    """Pattern is identically zero (e.g. all-off code)"""


class RankDeficientError(DomainError):
    """Unregularized inverse requested for a numerically singular matrix"""
