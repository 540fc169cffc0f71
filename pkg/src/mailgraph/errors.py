"""Exception types shared across the package."""


class MailgraphError(Exception):
    """Base class for all mailgraph failures."""


class MatrixFormatError(MailgraphError):
    """An adjacency, roster, or alias CSV file is malformed.

    Messages carry row/column context so a bad cell can be located.
    """


class ConfigError(MailgraphError):
    """Roster, alias table, and options are mutually inconsistent."""


class EmailParseError(MailgraphError):
    """A message could not be parsed into sender/recipient fields."""

    def __init__(self, message: str, source_path: str = ""):
        super().__init__(message)
        self.source_path = source_path


class PowerIterationError(MailgraphError):
    """The eigenvector iteration failed to reach the requested residual."""

    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class TomDomainError(MailgraphError):
    """A topological-overlap denominator was non-positive in strict mode."""


class DissimilarityError(MailgraphError):
    """Dissimilarity construction failed (all-zero graph or out-of-range entries)."""
