"""Exception hierarchy shared across the library."""


class MetaBalancerError(Exception):
    """Base class for all library errors."""


class DomainError(MetaBalancerError):
    """Input violates a precondition (bad value, too few studies, ...)."""


class ValidationError(MetaBalancerError):
    """Malformed external input (file row, request field).

    Carries optional machine-readable context used by the CLI/service
    error reporting.
    """

    def __init__(self, message: str, *, field: str | None = None,
                 row: int | None = None):
        super().__init__(message)
        self.field = field
        self.row = row

    def detail(self) -> dict:
        d: dict = {"message": str(self)}
        if self.field is not None:
            d["field"] = self.field
        if self.row is not None:
            d["row"] = self.row
        return d


class SolverError(MetaBalancerError):
    """Numerical routine failed to bracket or converge."""


class ContractError(MetaBalancerError):
    """Mismatched objects passed together (e.g. a fit from a different set)."""
