class SculptingError(Exception):
    """Base class for domain failures (CLI exit code 1)."""


class ContractError(SculptingError):
    """A documented precondition does not hold."""


class NormalizationError(SculptingError, ValueError):
    pass


class ResourceError(SculptingError):
    pass


class NoBunchingError(SculptingError):
    """The heralded state has terms outside the one-boson-per-mode sector."""

    def __init__(self, violations, message: str | None = None):
        self.violations = list(violations)
        super().__init__(message or f"no-bunching restriction violated by {len(self.violations)} term(s)")
