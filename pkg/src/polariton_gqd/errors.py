class InputDomainError(ValueError):
    """Argument outside the domain an operation accepts."""


class DaviesGroupingError(ValueError):
    """Bohr-frequency grouping changes with the grouping tolerance."""


class GuardViolation(RuntimeError):
    """A propagated state left the set of valid density matrices."""

    def __init__(self, message: str, tau: float | None = None):
        super().__init__(message)
        self.tau = tau
