"""Exception types shared across the package."""


class CapacityError(RuntimeError):
    """The requested problem size exceeds the configured memory budget."""


class NumericalError(RuntimeError):
    """A numerical routine produced a non-finite value or failed to converge."""

    def __init__(self, message, params=None, residuals=None):
        super().__init__(message)
        self.params = params
        self.residuals = residuals


class NonBipartiteError(ValueError):
    """The lattice bond list contains an odd (frustrated) cycle.

    ``cycle`` holds the offending site sequence.
    """

    def __init__(self, message, cycle=None):
        super().__init__(message)
        self.cycle = cycle or []


class UndefinedFidelityError(ZeroDivisionError):
    """Energy fidelity E/E0 is undefined because the reference energy is zero."""
