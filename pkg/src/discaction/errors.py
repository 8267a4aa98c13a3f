"""Exception types raised across the package."""


class DiscActionError(Exception):
    """Base class for all package errors."""


class CenterOnLoop(DiscActionError, ValueError):
    pass


class UndersampledLoop(DiscActionError, ValueError):
    """A single sampling step turned by more than a quarter turn."""


class OutsideAnnulus(DiscActionError, ValueError):
    pass


class OutsideDisc(DiscActionError, ValueError):
    pass


class BoundaryViolation(DiscActionError, ValueError):
    """Hamiltonian does not vanish on the unit circle."""


class InvalidShape(DiscActionError, ValueError):
    pass


class StepRejection(DiscActionError, RuntimeError):
    """Integration failed: orbit escaped or step refinement did not converge."""


class NotClosed(DiscActionError, ValueError):
    pass


class RootIsolationFailure(DiscActionError, RuntimeError):
    pass


class IndeterminateCase(DiscActionError, ValueError):
    """Closed-form reasoning cannot pin the requested spectral invariant."""


class PreconditionRho(DiscActionError, ValueError):
    """Boundary rotation number outside the range a check requires."""
