"""Exception hierarchy shared across the package."""


class HopfforgeError(Exception):
    """Base class for all package-specific errors."""


class InvalidInput(HopfforgeError):
    """Malformed or out-of-domain user input."""


class InvalidFamily(HopfforgeError):
    """A perturbation family violates its construction hypotheses."""


class DivisionByZeroJet(HopfforgeError):
    """Jet division by the zero jet."""


class NegativeValuation(HopfforgeError):
    """A jet operation produced a negative power of the small parameter."""


class OddValuation(HopfforgeError):
    """Jet square root of a series with odd leading power."""


class NegativeLeading(HopfforgeError):
    """Jet square root of a series with non-positive leading coefficient."""


class SingularChange(HopfforgeError):
    """The linear normal-form change of variables is singular."""


class AmbiguousDetection(HopfforgeError):
    """Two equilibria qualify as zero-Hopf points simultaneously.

    Carries the qualifying candidates so callers can report both and
    fail closed.
    """

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class FirstOrderNotZero(HopfforgeError):
    """Second-order averaging requested but the first-order average
    does not vanish."""


class NoReturn(HopfforgeError):
    """A trajectory failed to return to the cross-section in the
    allotted time."""


class NoConvergence(HopfforgeError):
    """An iterative solver exhausted its iteration budget.

    Carries the last residual when available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StepFailure(HopfforgeError):
    """The adaptive integrator could not complete a step."""


class MismatchWarning(UserWarning):
    """Verified orbit count differs from the predicted count."""
