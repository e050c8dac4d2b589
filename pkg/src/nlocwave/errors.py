"""Exception hierarchy shared across the package.

Everything raised on a domain-level failure derives from NlocError so the
CLI can map it to exit code 1 with a structured message.
"""


class NlocError(Exception):
    """Base class for domain errors."""


class RangeError(NlocError, ValueError):
    """A coordinate or sample point lies outside the supported range."""


class SizeError(NlocError, ValueError):
    """A size parameter is below the supported minimum."""


class ShapeError(NlocError, ValueError):
    """Array shape does not match the plan or grid it is used with."""


class StateError(NlocError, RuntimeError):
    """Operation requires a state the object is not in (e.g. unvalidated symbol)."""


class SingularOperatorError(NlocError, ArithmeticError):
    """A diagonal mode operator has a (near-)zero symbol value on the node grid."""

    def __init__(self, rho, beta, message=None):
        self.rho = rho
        self.beta = beta
        super().__init__(
            message
            or f"mode operator symbol vanishes near rho={rho!r} for beta={beta!r}"
        )


class SingularPreconditionerError(SingularOperatorError):
    """The reduced-equation preconditioner symbol has a zero on the node grid."""


class NotHopfError(NlocError, ValueError):
    """Linearization does not carry a purely imaginary eigenvalue pair."""

    def __init__(self, trace, message=None):
        self.trace = trace
        super().__init__(
            message or f"matrix is not at a Hopf point: trace = {trace!r}"
        )


class ResonanceError(NlocError, ArithmeticError):
    """One of the second-order linear systems is singular."""

    def __init__(self, which, message=None):
        self.which = which
        super().__init__(message or f"resonant system {which} is singular")


class MaxIterationsError(NlocError, RuntimeError):
    """Newton iteration failed to reach the requested tolerance."""

    def __init__(self, residual_history, message=None):
        self.residual_history = list(residual_history)
        last = self.residual_history[-1] if self.residual_history else None
        super().__init__(
            message or f"no convergence; last residual norm = {last!r}"
        )


class DivergenceError(NlocError, RuntimeError):
    """Time integration produced non-finite values."""

    def __init__(self, step_index, message=None):
        self.step_index = step_index
        super().__init__(message or f"non-finite field values at step {step_index}")


class TruncationWarning(UserWarning):
    """A profile carries non-negligible mass at the truncation radius."""
