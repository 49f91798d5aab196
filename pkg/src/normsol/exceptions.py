"""Exception and warning classes shared across the package."""


class NormsolError(Exception):
    """Base class for errors raised by this package."""


class DomainError(NormsolError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidSpecError(DomainError):
    """A nonlinearity specification violates its ordering or growth rules."""


class NoPositiveFError(DomainError):
    """The primitive F is nowhere positive on the scanned range."""


class NotProjectableError(DomainError):
    """The field has non-positive integral of H and cannot be projected onto M."""


class PreconditionError(DomainError):
    """A field does not satisfy the precondition of the operation (e.g. not in M)."""


class ResolutionError(NormsolError):
    """The grid cannot resolve the requested resampling."""


class AccuracyError(NormsolError):
    """A numerical procedure failed to reach its accuracy target."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class SolverError(NormsolError):
    """Base class for failures of the iterative solvers."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ShootingError(SolverError):
    """The shooting bracket for a ground state could not be established."""


class EscapedWellError(SolverError):
    """Descent left the gradient-bounded well U_{R0}."""


class StallError(SolverError):
    """Backtracking could not produce an energy decrease."""


class WrongBranchError(SolverError):
    """Iterates persistently classified in M_+."""


class RhoTooLargeError(SolverError):
    """An iterate was classified in M_0, so the prescribed mass is too large."""

    def __init__(self, message, guard=None, trace=None):
        super().__init__(message, trace=trace)
        self.guard = guard


class EvaluationError(NormsolError):
    """A fibering or energy evaluation produced a non-finite value."""


class StepSizeError(NormsolError):
    """The time step is too large for the requested accuracy."""

    def __init__(self, message, suggested_dt=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class TruncationWarning(UserWarning):
    """A field has not decayed before the outer radius."""


class UnboundedC0Warning(UserWarning):
    """The supremum defining C0 appears to sit at the edge of the scan."""
