"""Exception types shared across the package."""


class PassiveBeamError(Exception):
    """Base class for all package errors."""


class SingularHessian(PassiveBeamError):
    """Storage-function Hessian at the origin is numerically singular."""


class InvalidElementCount(PassiveBeamError):
    """Mesh requested with fewer than one element."""


class NotPositiveDefinite(PassiveBeamError):
    """A matrix required to be positive definite failed its Cholesky test."""


class DimensionMismatch(PassiveBeamError):
    """State or matrix dimensions are inconsistent."""


class LinearSolveFailure(PassiveBeamError):
    """A prefactored linear solve could not be completed."""


class NewtonDivergence(PassiveBeamError):
    """Newton iteration hit its iteration cap without converging."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StepRejected(PassiveBeamError):
    """A time step raised the Lyapunov functional beyond the allowed budget."""

    def __init__(self, message, time=None, increase=None):
        super().__init__(message)
        self.time = time
        self.increase = increase


class InsufficientResolution(PassiveBeamError):
    """Trajectory is recorded too sparsely for the requested diagnostic."""


class EmptyTrajectory(PassiveBeamError):
    """Diagnostic requested on a trajectory with no recorded states."""


class EigenSolverFailure(PassiveBeamError):
    """Dense eigenvalue computation did not converge."""


class ConfigParseError(PassiveBeamError):
    """Run configuration could not be parsed or failed schema validation."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column
