from typing import Any, Optional


class AcclqrError(RuntimeError):
    pass


class NotHurwitz(AcclqrError):
    pass


class SingularSystem(AcclqrError):
    pass


class EigenFailure(AcclqrError):
    pass


class BudgetExceeded(AcclqrError):
    """The eigenvalue probe ran out of iterations without a certificate."""
    pass


class NotStabilizing(AcclqrError):
    pass


class InvalidAlpha(AcclqrError):
    pass


class ZeroInput(AcclqrError):
    pass


class NoConvergence(AcclqrError):
    pass


class InvalidDamping(AcclqrError):
    pass


class GenerationFailed(AcclqrError):
    pass


class ConfigError(AcclqrError):
    pass


class SolverError(AcclqrError):
    """Base class for errors that end a solver run.

    The partial trace of the run, if there is one, is available as
    ``trace``. Its status has been set to the terminal status of the
    run.
    """
    def __init__(self, message: str, trace: Optional[Any] = None) -> None:
        super().__init__(message)
        self.trace = trace


class StepRejected(SolverError):
    pass


class RestartBudgetExceeded(SolverError):
    pass


class NonFiniteValue(SolverError):
    pass


class JumpBudgetExceeded(SolverError):
    pass


class NonConvexDetected(SolverError):
    pass


class IterationBudgetExceeded(SolverError):
    pass


class LeftFeasibleSet(SolverError):
    """A query point left the feasible region.

    The offending gain is available as ``gain``.
    """
    def __init__(
            self, message: str, gain: Optional[Any] = None,
            trace: Optional[Any] = None) -> None:
        super().__init__(message, trace)
        self.gain = gain
