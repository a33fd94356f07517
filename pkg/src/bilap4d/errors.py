"""Error vocabulary shared across the package."""


class InvalidArgumentError(ValueError):
    """A precondition on an operation's arguments was violated."""


class SingularArgumentError(InvalidArgumentError):
    """Evaluation requested exactly at a singular point (e.g. G(x, x))."""


class AccuracyError(RuntimeError):
    """A computed value failed its internal convergence or drift check."""


class SolverError(RuntimeError):
    """An iterative solver (Newton, shooting, eigensolver) failed to converge."""


class TrivialSolutionError(SolverError):
    """Newton collapsed onto the excluded trivial solution u == 0."""


class InternalInconsistencyError(RuntimeError):
    """Two independent internal routes to the same quantity disagree."""
