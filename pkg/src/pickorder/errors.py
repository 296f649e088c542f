"""Exception types shared across the package."""


class InvalidTransformError(ValueError):
    """Homogeneous transform fails orthonormality / structure checks."""


class DegenerateHullError(ValueError):
    """Convex hull requested for an all-collinear point set."""


class MissingObjectError(KeyError):
    """Referenced object id is not present in the scene."""


class EmptySceneError(ValueError):
    """Operation requires at least one object."""


class SceneGenerationError(RuntimeError):
    """Placement failed after the retry budget; carries the offending seed."""

    def __init__(self, seed, difficulty, message):
        super().__init__(f"seed={seed} difficulty={difficulty}: {message}")
        self.seed = seed
        self.difficulty = difficulty


class NotSettledError(ValueError):
    """Support graph requested for a scene that is not settled."""


class ConvergenceError(RuntimeError):
    """Iterative fit did not converge; carries the last iterate."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class PlannerContractError(ValueError):
    """Planner returned something that is not a permutation of the scene ids."""


class MetricError(ValueError):
    """Metric invoked on incompatible rankings."""


class ShapeError(ValueError):
    """Array argument has the wrong shape or dimension."""
