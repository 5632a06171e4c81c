"""Exception types raised across the package.

Everything derives from the builtin ValueError / RuntimeError so callers
that only care about "bad input" versus "failed computation" can keep
catching those.
"""

from typing import Optional


class InvalidInputError(ValueError):
    """Shape, simplex or profile mismatch."""


class InvalidSpecError(ValueError):
    """Unknown or malformed game descriptor."""


class DomainError(ValueError):
    """A regularizer oracle was evaluated at a singular point."""


class InvalidParameterError(ValueError):
    """Algorithm parameters outside their admissible range (e.g. alpha <= gamma)."""


class BoundedUtilityError(ValueError):
    """A utility vector left the [-1, 1] box."""


class ConfigError(ValueError):
    """Experiment document could not be parsed."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}" if field_path else message)


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message: str, residual: float, iterations: int = 0):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")


class ConsistencyError(RuntimeError):
    """Two computations of the same quantity disagree beyond tolerance."""


class ExperimentError(RuntimeError):
    """A solver failure inside a run, tagged with where it happened."""

    def __init__(self, message: str, round_index: Optional[int] = None, player: Optional[int] = None):
        self.round_index = round_index
        self.player = player
        where = []
        if round_index is not None:
            where.append(f"round {round_index}")
        if player is not None:
            where.append(f"player {player}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
