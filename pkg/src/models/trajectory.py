"""Data models for recorded runs and the metrics derived from them."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from ..errors import InvalidInputError
from .game import NormalFormGame


class RunKind(Enum):
    """How the utilities of a run were produced."""
    SELF_PLAY = "selfplay"
    ADVERSARIAL = "adversarial"


@dataclass(frozen=True)
class BoundParams:
    """Parameters of a cautious learner that enter the regret and path-length bounds."""
    eta: float
    alpha: float
    mu: float
    r_max: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Full record of a run.

    Attributes:
        actions: actions[i] has shape (T, d_i); row t is x_i^{t+1}.
        utilities: utilities[i] has shape (T, d_i); row t is nu_i^{t+1}.
        learning_rates: learning_rates[i] has shape (T,); NaN for fixed-rate learners.
        game: The game of a self-play run; None for adversarial runs.
        bound_params: Per player, the cautious-learner parameters (None otherwise).
        switch_rounds: Per player, the round a safeguard switched (None if never).
    """
    actions: tuple[np.ndarray, ...]
    utilities: tuple[np.ndarray, ...]
    learning_rates: tuple[np.ndarray, ...]
    kind: RunKind = RunKind.SELF_PLAY
    game: Optional[NormalFormGame] = None
    seed: int = 0
    algorithms: tuple[str, ...] = ()
    bound_params: tuple[Optional[BoundParams], ...] = ()
    switch_rounds: tuple[Optional[int], ...] = ()
    max_regret_jumps: tuple[float, ...] = ()

    def __post_init__(self):
        n = len(self.actions)
        if n == 0 or len(self.utilities) != n or len(self.learning_rates) != n:
            raise InvalidInputError("Trajectory needs matching actions, utilities and learning rates per player")
        horizon = self.actions[0].shape[0]
        for i in range(n):
            if self.actions[i].shape[0] != horizon or self.utilities[i].shape != self.actions[i].shape:
                raise InvalidInputError(f"Player {i} records do not cover {horizon} rounds")
            if self.learning_rates[i].shape != (horizon,):
                raise InvalidInputError(f"Player {i} learning rates do not cover {horizon} rounds")
        for name, default in (("bound_params", None), ("switch_rounds", None), ("max_regret_jumps", 0.0)):
            if not getattr(self, name):
                object.__setattr__(self, name, (default,) * n)
        if not self.algorithms:
            object.__setattr__(self, "algorithms", ("",) * n)

    @property
    def horizon(self) -> int:
        return self.actions[0].shape[0]

    @property
    def player_count(self) -> int:
        return len(self.actions)

    @property
    def action_counts(self) -> tuple[int, ...]:
        return tuple(a.shape[1] for a in self.actions)


@dataclass(frozen=True)
class SeriesPoint:
    """Metrics of the prefix of a run ending at round t, for one player."""
    t: int
    player: int
    regret: float
    nonneg_regret: float
    cce_gap: Optional[float]
    path_length: float


@dataclass(frozen=True)
class Metrics:
    """Regret and equilibrium metrics of one trajectory."""
    horizon: int
    external_regret: tuple[float, ...]
    nonnegative_regret: tuple[float, ...]
    social_regret: float
    cce_gap: Optional[float]
    path_length: float
    variation: tuple[float, ...]
    regret_series: tuple[SeriesPoint, ...] = ()
    regret_bound: tuple[Optional[float], ...] = ()
    rvu_bound: tuple[Optional[float], ...] = ()
    path_length_bound: Optional[float] = None
    stability_violations: tuple[int, ...] = ()
    max_regret_jumps: tuple[float, ...] = ()
    switch_rounds: tuple[Optional[int], ...] = field(default_factory=tuple)

    @property
    def max_regret(self) -> float:
        return max(self.external_regret)

    def summary(self) -> dict:
        """Plain-JSON view of the scalar metrics."""
        return {
            "horizon": self.horizon,
            "external_regret": list(self.external_regret),
            "nonnegative_regret": list(self.nonnegative_regret),
            "social_regret": self.social_regret,
            "cce_gap": self.cce_gap,
            "path_length": self.path_length,
            "path_length_bound": self.path_length_bound,
            "variation": list(self.variation),
            "regret_bound": list(self.regret_bound),
            "rvu_bound": list(self.rvu_bound),
            "stability_violations": list(self.stability_violations),
            "max_regret_jumps": list(self.max_regret_jumps),
            "switch_rounds": list(self.switch_rounds),
        }
