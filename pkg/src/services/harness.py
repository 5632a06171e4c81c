"""Self-play and adversarial runs."""

import logging
from enum import Enum
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ..errors import ConvergenceError, DomainError, ExperimentError, InvalidInputError, InvalidParameterError
from ..models.game import MixedProfile, NormalFormGame, utility_gradient
from ..models.trajectory import BoundParams, RunKind, Trajectory
from .learners import CoftrlLearner, Learner, SafeguardedLearner

logger = logging.getLogger(__name__)

AnyLearner = Union[Learner, SafeguardedLearner]
Adversary = Callable[[int, np.ndarray], np.ndarray]

_SOLVER_FAILURES = (ConvergenceError, DomainError, InvalidParameterError)


class AdversaryKind(Enum):
    """Built-in utility sequences for adversarial runs."""
    ZERO = "zero"
    ALTERNATING = "alternating"
    RANDOM = "random"


def zero_adversary(dimension: int) -> Adversary:
    return lambda t, x: np.zeros(dimension)


def alternating_adversary(dimension: int) -> Adversary:
    """(1, -1, 1, ...) on odd rounds and its negation on even rounds."""
    pattern = np.where(np.arange(dimension) % 2 == 0, 1.0, -1.0)
    return lambda t, x: pattern if t % 2 == 1 else -pattern


def random_adversary(dimension: int, seed: int = 0) -> Adversary:
    """Independent uniform utilities in [-1, 1]; deterministic for a seed."""
    rng = np.random.default_rng(seed)
    return lambda t, x: rng.uniform(-1.0, 1.0, size=dimension)


def make_adversary(kind: AdversaryKind | str, dimension: int, seed: int = 0) -> Adversary:
    kind = AdversaryKind(kind)
    if kind is AdversaryKind.ZERO:
        return zero_adversary(dimension)
    if kind is AdversaryKind.ALTERNATING:
        return alternating_adversary(dimension)
    return random_adversary(dimension, seed)


def bound_params(learner: AnyLearner, horizon: int) -> Optional[BoundParams]:
    """Bound parameters of a cautious learner; None for the baselines."""
    if isinstance(learner, SafeguardedLearner):
        learner = learner.inner
    if not isinstance(learner, CoftrlLearner):
        return None
    c = learner.reg.constants(horizon)
    return BoundParams(eta=learner.eta, alpha=learner.alpha, mu=c.mu, r_max=c.r_max)


def _step(learner: AnyLearner, round_index: int, player: int):
    try:
        return learner.step()
    except _SOLVER_FAILURES as e:
        raise ExperimentError(str(e), round_index=round_index, player=player) from e


def self_play(game: NormalFormGame, learners: Sequence[AnyLearner], T: int, seed: int = 0) -> Trajectory:
    """
    Repeated play of `game` where each player runs its own learner.

    Every round all learners step on the previous state, then each observes
    the gradient of its utility at the joint profile.

    Args:
        game: The game to repeat
        learners: One learner per player
        T: Number of rounds
        seed: Recorded on the trajectory; the dynamics are deterministic

    Raises:
        InvalidInputError: If the learners do not fit the game
        ExperimentError: If a solver fails, tagged with round and player
    """
    if len(learners) != game.player_count:
        raise InvalidInputError(f"Need {game.player_count} learners, got {len(learners)}")
    for i, (learner, d) in enumerate(zip(learners, game.action_counts)):
        if learner.dimension != d:
            raise InvalidInputError(f"Learner {i} plays {learner.dimension} actions, game gives {d}")
    if T < 1:
        raise InvalidInputError(f"Horizon must be at least 1, got {T}")

    logger.info("Self-play on %s for %d rounds (n=%d, d=%s)", game.name, T, game.player_count, game.action_counts)
    actions = [np.empty((T, d)) for d in game.action_counts]
    utilities = [np.empty((T, d)) for d in game.action_counts]
    rates = [np.empty(T) for _ in learners]

    for t in range(T):
        steps = [_step(learner, t + 1, i) for i, learner in enumerate(learners)]
        profile = MixedProfile.from_arrays([s.x for s in steps])
        for i, (learner, s) in enumerate(zip(learners, steps)):
            nu = utility_gradient(game, profile, i)
            learner.observe(nu)
            actions[i][t] = s.x
            utilities[i][t] = nu
            rates[i][t] = s.learning_rate

    jumps = tuple(learner.max_regret_jump for learner in learners)
    logger.info("Self-play finished; max |r(t+1) - r(t)|_inf per player: %s", ", ".join(f"{j:.4g}" for j in jumps))
    return Trajectory(
        actions=tuple(actions),
        utilities=tuple(utilities),
        learning_rates=tuple(rates),
        kind=RunKind.SELF_PLAY,
        game=game,
        seed=seed,
        algorithms=tuple(learner.name for learner in learners),
        bound_params=tuple(bound_params(learner, T) for learner in learners),
        switch_rounds=tuple(getattr(learner, "switch_round", None) for learner in learners),
        max_regret_jumps=jumps,
    )


def adversarial_play(learner: AnyLearner, adversary: Adversary, T: int, seed: int = 0) -> Trajectory:
    """
    One learner against a utility sequence chosen by `adversary(t, x)`.

    Raises:
        BoundedUtilityError: If the adversary leaves [-1, 1]
        ExperimentError: If a solver fails
    """
    if T < 1:
        raise InvalidInputError(f"Horizon must be at least 1, got {T}")
    d = learner.dimension
    actions = np.empty((T, d))
    utilities = np.empty((T, d))
    rates = np.empty(T)

    logger.info("Adversarial run for %d rounds (d=%d)", T, d)
    for t in range(T):
        s = _step(learner, t + 1, 0)
        nu = np.asarray(adversary(t + 1, s.x), dtype=float)
        learner.observe(nu)
        actions[t] = s.x
        utilities[t] = nu
        rates[t] = s.learning_rate

    switch_round = getattr(learner, "switch_round", None)
    if isinstance(learner, SafeguardedLearner) and switch_round is None:
        logger.info("Safeguard never switched (variation %.4g)", learner.variation_sum)
    return Trajectory(
        actions=(actions,),
        utilities=(utilities,),
        learning_rates=(rates,),
        kind=RunKind.ADVERSARIAL,
        game=None,
        seed=seed,
        algorithms=(learner.name,),
        bound_params=(bound_params(learner, T),),
        switch_rounds=(switch_round,),
        max_regret_jumps=(learner.max_regret_jump,),
    )
