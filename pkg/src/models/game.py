"""Data models for finite normal-form games and mixed strategy profiles."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from ..errors import InvalidInputError, InvalidSpecError

SIMPLEX_TOLERANCE = 1e-12
DEFAULT_SMOOTHNESS = 1.0


class GameType(Enum):
    """Built-in game generators."""
    MATCHING_PENNIES = "matching_pennies"
    ROCK_PAPER_SCISSORS = "rock_paper_scissors"
    RANDOM_GENERAL_SUM = "random_general_sum"
    RANDOM_ZERO_SUM = "random_zero_sum"


@dataclass(frozen=True)
class GameSpec:
    """Descriptor for a generated game.

    `players` and `actions` are only read by the random generators; the
    classic games have fixed shapes.
    """
    type: GameType
    players: int = 2
    actions: int = 2
    smoothness: float = DEFAULT_SMOOTHNESS

    def __post_init__(self):
        if isinstance(self.type, str):
            object.__setattr__(self, "type", GameType(self.type))


@dataclass(frozen=True, eq=False)
class NormalFormGame:
    """An n-player game given by one payoff tensor per player.

    Attributes:
        utilities: utilities[i][s_1, ..., s_n] is player i's payoff at the
            pure joint action s; every tensor has shape action_counts.
        smoothness: Lipschitz constant L of the utility gradients w.r.t. the
            sum of l1 distances between profiles.
    """
    utilities: tuple[np.ndarray, ...]
    smoothness: float = DEFAULT_SMOOTHNESS
    name: str = "custom"

    def __post_init__(self):
        tensors = tuple(np.array(u, dtype=float) for u in self.utilities)
        if len(tensors) < 2:
            raise InvalidInputError(f"A game needs at least 2 players, got {len(tensors)}")

        shape = tensors[0].shape
        if len(shape) != len(tensors):
            raise InvalidInputError(
                f"Utility tensors must have one axis per player: got {len(shape)} axes for {len(tensors)} players"
            )
        for i, tensor in enumerate(tensors):
            if tensor.shape != shape:
                raise InvalidInputError(f"Player {i} tensor has shape {tensor.shape}, expected {shape}")
            if not np.all(np.isfinite(tensor)) or np.max(np.abs(tensor)) > 1.0:
                raise InvalidInputError(f"Player {i} utilities must lie in [-1, 1]")
        if any(d < 2 for d in shape):
            raise InvalidInputError(f"Every player needs at least 2 actions, got {shape}")
        if not self.smoothness > 0:
            raise InvalidInputError(f"Smoothness must be positive, got {self.smoothness}")

        for tensor in tensors:
            tensor.setflags(write=False)
        object.__setattr__(self, "utilities", tensors)

    @property
    def player_count(self) -> int:
        return len(self.utilities)

    @property
    def action_counts(self) -> tuple[int, ...]:
        return tuple(self.utilities[0].shape)

    def smoothness_bound(self) -> float:
        return self.smoothness

    def uniform_profile(self) -> "MixedProfile":
        """Every player mixes uniformly."""
        return MixedProfile.from_arrays([np.full(d, 1.0 / d) for d in self.action_counts])

    def utility_gradient(self, profile: "MixedProfile", player: int) -> np.ndarray:
        return utility_gradient(self, profile, player)

    def expected_utility(self, profile: "MixedProfile", player: int) -> float:
        return expected_utility(self, profile, player)

    def is_zero_sum(self, atol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(sum(self.utilities)) <= atol))


@dataclass(frozen=True, eq=False)
class MixedProfile:
    """
    One probability vector per player.

    Entries must be >= -1e-12 and each vector must sum to 1 within
    1e-12 * max(1, d), where d is the vector length.
    """
    strategies: tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self):
        arrays = tuple(np.array(s, dtype=float) for s in self.strategies)
        for i, x in enumerate(arrays):
            if x.ndim != 1:
                raise InvalidInputError(f"Strategy {i} must be a vector")
            if np.any(x < -SIMPLEX_TOLERANCE) or abs(x.sum() - 1.0) > SIMPLEX_TOLERANCE * max(1, x.size):
                raise InvalidInputError(f"Strategy {i} is not a probability vector: {x}")
            x.setflags(write=False)
        object.__setattr__(self, "strategies", arrays)

    @classmethod
    def from_arrays(cls, strategies: Sequence[Sequence[float]]) -> "MixedProfile":
        return cls(strategies=tuple(np.asarray(s, dtype=float) for s in strategies))

    def __len__(self) -> int:
        return len(self.strategies)

    def __getitem__(self, player: int) -> np.ndarray:
        return self.strategies[player]


def _check_profile(game: NormalFormGame, profile: MixedProfile, player: int) -> None:
    if len(profile) != game.player_count:
        raise InvalidInputError(
            f"Profile has {len(profile)} strategies for a {game.player_count}-player game"
        )
    for i, (x, d) in enumerate(zip(profile.strategies, game.action_counts)):
        if x.size != d:
            raise InvalidInputError(f"Strategy {i} has length {x.size}, expected {d}")
    if not 0 <= player < game.player_count:
        raise InvalidInputError(f"Player index {player} out of range")


def utility_gradient(game: NormalFormGame, profile: MixedProfile, player: int) -> np.ndarray:
    """
    Expected payoff of each pure action of `player` against the others' mix.

    Contracts the player's tensor with every opponent strategy, highest axis
    first so the remaining axis indices stay valid.

    Raises:
        InvalidInputError: If the profile does not fit the game
    """
    _check_profile(game, profile, player)
    result = game.utilities[player]
    for axis in reversed(range(game.player_count)):
        if axis != player:
            result = np.tensordot(result, profile[axis], axes=([axis], [0]))
    return np.asarray(result, dtype=float)


def expected_utility(game: NormalFormGame, profile: MixedProfile, player: int) -> float:
    """Expected payoff of `player` under the full mixed profile."""
    return float(np.dot(utility_gradient(game, profile, player), profile[player]))


def make_game(spec: GameSpec, seed: int = 0) -> NormalFormGame:
    """
    Build a game from a descriptor.

    Args:
        spec: Which generator to use and its size parameters
        seed: Seed for the random generators (ignored by the classic games)

    Returns:
        A NormalFormGame with utilities in [-1, 1]

    Raises:
        InvalidSpecError: If the descriptor asks for fewer than 2 players or actions
    """
    if spec.players < 2 or spec.actions < 2:
        raise InvalidSpecError(
            f"{spec.type.value} needs at least 2 players and 2 actions, got n={spec.players}, d={spec.actions}"
        )
    rng = np.random.default_rng(seed)

    if spec.type is GameType.MATCHING_PENNIES:
        a = np.array([[1.0, -1.0], [-1.0, 1.0]])
        return NormalFormGame((a, -a), smoothness=spec.smoothness, name=spec.type.value)

    if spec.type is GameType.ROCK_PAPER_SCISSORS:
        a = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])
        return NormalFormGame((a, -a), smoothness=spec.smoothness, name=spec.type.value)

    shape = (spec.actions,) * spec.players

    if spec.type is GameType.RANDOM_GENERAL_SUM:
        tensors = tuple(rng.uniform(-1.0, 1.0, size=shape) for _ in range(spec.players))
        return NormalFormGame(tensors, smoothness=spec.smoothness, name=spec.type.value)

    if spec.type is GameType.RANDOM_ZERO_SUM:
        if spec.players == 2:
            a = rng.uniform(-1.0, 1.0, size=shape)
            return NormalFormGame((a, -a), smoothness=spec.smoothness, name=spec.type.value)
        # Centre across players, then rescale back into [-1, 1].
        raw = rng.uniform(-1.0, 1.0, size=(spec.players,) + shape)
        centred = (raw - raw.mean(axis=0)) * spec.players / (2.0 * (spec.players - 1))
        return NormalFormGame(tuple(centred), smoothness=spec.smoothness, name=spec.type.value)

    raise InvalidSpecError(f"Unknown game type: {spec.type}")


def game_action_counts(spec: GameSpec) -> tuple[int, ...]:
    """Action counts make_game(spec) will produce, without building the tensors."""
    if spec.type is GameType.MATCHING_PENNIES:
        return (2, 2)
    if spec.type is GameType.ROCK_PAPER_SCISSORS:
        return (3, 3)
    return (spec.actions,) * spec.players


def smoothness_bound(game: NormalFormGame) -> float:
    return game.smoothness_bound()
