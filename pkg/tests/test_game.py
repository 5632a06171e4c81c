import numpy as np
import pytest

from src.errors import InvalidInputError, InvalidSpecError
from src.models.game import (
    GameSpec,
    GameType,
    MixedProfile,
    NormalFormGame,
    expected_utility,
    game_action_counts,
    make_game,
    smoothness_bound,
    utility_gradient,
)


@pytest.fixture
def identity_game(two_player_game):
    return two_player_game(np.eye(2), np.eye(2))


def test_matching_pennies_uniform_gradient_is_zero(matching_pennies):
    profile = matching_pennies.uniform_profile()
    for player in range(2):
        np.testing.assert_allclose(utility_gradient(matching_pennies, profile, player), [0.0, 0.0])
        assert expected_utility(matching_pennies, profile, player) == pytest.approx(0.0)


def test_identity_game_gradient_and_utility(identity_game):
    profile = MixedProfile.from_arrays([[1.0, 0.0], [0.3, 0.7]])
    np.testing.assert_allclose(utility_gradient(identity_game, profile, 0), [0.3, 0.7])
    assert expected_utility(identity_game, profile, 0) == pytest.approx(0.3)


def test_gradient_contracts_the_right_axes(two_player_game):
    # Player 1's payoff depends only on player 0's action here.
    a = np.array([[0.5, 0.5, 0.5], [-1.0, -1.0, -1.0]])
    b = np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]])
    game = two_player_game(a, b)
    profile = MixedProfile.from_arrays([[0.25, 0.75], [0.2, 0.3, 0.5]])
    np.testing.assert_allclose(utility_gradient(game, profile, 0), [0.5, -1.0])
    np.testing.assert_allclose(utility_gradient(game, profile, 1), [0.25, 0.25, 0.25])


def test_three_player_gradient_matches_brute_force(rng):
    game = make_game(GameSpec(GameType.RANDOM_GENERAL_SUM, players=3, actions=2), seed=1)
    profile = MixedProfile.from_arrays([rng.dirichlet(np.ones(d)) for d in game.action_counts])
    for player in range(3):
        expected = np.zeros(2)
        for s in np.ndindex(2, 2, 2):
            weight = np.prod([profile[i][s[i]] for i in range(3) if i != player])
            expected[s[player]] += weight * game.utilities[player][s]
        np.testing.assert_allclose(utility_gradient(game, profile, player), expected, atol=1e-14)


def test_profile_shape_mismatch_is_rejected(matching_pennies):
    with pytest.raises(InvalidInputError):
        utility_gradient(matching_pennies, MixedProfile.from_arrays([[1.0, 0.0], [0.2, 0.3, 0.5]]), 0)
    with pytest.raises(InvalidInputError):
        utility_gradient(matching_pennies, MixedProfile.from_arrays([[1.0, 0.0]]), 0)


def test_profile_must_be_on_the_simplex():
    with pytest.raises(InvalidInputError):
        MixedProfile.from_arrays([[0.6, 0.6], [0.5, 0.5]])


def test_simplex_tolerance_scales_with_length():
    near = np.full(10, 0.1)
    near[0] += 5e-12
    assert len(MixedProfile.from_arrays([near])) == 1
    with pytest.raises(InvalidInputError):
        MixedProfile.from_arrays([[0.5, 0.5 + 5e-12]])


def test_matching_pennies_matrices(matching_pennies):
    a = np.array([[1.0, -1.0], [-1.0, 1.0]])
    np.testing.assert_array_equal(matching_pennies.utilities[0], a)
    np.testing.assert_array_equal(matching_pennies.utilities[1], -a)
    assert matching_pennies.action_counts == (2, 2)
    assert matching_pennies.is_zero_sum()


def test_random_games_are_deterministic_per_seed():
    spec = GameSpec(GameType.RANDOM_GENERAL_SUM, players=3, actions=4)
    first, second = make_game(spec, seed=7), make_game(spec, seed=7)
    for u, v in zip(first.utilities, second.utilities):
        np.testing.assert_array_equal(u, v)
    other = make_game(spec, seed=8)
    assert not np.array_equal(first.utilities[0], other.utilities[0])


@pytest.mark.parametrize("players", [2, 3, 4])
def test_random_zero_sum_games_stay_bounded(players):
    game = make_game(GameSpec(GameType.RANDOM_ZERO_SUM, players=players, actions=3), seed=2)
    assert game.is_zero_sum(atol=1e-12)
    assert max(float(np.max(np.abs(u))) for u in game.utilities) <= 1.0


@pytest.mark.parametrize("players,actions", [(1, 2), (2, 1)])
def test_too_small_games_are_rejected(players, actions):
    with pytest.raises(InvalidSpecError):
        make_game(GameSpec(GameType.RANDOM_GENERAL_SUM, players=players, actions=actions))


def test_utilities_outside_the_box_are_rejected(two_player_game):
    with pytest.raises(InvalidInputError):
        two_player_game([[2.0, 0.0], [0.0, 0.0]])


def test_smoothness_bound():
    assert smoothness_bound(make_game(GameSpec(GameType.MATCHING_PENNIES))) == 1.0
    assert smoothness_bound(make_game(GameSpec(GameType.ROCK_PAPER_SCISSORS, smoothness=0.1))) == 0.1
    half = NormalFormGame((0.5 * np.eye(2), -0.5 * np.eye(2)), smoothness=0.5)
    assert smoothness_bound(half) == 0.5


@pytest.mark.parametrize("spec", [
    GameSpec(GameType.MATCHING_PENNIES, players=2, actions=5),
    GameSpec(GameType.ROCK_PAPER_SCISSORS),
    GameSpec(GameType.RANDOM_GENERAL_SUM, players=3, actions=4),
    GameSpec(GameType.RANDOM_ZERO_SUM, players=2, actions=6),
])
def test_action_counts_match_generated_games(spec):
    assert game_action_counts(spec) == make_game(spec).action_counts
