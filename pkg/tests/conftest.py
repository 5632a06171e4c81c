"""Shared fixtures."""

import json

import numpy as np
import pytest

from src.models.game import GameSpec, GameType, NormalFormGame, make_game
from src.models.trajectory import Trajectory


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def matching_pennies():
    return make_game(GameSpec(GameType.MATCHING_PENNIES))


@pytest.fixture
def random_game():
    return make_game(GameSpec(GameType.RANDOM_GENERAL_SUM, players=2, actions=3), seed=3)


@pytest.fixture
def write_config(tmp_path):
    """Write a JSON experiment document under tmp_path and return its path."""
    def _write(doc, name="experiment.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc), encoding="utf-8")
        return path
    return _write


@pytest.fixture
def make_trajectory():
    """Build a one-player trajectory from explicit actions and utilities."""
    def _make(actions, utilities, rates=None):
        actions = np.asarray(actions, dtype=float)
        utilities = np.asarray(utilities, dtype=float)
        rates = np.full(actions.shape[0], np.nan) if rates is None else np.asarray(rates, dtype=float)
        return Trajectory(actions=(actions,), utilities=(utilities,), learning_rates=(rates,))
    return _make


@pytest.fixture
def two_player_game():
    """Build a 2-player game from payoff matrices; `column` defaults to the zero-sum negation."""
    def _build(row, column=None):
        a = np.asarray(row, dtype=float)
        b = -a if column is None else np.asarray(column, dtype=float)
        return NormalFormGame((a, b))
    return _build
