"""Regret, equilibrium and path-length metrics over recorded trajectories."""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from ..errors import ConsistencyError
from ..models.game import MixedProfile, utility_gradient
from ..models.trajectory import BoundParams, Metrics, SeriesPoint, Trajectory

logger = logging.getLogger(__name__)

NONNEGATIVE_REGRET_TOLERANCE = 1e-8
STABILITY_LOW = 0.5
STABILITY_HIGH = 1.5


def power_of_two_checkpoints(horizon: int) -> list[int]:
    """1, 2, 4, ... up to the horizon, always ending with the horizon itself."""
    points = [2 ** k for k in range(int(math.log2(horizon)) + 1) if 2 ** k <= horizon]
    if points[-1] != horizon:
        points.append(horizon)
    return points


def _regret_prefix(traj: Trajectory, player: int) -> np.ndarray:
    """Regret of every prefix: entry t-1 is Reg^t."""
    nu = traj.utilities[player]
    best = np.max(np.cumsum(nu, axis=0), axis=1)
    earned = np.cumsum(np.einsum("tk,tk->t", nu, traj.actions[player]))
    return best - earned


def regret_signals(traj: Trajectory, player: int) -> np.ndarray:
    """
    Optimistic regret vectors r^t = U^t + u^{t-1} replayed from the record.

    Row t-1 is the signal the player acted on in round t.
    """
    nu = traj.utilities[player]
    corrections = nu - np.einsum("tk,tk->t", nu, traj.actions[player])[:, None]
    zero = np.zeros((1, nu.shape[1]))
    accumulated = np.vstack([zero, np.cumsum(corrections, axis=0)[:-1]])
    previous = np.vstack([zero, corrections[:-1]])
    return accumulated + previous


def external_regret(traj: Trajectory, player: int) -> float:
    """max_k sum_t nu^t[k] - sum_t <nu^t, x^t>, exact over the pure comparators."""
    nu = traj.utilities[player]
    earned = float(np.einsum("tk,tk->", nu, traj.actions[player]))
    return float(np.max(nu.sum(axis=0))) - earned


def _lifted_nonnegative_regret(traj: Trajectory, player: int) -> float:
    # Comparators in [0, 1] * simplex against sum_t u^t; the linear max sits at 0 or a vertex.
    nu = traj.utilities[player]
    corrections = nu - np.einsum("tk,tk->t", nu, traj.actions[player])[:, None]
    return max(0.0, float(np.max(corrections.sum(axis=0))))


def nonnegative_regret(traj: Trajectory, player: int) -> float:
    """
    max{0, Reg^T}, cross-checked against the lifted-comparator form.

    Raises:
        ConsistencyError: If the two computations disagree beyond 1e-8
    """
    direct = max(0.0, external_regret(traj, player))
    lifted = _lifted_nonnegative_regret(traj, player)
    if abs(direct - lifted) > NONNEGATIVE_REGRET_TOLERANCE:
        raise ConsistencyError(
            f"Nonnegative regret of player {player}: direct {direct:.12g} vs lifted {lifted:.12g}"
        )
    return direct


def social_regret(traj: Trajectory) -> float:
    return float(sum(external_regret(traj, i) for i in range(traj.player_count)))


def _recomputed_gradients(traj: Trajectory) -> list[np.ndarray]:
    """Utility gradients rebuilt from the game at every recorded joint profile."""
    game = traj.game
    gradients = [np.empty_like(a) for a in traj.actions]
    for t in range(traj.horizon):
        profile = MixedProfile.from_arrays([a[t] for a in traj.actions])
        for i in range(traj.player_count):
            gradients[i][t] = utility_gradient(game, profile, i)
    return gradients


def _cce_gap_prefix(traj: Trajectory, checkpoints: Sequence[int]) -> list[float]:
    gradients = _recomputed_gradients(traj)
    gaps = np.full(len(checkpoints), -np.inf)
    index = np.asarray(checkpoints) - 1
    for i, grad in enumerate(gradients):
        deviation = np.cumsum(grad, axis=0)[index]
        played = np.cumsum(np.einsum("tk,tk->t", grad, traj.actions[i]))[index]
        gaps = np.maximum(gaps, np.max(deviation, axis=1) - played)
    return [max(0.0, float(g) / t) for g, t in zip(gaps, checkpoints)]


def cce_gap(traj: Trajectory) -> Optional[float]:
    """
    Largest gain from a fixed unilateral deviation under the empirical play.

    The empirical distribution averages the per-round product distributions,
    so the expectations reduce to averages of utility gradients recomputed
    from the game. Clipped at 0; None for runs without a game.
    """
    if traj.game is None:
        return None
    return _cce_gap_prefix(traj, [traj.horizon])[0]


def _movement(traj: Trajectory, player: int) -> np.ndarray:
    return np.sum(np.abs(np.diff(traj.actions[player], axis=0)), axis=1) ** 2


def path_length(traj: Trajectory) -> float:
    """sum_i sum_t ||x_i^{t+1} - x_i^t||_1^2."""
    return float(sum(_movement(traj, i).sum() for i in range(traj.player_count)))


def variation(traj: Trajectory, player: int) -> float:
    """sum_t ||nu^{t+1} - nu^t||_inf^2."""
    return float(np.sum(np.max(np.abs(np.diff(traj.utilities[player], axis=0)), axis=1) ** 2))


def regret_bound(params: BoundParams, horizon: int) -> float:
    """6 + 2 (alpha log T + R) / eta."""
    return 6.0 + 2.0 * (params.alpha * math.log(horizon) + params.r_max) / params.eta


def path_length_bound(params: Sequence[BoundParams], horizon: int) -> float:
    """sum_i (128 eta_i / mu_i)(3 + (alpha_i log T + R_i) / eta_i)."""
    return float(sum(
        (128.0 * p.eta / p.mu) * (3.0 + (p.alpha * math.log(horizon) + p.r_max) / p.eta)
        for p in params
    ))


def rvu_bound(traj: Trajectory, player: int, params: BoundParams) -> float:
    """
    Right-hand side of the nonnegative RVU inequality for one player:

    3 + (alpha log T + R)/eta + eta (48/mu) sum ||dnu||_inf^2 - (mu / (64 eta)) sum ||dx||_1^2
    """
    p = params
    return (
        3.0
        + (p.alpha * math.log(traj.horizon) + p.r_max) / p.eta
        + p.eta * (48.0 / p.mu) * variation(traj, player)
        - (p.mu / (64.0 * p.eta)) * float(_movement(traj, player).sum())
    )


def stability_violations(traj: Trajectory, player: int) -> int:
    """Rounds where lambda^{t+1} / lambda^t leaves [1/2, 3/2]; 0 for fixed-rate learners."""
    rates = traj.learning_rates[player]
    if np.all(np.isnan(rates)):
        return 0
    ratios = rates[1:] / rates[:-1]
    return int(np.count_nonzero((ratios < STABILITY_LOW) | (ratios > STABILITY_HIGH)))


def regret_series(traj: Trajectory, checkpoints: Optional[Sequence[int]] = None) -> list[SeriesPoint]:
    """Per-player prefix metrics at powers of two (and the horizon)."""
    checkpoints = list(checkpoints or power_of_two_checkpoints(traj.horizon))
    index = np.asarray(checkpoints) - 1
    gaps = _cce_gap_prefix(traj, checkpoints) if traj.game is not None else [None] * len(checkpoints)
    movement = sum(np.concatenate([[0.0], np.cumsum(_movement(traj, i))]) for i in range(traj.player_count))

    points = []
    for i in range(traj.player_count):
        regrets = _regret_prefix(traj, i)[index]
        for t, reg, gap in zip(checkpoints, regrets, gaps):
            points.append(SeriesPoint(
                t=t,
                player=i,
                regret=float(reg),
                nonneg_regret=max(0.0, float(reg)),
                cce_gap=gap,
                path_length=float(movement[t - 1]),
            ))
    return points


def compute_metrics(traj: Trajectory, checkpoints: Optional[Sequence[int]] = None) -> Metrics:
    """
    Every metric of a trajectory.

    Bounds are filled for players whose trajectory carries bound parameters;
    the path-length bound only when every player does.

    Raises:
        ConsistencyError: If the nonnegative-regret paths disagree
    """
    n, T = traj.player_count, traj.horizon
    regrets = tuple(external_regret(traj, i) for i in range(n))
    params = traj.bound_params
    metrics = Metrics(
        horizon=T,
        external_regret=regrets,
        nonnegative_regret=tuple(nonnegative_regret(traj, i) for i in range(n)),
        social_regret=float(sum(regrets)),
        cce_gap=cce_gap(traj),
        path_length=path_length(traj),
        variation=tuple(variation(traj, i) for i in range(n)),
        regret_series=tuple(regret_series(traj, checkpoints)),
        regret_bound=tuple(regret_bound(p, T) if p else None for p in params),
        rvu_bound=tuple(rvu_bound(traj, i, p) if p else None for i, p in enumerate(params)),
        path_length_bound=path_length_bound(params, T) if all(params) else None,
        stability_violations=tuple(stability_violations(traj, i) for i in range(n)),
        max_regret_jumps=traj.max_regret_jumps,
        switch_rounds=traj.switch_rounds,
    )
    logger.info(
        "T=%d max regret %.6g, social regret %.6g, path length %.6g",
        T, metrics.max_regret, metrics.social_regret, metrics.path_length,
    )
    return metrics
