"""No-regret learners: cautious optimistic FTRL and the baselines it generalizes."""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import softmax

from ..errors import BoundedUtilityError, InvalidInputError, InvalidParameterError
from .regularizers import NegEntropy, Regularizer
from .solvers import DEFAULT_LR_TOL, ftrl_argmax, lr_control_solve

logger = logging.getLogger(__name__)

UTILITY_BOUND_TOLERANCE = 1e-9


class AlgorithmKind(Enum):
    """Learner families that can be named in an experiment document."""
    COFTRL = "coftrl"
    OFTRL = "oftrl"
    OMWU = "omwu"
    MWU = "mwu"


@dataclass(frozen=True)
class AlgorithmInfo:
    """Information about a learner family."""
    name: str
    uses_regularizer: bool
    uses_alpha: bool
    description: str


AVAILABLE_ALGORITHMS = {
    AlgorithmKind.COFTRL: AlgorithmInfo("coftrl", True, True, "Cautious optimistic FTRL with learning-rate control"),
    AlgorithmKind.OFTRL: AlgorithmInfo("oftrl", True, False, "Optimistic FTRL with a fixed learning rate"),
    AlgorithmKind.OMWU: AlgorithmInfo("omwu", False, False, "Optimistic multiplicative weights"),
    AlgorithmKind.MWU: AlgorithmInfo("mwu", False, False, "Multiplicative weights (no optimism)"),
}


class DefaultParams(NamedTuple):
    eta: float
    alpha: float


@dataclass(frozen=True)
class StepResult:
    """Action chosen in one round; `learning_rate` is NaN for fixed-rate learners."""
    x: np.ndarray
    learning_rate: float


def default_params(reg: Regularizer, d: int, n: int, L: float = 1.0) -> DefaultParams:
    """
    Largest safe learning-rate cap and smallest safe log-barrier weight.

    alpha = 4 gamma + mu and
    eta = min(3 gamma / 80, mu / (32 sqrt 2), mu / (L n 32 sqrt 6)),
    with an extra cap of 1/8 for locally intrinsically Lipschitz regularizers.

    Args:
        reg: Regularizer of the learner
        d: Number of actions of the learner
        n: Number of players
        L: Smoothness of the game

    Raises:
        InvalidInputError: If d does not match the regularizer
    """
    if d != reg.dimension:
        raise InvalidInputError(f"Regularizer dimension {reg.dimension} does not match d={d}")
    if n < 1 or not L > 0:
        raise InvalidInputError(f"Need n >= 1 and L > 0, got n={n}, L={L}")
    c = reg.constants()
    eta = min(3.0 * c.gamma / 80.0, c.mu / (32.0 * math.sqrt(2.0)), c.mu / (L * n * 32.0 * math.sqrt(6.0)))
    if c.is_local:
        eta = min(eta, 1.0 / 8.0)
    return DefaultParams(eta=eta, alpha=4.0 * c.gamma + c.mu)


def mwu_learning_rate(d: int, horizon: int) -> float:
    """sqrt(2 log d / T), which gives regret at most sqrt(2 T log d) for utilities in [-1, 1]."""
    return math.sqrt(2.0 * math.log(d) / max(horizon, 1))


class Learner(ABC):
    """
    Shared state machine of the FTRL family.

    Rounds alternate step() then observe(nu). Corrections u = nu - <nu, x> 1
    accumulate in U; the optimistic signal is r = U + u_prev.
    """

    name = "ftrl"
    optimistic = True

    def __init__(self, reg: Regularizer, eta: float):
        if not eta > 0:
            raise InvalidParameterError(f"eta must be positive, got {eta}")
        self.reg = reg
        self.eta = float(eta)
        self.reset()

    def reset(self) -> None:
        d = self.reg.dimension
        self.U = np.zeros(d)
        self.u_prev = np.zeros(d)
        self.t = 1
        self.last_x: Optional[np.ndarray] = None
        self.last_lambda = math.nan
        self.max_regret_jump = 0.0
        self._last_signal: Optional[np.ndarray] = None
        self._awaiting_observe = False

    @property
    def dimension(self) -> int:
        return self.reg.dimension

    def signal(self) -> np.ndarray:
        return self.U + self.u_prev if self.optimistic else self.U.copy()

    def step(self) -> StepResult:
        """Choose this round's action from the current signal."""
        r = self.signal()
        if self._last_signal is not None:
            self.max_regret_jump = max(self.max_regret_jump, float(np.max(np.abs(r - self._last_signal))))
        self._last_signal = r
        result = self._choose(r)
        self.last_x = result.x
        self.last_lambda = result.learning_rate
        self._awaiting_observe = True
        logger.debug("t=%d lambda=%.6g", self.t, result.learning_rate)
        return result

    def observe(self, nu: Sequence[float]) -> None:
        """
        Record the utility vector for the action chosen by the last step().

        Raises:
            InvalidInputError: If no step is pending or nu has the wrong shape
            BoundedUtilityError: If ||nu||_inf exceeds 1
        """
        nu = np.asarray(nu, dtype=float)
        if not self._awaiting_observe:
            raise InvalidInputError("observe() called without a pending step()")
        if nu.shape != (self.dimension,):
            raise InvalidInputError(f"Utility vector must have length {self.dimension}, got shape {nu.shape}")
        if not np.all(np.isfinite(nu)) or np.max(np.abs(nu)) > 1.0 + UTILITY_BOUND_TOLERANCE:
            raise BoundedUtilityError(f"Utility vector leaves [-1, 1]: {nu}")
        u = nu - float(np.dot(nu, self.last_x))
        self.U = self.U + u
        self.u_prev = u
        self.t += 1
        self._awaiting_observe = False

    @abstractmethod
    def _choose(self, r: np.ndarray) -> StepResult:
        ...


class CoftrlLearner(Learner):
    """Cautious optimistic FTRL: the learning rate is re-solved every round."""

    name = AlgorithmKind.COFTRL.value

    def __init__(self, reg: Regularizer, eta: float, alpha: float, tol: float = DEFAULT_LR_TOL):
        gamma = reg.constants().gamma
        if not alpha > gamma:
            raise InvalidParameterError(f"alpha must exceed gamma = {gamma:.6g}, got {alpha}")
        self.alpha = float(alpha)
        self.tol = tol
        super().__init__(reg, eta)

    @classmethod
    def with_defaults(cls, reg: Regularizer, n: int, L: float = 1.0) -> "CoftrlLearner":
        eta, alpha = default_params(reg, reg.dimension, n, L)
        return cls(reg, eta, alpha)

    def _choose(self, r: np.ndarray) -> StepResult:
        solution = lr_control_solve(self.reg, r, self.eta, self.alpha, self.tol)
        return StepResult(solution.x, solution.learning_rate)


class FixedRateOftrlLearner(Learner):
    """Optimistic FTRL with lambda = eta in every round."""

    name = AlgorithmKind.OFTRL.value

    def _choose(self, r: np.ndarray) -> StepResult:
        return StepResult(ftrl_argmax(self.reg, self.eta * r).x, math.nan)


class OmwuLearner(FixedRateOftrlLearner):
    """Optimistic multiplicative weights: fixed-rate OFTRL with the negative entropy."""

    name = AlgorithmKind.OMWU.value

    def __init__(self, dimension: int, eta: float):
        super().__init__(NegEntropy(dimension), eta)


class MwuLearner(Learner):
    """Multiplicative weights, x proportional to exp(eta U)."""

    name = AlgorithmKind.MWU.value
    optimistic = False

    def __init__(self, dimension: int, eta: float):
        super().__init__(NegEntropy(dimension), eta)

    def _choose(self, r: np.ndarray) -> StepResult:
        return StepResult(softmax(self.eta * r), math.nan)


def safeguard_threshold(
    reg: Regularizer,
    eta: float,
    alpha: float,
    player_count: int,
    smoothness: float,
    t: int,
    horizon: int = 1,
) -> float:
    """L^2 n^2 (128 eta / mu) (3 + (alpha log t + R) / eta), the self-play variation budget."""
    c = reg.constants(horizon)
    return (smoothness * player_count) ** 2 * (128.0 * eta / c.mu) * (
        3.0 + (alpha * math.log(max(t, 1)) + c.r_max) / eta
    )


class SafeguardedLearner:
    """
    Cautious optimistic FTRL that falls back to MWU on adversarial input.

    The variation sum_t ||nu^{t+1} - nu^t||_inf^2 is tracked; once it exceeds
    what self-play could produce, play switches for good to a fresh MWU
    tuned to the rounds that remain.
    """

    name = "coftrl+safeguard"

    def __init__(self, inner: CoftrlLearner, player_count: int, smoothness: float, horizon: int):
        if horizon < 1:
            raise InvalidParameterError(f"horizon must be at least 1, got {horizon}")
        self.inner = inner
        self.player_count = player_count
        self.smoothness = smoothness
        self.horizon = horizon
        self.fallback: Optional[MwuLearner] = None
        self.switched = False
        self.switch_round: Optional[int] = None
        self.variation_sum = 0.0
        self._prev_nu: Optional[np.ndarray] = None
        self.t = 1

    @property
    def reg(self) -> Regularizer:
        return self.inner.reg

    @property
    def dimension(self) -> int:
        return self.inner.dimension

    @property
    def active(self) -> Learner:
        return self.fallback if self.switched else self.inner

    @property
    def max_regret_jump(self) -> float:
        return self.inner.max_regret_jump

    def threshold(self, t: int) -> float:
        return safeguard_threshold(
            self.inner.reg, self.inner.eta, self.inner.alpha,
            self.player_count, self.smoothness, t, self.horizon,
        )

    def step(self) -> StepResult:
        return self.active.step()

    def observe(self, nu: Sequence[float]) -> None:
        nu = np.asarray(nu, dtype=float)
        self.active.observe(nu)
        if self._prev_nu is not None:
            self.variation_sum += float(np.max(np.abs(nu - self._prev_nu))) ** 2
        self._prev_nu = nu
        self.safeguard_check(self.t)
        self.t += 1

    def safeguard_check(self, t: int) -> bool:
        """
        Compare the variation so far with the self-play budget at round t.

        Returns:
            True iff the budget is exceeded; the first such call switches play
        """
        exceeded = self.variation_sum > self.threshold(t)
        if exceeded and not self.switched:
            remaining = max(self.horizon - t, 1)
            self.fallback = MwuLearner(self.dimension, mwu_learning_rate(self.dimension, remaining))
            self.switched = True
            self.switch_round = t
            logger.info(
                "Safeguard switched to MWU at round %d (variation %.4g > threshold %.4g)",
                t, self.variation_sum, self.threshold(t),
            )
        return exceeded


def make_learner(
    algorithm: AlgorithmKind | str,
    reg: Regularizer,
    eta: float,
    alpha: Optional[float] = None,
) -> Learner:
    """
    Construct a learner by algorithm name.

    Raises:
        InvalidParameterError: If the algorithm is unknown or COFTRL lacks alpha
    """
    try:
        algorithm = AlgorithmKind(algorithm)
    except ValueError as e:
        valid = ", ".join(k.value for k in AlgorithmKind)
        raise InvalidParameterError(f"Unknown algorithm: {algorithm}. Valid algorithms: {valid}") from e

    if algorithm is AlgorithmKind.COFTRL:
        if alpha is None:
            raise InvalidParameterError("coftrl needs alpha")
        return CoftrlLearner(reg, eta, alpha)
    if algorithm is AlgorithmKind.OFTRL:
        return FixedRateOftrlLearner(reg, eta)
    if algorithm is AlgorithmKind.OMWU:
        return OmwuLearner(reg.dimension, eta)
    return MwuLearner(reg.dimension, eta)
