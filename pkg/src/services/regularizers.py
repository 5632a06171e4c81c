"""Simplex regularizers with value, gradient and Bregman oracles.

Each regularizer also certifies its intrinsic-Lipschitz constant gamma,
its l1 strong-convexity constant mu, and R = max over the simplex of psi.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.special import rel_entr, xlogy

from ..errors import DomainError, InvalidInputError, InvalidParameterError

SIMPLEX_TOLERANCE = 1e-10


class RegularizerKind(Enum):
    """Supported regularizer families."""
    NEG_ENTROPY = "neg_entropy"
    LOG = "log"
    SQUARED_LP = "squared_lp"
    TSALLIS = "tsallis"
    COMBINATION = "combination"


@dataclass(frozen=True)
class KindInfo:
    """Information about a regularizer family."""
    name: str
    hyperparameter: Optional[str]
    description: str


AVAILABLE_KINDS = {
    RegularizerKind.NEG_ENTROPY: KindInfo("neg_entropy", None, "sum x log x; cautious optimistic MWU"),
    RegularizerKind.LOG: KindInfo("log", None, "-sum log x; only locally intrinsically Lipschitz"),
    RegularizerKind.SQUARED_LP: KindInfo("squared_lp", "p", "0.5 ||x||_p^2 with p in (1, 2]"),
    RegularizerKind.TSALLIS: KindInfo("tsallis", "q", "(1 - sum x^q) / (1 - q) with q in (0, 1)"),
    RegularizerKind.COMBINATION: KindInfo("combination", "parts", "positive weighted sum of the above"),
}


@dataclass(frozen=True)
class RegularizerConstants:
    """Certified constants of a regularizer.

    For locally intrinsically Lipschitz regularizers `gamma` holds gamma(1).
    """
    gamma: float
    mu: float
    r_max: float
    is_local: bool = False


def p_star(dimension: int) -> float:
    """1 + 1/log d, capped at 2 (the formula leaves (1, 2] for d < e^2)."""
    return min(2.0, 1.0 + 1.0 / math.log(dimension))


def q_star(dimension: int) -> float:
    """1 - 1/log d; small games (log d <= 1) fall back to the 1/2-Tsallis entropy."""
    if math.log(dimension) <= 1.0:
        return 0.5
    return 1.0 - 1.0 / math.log(dimension)


@dataclass(frozen=True)
class Regularizer(ABC):
    """A strictly convex function on the probability simplex of size `dimension`.

    `constants_override` replaces the certified constants; it exists so
    that the verification suites can be run against deliberately wrong
    constants.
    """
    dimension: int
    constants_override: Optional[RegularizerConstants] = field(default=None, kw_only=True)

    def __post_init__(self):
        if self.dimension < 2:
            raise InvalidInputError(f"Regularizer dimension must be at least 2, got {self.dimension}")

    @property
    @abstractmethod
    def kind(self) -> RegularizerKind:
        ...

    @property
    def is_separable(self) -> bool:
        """Whether psi(x) = sum_k h(x[k]) for a scalar h."""
        return False

    @property
    def is_local(self) -> bool:
        return self.constants().is_local

    # Oracles ---------------------------------------------------------------

    def value(self, x: Sequence[float]) -> float:
        """psi(x). Raises InvalidInputError off the simplex."""
        return self._value(self._check_simplex(x))

    def gradient(self, x: Sequence[float]) -> np.ndarray:
        """
        Gradient of psi at x.

        Raises:
            InvalidInputError: If x is not in the simplex
            DomainError: If x has a zero entry and the gradient is singular there
        """
        x = self._check_simplex(x)
        if self.singular_at_boundary and np.any(x <= 0.0):
            raise DomainError(f"{self.kind.value} gradient is singular at zero entries")
        return self._gradient(x)

    def bregman(self, x_new: Sequence[float], x_ref: Sequence[float]) -> float:
        """
        D_psi(x_new || x_ref) = psi(x_new) - psi(x_ref) - <grad psi(x_ref), x_new - x_ref>.

        Raises:
            DomainError: If x_ref is a singular point of the gradient
        """
        x_new = self._check_simplex(x_new)
        x_ref = self._check_simplex(x_ref)
        if self.singular_at_boundary and np.any(x_ref <= 0.0):
            raise DomainError(f"{self.kind.value} Bregman reference point must be strictly positive")
        return self._bregman(x_new, x_ref)

    def constants(self, horizon: int = 1) -> RegularizerConstants:
        """Certified (gamma, mu, R); `horizon` only matters for the log regularizer."""
        if self.constants_override is not None:
            return self.constants_override
        return self._constants(horizon)

    def with_constants(self, **overrides: float) -> "Regularizer":
        """Copy of this regularizer whose constants have some fields replaced."""
        constants = replace(self.constants(), **overrides)
        return replace(self, constants_override=constants)

    # Hooks -----------------------------------------------------------------

    singular_at_boundary = False

    @abstractmethod
    def _value(self, x: np.ndarray) -> float:
        ...

    @abstractmethod
    def _gradient(self, x: np.ndarray) -> np.ndarray:
        ...

    def _bregman(self, x_new: np.ndarray, x_ref: np.ndarray) -> float:
        return float(self._value(x_new) - self._value(x_ref) - np.dot(self._gradient(x_ref), x_new - x_ref))

    @abstractmethod
    def _constants(self, horizon: int) -> RegularizerConstants:
        ...

    def scalar_derivative(self, t: np.ndarray) -> np.ndarray:
        """h'(t) elementwise for separable regularizers."""
        raise NotImplementedError(f"{self.kind.value} is not separable")

    def _check_simplex(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise InvalidInputError(f"Expected a vector of length {self.dimension}, got shape {x.shape}")
        if np.any(x < -SIMPLEX_TOLERANCE) or abs(x.sum() - 1.0) > SIMPLEX_TOLERANCE:
            raise InvalidInputError(f"Point is not in the simplex: {x}")
        return np.clip(x, 0.0, None)


@dataclass(frozen=True)
class NegEntropy(Regularizer):
    """psi(x) = sum x log x with 0 log 0 = 0."""

    singular_at_boundary = True

    @property
    def kind(self) -> RegularizerKind:
        return RegularizerKind.NEG_ENTROPY

    @property
    def is_separable(self) -> bool:
        return True

    def _value(self, x: np.ndarray) -> float:
        return float(np.sum(xlogy(x, x)))

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        return 1.0 + np.log(x)

    def _bregman(self, x_new: np.ndarray, x_ref: np.ndarray) -> float:
        # Generalized KL; equals KL on the simplex and stays exact near zero.
        return float(np.sum(rel_entr(x_new, x_ref)) - x_new.sum() + x_ref.sum())

    def _constants(self, horizon: int) -> RegularizerConstants:
        return RegularizerConstants(gamma=3.0 * math.log(self.dimension) ** 2, mu=1.0, r_max=0.0)

    def scalar_derivative(self, t: np.ndarray) -> np.ndarray:
        return 1.0 + np.log(t)


@dataclass(frozen=True)
class LogBarrier(Regularizer):
    """psi(x) = -sum log x; +inf on the boundary."""

    singular_at_boundary = True

    @property
    def kind(self) -> RegularizerKind:
        return RegularizerKind.LOG

    @property
    def is_separable(self) -> bool:
        return True

    def _value(self, x: np.ndarray) -> float:
        if np.any(x <= 0.0):
            return math.inf
        return float(-np.sum(np.log(x)))

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        return -1.0 / x

    def _constants(self, horizon: int) -> RegularizerConstants:
        # max over the simplex is unbounded; R is taken at the interior
        # comparator that mixes in the uniform point with weight 1/T.
        d = self.dimension
        return RegularizerConstants(
            gamma=18.0 * d,
            mu=1.0,
            r_max=d * math.log(d * max(horizon, 1)),
            is_local=True,
        )

    def scalar_derivative(self, t: np.ndarray) -> np.ndarray:
        return -1.0 / t


@dataclass(frozen=True)
class SquaredLp(Regularizer):
    """psi(x) = 0.5 ||x||_p^2 with p in (1, 2]."""
    p: float = 2.0

    def __post_init__(self):
        super().__post_init__()
        if not 1.0 < self.p <= 2.0:
            raise InvalidParameterError(f"p must lie in (1, 2], got {self.p}")

    @property
    def kind(self) -> RegularizerKind:
        return RegularizerKind.SQUARED_LP

    @property
    def is_separable(self) -> bool:
        return self.p == 2.0

    def _value(self, x: np.ndarray) -> float:
        return 0.5 * float(np.sum(x ** self.p)) ** (2.0 / self.p)

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        if self.p == 2.0:
            return x.copy()
        norm = float(np.sum(x ** self.p)) ** (1.0 / self.p)
        return norm ** (2.0 - self.p) * x ** (self.p - 1.0)

    def _constants(self, horizon: int) -> RegularizerConstants:
        p, d = self.p, self.dimension
        return RegularizerConstants(
            gamma=2.0 / (p - 1.0),
            mu=(p - 1.0) * d ** (2.0 / p - 2.0),
            r_max=0.5,
        )

    def scalar_derivative(self, t: np.ndarray) -> np.ndarray:
        if self.p != 2.0:
            return super().scalar_derivative(t)
        return np.asarray(t, dtype=float)


@dataclass(frozen=True)
class TsallisEntropy(Regularizer):
    """psi(x) = (1 - sum x^q) / (1 - q) with q in (0, 1)."""
    q: float = 0.5

    singular_at_boundary = True

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 < self.q < 1.0:
            raise InvalidParameterError(f"q must lie in (0, 1), got {self.q}")

    @property
    def kind(self) -> RegularizerKind:
        return RegularizerKind.TSALLIS

    @property
    def is_separable(self) -> bool:
        return True

    def _value(self, x: np.ndarray) -> float:
        return float((1.0 - np.sum(x ** self.q)) / (1.0 - self.q))

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        return -(self.q / (1.0 - self.q)) * x ** (self.q - 1.0)

    def _constants(self, horizon: int) -> RegularizerConstants:
        q, d = self.q, self.dimension
        # The 1/2 case has its own, four times tighter, certificate.
        gamma = 4.0 * math.sqrt(d) if q == 0.5 else 4.0 * d ** (1.0 - q) / (1.0 - q) ** 2
        # psi <= 0 on the simplex with equality at the vertices.
        return RegularizerConstants(gamma=gamma, mu=q, r_max=0.0)

    def scalar_derivative(self, t: np.ndarray) -> np.ndarray:
        return -(self.q / (1.0 - self.q)) * np.asarray(t, dtype=float) ** (self.q - 1.0)


@dataclass(frozen=True)
class Combination(Regularizer):
    """sum_i a_i psi_i with a_i > 0."""
    parts: tuple[tuple[float, Regularizer], ...] = ()

    def __post_init__(self):
        super().__post_init__()
        if not self.parts:
            raise InvalidInputError("A combination needs at least one part")
        for weight, part in self.parts:
            if not weight > 0:
                raise InvalidParameterError(f"Combination weights must be positive, got {weight}")
            if part.dimension != self.dimension:
                raise InvalidInputError(
                    f"Combination part has dimension {part.dimension}, expected {self.dimension}"
                )

    @property
    def kind(self) -> RegularizerKind:
        return RegularizerKind.COMBINATION

    @property
    def singular_at_boundary(self) -> bool:  # type: ignore[override]
        return any(part.singular_at_boundary for _, part in self.parts)

    @property
    def is_separable(self) -> bool:
        return all(part.is_separable for _, part in self.parts)

    def _value(self, x: np.ndarray) -> float:
        return float(sum(weight * part._value(x) for weight, part in self.parts))

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        return sum(weight * part._gradient(x) for weight, part in self.parts)

    def _bregman(self, x_new: np.ndarray, x_ref: np.ndarray) -> float:
        return float(sum(weight * part._bregman(x_new, x_ref) for weight, part in self.parts))

    def _constants(self, horizon: int) -> RegularizerConstants:
        parts = [(weight, part.constants(horizon)) for weight, part in self.parts]
        return RegularizerConstants(
            gamma=sum(weight * c.gamma for weight, c in parts),
            mu=sum(weight * c.mu for weight, c in parts),
            r_max=sum(weight * c.r_max for weight, c in parts),
            is_local=any(c.is_local for _, c in parts),
        )

    def scalar_derivative(self, t: np.ndarray) -> np.ndarray:
        return sum(weight * part.scalar_derivative(t) for weight, part in self.parts)


def combine(parts: Sequence[tuple[float, Regularizer]]) -> Combination:
    """
    Weighted sum of regularizers over the same simplex.

    Raises:
        InvalidInputError: If the parts have different dimensions
        InvalidParameterError: If a weight is not positive
    """
    parts = tuple((float(weight), reg) for weight, reg in parts)
    if not parts:
        raise InvalidInputError("combine() needs at least one part")
    return Combination(dimension=parts[0][1].dimension, parts=parts)


def make_regularizer(
    kind: RegularizerKind | str,
    dimension: int,
    p: Optional[float] = None,
    q: Optional[float] = None,
    parts: Optional[Sequence[tuple[float, Regularizer]]] = None,
) -> Regularizer:
    """
    Construct a regularizer by kind name.

    Args:
        kind: Family name or enum member
        dimension: Simplex dimension d
        p: Exponent for squared_lp; None selects p*
        q: Exponent for tsallis; None selects q*
        parts: (weight, regularizer) pairs for combination

    Raises:
        InvalidParameterError: If the kind is unknown or a hyperparameter is out of range
    """
    try:
        kind = RegularizerKind(kind)
    except ValueError as e:
        valid = ", ".join(k.value for k in RegularizerKind)
        raise InvalidParameterError(f"Unknown regularizer kind: {kind}. Valid kinds: {valid}") from e

    if kind is RegularizerKind.NEG_ENTROPY:
        return NegEntropy(dimension)
    if kind is RegularizerKind.LOG:
        return LogBarrier(dimension)
    if kind is RegularizerKind.SQUARED_LP:
        return SquaredLp(dimension, p=p_star(dimension) if p is None else float(p))
    if kind is RegularizerKind.TSALLIS:
        return TsallisEntropy(dimension, q=q_star(dimension) if q is None else float(q))
    return combine(parts or ())
