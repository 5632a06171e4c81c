"""Simplex and learning-rate solvers.

Two problems sit at the heart of cautious optimism:

    x(g)     = argmax_{x in simplex} <g, x> - psi(x)            (FTRL step)
    lambda*  = argmax_{0 < lambda <= eta} alpha log lambda + psi*(lambda r)

plus the equivalent lifted step over (0, 1] * simplex, which is used to
cross-check the two-stage form.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import softmax

from ..errors import ConvergenceError, InvalidInputError, InvalidParameterError
from .regularizers import (
    Combination,
    LogBarrier,
    NegEntropy,
    Regularizer,
    SquaredLp,
    TsallisEntropy,
)

logger = logging.getLogger(__name__)

DEFAULT_FTRL_TOL = 1e-10
DEFAULT_LR_TOL = 1e-10
MAX_ITERATIONS = 200
POSITIVE_CLAMP = 1e-14
LAMBDA_FLOOR = 1e-12

_RTOL = 4.0 * np.finfo(float).eps


@dataclass(frozen=True)
class FtrlSolution:
    """Result of the FTRL argmax; `objective` is psi*(g)."""
    x: np.ndarray
    objective: float
    kkt_residual: float


@dataclass(frozen=True)
class LrSolution:
    """Result of the learning-rate control problem.

    `x` is the FTRL argmax at the returned learning rate, so callers do not
    need to solve it twice.
    """
    learning_rate: float
    objective: float
    at_cap: bool
    x: np.ndarray
    derivative: float


# FTRL argmax ----------------------------------------------------------------

def kkt_residual(reg: Regularizer, g: np.ndarray, x: np.ndarray) -> float:
    """
    Scaled violation of the simplex KKT conditions of max <g,x> - psi(x).

    On the support, g - grad psi(x) must be a constant nu (weighted by x so
    that vanishing coordinates do not dominate); off the support it must
    not exceed nu.
    """
    g = np.asarray(g, dtype=float)
    scale = max(1.0, float(np.max(np.abs(g))))
    grad = reg._gradient(np.maximum(x, POSITIVE_CLAMP) if reg.singular_at_boundary else x)
    slack = g - grad
    nu = float(np.dot(x, slack))
    support = x > 0.0
    residual = abs(float(x.sum()) - 1.0)
    if np.any(support):
        residual = max(residual, float(np.max(x[support] * np.abs(slack[support] - nu))) / scale)
    if np.any(~support):
        residual = max(residual, float(np.max(np.maximum(slack[~support] - nu, 0.0))) / scale)
    return residual


def _normalize(x: np.ndarray) -> np.ndarray:
    x = np.maximum(x, 0.0)
    return x / x.sum()


def _root(func: Callable[[float], float], lo: float, hi: float, what: str) -> float:
    try:
        return brentq(func, lo, hi, xtol=1e-300, rtol=_RTOL, maxiter=MAX_ITERATIONS)
    except RuntimeError as e:
        raise ConvergenceError(f"{what} root search did not converge", residual=math.nan, iterations=MAX_ITERATIONS) from e


def _dual_argmax(shifted: np.ndarray, inverse: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> np.ndarray:
    """Find nu with sum_k inverse(nu - shifted_k) = 1; inverse is decreasing in its argument."""
    nu = _root(lambda v: float(np.sum(inverse(v - shifted))) - 1.0, lo, hi, "simplex dual")
    return _normalize(inverse(nu - shifted))


def _argmax_neg_entropy(g: np.ndarray) -> np.ndarray:
    return softmax(g)


def _argmax_log(g: np.ndarray, d: int) -> np.ndarray:
    # x_k = 1 / (nu - g_k) with nu > max g; shifting by max g keeps nu = O(d).
    # At nu = 1/2 the top entry alone is 2, at nu = 2d every entry is at most 1/(2d).
    shifted = g - g.max()
    return _dual_argmax(shifted, lambda gap: 1.0 / gap, 0.5, 2.0 * d)


def _argmax_tsallis(g: np.ndarray, q: float, d: int) -> np.ndarray:
    # x_k = ((1 - q)(nu - g_k) / q)^(1 / (q - 1))
    shifted = g - g.max()
    ratio = (1.0 - q) / q
    exponent = 1.0 / (q - 1.0)
    lo = 0.5 / ratio
    hi = 2.0 * d ** (1.0 - q) / ratio
    return _dual_argmax(shifted, lambda gap: (ratio * gap) ** exponent, lo, hi)


def _argmax_euclidean(g: np.ndarray) -> np.ndarray:
    """Euclidean projection of g onto the simplex by sorting."""
    u = np.sort(g)[::-1]
    cumulative = np.cumsum(u) - 1.0
    index = np.arange(1, g.size + 1)
    rho = np.nonzero(u - cumulative / index > 0)[0][-1]
    theta = cumulative[rho] / (rho + 1.0)
    return _normalize(g - theta)


def _argmax_squared_lp(g: np.ndarray, p: float, d: int) -> np.ndarray:
    """
    argmax <g, x> - 0.5 ||x||_p^2 for p in (1, 2).

    For a fixed s the stationarity conditions give
    x_k(s) = ((g_k - nu)_+ / s)^(1/(p-1)); the optimum is the unique s with
    s = ||x(s)||_p^(2-p). That map is non-increasing in s (a larger weight on
    sum x^p never increases it), so an outer bracketing root find suffices.
    """
    shifted = g - g.max()
    exponent = 1.0 / (p - 1.0)

    def point(s: float) -> np.ndarray:
        inverse = lambda gap: (np.maximum(-gap, 0.0) / s) ** exponent
        nu = _root(lambda v: float(np.sum(inverse(v - shifted))) - 1.0, -s, 0.0, "squared-lp inner")
        return _normalize(inverse(nu - shifted))

    def mismatch(s: float) -> float:
        x = point(s)
        return float(np.sum(x ** p)) ** ((2.0 - p) / p) - s

    s_lo = d ** ((1.0 / p - 1.0) * (2.0 - p))
    if mismatch(s_lo) <= 0.0:
        return point(s_lo)
    if mismatch(1.0) >= 0.0:
        return point(1.0)
    return point(_root(mismatch, s_lo, 1.0, "squared-lp outer"))


def _inverse_scalar_derivative(reg: Regularizer, targets: np.ndarray) -> np.ndarray:
    """Solve h'(t) = target for t in [0, 1] coordinatewise by vectorised bisection."""
    lo = np.zeros_like(targets)
    hi = np.ones_like(targets)
    for _ in range(MAX_ITERATIONS // 2):
        mid = 0.5 * (lo + hi)
        below = reg.scalar_derivative(np.maximum(mid, POSITIVE_CLAMP)) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _argmax_separable(reg: Regularizer, g: np.ndarray, d: int) -> np.ndarray:
    shifted = g - g.max()
    inverse = lambda gap: _inverse_scalar_derivative(reg, -gap)
    # At nu = -h'(1) the top coordinate alone reaches 1; at nu = -h'(1/(2d)) none exceeds 1/(2d).
    lo = -float(reg.scalar_derivative(np.array([1.0]))[0])
    hi = -float(reg.scalar_derivative(np.array([0.5 / d]))[0])
    return _dual_argmax(shifted, inverse, lo, hi)


def _argmax_mirror_ascent(reg: Regularizer, g: np.ndarray, tol: float, max_iterations: int = 20000) -> np.ndarray:
    """Entropic mirror ascent with backtracking; the generic fallback."""
    d = g.size
    x = np.full(d, 1.0 / d)
    objective = lambda z: float(np.dot(g, z)) - reg._value(z)
    current = objective(x)
    step = 1.0
    for iteration in range(max_iterations):
        if kkt_residual(reg, g, x) <= tol:
            return x
        direction = g - reg._gradient(np.maximum(x, POSITIVE_CLAMP))
        while step > 1e-16:
            candidate = _normalize(x * np.exp(step * (direction - direction.max())))
            value = objective(candidate)
            if value >= current - 1e-15 * max(1.0, abs(current)):
                break
            step *= 0.5
        else:
            break
        x, current = candidate, value
        step *= 1.5
    raise ConvergenceError("mirror ascent did not reach tolerance", kkt_residual(reg, g, x), max_iterations)


def ftrl_argmax(reg: Regularizer, g: Sequence[float], tol: float = DEFAULT_FTRL_TOL) -> FtrlSolution:
    """
    Solve argmax_{x in simplex} <g, x> - psi(x).

    Args:
        reg: Regularizer psi
        g: Scaled regret vector (lambda * r)
        tol: Admissible KKT residual

    Returns:
        FtrlSolution with the maximizer, psi*(g) and the certified residual

    Raises:
        InvalidInputError: If g is not a finite vector of the right length
        ConvergenceError: If the residual stays above `tol`
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (reg.dimension,) or not np.all(np.isfinite(g)):
        raise InvalidInputError(f"Expected a finite vector of length {reg.dimension}, got {g}")
    if not tol > 0:
        raise InvalidParameterError(f"Tolerance must be positive, got {tol}")

    d = reg.dimension
    if isinstance(reg, NegEntropy):
        x = _argmax_neg_entropy(g)
    elif isinstance(reg, LogBarrier):
        x = _argmax_log(g, d)
    elif isinstance(reg, TsallisEntropy):
        x = _argmax_tsallis(g, reg.q, d)
    elif isinstance(reg, SquaredLp):
        x = _argmax_euclidean(g) if reg.p == 2.0 else _argmax_squared_lp(g, reg.p, d)
    elif isinstance(reg, Combination) and reg.is_separable:
        x = _argmax_separable(reg, g, d)
    else:
        x = _argmax_mirror_ascent(reg, g, tol)

    residual = kkt_residual(reg, g, x)
    if residual > tol:
        raise ConvergenceError(f"{reg.kind.value} argmax missed the KKT tolerance {tol:.1e}", residual)
    objective = float(np.dot(g, x)) - reg._value(x)
    return FtrlSolution(x=x, objective=objective, kkt_residual=residual)


def conjugate(reg: Regularizer, g: Sequence[float], tol: float = DEFAULT_FTRL_TOL) -> tuple[float, np.ndarray]:
    """psi*(g) restricted to the simplex, with its maximizer."""
    solution = ftrl_argmax(reg, g, tol)
    return solution.objective, solution.x


# Learning-rate control ------------------------------------------------------

def lr_objective(reg: Regularizer, r: Sequence[float], alpha: float, learning_rate: float) -> float:
    """f(lambda) = alpha log lambda + psi*(lambda r)."""
    value, _ = conjugate(reg, learning_rate * np.asarray(r, dtype=float))
    return alpha * math.log(learning_rate) + value


def lr_derivative(reg: Regularizer, r: Sequence[float], alpha: float, learning_rate: float) -> float:
    """f'(lambda) = alpha / lambda + <r, x_lambda> by the envelope theorem."""
    r = np.asarray(r, dtype=float)
    _, x = conjugate(reg, learning_rate * r)
    return alpha / learning_rate + float(np.dot(r, x))


def lr_control_solve(
    reg: Regularizer,
    r: Sequence[float],
    eta: float,
    alpha: float,
    tol: float = DEFAULT_LR_TOL,
    check_concavity: bool = True,
) -> LrSolution:
    """
    Solve the learning-rate control problem on (0, eta].

    The objective is strictly concave once alpha > gamma, so its maximizer is
    either the cap (f'(eta) >= 0) or the unique zero of f'. The zero is
    bracketed in [1e-12 eta, eta] and located on lambda * f'(lambda), which
    has the same sign as f' but stays O(alpha) in size.

    Args:
        reg: Regularizer psi
        r: Optimistic regret vector
        eta: Learning-rate cap
        alpha: Weight of the log barrier on lambda
        tol: Admissible |lambda f'(lambda)| relative to alpha + lambda ||r||_inf
        check_concavity: Reject alpha <= gamma (turned off for landscape sweeps)

    Raises:
        InvalidParameterError: If eta <= 0, tol <= 0 or alpha <= gamma
        ConvergenceError: If the stationarity residual cannot be certified
    """
    r = np.asarray(r, dtype=float)
    if not eta > 0:
        raise InvalidParameterError(f"eta must be positive, got {eta}")
    if not tol > 0:
        raise InvalidParameterError(f"Tolerance must be positive, got {tol}")
    gamma = reg.constants().gamma
    if check_concavity and not alpha > gamma:
        raise InvalidParameterError(f"alpha must exceed gamma = {gamma:.6g} for a concave problem, got {alpha}")

    def scaled_derivative(learning_rate: float) -> tuple[float, np.ndarray]:
        x = ftrl_argmax(reg, learning_rate * r).x
        return alpha + learning_rate * float(np.dot(r, x)), x

    def finish(learning_rate: float, x: np.ndarray, at_cap: bool) -> LrSolution:
        derivative = alpha / learning_rate + float(np.dot(r, x))
        objective = alpha * math.log(learning_rate) + learning_rate * float(np.dot(r, x)) - reg._value(x)
        return LrSolution(learning_rate, objective, at_cap, x, derivative)

    scale = lambda learning_rate: alpha + learning_rate * float(np.max(np.abs(r)))

    at_eta, x_eta = scaled_derivative(eta)
    if at_eta >= -tol * scale(eta):
        return finish(eta, x_eta, at_cap=True)

    floor = LAMBDA_FLOOR * eta
    at_floor, _ = scaled_derivative(floor)
    if at_floor <= 0.0:
        raise ConvergenceError("learning-rate objective still decreasing at the floor", residual=abs(at_floor) / alpha)

    learning_rate = _root(lambda lam: scaled_derivative(lam)[0], floor, eta, "learning-rate control")
    value, x = scaled_derivative(learning_rate)
    if abs(value) > tol * scale(learning_rate):
        raise ConvergenceError("learning-rate stationarity not certified", residual=abs(value) / scale(learning_rate))
    return finish(learning_rate, x, at_cap=False)


# Lifted formulation ---------------------------------------------------------

@dataclass(frozen=True)
class LiftedRegularizer:
    """phi(y) = -alpha log(1'y) + psi(y / 1'y) on (0, 1] * simplex."""
    reg: Regularizer
    alpha: float

    def split(self, y: Sequence[float]) -> tuple[float, np.ndarray]:
        """Return (mass, direction) with y = mass * direction."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.reg.dimension,) or np.any(y < 0.0):
            raise InvalidInputError(f"Lifted point must be a nonnegative vector of length {self.reg.dimension}")
        mass = float(y.sum())
        if not 0.0 < mass <= 1.0 + 1e-12:
            raise InvalidInputError(f"Lifted point mass must lie in (0, 1], got {mass}")
        return mass, y / mass

    def value(self, y: Sequence[float]) -> float:
        mass, x = self.split(y)
        return -self.alpha * math.log(mass) + self.reg.value(x)

    def gradient(self, y: Sequence[float]) -> np.ndarray:
        mass, x = self.split(y)
        grad = self.reg.gradient(x)
        return (-self.alpha + grad - float(np.dot(grad, x))) / mass

    def bregman(self, y_new: Sequence[float], y_ref: Sequence[float]) -> float:
        y_new = np.asarray(y_new, dtype=float)
        y_ref = np.asarray(y_ref, dtype=float)
        return self.value(y_new) - self.value(y_ref) - float(np.dot(self.gradient(y_ref), y_new - y_ref))


def neg_log_bregman(new: float, ref: float) -> float:
    """D_{-log}(new || ref) = new/ref - 1 - log(new/ref)."""
    ratio = new / ref
    return ratio - 1.0 - math.log(ratio)


def lifted_objective(reg: Regularizer, r: Sequence[float], eta: float, alpha: float, y: Sequence[float]) -> float:
    """eta <r, y> + alpha log(1'y) - psi(y / 1'y)."""
    return eta * float(np.dot(r, y)) - LiftedRegularizer(reg, alpha).value(y)


def lifted_oftrl_step(
    reg: Regularizer,
    r: Sequence[float],
    eta: float,
    alpha: float,
    tol: float = DEFAULT_LR_TOL,
) -> np.ndarray:
    """
    The single-step lifted update, mapped back as y = (lambda / eta) x.

    Since alpha log(1'y) = alpha log lambda - alpha log eta under this map,
    both formulations share their maximizer.
    """
    solution = lr_control_solve(reg, r, eta, alpha, tol)
    return (solution.learning_rate / eta) * solution.x


def lifted_kkt_residual(reg: Regularizer, r: Sequence[float], eta: float, alpha: float, y: Sequence[float]) -> float:
    """
    First-order optimality residual of y for the lifted problem.

    With G = eta r - grad phi(y) and c the y-weighted level of G: an iterate
    with 1'y < 1 needs c = 0, one on the cap 1'y = 1 needs c >= 0, and every
    coordinate needs G_k = c (G_k <= c where y_k = 0). Coordinate violations
    are damped by min(1, d x_k) so that vanishing entries do not dominate.
    """
    r = np.asarray(r, dtype=float)
    lifted = LiftedRegularizer(reg, alpha)
    mass, x = lifted.split(y)
    interior = np.maximum(x, POSITIVE_CLAMP) if reg.singular_at_boundary else x
    interior = interior / interior.sum()
    grad = reg._gradient(interior)
    residual_vector = eta * r - (-alpha + grad - float(np.dot(grad, interior))) / mass
    scale = max(1.0, eta * float(np.max(np.abs(r))), alpha / mass)

    level = float(np.dot(x, residual_vector))
    weights = np.minimum(1.0, reg.dimension * x)
    support = x > 0.0
    violation = np.where(support, weights * np.abs(residual_vector - level), np.maximum(residual_vector - level, 0.0))
    level_violation = abs(level) if mass < 1.0 - 1e-12 else max(0.0, -level)
    return max(float(np.max(violation)), level_violation) / scale


# Landscape ------------------------------------------------------------------

def landscape_grid(
    reg: Regularizer,
    eta: float,
    alpha: float,
    grid: Sequence[tuple[float, float]],
    tol: float = DEFAULT_LR_TOL,
) -> list[float]:
    """
    Learning rate chosen at every regret pair of a 2-action grid.

    Raises:
        InvalidInputError: If the regularizer is not over 2 actions
    """
    if reg.dimension != 2:
        raise InvalidInputError(f"Landscape grids need a 2-action regularizer, got d={reg.dimension}")
    concave = alpha > reg.constants().gamma
    if not concave:
        logger.warning(
            "alpha=%g does not exceed gamma=%g for %s; landscape solves are not certified concave",
            alpha, reg.constants().gamma, reg.kind.value,
        )
    return [
        lr_control_solve(reg, (r1, r2), eta, alpha, tol, check_concavity=concave).learning_rate
        for r1, r2 in grid
    ]


def landscape_axis(r_min: float = -10.0, r_max: float = 10.0, points: int = 41) -> np.ndarray:
    return np.linspace(r_min, r_max, points)


def landscape_points(axis: Sequence[float], other: Optional[Sequence[float]] = None) -> list[tuple[float, float]]:
    """Cartesian grid in row-major order (r1 outer, r2 inner)."""
    other = axis if other is None else other
    return [(float(r1), float(r2)) for r1 in axis for r2 in other]


