"""Numerical property suites.

Each property draws seeded random inputs (or replays seeded self-play runs),
evaluates a residual that must stay below a tolerance, and records the worst
case. Properties that only hold under assumptions a regularizer does not
meet are run in report-only mode: they are listed but never fail the suite.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from ..models.game import GameSpec, GameType, make_game
from ..models.trajectory import Trajectory
from .harness import adversarial_play, alternating_adversary, self_play
from .learners import (
    CoftrlLearner,
    OmwuLearner,
    SafeguardedLearner,
    default_params,
)
from .metrics import (
    _lifted_nonnegative_regret,
    cce_gap,
    external_regret,
    path_length,
    path_length_bound,
    regret_bound,
    regret_signals,
    rvu_bound,
    stability_violations,
)
from .regularizers import (
    Combination,
    LogBarrier,
    NegEntropy,
    Regularizer,
    SquaredLp,
    TsallisEntropy,
    p_star,
    q_star,
)
from .solvers import (
    LiftedRegularizer,
    ftrl_argmax,
    landscape_axis,
    lifted_kkt_residual,
    lifted_oftrl_step,
    lr_control_solve,
    lr_derivative,
    lr_objective,
    neg_log_bregman,
)

logger = logging.getLogger(__name__)

SUITES = ("regularizers", "solvers", "learners", "harness")
DEFAULT_SAMPLES = 10_000
DEFAULT_DIMENSION = 8


@dataclass(frozen=True)
class PropertyResult:
    """Worst case of one property on one subject."""
    suite: str
    name: str
    subject: str
    samples: int
    max_residual: float
    tolerance: float
    report_only: bool = False
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else ("INFO" if self.report_only else "FAIL")
        text = (f"[{status}] {self.suite}/{self.name} {self.subject} samples={self.samples} "
                f"max_residual={self.max_residual:.3e} tol={self.tolerance:.1e}")
        return text + (f" ({self.message})" if self.message else "")


@dataclass
class VerificationReport:
    results: list[PropertyResult] = field(default_factory=list)

    @property
    def failures(self) -> list[PropertyResult]:
        return [r for r in self.results if not r.passed and not r.report_only]

    @property
    def passed(self) -> bool:
        return not self.failures

    def format(self) -> str:
        lines = [r.line() for r in self.results]
        lines.append(f"{len(self.results)} properties, {len(self.failures)} failed")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "results": [
                {
                    "suite": r.suite,
                    "property": r.name,
                    "subject": r.subject,
                    "samples": r.samples,
                    "max_residual": r.max_residual,
                    "tolerance": r.tolerance,
                    "passed": r.passed,
                    "report_only": r.report_only,
                }
                for r in self.results
            ],
        }


def default_regularizers(dimension: int = DEFAULT_DIMENSION) -> list[Regularizer]:
    """One instance of every family, with p* and q* for the parametric ones."""
    return [
        NegEntropy(dimension),
        LogBarrier(dimension),
        SquaredLp(dimension, p=p_star(dimension)),
        SquaredLp(dimension, p=2.0),
        TsallisEntropy(dimension, q=q_star(dimension)),
    ]


def describe(reg: Regularizer) -> str:
    if isinstance(reg, SquaredLp):
        return f"squared_lp(p={reg.p:.4g},d={reg.dimension})"
    if isinstance(reg, TsallisEntropy):
        return f"tsallis(q={reg.q:.4g},d={reg.dimension})"
    return f"{reg.kind.value}(d={reg.dimension})"


def _resized(reg: Regularizer, dimension: int) -> Optional[Regularizer]:
    """Same family and hyperparameters over `dimension` actions; None for combinations."""
    if isinstance(reg, Combination):
        return None
    return replace(reg, dimension=dimension)


def _simplex_pairs(rng: np.random.Generator, d: int, count: int, concentration: float = 1.0):
    return rng.dirichlet(np.full(d, concentration), size=count), rng.dirichlet(np.full(d, concentration), size=count)


class _Context:
    """Shared state of one verification run: RNG, sample counts and cached self-play runs."""

    def __init__(self, samples: int, seed: int):
        self.samples = samples
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.rounds = max(16, min(256, samples // 40))
        self._runs: dict[int, tuple[Trajectory, list[SafeguardedLearner]]] = {}

    @property
    def light_samples(self) -> int:
        return max(10, min(self.samples, 1000))

    def self_play_run(self, reg: Regularizer) -> tuple[Trajectory, list[SafeguardedLearner]]:
        """Two safeguarded COFTRL learners with default parameters on a random general-sum game."""
        key = id(reg)
        if key not in self._runs:
            d = reg.dimension
            game = make_game(GameSpec(GameType.RANDOM_GENERAL_SUM, players=2, actions=d), seed=self.seed)
            learners = [
                SafeguardedLearner(CoftrlLearner.with_defaults(reg, n=2), 2, game.smoothness, self.rounds)
                for _ in range(2)
            ]
            self._runs[key] = (self_play(game, learners, self.rounds, seed=self.seed), learners)
        return self._runs[key]


def _check(report: VerificationReport, suite: str, name: str, subject: str, samples: int,
           tolerance: float, compute: Callable[[], float], report_only: bool = False) -> None:
    try:
        residual = float(compute())
        message = ""
    except (ValueError, RuntimeError) as e:
        residual, message = math.inf, f"{type(e).__name__}: {e}"
    result = PropertyResult(suite, name, subject, samples, residual, tolerance, report_only, message)
    (logger.info if result.passed or report_only else logger.warning)(result.line())
    report.results.append(result)


# Regularizers ---------------------------------------------------------------

def _il_residual(reg: Regularizer, x_new: np.ndarray, x_ref: np.ndarray, gamma: float) -> float:
    worst = -math.inf
    for a, b in zip(x_new, x_ref):
        gap = (reg.value(a) - reg.value(b)) ** 2 - gamma * reg.bregman(a, b)
        worst = max(worst, gap)
    return worst


def _local_pairs(reg: Regularizer, ctx: _Context) -> tuple[np.ndarray, np.ndarray]:
    """Successive COFTRL iterates whose lifted points satisfy the locality condition."""
    trajectory, learners = ctx.self_play_run(reg)
    lifted = LiftedRegularizer(reg, learners[0].inner.alpha)
    eta = learners[0].inner.eta
    new, ref = [], []
    for i in range(trajectory.player_count):
        x, lam = trajectory.actions[i], trajectory.learning_rates[i]
        for t in range(1, trajectory.horizon):
            y_ref, y_new = (lam[t - 1] / eta) * x[t - 1], (lam[t] / eta) * x[t]
            if lifted.bregman(y_new, y_ref) + lifted.bregman(y_ref, y_new) <= 1.0:
                new.append(x[t])
                ref.append(x[t - 1])
    return np.array(new), np.array(ref)


def _regularizer_suite(report: VerificationReport, regs: Sequence[Regularizer], ctx: _Context) -> None:
    suite = "regularizers"
    for reg in regs:
        subject, d = describe(reg), reg.dimension
        c = reg.constants()

        if c.is_local:
            def local_il():
                new, ref = _local_pairs(reg, ctx)
                return _il_residual(reg, new, ref, c.gamma) if len(new) else -math.inf
            _check(report, suite, "local_intrinsic_lipschitz", subject, 2 * (ctx.rounds - 1), 1e-9, local_il)
        else:
            x_new, x_ref = _simplex_pairs(ctx.rng, d, ctx.samples)
            _check(report, suite, "intrinsic_lipschitz", subject, ctx.samples, 1e-9,
                   lambda: _il_residual(reg, x_new, x_ref, c.gamma))

        x_new, x_ref = _simplex_pairs(ctx.rng, d, ctx.samples)

        def strong_convexity():
            return max(
                c.mu * float(np.sum(np.abs(a - b))) ** 2 - reg.bregman(a, b) - reg.bregman(b, a)
                for a, b in zip(x_new, x_ref)
            )
        _check(report, suite, "strong_convexity", subject, ctx.samples, 1e-9, strong_convexity)

        interior = ctx.rng.dirichlet(np.full(d, 5.0), size=ctx.light_samples)

        def finite_differences():
            worst, h = 0.0, 1e-6
            for x in interior:
                grad = reg.gradient(x)
                for k in range(d):
                    step = np.zeros(d)
                    step[k] = h
                    fd = (reg._value(x + step) - reg._value(x - step)) / (2 * h)
                    worst = max(worst, abs(fd - grad[k]) / max(1.0, abs(grad[k])))
            return worst
        _check(report, suite, "gradient_finite_difference", subject, ctx.light_samples, 1e-6, finite_differences)

        if isinstance(reg, SquaredLp) and reg.p == 2.0:
            # Lipschitz constant 1 w.r.t. l1 on the simplex, so gamma = 2 / mu.
            _check(report, suite, "lipschitz_implies_il", subject, ctx.samples, 1e-9,
                   lambda: _il_residual(reg, x_new, x_ref, 2.0 / c.mu))


# Solvers --------------------------------------------------------------------

def _lifted_pairs(rng: np.random.Generator, d: int, count: int, low: float, high: float, ratio: Optional[tuple] = None):
    lam = rng.uniform(low, high, size=count)
    lam_new = lam * rng.uniform(*ratio, size=count) if ratio else rng.uniform(low, high, size=count)
    x_ref = rng.dirichlet(np.full(d, 2.0), size=count)
    x_new = rng.dirichlet(np.full(d, 2.0), size=count)
    return lam_new, x_new, lam, x_ref


def _grid_oracle_residual(reg: Regularizer, rng: np.random.Generator, draws: int) -> float:
    d = reg.dimension
    if d == 2:
        t = np.linspace(0.0, 1.0, 10001)
        grid = np.column_stack([t, 1.0 - t])
    else:
        steps = 150
        i, j = np.meshgrid(np.arange(steps + 1), np.arange(steps + 1), indexing="ij")
        mask = i + j <= steps
        grid = np.column_stack([i[mask], j[mask], steps - i[mask] - j[mask]]) / steps
    with np.errstate(divide="ignore", invalid="ignore"):
        psi = np.array([reg._value(x) for x in grid])
    worst = -math.inf
    for _ in range(draws):
        g = rng.uniform(-5.0, 5.0, size=d)
        best_grid = float(np.max(grid @ g - psi))
        worst = max(worst, best_grid - ftrl_argmax(reg, g).objective)
    return worst


def _landscape_checks(reg2: Regularizer) -> tuple[float, float]:
    """(worst |lambda - 1| on the nonnegative quadrant, worst increase along decreasing paths)."""
    eta, alpha = 1.0, 4.0
    concave = alpha > reg2.constants().gamma
    solve = lambda r: lr_control_solve(reg2, r, eta, alpha, check_concavity=concave).learning_rate
    axis = landscape_axis(-10.0, 10.0, 21)
    quadrant = max(abs(solve((a, b)) - 1.0) for a in axis if a >= 0 for b in axis if b >= 0)
    increase = 0.0
    diagonal = [solve((a, a)) for a in axis[::-1]]
    increase = max(increase, max(np.diff(diagonal), default=0.0))
    for other in axis:
        path = [solve((a, other)) for a in axis[::-1] if a >= other]
        increase = max(increase, max(np.diff(path), default=0.0))
    return quadrant, increase


def _solver_suite(report: VerificationReport, regs: Sequence[Regularizer], ctx: _Context) -> None:
    suite = "solvers"
    for reg in regs:
        subject, d = describe(reg), reg.dimension
        c = reg.constants()
        eta, alpha = default_params(reg, d, 2, 1.0)
        local = c.is_local

        def strong_concavity():
            worst = -math.inf
            for _ in range(ctx.samples):
                r = ctx.rng.uniform(-10.0, 10.0, size=d)
                l1, l2 = ctx.rng.uniform(1e-6 * eta, eta, size=2)
                mid = lr_objective(reg, r, alpha, 0.5 * (l1 + l2))
                ends = 0.5 * (lr_objective(reg, r, alpha, l1) + lr_objective(reg, r, alpha, l2))
                worst = max(worst, ends + (alpha - c.gamma) / 8.0 * (l2 - l1) ** 2 - mid)
            return worst
        _check(report, suite, "strong_concavity", subject, ctx.samples, 1e-8, strong_concavity, report_only=local)

        def envelope_derivative():
            worst = 0.0
            for _ in range(ctx.light_samples):
                r = ctx.rng.uniform(-10.0, 10.0, size=d)
                lam = ctx.rng.uniform(0.05 * eta, 0.95 * eta)
                h = 1e-5 * lam
                fd = (lr_objective(reg, r, alpha, lam + h) - lr_objective(reg, r, alpha, lam - h)) / (2 * h)
                analytic = lr_derivative(reg, r, alpha, lam)
                worst = max(worst, abs(fd - analytic) / max(1.0, abs(analytic)))
            return worst
        _check(report, suite, "envelope_derivative", subject, ctx.light_samples, 1e-5, envelope_derivative)

        lifted = LiftedRegularizer(reg, alpha)

        def bregman_identity():
            worst = 0.0
            for lam_new, x_new, lam, x_ref in zip(*_lifted_pairs(ctx.rng, d, ctx.samples, 0.05, 1.0)):
                rho = lam_new / lam
                expected = (alpha * neg_log_bregman(lam_new, lam) + rho * reg.bregman(x_new, x_ref)
                            + (1.0 - rho) * (reg.value(x_new) - reg.value(x_ref)))
                actual = lifted.bregman(lam_new * x_new, lam * x_ref)
                worst = max(worst, abs(actual - expected) / max(1.0, abs(expected)))
            return worst
        _check(report, suite, "bregman_identity", subject, ctx.samples, 1e-9, bregman_identity)

        def joint_lower_bound():
            worst = -math.inf
            for lam_new, x_new, lam, x_ref in zip(*_lifted_pairs(ctx.rng, d, ctx.samples, 0.05, 1.0)):
                y_new, y_ref = lam_new * x_new, lam * x_ref
                joint = lifted.bregman(y_new, y_ref) + lifted.bregman(y_ref, y_new)
                floor = (alpha - c.gamma) * (lam_new / lam + lam / lam_new - 2.0)
                worst = max(worst, floor - joint)
            return worst
        _check(report, suite, "joint_divergence_lower_bound", subject, ctx.samples, 1e-9,
               joint_lower_bound, report_only=local)

        def curvature_transfer():
            a = alpha - 4.0 * c.gamma
            worst = -math.inf
            pairs = _lifted_pairs(ctx.rng, d, ctx.samples, 0.1, 0.6, ratio=(0.5, 1.5))
            for lam_new, x_new, lam, x_ref in zip(*pairs):
                divergence = lifted.bregman(lam_new * x_new, lam * x_ref)
                floor = (c.gamma + a) * neg_log_bregman(lam_new, lam) + 0.25 * reg.bregman(x_new, x_ref)
                worst = max(worst, floor - divergence)
            return worst
        _check(report, suite, "curvature_transfer", subject, ctx.samples, 1e-9, curvature_transfer, report_only=local)

        for small in (2, 3):
            reg_small = _resized(reg, small)
            if reg_small is not None:
                draws = max(5, min(ctx.samples, 200))
                _check(report, suite, f"argmax_grid_oracle_d{small}", describe(reg_small), draws, 1e-9,
                       lambda: _grid_oracle_residual(reg_small, ctx.rng, draws))

        def formulation_equivalence():
            worst = 0.0
            for _ in range(ctx.light_samples):
                r = ctx.rng.uniform(-20.0, 5.0, size=d)
                y = lifted_oftrl_step(reg, r, eta, alpha)
                worst = max(worst, lifted_kkt_residual(reg, r, eta, alpha, y))
            return worst
        _check(report, suite, "formulation_equivalence", subject, ctx.light_samples, 1e-8, formulation_equivalence)

        reg2 = _resized(reg, 2)
        if reg2 is not None:
            uncertified = not 4.0 > reg2.constants().gamma
            checks = {}

            def landscape(part: int) -> float:
                if "values" not in checks:
                    checks["values"] = _landscape_checks(reg2)
                return checks["values"][part]
            _check(report, suite, "landscape_nonnegative_quadrant", describe(reg2), 21 * 21, 1e-8,
                   lambda: landscape(0))
            _check(report, suite, "landscape_monotone", describe(reg2), 2 * 21 * 21, 1e-8,
                   lambda: landscape(1), report_only=uncertified)


# Learners -------------------------------------------------------------------

def _learner_suite(report: VerificationReport, regs: Sequence[Regularizer], ctx: _Context) -> None:
    suite = "learners"
    for reg in regs:
        subject, d = describe(reg), reg.dimension
        run = lambda: ctx.self_play_run(reg)

        _check(report, suite, "multiplicative_stability", subject, ctx.rounds, 0.0,
               lambda: sum(stability_violations(run()[0], i) for i in range(2)))

        def orthogonality():
            trajectory = run()[0]
            worst = 0.0
            for i in range(2):
                nu, x = trajectory.utilities[i], trajectory.actions[i]
                u = nu - np.einsum("tk,tk->t", nu, x)[:, None]
                worst = max(worst, float(np.max(np.abs(np.einsum("tk,tk->t", u, x)))))
            return worst
        _check(report, suite, "orthogonality", subject, ctx.rounds, 1e-10, orthogonality)

        def regret_regime():
            trajectory, learners = run()
            eta = learners[0].inner.eta
            worst = 0.0
            for i in range(2):
                signals = regret_signals(trajectory, i)
                nonnegative = np.max(signals, axis=1) >= 0.0
                gaps = np.abs(trajectory.learning_rates[i][nonnegative] - eta)
                worst = max(worst, float(np.max(gaps, initial=0.0)))
            return worst
        _check(report, suite, "regret_regime_at_cap", subject, ctx.rounds, 0.0, regret_regime)

        def scale_invariance():
            eta, alpha = default_params(reg, d, 2, 1.0)
            worst = 0.0
            for _ in range(max(5, ctx.light_samples // 10)):
                r = ctx.rng.uniform(-20.0, 5.0, size=d)
                lam = ctx.rng.uniform(0.1 * eta, eta)
                base = ftrl_argmax(reg, lam * r).x
                rates = []
                for shift in (-3.0, -1.0, 0.0, 1.0, 3.0):
                    shifted = ftrl_argmax(reg, lam * (r + shift)).x
                    worst = max(worst, float(np.max(np.abs(shifted - base))))
                    rates.append(lr_control_solve(reg, r + shift, eta, alpha).learning_rate)
                worst = max(worst, -float(np.min(np.diff(rates))))
            return worst
        _check(report, suite, "scale_invariance", subject, ctx.light_samples, 1e-9, scale_invariance)

        _check(report, suite, "safeguard_quiet_in_self_play", subject, ctx.rounds, 0.0,
               lambda: float(sum(1 for learner in run()[1] if learner.switched)))

        if isinstance(reg, NegEntropy):
            def omwu_equivalence():
                trajectory, learners = run()
                eta = learners[0].inner.eta
                capped = np.all([trajectory.learning_rates[i] == eta for i in range(2)], axis=0)
                prefix = int(np.argmin(capped)) if not np.all(capped) else trajectory.horizon
                if prefix == 0:
                    return 0.0
                omwu = self_play(trajectory.game, [OmwuLearner(d, eta) for _ in range(2)], prefix)
                return max(
                    float(np.max(np.abs(omwu.actions[i] - trajectory.actions[i][:prefix]))) for i in range(2)
                )
            _check(report, suite, "omwu_equivalence", subject, ctx.rounds, 1e-12, omwu_equivalence)

            def adversarial_switch():
                horizon = 4096
                inner = CoftrlLearner.with_defaults(NegEntropy(2), n=1)
                learner = SafeguardedLearner(inner, 1, 1.0, horizon)
                trajectory = adversarial_play(learner, alternating_adversary(2), horizon)
                if learner.switch_round is None:
                    return math.inf
                return external_regret(trajectory, 0) / math.sqrt(horizon * math.log(2)) - 3.0
            _check(report, suite, "adversarial_safeguard", "neg_entropy(d=2)", 4096, 0.0, adversarial_switch)


# Harness --------------------------------------------------------------------

def _harness_suite(report: VerificationReport, regs: Sequence[Regularizer], ctx: _Context) -> None:
    suite = "harness"
    for reg in regs:
        subject = describe(reg)
        run = lambda: ctx.self_play_run(reg)[0]

        def nonnegative_identity():
            trajectory = run()
            return max(
                abs(max(0.0, external_regret(trajectory, i)) - _lifted_nonnegative_regret(trajectory, i))
                for i in range(trajectory.player_count)
            )
        _check(report, suite, "nonnegative_regret_identity", subject, ctx.rounds, 1e-8, nonnegative_identity)

        def cce_bound():
            trajectory = run()
            best = max(max(0.0, external_regret(trajectory, i)) for i in range(trajectory.player_count))
            return cce_gap(trajectory) - best / trajectory.horizon
        _check(report, suite, "cce_gap_bound", subject, ctx.rounds, 1e-9, cce_bound)

        def path_bound():
            trajectory = run()
            return path_length(trajectory) - path_length_bound(trajectory.bound_params, trajectory.horizon)
        _check(report, suite, "path_length_bound", subject, ctx.rounds, 1e-6, path_bound)

        def regret_bounds():
            trajectory = run()
            return max(
                max(0.0, external_regret(trajectory, i)) - regret_bound(p, trajectory.horizon)
                for i, p in enumerate(trajectory.bound_params)
            )
        _check(report, suite, "regret_bound", subject, ctx.rounds, 1e-9, regret_bounds)

        def rvu():
            trajectory = run()
            return max(
                max(0.0, external_regret(trajectory, i)) - rvu_bound(trajectory, i, p)
                for i, p in enumerate(trajectory.bound_params)
            )
        _check(report, suite, "nonnegative_rvu", subject, ctx.rounds, 1e-9, rvu)

        def lifted_trajectory():
            trajectory = run()
            p = trajectory.bound_params[0]
            worst = 0.0
            for i in range(trajectory.player_count):
                signals = regret_signals(trajectory, i)
                for t in range(trajectory.horizon):
                    y = (trajectory.learning_rates[i][t] / p.eta) * trajectory.actions[i][t]
                    worst = max(worst, lifted_kkt_residual(reg, signals[t], p.eta, p.alpha, y))
            return worst
        _check(report, suite, "formulation_equivalence_trajectory", subject, ctx.rounds, 1e-8, lifted_trajectory)


_SUITE_RUNNERS = {
    "regularizers": _regularizer_suite,
    "solvers": _solver_suite,
    "learners": _learner_suite,
    "harness": _harness_suite,
}


def run_verify(
    suite: str,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    regularizers: Optional[Sequence[Regularizer]] = None,
) -> VerificationReport:
    """
    Run one property suite (or "all") with fixed seeds.

    Args:
        suite: regularizers, solvers, learners, harness or all
        samples: Random draws per sampled property
        seed: Seed of every random draw and self-play game
        regularizers: Subjects; defaults to every family at d = 8

    Returns:
        VerificationReport listing each property, its sample count and worst residual

    Raises:
        ValueError: If the suite name is unknown
    """
    names = SUITES if suite == "all" else (suite,)
    for name in names:
        if name not in _SUITE_RUNNERS:
            raise ValueError(f"Unknown suite: {suite}. Valid suites: {', '.join(SUITES)}, all")
    regs = list(regularizers) if regularizers is not None else default_regularizers()
    ctx = _Context(max(1, samples), seed)
    report = VerificationReport()
    for name in names:
        logger.info("Running %s suite on %d regularizers", name, len(regs))
        _SUITE_RUNNERS[name](report, regs, ctx)
    return report
