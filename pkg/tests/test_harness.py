import math

import numpy as np
import pytest

from src.errors import BoundedUtilityError, ConvergenceError, ExperimentError, InvalidInputError
from src.models.trajectory import RunKind
from src.services.harness import (
    AdversaryKind,
    adversarial_play,
    alternating_adversary,
    make_adversary,
    random_adversary,
    self_play,
    zero_adversary,
)
from src.services.learners import (
    CoftrlLearner,
    Learner,
    MwuLearner,
    OmwuLearner,
    SafeguardedLearner,
    mwu_learning_rate,
)
from src.services.metrics import external_regret, nonnegative_regret, regret_bound, stability_violations
from src.services.regularizers import LogBarrier, NegEntropy, SquaredLp, TsallisEntropy, q_star
from src.services.solvers import lifted_kkt_residual


class _FailingLearner(Learner):
    name = "failing"

    def _choose(self, r):
        raise ConvergenceError("stub solver gave up", residual=1.0)


def _cautious(reg, n=2):
    return CoftrlLearner.with_defaults(reg, n=n)


def test_self_play_is_deterministic(random_game):
    first = self_play(random_game, [_cautious(NegEntropy(3)) for _ in range(2)], 40)
    second = self_play(random_game, [_cautious(NegEntropy(3)) for _ in range(2)], 40)
    for i in range(2):
        np.testing.assert_array_equal(first.actions[i], second.actions[i])
        np.testing.assert_array_equal(first.learning_rates[i], second.learning_rates[i])


def test_self_play_records_the_run(random_game):
    traj = self_play(random_game, [_cautious(NegEntropy(3)), OmwuLearner(3, 0.05)], 20, seed=4)
    assert traj.kind is RunKind.SELF_PLAY
    assert traj.horizon == 20
    assert traj.seed == 4
    assert traj.algorithms == ("coftrl", "omwu")
    assert traj.bound_params[0] is not None and traj.bound_params[1] is None
    assert np.all(np.isnan(traj.learning_rates[1]))
    assert np.all(np.abs(traj.utilities[0]) <= 1.0)


def test_self_play_needs_one_learner_per_player(matching_pennies):
    with pytest.raises(InvalidInputError):
        self_play(matching_pennies, [_cautious(NegEntropy(2))], 10)
    with pytest.raises(InvalidInputError):
        self_play(matching_pennies, [_cautious(NegEntropy(3)), _cautious(NegEntropy(3))], 10)
    with pytest.raises(InvalidInputError):
        self_play(matching_pennies, [_cautious(NegEntropy(2)), _cautious(NegEntropy(2))], 0)


def test_solver_failures_are_tagged_with_round_and_player(matching_pennies):
    learners = [_FailingLearner(NegEntropy(2), 0.1), _FailingLearner(NegEntropy(2), 0.1)]
    with pytest.raises(ExperimentError) as excinfo:
        self_play(matching_pennies, learners, 5)
    assert excinfo.value.round_index == 1
    assert excinfo.value.player == 0
    assert isinstance(excinfo.value.__cause__, ConvergenceError)


def test_zero_adversary_never_switches():
    guarded = SafeguardedLearner(_cautious(NegEntropy(3), n=1), 1, 1.0, 64)
    traj = adversarial_play(guarded, zero_adversary(3), 64)
    assert traj.kind is RunKind.ADVERSARIAL
    assert traj.game is None
    assert traj.switch_rounds == (None,)
    assert external_regret(traj, 0) == 0.0
    np.testing.assert_allclose(traj.actions[0], np.full((64, 3), 1 / 3))


def test_adversary_leaving_the_box_is_rejected():
    learner = _cautious(NegEntropy(2), n=1)
    with pytest.raises(BoundedUtilityError):
        adversarial_play(learner, lambda t, x: np.full(2, 2.0), 10)


def test_random_adversary_is_seeded():
    a, b = random_adversary(4, seed=9), random_adversary(4, seed=9)
    for t in range(1, 5):
        np.testing.assert_array_equal(a(t, None), b(t, None))


def test_make_adversary():
    np.testing.assert_array_equal(make_adversary("alternating", 3)(1, None), [1.0, -1.0, 1.0])
    np.testing.assert_array_equal(make_adversary(AdversaryKind.ALTERNATING, 3)(2, None), [-1.0, 1.0, -1.0])
    with pytest.raises(ValueError):
        make_adversary("nasty", 3)


@pytest.mark.parametrize("reg", [NegEntropy(3), TsallisEntropy(3, q=0.5), SquaredLp(3, p=2.0), LogBarrier(3)],
                         ids=lambda r: r.kind.value)
def test_every_iterate_solves_the_lifted_problem(reg):
    learner = _cautious(reg, n=1)
    adversary = random_adversary(3, seed=5)
    for t in range(1, 101):
        r = learner.signal()
        result = learner.step()
        y = (result.learning_rate / learner.eta) * result.x
        assert lifted_kkt_residual(reg, r, learner.eta, learner.alpha, y) <= 1e-8
        learner.observe(adversary(t, result.x))


def _assert_round_invariants(traj, learners):
    for i, learner in enumerate(learners):
        rates = traj.learning_rates[i]
        assert np.all(rates > 0.0) and np.all(rates <= learner.eta)
        np.testing.assert_allclose(traj.actions[i].sum(axis=1), 1.0, atol=1e-12)
        assert np.all(traj.actions[i] >= 0.0)
        assert stability_violations(traj, i) == 0
        assert external_regret(traj, i) <= regret_bound(traj.bound_params[i], traj.horizon)
        assert nonnegative_regret(traj, i) == pytest.approx(max(0.0, external_regret(traj, i)), abs=1e-8)


@pytest.mark.parametrize("regs", [
    (TsallisEntropy(3, q=0.5), SquaredLp(3, p=2.0)),
    (NegEntropy(3), TsallisEntropy(3, q=q_star(3))),
], ids=["tsallis-vs-lp", "entropy-vs-tsallis"])
def test_mixed_regularizers_in_self_play(random_game, regs):
    learners = [_cautious(reg) for reg in regs]
    traj = self_play(random_game, learners, 200)
    _assert_round_invariants(traj, learners)


def test_log_barrier_self_play(random_game):
    learners = [_cautious(LogBarrier(3)) for _ in range(2)]
    traj = self_play(random_game, learners, 200)
    assert traj.algorithms == ("coftrl", "coftrl")
    _assert_round_invariants(traj, learners)
    assert np.all(np.concatenate(traj.actions) > 0.0)


@pytest.mark.parametrize("d, adversary", [
    (2, alternating_adversary(2)),
    (5, random_adversary(5, seed=11)),
], ids=["alternating", "random"])
def test_mwu_regret_on_a_fixed_sequence(d, adversary):
    horizon = 4096
    traj = adversarial_play(MwuLearner(d, mwu_learning_rate(d, horizon)), adversary, horizon)
    assert traj.bound_params == (None,)
    assert external_regret(traj, 0) / math.sqrt(horizon) <= 2.0 * math.sqrt(math.log(d))
