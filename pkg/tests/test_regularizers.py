import math

import numpy as np
import pytest

from src.errors import DomainError, InvalidInputError, InvalidParameterError
from src.services.regularizers import (
    AVAILABLE_KINDS,
    Combination,
    LogBarrier,
    NegEntropy,
    RegularizerKind,
    SquaredLp,
    TsallisEntropy,
    combine,
    make_regularizer,
    p_star,
    q_star,
)

ALL_KINDS = [
    NegEntropy(4),
    LogBarrier(4),
    SquaredLp(4, p=2.0),
    SquaredLp(4, p=1.5),
    TsallisEntropy(4, q=0.5),
    TsallisEntropy(4, q=0.3),
    combine([(1.0, NegEntropy(4)), (0.5, TsallisEntropy(4, q=0.5))]),
]


def test_every_kind_is_registered():
    assert set(AVAILABLE_KINDS) == set(RegularizerKind)


def test_values_at_known_points():
    assert NegEntropy(4).value(np.full(4, 0.25)) == pytest.approx(-math.log(4))
    assert NegEntropy(3).value([1.0, 0.0, 0.0]) == 0.0
    assert TsallisEntropy(4, q=0.5).value(np.full(4, 0.25)) == pytest.approx(-2.0)
    assert SquaredLp(2, p=2.0).value([1.0, 0.0]) == pytest.approx(0.5)


def test_gradients_at_uniform():
    np.testing.assert_allclose(NegEntropy(2).gradient([0.5, 0.5]), [1 - math.log(2)] * 2)
    np.testing.assert_allclose(LogBarrier(2).gradient([0.5, 0.5]), [-2.0, -2.0])


@pytest.mark.parametrize("reg", [NegEntropy(2), LogBarrier(2), TsallisEntropy(2, q=0.5)])
def test_singular_gradients_raise_at_the_boundary(reg):
    with pytest.raises(DomainError):
        reg.gradient([1.0, 0.0])


def test_squared_lp_gradient_is_defined_at_vertices():
    np.testing.assert_allclose(SquaredLp(2, p=2.0).gradient([1.0, 0.0]), [1.0, 0.0])


@pytest.mark.parametrize("x", [[0.5, 0.6], [-0.1, 1.1], [0.5, 0.5, 0.0]])
def test_off_simplex_input_is_rejected(x):
    with pytest.raises(InvalidInputError):
        NegEntropy(2).value(x)


@pytest.mark.parametrize("reg", ALL_KINDS, ids=lambda r: r.kind.value)
def test_bregman_of_a_point_with_itself_is_zero(reg, rng):
    x = rng.dirichlet(np.ones(4))
    assert reg.bregman(x, x) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("reg", ALL_KINDS, ids=lambda r: r.kind.value)
def test_bregman_is_nonnegative(reg, rng):
    for _ in range(50):
        a, b = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
        assert reg.bregman(a, b) >= -1e-12


def test_bregman_known_values():
    assert NegEntropy(2).bregman([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))
    assert SquaredLp(2, p=2.0).bregman([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)


def test_log_bregman_needs_an_interior_reference():
    with pytest.raises(DomainError):
        LogBarrier(2).bregman([0.5, 0.5], [1.0, 0.0])


def test_constants():
    c = NegEntropy(16).constants()
    assert c.gamma == pytest.approx(3 * math.log(16) ** 2)
    assert c.mu == 1.0
    assert not c.is_local

    c = TsallisEntropy(16, q=0.5).constants()
    assert (c.gamma, c.mu, c.r_max) == (pytest.approx(16.0), 0.5, 0.0)

    c = TsallisEntropy(16, q=0.25).constants()
    assert c.gamma == pytest.approx(4 * 16 ** 0.75 / 0.75 ** 2)

    c = SquaredLp(10, p=2.0).constants()
    assert (c.gamma, c.mu) == (pytest.approx(2.0), pytest.approx(0.1))

    c = LogBarrier(5).constants(horizon=100)
    assert c.is_local
    assert c.gamma == 90.0
    assert c.r_max == pytest.approx(5 * math.log(500))


def test_hyperparameter_shortcuts():
    assert p_star(2) == 2.0
    assert p_star(100) == pytest.approx(1 + 1 / math.log(100))
    assert q_star(2) == 0.5
    assert q_star(100) == pytest.approx(1 - 1 / math.log(100))


@pytest.mark.parametrize("kind,kwargs", [
    ("squared_lp", {"p": 2.5}),
    ("squared_lp", {"p": 1.0}),
    ("tsallis", {"q": 1.0}),
    ("tsallis", {"q": 0.0}),
    ("entropy", {}),
])
def test_out_of_range_hyperparameters(kind, kwargs):
    with pytest.raises(InvalidParameterError):
        make_regularizer(kind, 4, **kwargs)


def test_make_regularizer_defaults_to_optimal_exponents():
    assert make_regularizer("squared_lp", 100).p == pytest.approx(p_star(100))
    assert make_regularizer("tsallis", 100).q == pytest.approx(q_star(100))


def test_dimension_below_two_is_rejected():
    with pytest.raises(InvalidInputError):
        NegEntropy(1)


def test_singleton_combination_matches_its_part(rng):
    single, plain = combine([(1.0, NegEntropy(3))]), NegEntropy(3)
    for _ in range(20):
        a, b = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
        assert single.value(a) == pytest.approx(plain.value(a), abs=1e-15)
        np.testing.assert_allclose(single.gradient(a), plain.gradient(a))
        assert single.bregman(a, b) == pytest.approx(plain.bregman(a, b), abs=1e-15)
    assert single.constants() == plain.constants()


def test_scaled_combination_scales_constants_and_values(rng):
    d = 5
    doubled = combine([(2.0, NegEntropy(d))])
    c = doubled.constants()
    assert c.gamma == pytest.approx(2 * 3 * math.log(d) ** 2)
    assert c.mu == pytest.approx(2.0)
    x = rng.dirichlet(np.ones(d))
    assert doubled.value(x) == pytest.approx(2 * NegEntropy(d).value(x))


def test_combination_bregman_is_additive(rng):
    parts = [(1.0, NegEntropy(4)), (1.0, SquaredLp(4, p=2.0))]
    mix = combine(parts)
    for _ in range(20):
        a, b = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
        total = sum(w * reg.bregman(a, b) for w, reg in parts)
        assert abs(mix.bregman(a, b) - total) <= 1e-12


def test_combination_flags():
    mix = combine([(1.0, LogBarrier(3)), (2.0, SquaredLp(3, p=2.0))])
    assert isinstance(mix, Combination)
    assert mix.is_local
    assert mix.is_separable
    assert mix.singular_at_boundary
    assert not combine([(1.0, SquaredLp(3, p=1.5))]).is_separable


def test_combination_rejects_mismatched_parts():
    with pytest.raises(InvalidInputError):
        combine([(1.0, NegEntropy(3)), (1.0, NegEntropy(4))])
    with pytest.raises(InvalidParameterError):
        combine([(0.0, NegEntropy(3))])
    with pytest.raises(InvalidInputError):
        combine([])


@pytest.mark.parametrize("reg", [NegEntropy(6), TsallisEntropy(6, q=0.5), TsallisEntropy(6, q=q_star(6)),
                                 SquaredLp(6, p=2.0), SquaredLp(6, p=1.4)],
                         ids=lambda r: r.kind.value)
def test_intrinsic_lipschitz_inequality(reg, rng):
    gamma = reg.constants().gamma
    for _ in range(500):
        a, b = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(6))
        assert (reg.value(a) - reg.value(b)) ** 2 <= gamma * reg.bregman(a, b) + 1e-9


@pytest.mark.parametrize("reg", [NegEntropy(6), LogBarrier(6), TsallisEntropy(6, q=0.5), SquaredLp(6, p=1.4)],
                         ids=lambda r: r.kind.value)
def test_strong_convexity_inequality(reg, rng):
    mu = reg.constants().mu
    for _ in range(500):
        a, b = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(6))
        joint = reg.bregman(a, b) + reg.bregman(b, a)
        assert joint >= mu * float(np.sum(np.abs(a - b))) ** 2 - 1e-9


def test_corrupted_constants_are_reported_back():
    reg = NegEntropy(8).with_constants(gamma=0.01)
    assert reg.constants().gamma == 0.01
    assert reg.constants().mu == 1.0
    assert NegEntropy(8).constants().gamma != 0.01
