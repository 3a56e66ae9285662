import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from tiltgibbs import (InvalidParameterError, NonIntegrableError, OutOfDomainError, RBeta,
                       RInfinity, classify, epsilon_of, from_functions, make_builtin, normalize,
                       psi)
from tiltgibbs.model import growth_schedule

import oracles

FAMILIES = [("weibull", {"k": 2}), ("exp_exp", {}), ("power", {"beta": 1})]


@pytest.fixture(scope="module")
def models():
    return {name: make_builtin(name, **kw) for name, kw in FAMILIES}


# -- construction -------------------------------------------------------------------

def test_weibull_h_matches_closed_form():
    model = make_builtin("weibull", k=2)
    x = np.linspace(0.8, 20.0, 50)
    np.testing.assert_allclose(model.h(x), 2 * x - 1 / x, rtol=1e-14)


def test_power_h_is_identity():
    model = make_builtin("power", beta=1)
    x = np.linspace(0.1, 10, 20)
    np.testing.assert_allclose(model.h(x), x)
    assert psi(model, 3.7) == pytest.approx(3.7, rel=1e-12)


@pytest.mark.parametrize("family, params", [
    ("weibull", {"k": 1.0}), ("weibull", {"k": 0.5}), ("power", {"beta": 0.0}),
    ("power", {"beta": -1.0}), ("gamma", {}), ("weibull", {"k": 2, "beta": 1}),
])
def test_invalid_parameters(family, params):
    with pytest.raises(InvalidParameterError):
        make_builtin(family, **params)


def test_model_is_immutable(models):
    with pytest.raises(dataclasses.FrozenInstanceError):
        models["weibull"].log_c = 0.0


@pytest.mark.parametrize("name, expected", [
    ("weibull", RBeta(1.0)), ("exp_exp", RInfinity()), ("power", RBeta(1.0)),
])
def test_class_hint(models, name, expected):
    assert models[name].class_hint == expected


# -- normalization --------------------------------------------------------------------

@pytest.mark.parametrize("k", [1.5, 2.0, 3.0, 5.0])
def test_weibull_normalizer(k):
    assert make_builtin("weibull", k=k).log_c == pytest.approx(oracles.weibull_log_c(k), abs=1e-10)


@pytest.mark.parametrize("beta", [0.5, 1.0, 3.0])
def test_power_normalizer(beta):
    assert make_builtin("power", beta=beta).log_c == pytest.approx(oracles.power_log_c(beta),
                                                                   abs=1e-10)


def test_half_normal_normalizer():
    assert make_builtin("power", beta=1).log_c == pytest.approx(math.log(math.sqrt(2 / math.pi)),
                                                                abs=1e-12)


def test_exp_exp_normalizer(models):
    assert models["exp_exp"].log_c == pytest.approx(oracles.exp_exp_log_c(), abs=1e-10)


@pytest.mark.parametrize("name", [f for f, _ in FAMILIES])
def test_density_integrates_to_one(models, name):
    model = models[name]
    total, _ = integrate.quad(lambda x: float(model.pdf(x)), 0, np.inf, limit=200)
    assert total == pytest.approx(1.0, rel=1e-8)


@pytest.mark.parametrize("name", [f for f, _ in FAMILIES])
def test_normalize_is_idempotent(models, name):
    model = models[name]
    assert abs(normalize(model) - model.log_c) < 1e-10
    assert abs(model.normalized().log_c - model.log_c) < 1e-10


def test_linear_exponent_is_rejected():
    with pytest.raises(NonIntegrableError):
        from_functions(lambda x: 0.5 * x, RBeta(1.0), h=lambda x: 0.5 + 0 * x)


# -- psi ----------------------------------------------------------------------------------

def test_psi_weibull_closed_form(models):
    # root of 2x**2 - u x - 1 = 0
    x = psi(models["weibull"], 6.0)
    assert x == pytest.approx((6 + math.sqrt(44)) / 4, rel=1e-12)
    assert x == pytest.approx(3.15831, abs=1e-5)
    assert abs(models["weibull"].h(x) - 6.0) <= 1e-10 * 6.0


@pytest.mark.parametrize("u, expected", [(1.0, 1.0), (math.e, 2.0), (100.0, math.log(100) + 1)])
def test_psi_exp_exp(models, u, expected):
    assert psi(models["exp_exp"], u) == pytest.approx(expected, rel=1e-12)


def test_psi_below_range(models):
    with pytest.raises(OutOfDomainError):
        psi(models["weibull"], -1.0)
    with pytest.raises(OutOfDomainError):
        psi(models["exp_exp"], 0.1)  # h(0) = 1/e


def _u_strategy(model):
    h_lo = float(model.h(model.x_min)) if model.x_min > 0 else float(model.h(0.0))
    lo = math.log10(max(2 * h_lo, 1e-3))
    return st.floats(min_value=lo, max_value=6.0).map(lambda e: 10.0**e)


@pytest.mark.parametrize("name", [f for f, _ in FAMILIES])
def test_psi_round_trip(models, name):
    model = models[name]

    @settings(max_examples=60, deadline=None)
    @given(_u_strategy(model))
    def check(u):
        assert float(model.h(psi(model, u))) == pytest.approx(u, rel=1e-8)

    check()


@pytest.mark.parametrize("name", [f for f, _ in FAMILIES])
def test_psi_strictly_increasing(models, name):
    model = models[name]

    @settings(max_examples=60, deadline=None)
    @given(_u_strategy(model), st.floats(min_value=1e-6, max_value=1.0))
    def check(u, rel):
        assert psi(model, u * (1 + rel)) > psi(model, u)

    check()


# -- epsilon ------------------------------------------------------------------------------

def test_epsilon_weibull(models):
    assert epsilon_of(models["weibull"], 1.0) == pytest.approx(2.0)
    x = np.linspace(1, 50, 30)
    np.testing.assert_allclose(epsilon_of(models["weibull"], x), 2 / (2 * x**2 - 1))


def test_epsilon_exp_exp(models):
    # at t = h(x) = 1, i.e. x = 1
    assert epsilon_of(models["exp_exp"], 1.0) == pytest.approx(1.0)


def test_epsilon_power_is_zero(models):
    np.testing.assert_array_equal(epsilon_of(models["power"], np.linspace(1, 100, 9)), 0.0)


def test_epsilon_generic_formula_matches_closed_form(models):
    # a copy without the closed form falls back on x h'/h - beta
    generic = dataclasses.replace(models["weibull"], epsilon=None)
    x = np.logspace(0, 3, 13)
    np.testing.assert_allclose(epsilon_of(generic, x), epsilon_of(models["weibull"], x),
                               rtol=1e-9)
    generic = dataclasses.replace(models["exp_exp"], epsilon=None)
    x = np.array([1.0, 2.0, 3.0, 5.0])
    np.testing.assert_allclose(epsilon_of(generic, x), epsilon_of(models["exp_exp"], x),
                               rtol=1e-9)


def test_finite_difference_derivatives_for_user_models():
    k = 2.0
    model = from_functions(lambda x: x**k - (k - 1) * np.log(x), RBeta(k - 1),
                           x_min=(0.5) ** 0.5 + 1e-6)
    ref = make_builtin("weibull", k=k)
    x = np.array([1.0, 2.0, 5.0])
    np.testing.assert_allclose(model.h(x), ref.h(x), rtol=1e-8)
    np.testing.assert_allclose(model.h1(x), ref.h1(x), rtol=1e-5)
    assert model.log_c == pytest.approx(ref.log_c, abs=1e-8)


# -- classification -----------------------------------------------------------------------

@pytest.mark.parametrize("name, cls", [
    ("weibull", "RBeta(beta=1)"), ("exp_exp", "RInfinity"), ("power", "RBeta(beta=1)"),
])
def test_classify_builtins(models, name, cls):
    report = classify(models[name])
    assert report.regularity_class == cls
    assert report.all_passed, report.checks


def test_classify_power_has_zero_epsilon(models):
    report = classify(models["power"])
    np.testing.assert_array_equal(report.epsilon_values[:, 1], 0.0)


@pytest.mark.parametrize("k", [1.5, 2.0, 3.0])
def test_beta_estimate_weibull(k):
    report = classify(make_builtin("weibull", k=k))
    assert report.beta_estimate == pytest.approx(k - 1, abs=0.02)


def test_classify_requires_three_decades(models):
    with pytest.raises(InvalidParameterError):
        classify(models["weibull"], x_grid=np.linspace(1, 50, 20))


def test_classify_records_failures_instead_of_raising(models):
    # a constant perturbation never satisfies the shrinking q-bound
    bumped = dataclasses.replace(models["weibull"], q=lambda x: 0 * x + 0.5).normalized()
    report = classify(bumped)
    check = {c.name: c for c in report.checks}["perturbation_bound"]
    assert not check.passed and check.witness > 0


def test_growth_schedule_weibull(models):
    n = np.array([10.0, 100.0])
    np.testing.assert_allclose(growth_schedule(models["weibull"], n, 2.0, 0.05),
                               2.0 * n**0.2)
    assert growth_schedule(models["exp_exp"], 100.0, 1.0, 0.0) == pytest.approx(
        1 + 0.5 * math.log(100))
