import logging
import math

import numpy as np
import pytest
from scipy import integrate

from skewmeasures.errors import DomainError, MomentExistenceError
from skewmeasures.generators import (GeneratorFamily, available_constants, chi_radial_moment,
                                     generator_density, generator_derivative, generator_integral,
                                     max_moment_order, moment_condition, moment_constants,
                                     parse_family, radial_density, radial_moment,
                                     radial_moment_check, sample_radius)

FAMILIES = ["normal", "t:5", "logistic", "laplace", "pearson2:2", "pearson7:4"]


def test_parse_family():
    fam = parse_family("t:5", 2)
    assert (fam.kind, fam.k, fam.shape) == ("t", 2, 5.0)
    assert fam.label == "t:5"
    assert parse_family(" Normal ", 3).kind == "normal"
    for bad in ["t", "normal:3", "cauchy", "t:abc"]:
        with pytest.raises(DomainError):
            parse_family(bad, 2)


def test_family_parameter_ranges():
    with pytest.raises(DomainError):
        GeneratorFamily("pearson7", 2, 1.5)
    with pytest.raises(DomainError):
        GeneratorFamily("pearson2", 2, -1.0)
    with pytest.raises(DomainError):
        GeneratorFamily("t", 2, 0.0)
    with pytest.raises(DomainError):
        GeneratorFamily("normal", 0)
    assert GeneratorFamily("pearson2", 2, -0.5).bounded


@pytest.mark.parametrize("label", FAMILIES)
@pytest.mark.parametrize("k", [1, 2])
def test_radial_density_has_unit_mass(label, k):
    fam = parse_family(label, k)
    upper = 1.0 if fam.bounded else np.inf
    mass, _ = integrate.quad(lambda r: radial_density(fam, r), 0.0, upper, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_normal_generator_matches_gaussian_kernel():
    fam = parse_family("normal", 2)
    u = np.array([0.0, 0.5, 3.0])
    np.testing.assert_allclose(generator_density(fam, u), (2 * np.pi) ** -1.5 * np.exp(-u / 2))
    np.testing.assert_allclose(generator_derivative(fam, u), -0.5 * generator_density(fam, u))
    with pytest.raises(DomainError):
        generator_density(fam, -1.0)


@pytest.mark.parametrize("label", FAMILIES)
def test_generator_derivative_matches_finite_differences(label):
    fam = parse_family(label, 2)
    upper = 0.9 if fam.bounded else 4.0
    for u in np.linspace(0.05, upper, 20):
        h = 1e-6 * max(1.0, u)
        slope = (generator_density(fam, u + h) - generator_density(fam, u - h)) / (2 * h)
        assert generator_derivative(fam, u) == pytest.approx(slope, rel=1e-6), u


def test_pearson2_generator_vanishes_outside_support():
    fam = parse_family("pearson2:2", 2)
    assert generator_density(fam, 1.0) == 0.0
    assert generator_density(fam, 4.0) == 0.0
    assert generator_integral(fam, 1.5, 2.0) == 0.0


def test_generator_integral_normal_reduces_to_marginal():
    fam = parse_family("normal", 2)
    assert generator_integral(fam, 0.0, np.inf) == pytest.approx(1 / (2 * np.pi), rel=1e-10)
    # half of the symmetric integral below zero
    assert generator_integral(fam, 0.7, 0.0) == pytest.approx(
        0.5 * math.exp(-0.35) / (2 * np.pi), rel=1e-10)


def test_laplace_derivative_integral_diverges_at_zero():
    with pytest.raises(DomainError):
        generator_integral(parse_family("laplace", 2), 0.0, 1.0, derivative=True)


def test_moment_existence_conditions():
    fam = parse_family("t:3.5", 2)
    assert moment_condition(fam, 4) == "m>4 required"
    assert moment_condition(fam, 3) is None
    assert max_moment_order(fam) == 3
    constants = available_constants(fam)
    assert constants.d is None
    with pytest.raises(MomentExistenceError) as info:
        constants.require(4)
    assert info.value.condition == "m>4 required"
    with pytest.raises(MomentExistenceError):
        radial_moment_check(fam, 4)

    heavy = parse_family("pearson7:2.2", 2)
    assert max_moment_order(heavy) == 1
    assert moment_condition(heavy, 2) == "t>2.5 required"


def test_normal_constants_are_exact():
    constants = moment_constants(parse_family("normal", 3))
    assert constants.a == pytest.approx(math.sqrt(2 / math.pi))
    assert (constants.b, constants.d) == (1.0, 1.0)
    assert constants.c == constants.a


def test_student_t_constants():
    a, b, c, d = available_constants(parse_family("t:5", 2)).require(4)
    assert b == pytest.approx(5 / 3, rel=1e-12)
    assert d == pytest.approx(25 / 3, rel=1e-12)
    assert a > math.sqrt(2 / math.pi)


def test_laplace_second_constant():
    # E[R^2] = p (p + 1) against p for chi_p, p = k + 1
    b = available_constants(parse_family("laplace", 2)).require(2)[1]
    assert b == pytest.approx(4.0, rel=1e-12)


def test_chi_radial_moment():
    assert chi_radial_moment(2, 2) == pytest.approx(3.0)
    assert chi_radial_moment(2, 4) == pytest.approx(15.0)


@pytest.mark.parametrize("label", ["normal", "t:9", "laplace", "pearson2:2", "pearson7:6"])
def test_closed_form_moments_agree_with_quadrature(label):
    fam = parse_family(label, 2)
    for order in range(1, 5):
        check = radial_moment_check(fam, order)
        assert check.agreed, check
        assert check.used == check.closed_form


def test_logistic_moment_check_is_not_silent(caplog):
    fam = parse_family("logistic", 2)
    radial_moment_check.cache_clear()
    with caplog.at_level(logging.WARNING, logger="skewmeasures.generators"):
        checks = [radial_moment_check(fam, order) for order in range(1, 5)]
    for check in checks:
        assert check.agreed or any("disagrees" in r.message for r in caplog.records)
        assert check.used > 0


@pytest.mark.parametrize("label", FAMILIES)
def test_second_radial_moment_dominates_squared_mean(label):
    fam = parse_family(label, 2)
    assert radial_moment(fam, 2) >= radial_moment(fam, 1) ** 2


def test_radial_moment_order_range():
    with pytest.raises(DomainError):
        radial_moment(parse_family("normal", 2), 5)


@pytest.mark.parametrize("label", FAMILIES)
def test_sample_radius_matches_radial_moments(label):
    fam = parse_family(label, 2)
    rng = np.random.default_rng(11)
    draws = sample_radius(fam, rng, 200_000)
    assert np.all(draws > 0)
    if fam.bounded:
        assert np.all(draws < 1)
    mean = radial_moment(fam, 1)
    se = math.sqrt(radial_moment(fam, 2) - mean ** 2) / math.sqrt(len(draws))
    assert abs(draws.mean() - mean) < 5 * se
