import math

import numpy as np
import pytest
from scipy import integrate, stats

from skewmeasures.distribution import (SkewElliptical, affine_transform, canonicalize,
                                       delta_from_lambda, delta_star, lambda_from_delta,
                                       linear_form, linear_form_pdf, pdf, sample, validate)
from skewmeasures.errors import (DomainError, NotPositiveDefiniteError, ShapeBoundError,
                                 ShapeComponentError, UnsupportedMarginalError)
from skewmeasures.generators import available_constants, parse_family

OMEGA = np.array([[2.0, 1.0], [1.0, 3.0]])
DELTA = np.array([0.2, 1.0])
FAMILIES = ["normal", "t:5", "logistic", "laplace", "pearson2:2", "pearson7:4"]


def make(label="normal", mu=(0.0, 0.0), omega=OMEGA, delta=DELTA):
    return SkewElliptical(mu, omega, delta, parse_family(label, len(mu)))


def test_construction_checks():
    with pytest.raises(NotPositiveDefiniteError):
        make(omega=[[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(NotPositiveDefiniteError):
        make(omega=[[2.0, 0.5], [0.0, 3.0]])
    with pytest.raises(ShapeBoundError):
        make(omega=np.eye(2), delta=[0.8, 0.7])
    with pytest.raises(DomainError):
        make(delta=[0.1, 0.1, 0.1])


def test_validate_checks_components():
    family = parse_family("normal", 2)
    with pytest.raises(ShapeComponentError):
        validate([0, 0], [[4.0, 0.0], [0.0, 1.0]], [1.5, 0.0], family)
    D = validate([0, 0], [[4.0, 0.0], [0.0, 1.0]], [1.0, 0.0], family)
    assert D.warnings
    assert not validate([0, 0], OMEGA, [0.2, 0.5], family).warnings
    # |delta_2| = 1 sits on the component boundary
    assert len(validate([0, 0], OMEGA, DELTA, family).warnings) == 1


def test_parameters_are_read_only():
    D = make()
    with pytest.raises(ValueError):
        D.delta[0] = 0.5


def test_delta_star_conventions():
    D = make()
    assert delta_star(D, "quadratic") == pytest.approx(0.344, rel=1e-12)
    assert delta_star(D, "norm") == pytest.approx(math.sqrt(0.344), rel=1e-12)
    with pytest.raises(DomainError):
        delta_star(D, "other")


def test_normal_pdf_without_shape_is_gaussian():
    D = make(delta=[0.0, 0.0])
    y = np.array([[0.3, -1.2], [2.0, 0.5]])
    np.testing.assert_allclose(pdf(D, y), stats.multivariate_normal([0, 0], OMEGA).pdf(y),
                               rtol=1e-12)


@pytest.mark.parametrize("label", ["normal", "t:5"])
def test_closed_form_pdf_agrees_with_quadrature(label):
    D = make(label, mu=(0.5, -0.3))
    points = np.array([[0.0, 0.0], [1.5, -0.7], [-2.0, 3.0]])
    np.testing.assert_allclose(pdf(D, points), pdf(D, points, method="quadrature"), rtol=1e-8)


@pytest.mark.parametrize("label", FAMILIES)
def test_pdf_without_shape_is_centrally_symmetric(label):
    mu = np.array([1.0, -2.0])
    D = make(label, mu=tuple(mu), delta=[0.0, 0.0])
    rng = np.random.default_rng(31)
    u = rng.normal(size=(100, 2))
    if D.family.bounded:
        u *= rng.uniform(0.0, 0.95, size=(100, 1)) / np.linalg.norm(u, axis=1, keepdims=True)
    z = u @ np.linalg.cholesky(OMEGA).T
    np.testing.assert_allclose(pdf(D, mu + z), pdf(D, mu - z), rtol=1e-10)


def test_pdf_point_and_shape_errors():
    D = make()
    assert isinstance(pdf(D, [0.1, 0.2]), float)
    with pytest.raises(DomainError):
        pdf(D, [0.1, 0.2, 0.3])
    with pytest.raises(DomainError):
        pdf(D, [0.1, 0.2], method="simpson")


@pytest.mark.parametrize("label", FAMILIES)
def test_univariate_pdf_integrates_to_one(label):
    fam = parse_family(label, 1)
    D = SkewElliptical([0.4], [[1.5]], [0.9], fam)
    if fam.bounded:
        lo, hi = 0.4 - math.sqrt(1.5), 0.4 + math.sqrt(1.5)
    else:
        lo, hi = -np.inf, np.inf
    mass, _ = integrate.quad(lambda y: pdf(D, y), lo, hi, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("label", ["normal", "t:5"])
def test_bivariate_pdf_integrates_to_one(label):
    D = make(label)
    mass, _ = integrate.dblquad(lambda y2, y1: pdf(D, [y1, y2]), -np.inf, np.inf,
                                -np.inf, np.inf, epsabs=1e-7)
    assert mass == pytest.approx(1.0, abs=1e-4)


@pytest.mark.slow
@pytest.mark.parametrize("label", ["logistic", "laplace", "pearson2:2", "pearson7:4"])
def test_bivariate_pdf_integrates_to_one_by_quadrature(label):
    D = make(label, omega=np.eye(2), delta=[0.3, 0.2])
    if D.family.bounded:
        mass, _ = integrate.dblquad(lambda y2, y1: pdf(D, [y1, y2]), -1.0, 1.0,
                                    lambda y1: -math.sqrt(max(0.0, 1 - y1 * y1)),
                                    lambda y1: math.sqrt(max(0.0, 1 - y1 * y1)), epsabs=1e-7)
    else:
        mass, _ = integrate.dblquad(lambda y2, y1: pdf(D, [y1, y2]), -np.inf, np.inf,
                                    -np.inf, np.inf, epsabs=1e-7)
    assert mass == pytest.approx(1.0, abs=1e-4)


def test_affine_transform_changes_variables():
    D = make("t:5")
    A = np.array([[1.0, 2.0], [-0.5, 1.5]])
    b = np.array([3.0, -1.0])
    image = affine_transform(D, A, b)
    y = np.array([0.4, -0.9])
    assert pdf(image, A @ y + b) == pytest.approx(pdf(D, y) / abs(np.linalg.det(A)), rel=1e-10)
    assert image.shape_quadratic == pytest.approx(D.shape_quadratic, rel=1e-12)
    with pytest.raises(DomainError):
        affine_transform(D, [[1.0, 2.0], [2.0, 4.0]], b)


@pytest.mark.parametrize("delta", [[0.2, 1.0], [0.0, 0.0], [-0.7, 0.1]])
def test_canonicalize(delta):
    D = make(delta=delta)
    form = canonicalize(D, "norm")
    A = form.A_star
    np.testing.assert_allclose(A @ D.Omega @ A.T, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(A @ D.delta, [form.shape_norm, 0.0], atol=1e-12)
    assert form.delta_star == pytest.approx(form.shape_norm)
    assert canonicalize(D, "quadratic").delta_star == pytest.approx(form.shape_norm ** 2)


def test_lambda_conversion():
    lam = np.array([1.5, -0.4])
    delta = delta_from_lambda(lam, OMEGA)
    D = make(delta=delta)
    assert D.shape_quadratic < 1
    np.testing.assert_allclose(lambda_from_delta(delta, OMEGA), lam, rtol=1e-12)
    np.testing.assert_allclose(delta_from_lambda([0.0, 0.0], OMEGA), [0.0, 0.0])
    with pytest.raises(ShapeBoundError):
        lambda_from_delta([2.0, 2.0], np.eye(2))


def test_linear_form():
    D = make(mu=(1.0, 2.0))
    form = linear_form(D, [1.0, -1.0])
    assert form.mu == pytest.approx(-1.0)
    assert form.omega == pytest.approx(3.0)
    assert form.delta == pytest.approx(-0.8)
    with pytest.raises(DomainError):
        linear_form(D, [0.0, 0.0])


@pytest.mark.parametrize("label", ["normal", "t:5"])
def test_linear_form_pdf_is_a_density(label):
    D = make(label)
    mass, _ = integrate.quad(lambda x: linear_form_pdf(D, [0.6, 0.8], x), -np.inf, np.inf)
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_linear_form_pdf_matches_skew_normal_marginal():
    D = make()
    x = np.array([-1.0, 0.3, 2.5])
    omega, delta = OMEGA[0, 0], DELTA[0]
    slant = delta / math.sqrt(omega) / math.sqrt(1 - delta ** 2 / omega)
    expected = stats.skewnorm.pdf(x, slant, loc=0.0, scale=math.sqrt(omega))
    np.testing.assert_allclose(linear_form_pdf(D, [1.0, 0.0], x), expected, rtol=1e-10)


def test_linear_form_pdf_unsupported_family():
    with pytest.raises(UnsupportedMarginalError):
        linear_form_pdf(make("logistic"), [1.0, 0.0], 0.0)


def test_sample_is_reproducible_and_worker_independent():
    D = make("pearson7:4")
    first = sample(D, 1000, seed=7, block_size=128)
    np.testing.assert_array_equal(first, sample(D, 1000, seed=7, block_size=128))
    np.testing.assert_array_equal(first, sample(D, 1000, seed=7, block_size=128, workers=3))
    assert first.shape == (1000, 2)
    assert not np.array_equal(first, sample(D, 1000, seed=8, block_size=128))


def test_sample_size_must_be_positive():
    with pytest.raises(DomainError):
        sample(make(), 0, seed=1)


@pytest.mark.parametrize("label", FAMILIES)
def test_sample_moments_match_closed_forms(label):
    D = make(label, mu=(1.0, -2.0))
    n = 400_000
    data = sample(D, n, seed=2024)
    a, b = available_constants(D.family).require(2)
    mean = D.mu + a * D.delta
    cov = b * D.Omega - a * a * np.outer(D.delta, D.delta)
    se = np.sqrt(np.diag(cov) / n)
    assert np.all(np.abs(data.mean(axis=0) - mean) < 5 * se)
    np.testing.assert_allclose(np.cov(data.T), cov, rtol=0.05, atol=0.05)
