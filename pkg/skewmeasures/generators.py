"""Spherical density generators g^(k+1) and their radial laws.

Six families are supported: normal, Student t, logistic, Laplace, Pearson
type II and Pearson type VII. Every generator is normalized so that the
(k+1)-dimensional spherical density it defines has unit mass.
"""
import math
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, MomentExistenceError
from .numerics import (QuadratureSpec, hurwitz_lerch_psi, integrate_half_line,
                       integrate_interval)

logger = logging.getLogger(__name__)

FAMILY_KINDS = ("normal", "t", "logistic", "laplace", "pearson2", "pearson7")
SHAPED_KINDS = ("t", "pearson2", "pearson7")

# relative agreement required between closed-form and quadrature radial moments
MOMENT_CHECK_RTOL = 1e-6

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class GeneratorFamily:
    kind: str
    k: int
    shape: Optional[float] = None

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise DomainError(f"unknown family {self.kind!r}; expected one of {FAMILY_KINDS}")
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"dimension k must be a positive integer, got {self.k}")
        if self.kind in SHAPED_KINDS:
            if self.shape is None or not np.isfinite(self.shape):
                raise DomainError(f"family {self.kind!r} needs a finite shape parameter")
            if self.kind == "t" and not self.shape > 0:
                raise DomainError(f"Student t requires m > 0, got {self.shape}")
            if self.kind == "pearson2" and not self.shape > -1:
                raise DomainError(f"Pearson II requires t > -1, got {self.shape}")
            if self.kind == "pearson7" and not self.shape > (self.k + 1) / 2:
                raise DomainError(
                    f"Pearson VII requires t > (k+1)/2 = {(self.k + 1) / 2}, got {self.shape}")
        elif self.shape is not None:
            raise DomainError(f"family {self.kind!r} takes no shape parameter")

    @property
    def p(self) -> int:
        """Dimension of the generator, k+1"""
        return self.k + 1

    @property
    def label(self) -> str:
        if self.shape is None:
            return self.kind
        return f"{self.kind}:{self.shape:g}"

    @property
    def bounded(self) -> bool:
        return self.kind == "pearson2"

    def with_dimension(self, k: int) -> "GeneratorFamily":
        return GeneratorFamily(self.kind, k, self.shape)


@dataclass(frozen=True)
class MomentConstants:
    a: Optional[float]
    b: Optional[float]
    c: Optional[float]
    d: Optional[float]
    max_order: int = 4
    condition: Optional[str] = None

    def require(self, order: int) -> Tuple[float, ...]:
        """Constants up to `order`, or an existence error"""
        if order > self.max_order:
            raise MomentExistenceError(order, self.condition or f"order {order} unavailable")
        return (self.a, self.b, self.c, self.d)[:order]


@dataclass(frozen=True)
class MomentCheck:
    order: int
    closed_form: float
    numeric: Optional[float]
    rel_diff: Optional[float]
    agreed: bool
    used: float


def parse_family(text: str, k: int) -> GeneratorFamily:
    """Parse 'normal', 't:<m>', 'logistic', 'laplace', 'pearson2:<t>', 'pearson7:<t>'"""
    name, _, value = text.strip().lower().partition(":")
    if name in SHAPED_KINDS:
        if not value:
            raise DomainError(f"family {name!r} needs a shape, e.g. '{name}:5'")
        try:
            shape = float(value)
        except ValueError:
            raise DomainError(f"invalid shape {value!r} for family {name!r}")
        return GeneratorFamily(name, k, shape)
    if value:
        raise DomainError(f"family {name!r} takes no shape parameter")
    return GeneratorFamily(name, k)


def _log_kernel(fam: GeneratorFamily) -> Tuple[Callable[[float], float], Callable[[float], float]]:
    """Scalar log of the unnormalized generator and its u-derivative"""
    p = fam.p
    s = fam.shape
    if fam.kind == "normal":
        return (lambda u: -0.5 * u), (lambda u: -0.5)
    if fam.kind == "t":
        return ((lambda u: -0.5 * (s + p) * math.log1p(u / s)),
                (lambda u: -0.5 * (s + p) / (s + u)))
    if fam.kind == "logistic":
        return ((lambda u: -u - math.log1p(math.exp(-u))),
                (lambda u: -1.0 / (1.0 + math.exp(-u))))
    if fam.kind == "laplace":
        def dlog(u):
            if u <= 0:
                raise DomainError("Laplace generator is not differentiable at u=0")
            return -0.5 / math.sqrt(u)
        return (lambda u: -math.sqrt(u)), dlog
    if fam.kind == "pearson2":
        def logk(u):
            if u >= 1.0:
                return -math.inf
            return 0.0 if s == 0 else s * math.log1p(-u)
        return logk, (lambda u: -s / (1.0 - u) if u < 1.0 else 0.0)
    return (lambda u: -s * math.log1p(u)), (lambda u: -s / (1.0 + u))


def _log_sphere_area(p: int) -> float:
    """log of 2 pi^{p/2} / Gamma(p/2)"""
    return math.log(2.0) + 0.5 * p * math.log(math.pi) - special.gammaln(0.5 * p)


@lru_cache(maxsize=None)
def _log_normalizer(fam: GeneratorFamily) -> float:
    p, k, s = fam.p, fam.k, fam.shape
    half_log_pi = 0.5 * p * math.log(math.pi)
    if fam.kind == "normal":
        return -0.5 * p * math.log(2.0 * math.pi)
    if fam.kind == "t":
        return (special.gammaln(0.5 * (s + p)) - special.gammaln(0.5 * s)
                - 0.5 * p * math.log(s * math.pi))
    if fam.kind == "laplace":
        return special.gammaln(0.5 * p) - math.log(2.0) - half_log_pi - special.gammaln(k + 1.0)
    if fam.kind == "pearson2":
        return special.gammaln(s + 1.0 + 0.5 * p) - special.gammaln(s + 1.0) - half_log_pi
    if fam.kind == "pearson7":
        return special.gammaln(s) - special.gammaln(s - 0.5 * p) - half_log_pi

    # logistic: normalized numerically
    mass = integrate_interval(lambda r: r ** k * special.expit(-r * r), 0.0, np.inf,
                              QuadratureSpec(1e-14, 1e-12, 200))
    series = 0.5 * math.exp(special.gammaln(0.5 * p)) * hurwitz_lerch_psi(1.0, -1.0, 0.5 * p, 1.0)
    logger.debug("Logistic k=%d radial mass: quadrature %.15g, series %.15g", k, mass, series)
    return -(_log_sphere_area(p) + math.log(mass))


def _log_density(fam: GeneratorFamily, u: float) -> float:
    logk, _ = _log_kernel(fam)
    return _log_normalizer(fam) + logk(u)


def _as_scalar_or_array(values, func):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        return func(float(arr))
    return np.fromiter((func(float(v)) for v in arr.ravel()), dtype=float,
                       count=arr.size).reshape(arr.shape)


def generator_density(fam: GeneratorFamily, u):
    """Normalized generator g^(k+1)(u); zero outside the Pearson II support"""
    def one(x):
        if x < 0:
            raise DomainError(f"generator argument must be nonnegative, got {x}")
        if fam.bounded and x >= 1.0:
            return 0.0
        return math.exp(_log_density(fam, x))
    return _as_scalar_or_array(u, one)


def generator_derivative(fam: GeneratorFamily, u):
    """Derivative of the normalized generator with respect to u"""
    _, dlog = _log_kernel(fam)

    def one(x):
        if x < 0:
            raise DomainError(f"generator argument must be nonnegative, got {x}")
        if fam.bounded and x >= 1.0:
            return 0.0
        return math.exp(_log_density(fam, x)) * dlog(x)
    return _as_scalar_or_array(u, one)


def _log_radial(fam: GeneratorFamily, r: float) -> float:
    if r <= 0 or (fam.bounded and r >= 1.0):
        return -math.inf
    return _log_sphere_area(fam.p) + fam.k * math.log(r) + _log_density(fam, r * r)


def radial_density(fam: GeneratorFamily, r):
    """h(r) = 2 pi^{(k+1)/2} r^k g(r^2) / Gamma((k+1)/2)"""
    return _as_scalar_or_array(r, lambda x: math.exp(_log_radial(fam, x)))


def moment_condition(fam: GeneratorFamily, order: int) -> Optional[str]:
    """The violated existence condition for E[R^order], or None"""
    if fam.kind == "t" and not fam.shape > order:
        return f"m>{order} required"
    if fam.kind == "pearson7" and not 2 * fam.shape > fam.k + order + 1:
        return f"t>{(fam.k + order + 1) / 2:g} required"
    return None


def max_moment_order(fam: GeneratorFamily, limit: int = 4) -> int:
    """Highest order <= limit whose radial moment exists"""
    order = 0
    while order < limit and moment_condition(fam, order + 1) is None:
        order += 1
    return order


def _closed_form_moment(fam: GeneratorFamily, order: int) -> float:
    p, s = fam.p, fam.shape
    hp, hj = 0.5 * p, 0.5 * (p + order)
    gl = special.gammaln
    if fam.kind == "normal":
        return math.exp(0.5 * order * math.log(2.0) + gl(hj) - gl(hp))
    if fam.kind == "t":
        return math.exp(0.5 * order * math.log(s) + gl(hj) + gl(0.5 * (s - order))
                        - gl(hp) - gl(0.5 * s))
    if fam.kind == "laplace":
        return math.exp(gl(p + order) - gl(p))
    if fam.kind == "pearson2":
        return math.exp(gl(hj) + gl(hp + s + 1.0) - gl(hp) - gl(hj + s + 1.0))
    if fam.kind == "pearson7":
        return math.exp(gl(hj) + gl(s - hj) - gl(hp) - gl(s - hp))
    # logistic via the alternating (Hurwitz-Lerch) series
    eta_j = hurwitz_lerch_psi(1.0, -1.0, hj, 1.0)
    eta_0 = hurwitz_lerch_psi(1.0, -1.0, hp, 1.0)
    return math.exp(gl(hj) - gl(hp)) * eta_j / eta_0


def _numeric_moment(fam: GeneratorFamily, order: float) -> Tuple[float, float]:
    """Quadrature of r^order h(r); returns (value, rough error scale)"""
    spec = QuadratureSpec(1e-15, 1e-11, 400)

    def near(r):
        return math.exp(order * math.log(r) + _log_radial(fam, r)) if r > 0 else 0.0

    if fam.bounded:
        return integrate_interval(near, 0.0, 1.0, spec), spec.epsrel

    def far(s):
        # r = 1/s maps [1, inf) onto (0, 1]
        if s <= 0:
            return 0.0
        r = 1.0 / s
        return math.exp(order * math.log(r) + _log_radial(fam, r) - 2.0 * math.log(s))

    value = integrate_interval(near, 0.0, 1.0, spec) + integrate_interval(far, 0.0, 1.0, spec)
    return value, spec.epsrel


@lru_cache(maxsize=None)
def radial_moment_check(fam: GeneratorFamily, order: int) -> MomentCheck:
    """Compare the closed-form radial moment with quadrature"""
    condition = moment_condition(fam, order)
    if condition is not None:
        raise MomentExistenceError(order, condition)
    closed = _closed_form_moment(fam, order)
    try:
        numeric, _ = _numeric_moment(fam, order)
    except Exception as e:
        logger.warning("Quadrature of E[R^%d] failed for %s k=%d: %s", order, fam.label, fam.k, e)
        return MomentCheck(order, closed, None, None, False, closed)

    rel_diff = abs(closed - numeric) / abs(numeric)
    agreed = rel_diff <= MOMENT_CHECK_RTOL
    if not agreed:
        logger.warning("Closed-form E[R^%d] for %s k=%d disagrees with quadrature: "
                       "%.12g vs %.12g (rel %.3g); using quadrature",
                       order, fam.label, fam.k, closed, numeric, rel_diff)
    return MomentCheck(order, closed, numeric, rel_diff, agreed, closed if agreed else numeric)


def radial_moment(fam: GeneratorFamily, order: int) -> float:
    """E[R^order] for order in 1..4"""
    if order not in (1, 2, 3, 4):
        raise DomainError(f"radial moment order must be in 1..4, got {order}")
    return radial_moment_check(fam, order).used


def chi_radial_moment(k: int, order: int) -> float:
    """E[R0^order] for R0 ~ chi_{k+1}"""
    return math.exp(0.5 * order * math.log(2.0) + special.gammaln(0.5 * (k + 1 + order))
                    - special.gammaln(0.5 * (k + 1)))


@lru_cache(maxsize=None)
def moment_constants(fam: GeneratorFamily, max_order: int = 4) -> MomentConstants:
    """Constants a, b, c, d as ratios of radial moments to chi_{k+1} moments"""
    if fam.kind == "normal":
        return MomentConstants(_SQRT_2_OVER_PI, 1.0, _SQRT_2_OVER_PI, 1.0)

    values = []
    for order in range(1, max_order + 1):
        ratio = radial_moment(fam, order) / chi_radial_moment(fam.k, order)
        values.append(ratio * _SQRT_2_OVER_PI if order % 2 else ratio)

    # orders above max_order are reported as unavailable
    condition = None
    if max_order < 4:
        condition = (moment_condition(fam, max_order + 1)
                     or f"order {max_order + 1} not requested")
    values += [None] * (4 - max_order)
    return MomentConstants(*values, max_order=max_order, condition=condition)


def available_constants(fam: GeneratorFamily) -> MomentConstants:
    """Moment constants truncated at the highest existing order"""
    return moment_constants(fam, max_moment_order(fam))


def generator_integral(fam: GeneratorFamily, q: float, upper: float, derivative: bool = False,
                       spec: Optional[QuadratureSpec] = None) -> float:
    """Integral of g(r^2 + q) (or g') over r in (-inf, upper]"""
    spec = spec or QuadratureSpec.from_settings()
    func = generator_derivative if derivative else generator_density
    if derivative and fam.kind == "laplace" and q <= 0:
        raise DomainError("Laplace derivative integral diverges at q=0")

    def integrand(r):
        return func(fam, r * r + q)

    if fam.bounded:
        if q >= 1.0:
            return 0.0
        width = math.sqrt(1.0 - q)
        hi = min(upper, width)
        if hi <= -width:
            return 0.0
        return integrate_interval(integrand, -width, hi, spec)

    # symmetric integrand: half line plus the signed piece [0, upper]
    half = integrate_half_line(integrand, "upper", 0.0, spec)
    if upper == np.inf:
        return 2.0 * half
    if upper == -np.inf:
        return 0.0
    return half + integrate_interval(integrand, 0.0, upper, spec)


@lru_cache(maxsize=None)
def _logistic_inverse_cdf(fam: GeneratorFamily, knots: int = 4096) -> PchipInterpolator:
    """Monotone spline of the inverse radial CDF for the logistic family"""
    r_max = 2.0
    while integrate_half_line(lambda r: math.exp(_log_radial(fam, r)), "upper", r_max,
                              QuadratureSpec(1e-16, 1e-8, 200)) > 1e-10:
        r_max += 0.5
    grid = np.linspace(0.0, r_max, knots)
    nodes, weights = np.polynomial.legendre.leggauss(8)
    mid = 0.5 * (grid[1:] + grid[:-1])
    half = 0.5 * (grid[1:] - grid[:-1])
    points = mid[:, None] + half[:, None] * nodes[None, :]
    mass = (radial_density(fam, points) * weights[None, :]).sum(axis=1) * half
    cdf = np.concatenate([[0.0], np.cumsum(mass)])
    cdf /= cdf[-1]
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    logger.debug("Logistic k=%d sampler table: r_max=%.2f, %d knots", fam.k, r_max, keep.sum())
    return PchipInterpolator(cdf[keep], grid[keep])


def sample_radius(fam: GeneratorFamily, rng: np.random.Generator, size=None):
    """Draw R from the radial law h(r)"""
    p, s = fam.p, fam.shape
    if fam.kind == "normal":
        r2 = rng.chisquare(p, size)
    elif fam.kind == "laplace":
        return rng.gamma(p, 1.0, size)
    elif fam.kind == "t":
        r2 = p * rng.f(p, s, size)
    elif fam.kind == "pearson7":
        r2 = p / (2.0 * s - p) * rng.f(p, 2.0 * s - p, size)
    elif fam.kind == "pearson2":
        r2 = rng.beta(0.5 * p, s + 1.0, size)
    else:
        return _logistic_inverse_cdf(fam)(rng.random(size))
    return np.sqrt(r2)
