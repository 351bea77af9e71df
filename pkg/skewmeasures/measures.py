"""Population skewness and kurtosis measures of skew-elliptical laws.

The scalar measures (Mardia, Malkovich-Afifi, Isogai, Song) depend on the law
only through the generator and the canonical shape scalar delta*. The
vectorial measures are contractions of the standardized third-moment tensor.
"""
import math
import logging
from dataclasses import dataclass, field, fields
from typing import Dict, Optional, Tuple

import numpy as np

from .config import get_settings
from .distribution import SkewElliptical, delta_star as compute_delta_star
from .errors import MomentExistenceError, NumericError
from .generators import (GeneratorFamily, available_constants, generator_density,
                         generator_integral, max_moment_order, moment_condition)
from .moments import (ThirdMomentTensor, central_third_moment, mean_and_covariance,
                      raw_third_moment, second_raw_moment, standardized_third_moment)
from .numerics import RootBracket, find_root, sym_eigen

logger = logging.getLogger(__name__)

MODE_SCAN_STEPS = 64
AXIS_GAP_RTOL = 1e-8

VECTOR_FIELDS = ("isogai_vector", "bbq_vector", "mori_vector", "kollo_vector")


@dataclass(frozen=True)
class MeasureReport:
    family: str
    k: int
    delta_star: float
    convention: str
    mardia_skew: Optional[float] = None
    mardia_kurt: Optional[float] = None
    excess_kurt: Optional[float] = None
    malkovich_afifi: Optional[float] = None
    isogai_scalar: Optional[float] = None
    isogai_mode: Optional[float] = None
    isogai_vector: Optional[Tuple[float, ...]] = None
    song_approx: Optional[float] = None
    bbq_vector: Optional[Tuple[float, ...]] = None
    bbq_scalar: Optional[float] = None
    mori_vector: Optional[Tuple[float, ...]] = None
    kollo_vector: Optional[Tuple[float, ...]] = None
    srivastava: Optional[float] = None
    status: Dict[str, str] = field(default_factory=dict)
    flags: Tuple[str, ...] = ()

    @classmethod
    def measure_names(cls) -> Tuple[str, ...]:
        skip = {"family", "k", "delta_star", "convention", "status", "flags"}
        return tuple(f.name for f in fields(cls) if f.name not in skip)


@dataclass(frozen=True)
class IsogaiResult:
    scalar: float
    mode: float
    vector: np.ndarray


def _eta_slope(delta_star: float) -> float:
    """eta(1) = delta* / sqrt(1 - delta*^2)"""
    return delta_star / math.sqrt(1.0 - delta_star * delta_star)


def mardia_skewness(fam: GeneratorFamily, delta_star: float) -> float:
    """Mardia skewness beta_{1,k} of SE laws with canonical shape delta*"""
    a, b, c = available_constants(fam).require(3)
    k = fam.k
    s = delta_star
    spread = b - a * a * s * s
    own = 3.0 * (c - a * b) * s + (2.0 * a ** 3 - c) * s ** 3
    return own ** 2 / spread ** 3 + 3.0 * (k - 1) * (c - a * b) ** 2 * s * s / (b * b * spread)


def mardia_kurtosis(fam: GeneratorFamily, delta_star: float) -> float:
    """Mardia kurtosis beta_{2,k}"""
    a, b, c, d = available_constants(fam).require(4)
    k = fam.k
    s2 = delta_star * delta_star
    spread = b - a * a * s2
    own = 3.0 * d + 6.0 * a * (a * b - 2.0 * c) * s2 + a * (4.0 * c - 3.0 * a ** 3) * s2 * s2
    cross = 2.0 * (k - 1) * (d + a * (a * b - 2.0 * c) * s2) / (b * spread)
    return own / spread ** 2 + (k * k - 1) * d / (b * b) + cross


def excess_kurtosis(fam: GeneratorFamily, delta_star: float) -> float:
    return mardia_kurtosis(fam, delta_star) - fam.k * (fam.k + 2)


def malkovich_afifi(fam: GeneratorFamily, delta_star: float) -> float:
    """Malkovich-Afifi skewness: squared standardized third moment along the shape axis"""
    a, b, c = available_constants(fam).require(3)
    s = delta_star
    own = 3.0 * (c - a * b) * s + (2.0 * a ** 3 - c) * s ** 3
    return own ** 2 / (b - a * a * s * s) ** 3


def mode_equation(fam: GeneratorFamily, delta_star: float):
    """Stationarity function of the canonical density along the first axis"""
    slope = _eta_slope(delta_star)

    def stationarity(y: float) -> float:
        eta = slope * y
        boundary = slope * generator_density(fam, eta * eta + y * y)
        if y == 0:
            return boundary
        return 2.0 * y * generator_integral(fam, y * y, eta, derivative=True) + boundary

    return stationarity


def isogai_mode(fam: GeneratorFamily, delta_star: float, tol: float = 1e-10) -> float:
    """Mode m*_0 of the canonical density (first coordinate)"""
    if delta_star == 0:
        return 0.0
    a, b = available_constants(fam).require(2)
    stationarity = mode_equation(fam, delta_star)
    upper = math.copysign(a * abs(delta_star) + 10.0 * math.sqrt(b), delta_star)
    if fam.bounded:
        upper = math.copysign(min(abs(upper), 1.0 - 1e-9), upper)
    grid = np.linspace(0.0, upper, MODE_SCAN_STEPS + 1)
    previous = stationarity(grid[0])
    for lo, hi in zip(grid[:-1], grid[1:]):
        current = stationarity(hi)
        if current == 0:
            return float(hi)
        if np.sign(current) != np.sign(previous):
            bracket = RootBracket(min(lo, hi), max(lo, hi))
            return find_root(stationarity, bracket, tol)
        previous = current
    raise NumericError(f"no sign change of the mode equation on [0, {upper:.4g}] "
                       f"for {fam.label}, delta*={delta_star}")


def isogai(D: SkewElliptical, convention: Optional[str] = None) -> IsogaiResult:
    """Isogai skewness (S_I, m*_0, S_C) with h the identity"""
    fam = D.family
    s = compute_delta_star(D, convention)
    a, b = available_constants(fam).require(2)
    if s == 0:
        return IsogaiResult(0.0, 0.0, np.zeros(D.k))
    mode = isogai_mode(fam, s)
    scalar = (a * s - mode) ** 2 / (b - a * a * s * s)
    return IsogaiResult(scalar, mode, (a - mode / s) * D.delta)


def song_h_star(fam: GeneratorFamily, delta_star: float) -> float:
    """Log-density gradient term h* evaluated at the canonical mean a delta*"""
    a, = available_constants(fam).require(1)
    slope = _eta_slope(delta_star)
    y = a * delta_star
    eta = slope * y
    q = y * y
    mass = generator_integral(fam, q, eta)
    boundary = slope * generator_density(fam, eta * eta + q)
    gradient = 0.0 if y == 0 else 2.0 * y * generator_integral(fam, q, eta, derivative=True)
    return (gradient + boundary) / mass


def song_approx(D: SkewElliptical, convention: Optional[str] = None) -> float:
    """Delta-method approximation (b - a^2 delta*^2) h*^2 of the Song measure"""
    fam = D.family
    s = compute_delta_star(D, convention)
    a, b = available_constants(fam).require(2)
    if s == 0:
        return 0.0
    return (b - a * a * s * s) * song_h_star(fam, s) ** 2


def _partial_sums(tensor: ThirdMomentTensor) -> np.ndarray:
    """s_r = sum_i E[Z_i^2 Z_r]"""
    return np.einsum("iir->r", tensor.as_cube())


def bbq(D: SkewElliptical) -> Tuple[np.ndarray, float]:
    """Balakrishnan-Brito-Quiroz vector T and Q* = T'T"""
    k = D.k
    T = 3.0 / (k * (k + 2)) * _partial_sums(standardized_third_moment(D))
    return T, float(T @ T)


def mori(D: SkewElliptical) -> np.ndarray:
    """Mori-Rohatgi-Szekely vector s(Y)"""
    return _partial_sums(standardized_third_moment(D))


def kollo(D: SkewElliptical) -> np.ndarray:
    """Kollo vector b(Y): sums of all third-order standardized mixed moments"""
    return np.einsum("ijr->r", standardized_third_moment(D).as_cube())


def srivastava_terms(D: SkewElliptical) -> Tuple[np.ndarray, bool]:
    """Standardized third central moments along principal axes, and a tie flag"""
    xi, cov = mean_and_covariance(D)
    values, vectors = sym_eigen(cov)
    central = central_third_moment(xi, second_raw_moment(D), raw_third_moment(D)).as_cube()
    third = np.einsum("ijr,ia,ja,ra->a", central, vectors, vectors, vectors)
    gaps = np.abs(np.diff(values))
    unstable = bool(gaps.size and gaps.min() < AXIS_GAP_RTOL * values[0])
    return third / values ** 1.5, unstable


def srivastava(D: SkewElliptical) -> float:
    """Srivastava principal-component skewness"""
    terms, unstable = srivastava_terms(D)
    if unstable:
        logger.warning("Srivastava measure is axis-unstable: near-equal covariance eigenvalues")
    return float(np.mean(terms ** 2))


def report_all(D: SkewElliptical, convention: Optional[str] = None) -> MeasureReport:
    """Every measure the available moments allow, with per-field status"""
    fam = D.family
    k = D.k
    s = compute_delta_star(D, convention)
    convention = convention or get_settings().delta_star_convention
    order = max_moment_order(fam)
    values: Dict[str, object] = {}
    status: Dict[str, str] = {}
    flags = list(D.warnings)

    def unavailable(names, needed):
        reason = moment_condition(fam, needed) or f"order {needed} moments unavailable"
        for name in names:
            status[name] = reason

    def attempt(names, compute):
        try:
            values.update(zip(names, compute()))
        except (NumericError, MomentExistenceError) as e:
            logger.warning("Could not compute %s: %s", ", ".join(names), e)
            for name in names:
                status[name] = str(e)

    if order >= 3:
        attempt(("mardia_skew", "malkovich_afifi"),
                lambda: (mardia_skewness(fam, s), malkovich_afifi(fam, s)))
        tensor = standardized_third_moment(D)
        partial = _partial_sums(tensor)
        T = 3.0 / (k * (k + 2)) * partial
        values.update(bbq_vector=tuple(T), bbq_scalar=float(T @ T), mori_vector=tuple(partial),
                      kollo_vector=tuple(np.einsum("ijr->r", tensor.as_cube())))
        terms, unstable = srivastava_terms(D)
        values["srivastava"] = float(np.mean(terms ** 2))
        if unstable:
            flags.append("srivastava axis-unstable")
    else:
        unavailable(("mardia_skew", "malkovich_afifi", "bbq_vector", "bbq_scalar",
                     "mori_vector", "kollo_vector", "srivastava"), 3)

    if order >= 4:
        attempt(("mardia_kurt", "excess_kurt"),
                lambda: (mardia_kurtosis(fam, s), excess_kurtosis(fam, s)))
    else:
        unavailable(("mardia_kurt", "excess_kurt"), 4)

    if order >= 2:
        def isogai_fields():
            result = isogai(D, convention)
            return result.scalar, result.mode, tuple(result.vector)
        attempt(("isogai_scalar", "isogai_mode", "isogai_vector"), isogai_fields)
        attempt(("song_approx",), lambda: (song_approx(D, convention),))
    else:
        unavailable(("isogai_scalar", "isogai_mode", "isogai_vector", "song_approx"), 2)

    for name, value in list(values.items()):
        if isinstance(value, tuple):
            values[name] = tuple(float(v) for v in value)
        elif value is not None:
            values[name] = float(value)
    return MeasureReport(family=fam.label, k=k, delta_star=s, convention=convention,
                         status=status, flags=tuple(flags), **values)
