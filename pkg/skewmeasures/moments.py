"""Closed-form moments of skew-elliptical laws.

Third-order moments are stored as k^2-by-k matrices: row (i-1)k + r and
column j hold E[Y_i Y_j Y_r].
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .distribution import SkewElliptical
from .errors import DomainError
from .generators import GeneratorFamily, available_constants
from .numerics import kron, psd_inverse_sqrt, vec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CanonicalMoments:
    first: float
    second_diagonal: Optional[float]
    third_own: Optional[float]
    third_cross: Optional[float]
    fourth_own: Optional[float]
    fourth_cross: Optional[float]


@dataclass(frozen=True, eq=False)
class ThirdMomentTensor:
    matrix: np.ndarray

    @property
    def k(self) -> int:
        return self.matrix.shape[1]

    def as_cube(self) -> np.ndarray:
        """Array E[i, j, r] (0-based) of third-order mixed moments"""
        k = self.k
        return self.matrix.reshape(k, k, k).transpose(0, 2, 1)


def _constants(fam: GeneratorFamily, order: int) -> Tuple[float, ...]:
    return available_constants(fam).require(order)


def canonical_moments(fam: GeneratorFamily, delta_star: float) -> CanonicalMoments:
    """Nonzero mixed moments of order <= 4 of the canonical form"""
    constants = available_constants(fam)
    a, = constants.require(1)
    b, c, d = constants.b, constants.c, constants.d
    s = delta_star
    return CanonicalMoments(
        first=a * s,
        second_diagonal=b,
        third_own=None if c is None else c * (3.0 * s - s ** 3),
        third_cross=None if c is None else c * s,
        fourth_own=None if d is None else 3.0 * d,
        fourth_cross=d,
    )


def mean_and_covariance(D: SkewElliptical) -> Tuple[np.ndarray, np.ndarray]:
    """xi = mu + a delta and Delta = b Omega - a^2 delta delta'"""
    a, b = _constants(D.family, 2)
    xi = D.mu + a * D.delta
    cov = b * D.Omega - a * a * np.outer(D.delta, D.delta)
    return xi, 0.5 * (cov + cov.T)


def second_raw_moment(D: SkewElliptical) -> np.ndarray:
    """E[YY'] = mu mu' + a(mu delta' + delta mu') + b Omega"""
    a, b = _constants(D.family, 2)
    mu, delta = D.mu, D.delta
    return np.outer(mu, mu) + a * (np.outer(mu, delta) + np.outer(delta, mu)) + b * D.Omega


def _shape_terms(omega: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """delta x Omega + vec(Omega) delta' + (I x delta) Omega - (I x delta)(delta delta')"""
    k = delta.shape[0]
    d = delta[:, None]
    lift = kron(np.eye(k), d)
    return (kron(d, omega) + vec(omega)[:, None] @ d.T + lift @ omega
            - lift @ (d @ d.T))


def _scale_terms(omega: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Omega x v + v x Omega + vec(Omega) x v'"""
    col = v[:, None]
    return kron(omega, col) + kron(col, omega) + kron(vec(omega)[:, None], col.T)


def raw_third_moment(D: SkewElliptical) -> ThirdMomentTensor:
    """M3(Y) = E[(Y x Y) Y'] assembled from Kronecker products"""
    a, b, c = _constants(D.family, 3)
    mu = D.mu[:, None]
    d = D.delta[:, None]
    mm = mu @ mu.T
    matrix = (kron(mm, mu)
              + a * (kron(d @ mu.T, mu) + kron(mu @ d.T, mu) + kron(mm, d))
              + b * _scale_terms(D.Omega, D.mu)
              + c * _shape_terms(D.Omega, D.delta))
    return ThirdMomentTensor(matrix)


def standardized_parameters(D: SkewElliptical) -> Tuple[np.ndarray, np.ndarray]:
    """(Omega_Z, delta_Z) of Z = Delta^{-1/2}(Y - xi)"""
    _, cov = mean_and_covariance(D)
    root = psd_inverse_sqrt(cov)
    omega_z = root @ D.Omega @ root
    return 0.5 * (omega_z + omega_z.T), root @ D.delta


def standardized_third_moment(D: SkewElliptical) -> ThirdMomentTensor:
    """Third-moment matrix of Z = Delta^{-1/2}(Y - xi), where Var(Z) = I"""
    a, b, c = _constants(D.family, 3)
    omega_z, delta_z = standardized_parameters(D)
    d = delta_z[:, None]
    matrix = (2.0 * a ** 3 * kron(d @ d.T, d)
              - a * b * _scale_terms(omega_z, delta_z)
              + c * _shape_terms(omega_z, delta_z))
    return ThirdMomentTensor(matrix)


def central_third_moment(mean, M2, M3: ThirdMomentTensor) -> ThirdMomentTensor:
    """Central third moments from the mean, raw second moment E[YY'] and raw M3"""
    E = np.asarray(mean, dtype=float)[:, None]
    M2 = np.asarray(M2, dtype=float)
    matrix = (M3.matrix - kron(M2, E) - kron(E, M2) - vec(M2)[:, None] @ E.T
              + 2.0 * kron(E @ E.T, E))
    return ThirdMomentTensor(matrix)


def tensor_lookup(T: ThirdMomentTensor, i: int, j: int, r: int) -> float:
    """E[Z_i Z_j Z_r] with 1-based indices"""
    k = T.k
    for index in (i, j, r):
        if not 1 <= index <= k:
            raise DomainError(f"tensor index {index} outside 1..{k}")
    return float(T.matrix[(i - 1) * k + (r - 1), j - 1])
