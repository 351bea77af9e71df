"""The skew-elliptical distribution SE_k(mu, Omega, delta, g^(k+1))."""
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg, special

from .config import DELTA_STAR_CONVENTIONS, get_settings
from .errors import (DomainError, NotPositiveDefiniteError, ShapeBoundError,
                     ShapeComponentError, UnsupportedMarginalError)
from .generators import GeneratorFamily, generator_integral, sample_radius
from .numerics import QuadratureSpec, psd_inverse_sqrt, psd_sqrt

logger = logging.getLogger(__name__)


def _frozen(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float, ndmin=ndim)
    if arr.ndim != ndim:
        raise DomainError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SkewElliptical:
    mu: np.ndarray
    Omega: np.ndarray
    delta: np.ndarray
    family: GeneratorFamily
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        mu = _frozen(self.mu, 1, "mu")
        delta = _frozen(self.delta, 1, "delta")
        omega = np.array(self.Omega, dtype=float, ndmin=2)
        k = mu.shape[0]
        if omega.shape != (k, k) or delta.shape != (k,):
            raise DomainError(f"dimension mismatch: mu {mu.shape}, Omega {omega.shape}, "
                              f"delta {delta.shape}")
        if self.family.k != k:
            raise DomainError(f"family dimension {self.family.k} does not match k={k}")
        scale = max(1.0, float(np.max(np.abs(omega))))
        if np.max(np.abs(omega - omega.T)) > 1e-10 * scale:
            raise NotPositiveDefiniteError("Omega is not symmetric")
        omega = _frozen(0.5 * (omega + omega.T), 2, "Omega")
        try:
            chol = np.linalg.cholesky(omega)
        except np.linalg.LinAlgError:
            raise NotPositiveDefiniteError("Omega is not positive definite")
        solved = linalg.cho_solve((chol, True), delta)
        quad = float(delta @ solved)
        if not quad < 1.0:
            raise ShapeBoundError(f"delta' Omega^-1 delta = {quad:.6g} must be < 1")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "Omega", omega)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "_quad", quad)
        object.__setattr__(self, "_chol", chol)

    @property
    def k(self) -> int:
        return self.mu.shape[0]

    @property
    def shape_quadratic(self) -> float:
        """delta' Omega^-1 delta"""
        return self._quad

    @property
    def alpha(self) -> np.ndarray:
        """Slant vector Omega^-1 delta / sqrt(1 - delta' Omega^-1 delta)"""
        return linalg.cho_solve((self._chol, True), self.delta) / math.sqrt(1.0 - self._quad)

    def omega_inverse(self) -> np.ndarray:
        return linalg.cho_solve((self._chol, True), np.eye(self.k))


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    A_star: np.ndarray
    delta_star: float
    shape_norm: float
    convention: str


@dataclass(frozen=True)
class LinearForm:
    mu: float
    omega: float
    delta: float
    generator_tag: str


def validate(mu, Omega, delta, family: GeneratorFamily) -> SkewElliptical:
    """Build a distribution, enforcing every validity invariant"""
    delta_arr = np.array(delta, dtype=float, ndmin=1)
    excess = np.abs(delta_arr) - 1.0
    if np.any(excess > 1e-12):
        bad = int(np.argmax(excess))
        raise ShapeComponentError(f"|delta_{bad + 1}| = {abs(delta_arr[bad]):.6g} exceeds 1")
    notes = []
    if np.any(np.abs(excess) <= 1e-12):
        notes.append("boundary shape: |delta_i| = 1 gives a degenerate Delta entry")
        logger.warning("Shape vector %s sits on the |delta_i| = 1 boundary", delta_arr)
    return SkewElliptical(mu, Omega, delta_arr, family, tuple(notes))


def delta_star(D: SkewElliptical, convention: Optional[str] = None) -> float:
    """Canonical shape scalar: delta'Omega^-1 delta ('quadratic') or its root ('norm')"""
    convention = convention or get_settings().delta_star_convention
    if convention not in DELTA_STAR_CONVENTIONS:
        raise DomainError(f"unknown delta-star convention {convention!r}")
    if convention == "quadratic":
        return D.shape_quadratic
    return math.sqrt(D.shape_quadratic)


def _pdf_point(D: SkewElliptical, y: np.ndarray, omega_inv: np.ndarray, alpha: np.ndarray,
               log_det: float, method: str, spec: QuadratureSpec) -> float:
    z = y - D.mu
    q = float(z @ omega_inv @ z)
    w = float(alpha @ z)
    fam = D.family
    k = D.k
    if method == "auto" and fam.kind == "normal":
        log_base = -0.5 * k * math.log(2.0 * math.pi) - 0.5 * log_det - 0.5 * q
        return 2.0 * math.exp(log_base) * float(special.ndtr(w))
    if method == "auto" and fam.kind == "t":
        m = fam.shape
        log_base = (special.gammaln(0.5 * (m + k)) - special.gammaln(0.5 * m)
                    - 0.5 * k * math.log(m * math.pi) - 0.5 * log_det
                    - 0.5 * (m + k) * math.log1p(q / m))
        tail = special.stdtr(m + k, w * math.sqrt((m + k) / (m + q)))
        return 2.0 * math.exp(log_base) * float(tail)
    integral = generator_integral(fam, q, w, spec=spec)
    return 2.0 * math.exp(-0.5 * log_det) * integral


def pdf(D: SkewElliptical, y, method: str = "auto", spec: Optional[QuadratureSpec] = None):
    """Density at a point (length k) or at each row of an n-by-k batch.

    method='auto' uses the closed forms for the normal and Student t families
    and quadrature of the generator otherwise; 'quadrature' forces the
    generic path.
    """
    if method not in ("auto", "quadrature"):
        raise DomainError(f"unknown pdf method {method!r}")
    spec = spec or QuadratureSpec.from_settings()
    y = np.asarray(y, dtype=float)
    single = y.ndim == 0 or (y.ndim == 1 and y.shape[0] == D.k)
    if single:
        points = y.reshape(1, D.k)
    elif y.ndim == 1 and D.k == 1:
        points = y.reshape(-1, 1)
    elif y.ndim == 2 and y.shape[1] == D.k:
        points = y
    else:
        raise DomainError(f"expected points of length {D.k}, got shape {y.shape}")
    omega_inv = D.omega_inverse()
    alpha = D.alpha
    log_det = 2.0 * float(np.sum(np.log(np.diag(D._chol))))
    values = np.array([_pdf_point(D, row, omega_inv, alpha, log_det, method, spec)
                       for row in points])
    return float(values[0]) if single else values


def affine_transform(D: SkewElliptical, A, b) -> SkewElliptical:
    """Law of AY + b: SE(A mu + b, A Omega A', A delta)"""
    A = np.array(A, dtype=float, ndmin=2)
    b = np.array(b, dtype=float, ndmin=1)
    if A.shape != (D.k, D.k) or b.shape != (D.k,):
        raise DomainError(f"affine map must be {D.k}x{D.k} with a length-{D.k} shift")
    if np.linalg.matrix_rank(A) < D.k:
        raise DomainError("affine map matrix is singular")
    omega = A @ D.Omega @ A.T
    return SkewElliptical(A @ D.mu + b, 0.5 * (omega + omega.T), A @ D.delta, D.family,
                          D.warnings)


def _complete_basis(first: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose first column is `first` (unit length)"""
    k = first.shape[0]
    basis = [first]
    for e in np.eye(k):
        v = e.copy()
        for _ in range(2):
            for u in basis:
                v -= (u @ v) * u
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            basis.append(v / norm)
        if len(basis) == k:
            break
    return np.column_stack(basis)


def canonicalize(D: SkewElliptical, convention: Optional[str] = None) -> CanonicalForm:
    """Linear map A* with A* Omega A*' = I and A* delta on the first axis"""
    convention = convention or get_settings().delta_star_convention
    C = D._chol.T  # Omega = C'C, C upper triangular
    v = linalg.solve_triangular(C, D.delta, trans="T")  # C Omega^-1 delta = C^-T delta
    norm = float(np.linalg.norm(v))
    P = np.eye(D.k) if norm < 1e-15 else _complete_basis(v / norm)
    A_star = linalg.solve_triangular(C, P).T
    return CanonicalForm(A_star, delta_star(D, convention), math.sqrt(D.shape_quadratic),
                         convention)


def delta_from_lambda(lam, Omega) -> np.ndarray:
    """delta = Omega^{1/2} lambda / sqrt(1 + lambda'lambda)"""
    lam = np.array(lam, dtype=float, ndmin=1)
    root = psd_sqrt(np.array(Omega, dtype=float, ndmin=2))
    return root @ lam / math.sqrt(1.0 + float(lam @ lam))


def lambda_from_delta(delta, Omega) -> np.ndarray:
    """Inverse of delta_from_lambda"""
    delta = np.array(delta, dtype=float, ndmin=1)
    inv_root = psd_inverse_sqrt(np.array(Omega, dtype=float, ndmin=2))
    white = inv_root @ delta
    quad = float(white @ white)
    if not quad < 1.0:
        raise ShapeBoundError(f"delta' Omega^-1 delta = {quad:.6g} must be < 1")
    return white / math.sqrt(1.0 - quad)


def linear_form(D: SkewElliptical, C) -> LinearForm:
    """Univariate parameters of C'Y"""
    C = np.array(C, dtype=float, ndmin=1)
    if C.shape != (D.k,):
        raise DomainError(f"direction must have length {D.k}")
    if not np.any(C):
        raise DomainError("direction must be nonzero")
    tag = f"g(2,{D.k + 1}):{D.family.label}"
    return LinearForm(float(C @ D.mu), float(C @ D.Omega @ C), float(C @ D.delta), tag)


def linear_form_pdf(D: SkewElliptical, C, x):
    """Density of C'Y; closed-form marginals exist for normal and Student t only"""
    if D.family.kind not in ("normal", "t"):
        raise UnsupportedMarginalError(
            f"marginal density of {D.family.label} linear forms is not available")
    form = linear_form(D, C)
    marginal = SkewElliptical([form.mu], [[form.omega]], [form.delta],
                              D.family.with_dimension(1))
    return pdf(marginal, np.asarray(x, dtype=float))


def sample(D: SkewElliptical, n: int, seed, block_size: Optional[int] = None,
           workers: int = 1) -> np.ndarray:
    """Draw n rows Y = mu + R(delta |U1| + L U_p), with L L' = Omega - delta delta'.

    Rows are produced in blocks, each from its own stream spawned off `seed`,
    so the output depends only on (seed, block_size).
    """
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n}")
    n = int(n)
    block_size = block_size or get_settings().block_size
    k = D.k
    delta = D.delta
    L = np.linalg.cholesky(D.Omega - np.outer(delta, delta))
    starts = list(range(0, n, block_size))
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    streams = root.spawn(len(starts))

    def draw(index: int) -> np.ndarray:
        rng = np.random.default_rng(streams[index])
        m = min(block_size, n - starts[index])
        radius = np.asarray(sample_radius(D.family, rng, m))
        gauss = rng.standard_normal((m, k + 1))
        sphere = gauss / np.linalg.norm(gauss, axis=1, keepdims=True)
        direction = np.abs(sphere[:, :1]) * delta[None, :] + sphere[:, 1:] @ L.T
        return D.mu[None, :] + radius[:, None] * direction

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            blocks = list(executor.map(draw, range(len(starts))))
    else:
        blocks = [draw(i) for i in range(len(starts))]
    logger.debug("Sampled %d rows in %d blocks (%s)", n, len(blocks), D.family.label)
    return np.vstack(blocks)
