"""Numeric kernels shared by every module.

Thin, validated wrappers around scipy/numpy: special functions, adaptive
quadrature on half-lines, bracketed root finding, a damped Newton solver for
small systems, symmetric eigen-decomposition and Kronecker/vec helpers.
"""
import math
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate, optimize, special

from .config import get_settings
from .errors import BracketError, DomainError, NumericError

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class QuadratureSpec:
    epsabs: float = 1e-12
    epsrel: float = 1e-10
    limit: int = 200

    def __post_init__(self):
        if not (self.epsabs > 0 and self.epsrel > 0):
            raise DomainError("quadrature tolerances must be strictly positive")
        if self.limit < 1:
            raise DomainError("max-subdivisions must be at least 1")

    @classmethod
    def from_settings(cls) -> "QuadratureSpec":
        """Default spec from the environment settings"""
        settings = get_settings()
        return cls(settings.quad_epsabs, settings.quad_epsrel, settings.quad_limit)


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0"""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return float(special.gammaln(x))


def std_normal(x):
    """Standard normal (pdf, cdf); cdf goes through erfc for tail accuracy"""
    x = np.asarray(x, dtype=float)
    pdf = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    cdf = special.ndtr(x)
    if pdf.ndim == 0:
        return float(pdf), float(cdf)
    return pdf, cdf


def _alternating_sum(terms: np.ndarray) -> float:
    """Sum of (-1)^n terms[n] with Cohen-Villegas-Zagier acceleration"""
    n = len(terms)
    d = (3.0 + math.sqrt(8.0)) ** n
    d = (d + 1.0 / d) / 2.0
    b = -1.0
    c = -d
    total = 0.0
    for k in range(n):
        c = b - c
        total += c * terms[k]
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0))
    return total / d


def hurwitz_lerch_psi(mu: float, z: float, s: float, a: float,
                      tol: float = 1e-16, max_terms: int = 200000) -> float:
    """Generalized Hurwitz-Lerch zeta: sum_n (mu)_n z^n / (n! (n+a)^s)"""
    if not a > 0:
        raise DomainError(f"hurwitz_lerch_psi requires a > 0, got {a}")
    if abs(z) > 1:
        raise DomainError(f"series diverges for |z| > 1 (z={z})")
    if z == 0:
        return float(a ** (-s))
    if z == 1:
        # only the Hurwitz zeta special case converges in closed form here
        if mu == 1 and s > 1:
            return float(special.zeta(s, a))
        raise DomainError(f"series diverges at z=1 for mu={mu}, s={s}")

    if z == -1:
        if s <= mu - 1:
            raise DomainError(f"alternating series diverges for s={s} <= mu-1={mu - 1}")
        n_terms = 48
        coef = np.empty(n_terms)
        coef[0] = 1.0
        for n in range(1, n_terms):
            coef[n] = coef[n - 1] * (mu + n - 1) / n
        terms = coef / (np.arange(n_terms) + a) ** s
        return float(_alternating_sum(terms))

    # |z| < 1: geometric convergence
    total = 0.0
    coef = 1.0
    for n in range(max_terms):
        term = coef * z ** n / (n + a) ** s
        total += term
        if abs(term) <= tol * max(abs(total), 1e-300) and n > 0:
            return float(total)
        coef *= (mu + n) / (n + 1)
    raise NumericError("Hurwitz-Lerch series did not converge", estimate=total)


def _checked_quad(f: Callable[[float], float], lo: float, hi: float,
                  spec: QuadratureSpec, points=None) -> float:
    kwargs = dict(epsabs=spec.epsabs, epsrel=spec.epsrel, limit=spec.limit, full_output=1)
    if points is not None and np.isfinite(lo) and np.isfinite(hi):
        kwargs["points"] = points
    try:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out = integrate.quad(f, lo, hi, **kwargs)
    except (OverflowError, FloatingPointError, ZeroDivisionError) as e:
        raise NumericError(f"integrand failed on [{lo}, {hi}]: {e}") from e

    value, abserr = float(out[0]), float(out[1])
    message = out[3] if len(out) > 3 else None
    if not (np.isfinite(value) and np.isfinite(abserr)):
        raise NumericError(f"integral over [{lo}, {hi}] is not finite",
                           estimate=value, error_bound=abserr)
    if message is not None:
        # roundoff-only warnings are tolerated while the error bound stays small
        roundoff = "roundoff" in str(message).lower()
        allowed = 1e4 * max(spec.epsabs, spec.epsrel * abs(value))
        if not roundoff or abserr > allowed:
            raise NumericError(f"quadrature did not converge on [{lo}, {hi}]: {message}",
                               estimate=value, error_bound=abserr)
        logger.debug("Accepted quad result with roundoff warning (err=%.3g)", abserr)
    return value


def integrate_half_line(f: Callable[[float], float], side: str, cutoff: float,
                        spec: Optional[QuadratureSpec] = None) -> float:
    """Integrate f over (-inf, cutoff] ('lower') or [cutoff, inf) ('upper')"""
    spec = spec or QuadratureSpec.from_settings()
    if side == "lower":
        if cutoff == -np.inf:
            return 0.0
        return _checked_quad(f, -np.inf, cutoff, spec)
    if side == "upper":
        if cutoff == np.inf:
            return 0.0
        return _checked_quad(f, cutoff, np.inf, spec)
    raise DomainError(f"side must be 'lower' or 'upper', got {side!r}")


def integrate_interval(f: Callable[[float], float], lo: float, hi: float,
                       spec: Optional[QuadratureSpec] = None, points=None) -> float:
    """Integrate f over [lo, hi]; either end may be infinite"""
    spec = spec or QuadratureSpec.from_settings()
    if lo == hi:
        return 0.0
    if lo > hi:
        return -integrate_interval(f, hi, lo, spec, points)
    return _checked_quad(f, lo, hi, spec, points)


def find_root(f: Callable[[float], float], bracket: RootBracket, tol: float = 1e-12) -> float:
    """Bracketed root via Brent's method"""
    f_lo, f_hi = f(bracket.lo), f(bracket.hi)
    if f_lo == 0:
        return float(bracket.lo)
    if f_hi == 0:
        return float(bracket.hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(
            f"no sign change on [{bracket.lo}, {bracket.hi}] (f={f_lo:.3g}, {f_hi:.3g})")
    root = optimize.brentq(f, bracket.lo, bracket.hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                           maxiter=500)
    residual = abs(f(root))
    if residual > tol:
        raise NumericError(f"root residual {residual:.3g} exceeds {tol:.3g}", estimate=root,
                           error_bound=residual)
    return float(root)


def newton_system(F: Callable[[np.ndarray], np.ndarray], J: Callable[[np.ndarray], np.ndarray],
                  x0, tol: float = 1e-10, max_iter: int = 50,
                  project: Optional[Callable[[np.ndarray], np.ndarray]] = None
                  ) -> Tuple[np.ndarray, int, bool]:
    """Damped Newton-Raphson for F(x) = 0.

    Each step is halved until the sup-norm residual decreases; `project`
    (if given) maps every iterate back onto a constraint manifold. Returns the
    last iterate, the number of accepted steps and a convergence flag.
    """
    x = np.array(x0, dtype=float)
    if project is not None:
        x = project(x)
    iterations = 0
    while True:
        fx = np.asarray(F(x), dtype=float)
        residual = float(np.max(np.abs(fx))) if fx.size else 0.0
        if residual <= tol:
            return x, iterations, True
        if iterations >= max_iter:
            logger.info("Newton stopped after %d iterations (residual %.3g)", iterations, residual)
            return x, iterations, False

        jac = np.asarray(J(x), dtype=float)
        try:
            step = np.linalg.solve(jac, -fx)
        except np.linalg.LinAlgError:
            # singular Jacobian: least-squares step
            step = np.linalg.lstsq(jac, -fx, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            return x, iterations, False

        t = 1.0
        for _ in range(40):
            candidate = x + t * step
            if project is not None:
                candidate = project(candidate)
            cand_res = float(np.max(np.abs(F(candidate))))
            if cand_res < residual:
                break
            t *= 0.5
        else:
            logger.info("Newton line search stalled at residual %.3g", residual)
            return x, iterations, False
        x = candidate
        iterations += 1


def _check_symmetric(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-12 * scale:
        raise DomainError("matrix is not symmetric")
    return 0.5 * (M + M.T)


def sym_eigen(M) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and eigenvectors with first nonzero entry positive"""
    M = _check_symmetric(M)
    values, vectors = np.linalg.eigh(M)
    order = np.argsort(values)[::-1]
    values = values[order]
    vectors = vectors[:, order]
    for j in range(vectors.shape[1]):
        column = vectors[:, j]
        nonzero = np.flatnonzero(np.abs(column) > 1e-12)
        if nonzero.size and column[nonzero[0]] < 0:
            vectors[:, j] = -column
    return values, vectors


def psd_inverse_sqrt(M) -> np.ndarray:
    """Symmetric PD inverse square root"""
    values, vectors = sym_eigen(M)
    if values.size and values[-1] <= 0:
        raise DomainError(f"matrix is not positive definite (min eigenvalue {values[-1]:.3g})")
    S = (vectors / np.sqrt(values)) @ vectors.T
    return 0.5 * (S + S.T)


def psd_sqrt(M) -> np.ndarray:
    """Symmetric PD square root"""
    values, vectors = sym_eigen(M)
    if values.size and values[-1] <= 0:
        raise DomainError(f"matrix is not positive definite (min eigenvalue {values[-1]:.3g})")
    S = (vectors * np.sqrt(values)) @ vectors.T
    return 0.5 * (S + S.T)


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=float), np.asarray(B, dtype=float))


def vec(M) -> np.ndarray:
    """Stack the columns of M"""
    return np.asarray(M, dtype=float).reshape(-1, order="F")
