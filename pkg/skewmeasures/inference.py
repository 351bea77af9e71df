"""Sample statistics for multivariate skewness and kurtosis tests.

Directional statistics are maximized (or minimized) over unit vectors by a
lattice scan on a hemisphere followed by Newton-Raphson on the bordered
Lagrange system of the standardized sample.
"""
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy import stats
from scipy.stats import qmc

from .config import get_settings
from .distribution import SkewElliptical, sample
from .errors import DegenerateSampleError, DomainError
from .generators import GeneratorFamily
from .numerics import newton_system, psd_inverse_sqrt, sym_eigen

logger = logging.getLogger(__name__)

# upper bound on lattice points scanned per block of the sample projection
_SCAN_CELLS = 4_000_000
_MAX_LATTICE = 20000


@dataclass(frozen=True, eq=False)
class Sample:
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise DomainError(f"sample must be an n-by-k matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise DomainError("sample contains non-finite values")
        n, k = data.shape
        if n <= k:
            raise DegenerateSampleError(f"need n > k rows, got n={n}, k={k}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class TestConfig:
    __test__ = False

    lattice_resolution: int = 64
    nr_tolerance: float = 1e-10
    max_iterations: int = 100
    K: Optional[float] = None
    seed: Optional[int] = None
    n_starts: int = 5

    def __post_init__(self):
        if self.lattice_resolution < 8:
            raise DomainError("lattice resolution must be at least 8")
        if not self.nr_tolerance > 0:
            raise DomainError("Newton tolerance must be positive")
        if self.max_iterations < 1 or self.n_starts < 1:
            raise DomainError("max_iterations and n_starts must be positive")


@dataclass(frozen=True, eq=False)
class DirectionalOptimum:
    value: float
    multiplier: float
    direction: np.ndarray
    iterations: int
    converged: bool
    residual: float
    lattice_value: float


@dataclass(frozen=True, eq=False)
class TestResult:
    __test__ = False

    b1_star: float
    b1_direction: np.ndarray
    b2_max: float
    b2_min: float
    b2_star_sq: float
    b2_directions: Tuple[np.ndarray, np.ndarray]
    K: float
    dominant: str
    iterations: Tuple[int, int, int]
    converged: Tuple[bool, bool, bool]
    residuals: Tuple[float, float, float]


@dataclass(frozen=True)
class CriticalValues:
    K_b1: float
    K_b2: float
    K: float
    alpha: float
    n: int
    n_reps: int
    family: str
    seed: int


@dataclass(frozen=True, eq=False)
class EmpiricalReport:
    n: int
    k: int
    b1k: float
    b2k: float
    excess_kurt: float
    malkovich_afifi: float
    bbq_vector: np.ndarray
    bbq_scalar: float
    mori_vector: np.ndarray
    kollo_vector: np.ndarray
    srivastava: float
    flags: Tuple[str, ...] = field(default_factory=tuple)


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X[:, None] if X.ndim == 1 else X


def _unit(C, k: int) -> np.ndarray:
    C = np.array(C, dtype=float, ndmin=1)
    if C.shape != (k,):
        raise DomainError(f"direction must have length {k}")
    if abs(np.linalg.norm(C) - 1.0) > 1e-10:
        raise DomainError(f"direction must be a unit vector (norm {np.linalg.norm(C):.12g})")
    return C


def standardize(S: Sample) -> Tuple[np.ndarray, np.ndarray]:
    """Whiten a sample: X_j = A*'(Y_j - Ybar) with sum_j X_j X_j' = I"""
    centered = S.data - S.data.mean(axis=0)
    scatter = centered.T @ centered
    values, _ = sym_eigen(0.5 * (scatter + scatter.T))
    if values[-1] <= 1e-12 * max(values[0], 1e-300):
        raise DegenerateSampleError("sample scatter matrix is singular")
    A_star = psd_inverse_sqrt(0.5 * (scatter + scatter.T))
    return centered @ A_star, A_star


def directional_b1(X, C) -> float:
    """Squared sample skewness of the projection C'X"""
    X = _as_matrix(X)
    z = X @ _unit(C, X.shape[1])
    dev = z - z.mean()
    return float(len(z) * np.sum(dev ** 3) ** 2 / np.sum(dev ** 2) ** 3)


def directional_b2(X, C) -> float:
    """Sample kurtosis of the projection C'X"""
    X = _as_matrix(X)
    z = X @ _unit(C, X.shape[1])
    dev = z - z.mean()
    return float(len(z) * np.sum(dev ** 4) / np.sum(dev ** 2) ** 2)


def lattice_directions(k: int, resolution: int) -> np.ndarray:
    """Unit directions covering the hemisphere C_1 >= 0"""
    if k == 1:
        return np.ones((1, 1))
    if k == 2:
        theta = -0.5 * np.pi + np.pi * np.arange(resolution) / resolution
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if k == 3:
        count = resolution * resolution
        i = np.arange(count) + 0.5
        height = i / count
        phi = np.pi * (1.0 + math.sqrt(5.0)) * i
        ring = np.sqrt(1.0 - height ** 2)
        return np.column_stack([height, ring * np.cos(phi), ring * np.sin(phi)])
    # k >= 4: Gaussian images of a Halton sequence
    count = min(resolution ** 2 * k, _MAX_LATTICE)
    points = qmc.Halton(d=k, scramble=False).random(count + 1)[1:]
    gauss = stats.norm.ppf(np.clip(points, 1e-12, 1 - 1e-12))
    gauss /= np.linalg.norm(gauss, axis=1, keepdims=True)
    gauss[gauss[:, 0] < 0] *= -1.0
    return gauss


def _power_sums(X: np.ndarray, directions: np.ndarray, power: int) -> np.ndarray:
    """sum_j (C'X_j)^power for every lattice direction C"""
    chunk = max(1, _SCAN_CELLS // max(X.shape[0], 1))
    sums = [np.sum((X @ directions[i:i + chunk].T) ** power, axis=0)
            for i in range(0, len(directions), chunk)]
    return np.concatenate(sums)


def _bordered_system(X: np.ndarray, power: int):
    """F and J of sum_j (C'X_j)^(power-1) X_j - mult*C = 0, C'C = 1"""
    k = X.shape[1]

    def F(x):
        C, mult = x[:k], x[k]
        proj = X @ C
        return np.concatenate([X.T @ proj ** (power - 1) - mult * C, [C @ C - 1.0]])

    def J(x):
        C, mult = x[:k], x[k]
        proj = X @ C
        jac = np.zeros((k + 1, k + 1))
        jac[:k, :k] = (power - 1) * (X.T * proj ** (power - 2)) @ X - mult * np.eye(k)
        jac[:k, k] = -C
        jac[k, :k] = 2.0 * C
        return jac

    def project(x):
        y = x.copy()
        y[:k] /= np.linalg.norm(y[:k])
        return y

    return F, J, project


def _residual(X: np.ndarray, C: np.ndarray, power: int) -> float:
    proj = X @ C
    mult = float(np.sum(proj ** power))
    return float(np.max(np.abs(X.T @ proj ** (power - 1) - mult * C)))


def _optimize(X: np.ndarray, cfg: TestConfig, power: int,
              score: Callable[[np.ndarray], np.ndarray],
              statistic: Callable[[float], float]) -> DirectionalOptimum:
    """Best direction for `score` of the power sums: lattice scan plus Newton refinement"""
    n, k = X.shape
    directions = lattice_directions(k, cfg.lattice_resolution)
    sums = _power_sums(X, directions, power)
    scores = score(sums)
    ranked = np.argsort(scores)[::-1][:cfg.n_starts]
    top = ranked[0]
    lattice_value = statistic(sums[top])
    best = DirectionalOptimum(lattice_value, float(sums[top]), directions[top].copy(), 0,
                              k == 1, _residual(X, directions[top], power), lattice_value)
    if k == 1:
        return best

    best_score = scores[top]
    found = False
    F, J, project = _bordered_system(X, power)
    for index in ranked:
        x0 = np.append(directions[index], sums[index])
        x, iterations, converged = newton_system(F, J, x0, cfg.nr_tolerance,
                                                 cfg.max_iterations, project)
        if not converged:
            continue
        C = x[:k] / np.linalg.norm(x[:k])
        mult = float(np.sum((X @ C) ** power))
        candidate = float(score(np.array([mult]))[0])
        if candidate >= best_score - 1e-12 * max(1.0, abs(best_score)):
            best_score = candidate
            best = DirectionalOptimum(statistic(mult), mult, C, iterations, True,
                                      _residual(X, C, power), lattice_value)
            found = True
    if not found:
        logger.info("Newton refinement did not converge; returning best lattice direction")
    return best


def b1_star(X, cfg: Optional[TestConfig] = None) -> DirectionalOptimum:
    """Maximum over unit C of b1(C) on a standardized sample"""
    X = _as_matrix(X)
    cfg = cfg or TestConfig()
    n = X.shape[0]
    result = _optimize(X, cfg, 3, lambda u: u * u, lambda u: n * u * u)
    if result.multiplier < 0:
        # report the direction of positive skewness
        result = DirectionalOptimum(result.value, -result.multiplier, -result.direction,
                                    result.iterations, result.converged, result.residual,
                                    result.lattice_value)
    return result


def b2_extremes(X, cfg: Optional[TestConfig] = None
                ) -> Tuple[DirectionalOptimum, DirectionalOptimum]:
    """Maximum and minimum over unit C of b2(C) on a standardized sample"""
    X = _as_matrix(X)
    cfg = cfg or TestConfig()
    n = X.shape[0]
    high = _optimize(X, cfg, 4, lambda v: v, lambda v: n * v)
    low = _optimize(X, cfg, 4, lambda v: -v, lambda v: n * v)
    return high, low


def b2_star_sq(X, cfg: Optional[TestConfig] = None) -> TestResult:
    """Directional skewness and kurtosis test statistics of a standardized sample"""
    X = _as_matrix(X)
    cfg = cfg or TestConfig()
    n = X.shape[0]
    K = cfg.K
    if K is None:
        K = 3.0 * (n - 1) / (n + 1)
        logger.warning("No kurtosis centering constant supplied; using 3(n-1)/(n+1) = %.6g", K)
    skew = b1_star(X, cfg)
    high, low = b2_extremes(X, cfg)
    over, under = (high.value - K) ** 2, (low.value - K) ** 2
    return TestResult(
        b1_star=skew.value,
        b1_direction=skew.direction,
        b2_max=high.value,
        b2_min=low.value,
        b2_star_sq=max(over, under),
        b2_directions=(high.direction, low.direction),
        K=K,
        dominant="max" if over >= under else "min",
        iterations=(skew.iterations, high.iterations, low.iterations),
        converged=(skew.converged, high.converged, low.converged),
        residuals=(skew.residual, high.residual, low.residual),
    )


def _scaled(S: Sample) -> np.ndarray:
    """Rows standardized by the inverse root of the (1/n) covariance"""
    X, _ = standardize(S)
    return X * math.sqrt(S.n)


def _third_moment_cube(W: np.ndarray) -> np.ndarray:
    n, k = W.shape
    return np.stack([(W * W[:, [a]]).T @ W / n for a in range(k)])


def sample_mardia(S: Sample) -> Tuple[float, float]:
    """Plug-in Mardia skewness b1k and kurtosis b2k"""
    W = _scaled(S)
    cube = _third_moment_cube(W)
    b1k = float(np.sum(cube ** 2))
    b2k = float(np.mean(np.sum(W * W, axis=1) ** 2))
    return b1k, b2k


def empirical_measures(S: Sample, cfg: Optional[TestConfig] = None) -> EmpiricalReport:
    """Plug-in analogues of the population measures"""
    k = S.k
    W = _scaled(S)
    cube = _third_moment_cube(W)
    b1k = float(np.sum(cube ** 2))
    b2k = float(np.mean(np.sum(W * W, axis=1) ** 2))
    partial = np.einsum("iir->r", cube)
    T = 3.0 / (k * (k + 2)) * partial

    centered = S.data - S.data.mean(axis=0)
    cov = centered.T @ centered / S.n
    values, vectors = sym_eigen(0.5 * (cov + cov.T))
    flags = []
    gaps = np.abs(np.diff(values))
    if gaps.size and gaps.min() < 1e-8 * values[0]:
        flags.append("srivastava axis-unstable")
    third = np.mean((centered @ vectors) ** 3, axis=0) / values ** 1.5

    X = W / math.sqrt(S.n)
    return EmpiricalReport(
        n=S.n, k=k, b1k=b1k, b2k=b2k, excess_kurt=b2k - k * (k + 2),
        malkovich_afifi=b1_star(X, cfg).value,
        bbq_vector=T, bbq_scalar=float(T @ T), mori_vector=partial,
        kollo_vector=np.einsum("ijr->r", cube), srivastava=float(np.mean(third ** 2)),
        flags=tuple(flags),
    )


def calibrate_critical_values(fam: GeneratorFamily, k: int, n: int, n_reps: int, alpha: float,
                              cfg: Optional[TestConfig] = None,
                              workers: int = 1) -> CriticalValues:
    """Monte Carlo null thresholds K_b1, K_b2 and centering K for the delta=0 law

    A centering constant already set on cfg is kept and K_b2 is calibrated around it.
    """
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")
    if n_reps < 2:
        raise DomainError("calibration needs at least two replicates")
    cfg = cfg or TestConfig()
    seed = cfg.seed if cfg.seed is not None else get_settings().seed
    null = SkewElliptical(np.zeros(k), np.eye(k), np.zeros(k), fam.with_dimension(k))
    streams = np.random.SeedSequence(seed).spawn(n_reps)

    def replicate(index: int) -> Tuple[float, float, float]:
        data = sample(null, n, streams[index])
        X, _ = standardize(Sample(data))
        high, low = b2_extremes(X, cfg)
        return b1_star(X, cfg).value, high.value, low.value

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            draws = list(executor.map(replicate, range(n_reps)))
    else:
        draws = [replicate(i) for i in range(n_reps)]
    b1, high, low = (np.array(column) for column in zip(*draws))
    K = float(cfg.K) if cfg.K is not None else float(np.median(np.concatenate([high, low])))
    b2_sq = np.maximum((high - K) ** 2, (low - K) ** 2)
    logger.debug("Calibrated %d replicates of %s, n=%d", n_reps, fam.label, n)
    return CriticalValues(
        K_b1=float(np.quantile(b1, 1.0 - alpha)),
        K_b2=float(np.quantile(b2_sq, 1.0 - alpha)),
        K=K, alpha=alpha, n=n, n_reps=n_reps, family=fam.label, seed=int(seed),
    )


def verdicts(result: TestResult, K_b1: float, K_b2: float) -> Dict[str, bool]:
    """Reject symmetry when b1* > K_b1 and normal-type kurtosis when [b2*]^2 > K_b2"""
    return {
        "reject_skewness": bool(result.b1_star > K_b1),
        "reject_kurtosis": bool(result.b2_star_sq > K_b2),
    }
