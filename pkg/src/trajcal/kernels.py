"""Covariance functions over the joint (continuous, seed) search space.

Continuous coordinates use a stationary kernel (Matérn-5/2 by default,
squared-exponential as the alternative).  Seed ids use a low-rank index
kernel ``B B^T + diag(v)`` whose ``B`` rows are normalized to unit length so
``B B^T`` has a unit diagonal.  The joint covariance is their product.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial.distance import cdist

from .dataspace import DesignPoint
from .errors import NumericalError

__all__ = [
    "ContinuousKernelParams",
    "SeedKernelParams",
    "JointKernel",
    "matern52",
    "squared_exponential",
    "continuous_cov",
    "normalize_rows",
    "seed_index",
    "joint_cov",
    "cross_cov",
    "gram",
    "safe_cholesky",
]

# Hyperparameter boxes used by the emulator fit; sized for unit-hypercube
# inputs and standardized outputs.
LENGTHSCALE_BOUNDS = (1e-2, 2.0)
VARIANCE_BOUNDS = (1e-4, 1e2)
SEED_V_BOUNDS = (0.0, 10.0)

CONTINUOUS_FAMILIES = ("matern52", "rbf")

_SQRT5 = np.sqrt(5.0)


@dataclass(frozen=True)
class ContinuousKernelParams:
    """Stationary-kernel hyperparameters for the continuous coordinates."""

    lengthscales: np.ndarray
    variance: float

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        if ls.ndim != 1 or np.any(ls <= 0.0):
            raise ValueError("lengthscales must be a 1-d array of positive reals")
        if self.variance <= 0.0:
            raise ValueError("variance must be positive")
        object.__setattr__(self, "lengthscales", ls)
        object.__setattr__(self, "variance", float(self.variance))

    @property
    def ndim(self) -> int:
        return self.lengthscales.shape[0]


def normalize_rows(B: np.ndarray) -> np.ndarray:
    """Scale each row of ``B`` to unit Euclidean norm.

    Rows whose norm is already within a few ulps of 1 are returned
    untouched, which makes the operation idempotent bitwise.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    norms = np.linalg.norm(B, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("cannot normalize a zero row")
    needs = np.abs(norms - 1.0) > 8 * np.finfo(float).eps
    if not np.any(needs):
        return B.copy()
    out = B.copy()
    out[needs] = B[needs] / norms[needs, None]
    return out


@dataclass(frozen=True)
class SeedKernelParams:
    """Low-rank index-kernel parameters over ``k`` seeds.

    Parameters
    ----------
    B : ndarray, shape (k, q)
        Low-rank factor; rows are normalized to unit norm on evaluation so
        ``B B^T`` has a unit diagonal.
    v : ndarray, shape (k,)
        Nonnegative per-seed diagonal inflation.
    """

    B: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        v = np.atleast_1d(np.asarray(self.v, dtype=float))
        if B.ndim != 2:
            raise ValueError("B must be a 2-d array")
        if v.ndim != 1 or v.shape[0] != B.shape[0]:
            raise ValueError("v must be 1-d with one entry per row of B")
        if np.any(v < 0.0):
            raise ValueError("v entries must be nonnegative")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "v", v)

    @property
    def nseeds(self) -> int:
        return self.B.shape[0]

    @property
    def rank(self) -> int:
        return self.B.shape[1]

    @cached_property
    def matrix(self) -> np.ndarray:
        """The full k x k index-kernel matrix ``B B^T + diag(v)``."""
        Bn = normalize_rows(self.B)
        return Bn @ Bn.T + np.diag(self.v)


@dataclass(frozen=True)
class JointKernel:
    """Product kernel: a stationary continuous kernel times a seed index kernel."""

    continuous: ContinuousKernelParams
    seed: SeedKernelParams
    family: str = "matern52"

    def __post_init__(self):
        if self.family not in CONTINUOUS_FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")

    @property
    def nseeds(self) -> int:
        return self.seed.nseeds


def _scaled_sq_dists(X1, X2, lengthscales) -> np.ndarray:
    X1 = np.atleast_2d(np.asarray(X1, dtype=float)) / lengthscales
    X2 = np.atleast_2d(np.asarray(X2, dtype=float)) / lengthscales
    return cdist(X1, X2, "sqeuclidean")


def _matern52_from_s2(s2: np.ndarray, variance: float) -> np.ndarray:
    s = np.sqrt(np.maximum(s2, 0.0))
    return variance * (1.0 + _SQRT5 * s + (5.0 / 3.0) * s2) * np.exp(-_SQRT5 * s)


def _rbf_from_s2(s2: np.ndarray, variance: float) -> np.ndarray:
    return variance * np.exp(-0.5 * s2)


def continuous_cov(X1, X2, params: ContinuousKernelParams, family: str = "matern52") -> np.ndarray:
    """Stationary covariance matrix between two sets of continuous points."""
    s2 = _scaled_sq_dists(X1, X2, params.lengthscales)
    if family == "matern52":
        return _matern52_from_s2(s2, params.variance)
    if family == "rbf":
        return _rbf_from_s2(s2, params.variance)
    raise ValueError(f"unknown kernel family {family!r}")


def matern52(x1, x2, params: ContinuousKernelParams) -> float:
    """Matérn-5/2 covariance between two points.

    With ``s`` the lengthscale-weighted Euclidean distance, returns
    ``variance * (1 + sqrt(5) s + 5 s^2 / 3) * exp(-sqrt(5) s)``.
    """
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if x1.shape != x2.shape or x1.shape != params.lengthscales.shape:
        raise ValueError("point dimensions must match the lengthscales")
    s2 = float(np.sum(((x1 - x2) / params.lengthscales) ** 2))
    return float(_matern52_from_s2(np.array(s2), params.variance))


def squared_exponential(x1, x2, params: ContinuousKernelParams) -> float:
    """Squared-exponential covariance between two points."""
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if x1.shape != x2.shape or x1.shape != params.lengthscales.shape:
        raise ValueError("point dimensions must match the lengthscales")
    s2 = float(np.sum(((x1 - x2) / params.lengthscales) ** 2))
    return float(_rbf_from_s2(np.array(s2), params.variance))


def seed_index(i: int, j: int, params: SeedKernelParams) -> float:
    """Index-kernel value between seed ids ``i`` and ``j`` (1-based)."""
    k = params.nseeds
    if not (1 <= i <= k) or not (1 <= j <= k):
        raise ValueError(f"seed ids must lie in 1..{k}, got ({i}, {j})")
    return float(params.matrix[i - 1, j - 1])


def seed_cov(r1, r2, params: SeedKernelParams) -> np.ndarray:
    """Index-kernel matrix between two arrays of seed ids (1-based)."""
    r1 = np.asarray(r1, dtype=np.int64)
    r2 = np.asarray(r2, dtype=np.int64)
    k = params.nseeds
    if np.any(r1 < 1) or np.any(r1 > k) or np.any(r2 < 1) or np.any(r2 > k):
        raise ValueError(f"seed ids must lie in 1..{k}")
    return params.matrix[np.ix_(r1 - 1, r2 - 1)]


def joint_cov(p1: DesignPoint, p2: DesignPoint, kernel: JointKernel) -> float:
    """Product covariance between two joint design points."""
    if kernel.family == "matern52":
        cont = matern52(p1.x, p2.x, kernel.continuous)
    else:
        cont = squared_exponential(p1.x, p2.x, kernel.continuous)
    return cont * seed_index(p1.r, p2.r, kernel.seed)


def cross_cov(X1, r1, X2, r2, kernel: JointKernel) -> np.ndarray:
    """Product covariance matrix between two batches of joint points.

    ``X1``/``X2`` hold continuous coordinates (rows), ``r1``/``r2`` the
    matching 1-based seed ids.
    """
    cont = continuous_cov(X1, X2, kernel.continuous, kernel.family)
    return cont * seed_cov(r1, r2, kernel.seed)


def gram(points: list[DesignPoint], kernel: JointKernel, jitter: float = 0.0) -> np.ndarray:
    """Symmetric Gram matrix over a point set, with ``jitter`` on the diagonal."""
    if len(points) < 1:
        raise ValueError("need at least one point")
    X = np.array([p.x for p in points])
    r = np.array([p.r for p in points], dtype=np.int64)
    G = cross_cov(X, r, X, r, kernel)
    if jitter:
        G = G + jitter * np.eye(len(points))
    return G


def safe_cholesky(a: np.ndarray, jitter: float = 0.0, max_escalations: int = 5):
    """Lower Cholesky factor of ``a + jitter * I`` with escalating jitter.

    The initial jitter is tried first; each failure multiplies it by 10
    (starting from a matrix-scaled floor when the initial jitter is zero),
    up to ``max_escalations`` times.

    Returns
    -------
    (L, jitter) : (ndarray, float)
        The factor actually obtained and the jitter it required.

    Raises
    ------
    NumericalError
        If no attempt factorizes; carries the final jitter tried.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    scale = float(np.max(np.diag(a))) if n else 0.0
    floor = 1e-12 * max(1.0, scale)
    j = float(jitter)
    tried = j
    for attempt in range(max_escalations + 1):
        tried = j
        try:
            m = a + j * np.eye(n) if j > 0.0 else a
            return np.linalg.cholesky(m), j
        except np.linalg.LinAlgError:
            j = j * 10.0 if j > 0.0 else floor
    raise NumericalError(
        f"Cholesky failed after {max_escalations} jitter escalations", jitter=tried
    )
