"""Core types, the quantile discrepancy, asymmetric Laplace density/sampling
and objective evaluation shared by all four clustering variants."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

_QUANTILE_EPS = 1e-9


class Variant(str, Enum):
    """Flexibility level: Common vs Variable-wise theta, Unscaled vs Scaled."""

    CU = "cu"
    CS = "cs"
    VU = "vu"
    VS = "vs"

    @property
    def common_theta(self) -> bool:
        return self in (Variant.CU, Variant.CS)

    @property
    def scaled(self) -> bool:
        return self in (Variant.CS, Variant.VS)


@dataclass(frozen=True)
class VariantConfig:
    """Solver controls for one clustering run."""

    variant: Variant
    k: int
    restarts: int = 30
    max_iter: int = 1000
    seed: int = 0
    theta_min: float = 1e-4
    lambda_cap: float = 1e8
    lambda_floor: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0.0 < self.theta_min < 0.5:
            raise ValueError("theta_min must lie in (0, 0.5)")
        if not 0.0 < self.lambda_floor < self.lambda_cap:
            raise ValueError("lambda bounds must satisfy 0 < floor < cap")


@dataclass(frozen=True)
class Dataset:
    """An n x p data matrix, rows are observations."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("data must be a 2-D matrix")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("data must have at least one row and one column")
        if not np.all(np.isfinite(values)):
            raise ValueError("data contains non-finite entries")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ModelParams:
    """Per-variable theta and lambda plus the K x p barycenter matrix."""

    theta: np.ndarray
    lam: np.ndarray
    barycenters: np.ndarray
    config: VariantConfig

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        lam = np.asarray(self.lam, dtype=float)
        bary = np.asarray(self.barycenters, dtype=float)
        if bary.ndim != 2:
            raise ValueError("barycenters must be a K x p matrix")
        k, p = bary.shape
        if theta.shape != (p,) or lam.shape != (p,):
            raise ValueError("theta and lambda must have length p")
        if k != self.config.k:
            raise ValueError("barycenter row count must equal k")
        if np.any(theta <= 0.0) or np.any(theta >= 1.0):
            raise ValueError("theta entries must lie in (0, 1)")
        if np.any(lam <= 0.0):
            raise ValueError("lambda entries must be positive")
        for arr in (theta, lam, bary):
            if not np.all(np.isfinite(arr)):
                raise ValueError("parameters contain non-finite entries")
        for name, arr in (("theta", theta), ("lam", lam), ("barycenters", bary)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class Assignment:
    """Cluster labels, 1-based, with per-cluster sizes."""

    labels: np.ndarray
    cluster_sizes: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        sizes = np.asarray(self.cluster_sizes, dtype=int)
        k = sizes.shape[0]
        if labels.min(initial=1) < 1 or labels.max(initial=1) > k:
            raise ValueError("labels out of range 1..K")
        if sizes.sum() != labels.shape[0]:
            raise ValueError("cluster sizes do not sum to n")
        labels = labels.copy()
        labels.setflags(write=False)
        sizes = sizes.copy()
        sizes.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "cluster_sizes", sizes)

    @classmethod
    def from_labels(cls, labels: np.ndarray, k: int) -> "Assignment":
        labels = np.asarray(labels, dtype=int)
        sizes = np.bincount(labels - 1, minlength=k)
        return cls(labels=labels, cluster_sizes=sizes)


@dataclass(frozen=True)
class FitResult:
    params: ModelParams
    assignment: Assignment
    objective: float
    iterations: int
    restart_index: int
    converged: bool
    trace: tuple = field(default=(), compare=False)


def quantile_discrepancy(x, theta, xi):
    """Asymmetric absolute deviation {theta + (1-2*theta)*1[x<xi]} * |x-xi|.

    Broadcasts over array arguments.
    """
    x = np.asarray(x, dtype=float)
    weight = theta + (1.0 - 2.0 * theta) * (x < xi)
    out = weight * np.abs(x - xi)
    if out.ndim == 0:
        return float(out)
    return out


def multivariate_discrepancy(x, theta, xi, lam):
    """Lambda-weighted sum of component-wise quantile discrepancies."""
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if not (x.shape == theta.shape == xi.shape == lam.shape):
        raise ValueError("all vectors must have the same length")
    return float(np.sum(lam * quantile_discrepancy(x, theta, xi)))


def empirical_quantile(sample, theta: float):
    """Smallest sample value whose empirical CDF reaches theta.

    Always returns an element of the sample (inf-definition, no interpolation).
    """
    sample = np.asarray(sample, dtype=float).ravel()
    if sample.size == 0:
        raise ValueError("empty cluster sample")
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    srt = np.sort(sample)
    idx = int(np.ceil(sample.size * theta - _QUANTILE_EPS)) - 1
    idx = min(max(idx, 0), sample.size - 1)
    return float(srt[idx])


def column_quantiles(values: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Per-column empirical quantiles at (possibly different) theta values.

    `values` is m x p, `theta` has length p; returns a length-p vector.
    """
    m = values.shape[0]
    if m == 0:
        raise ValueError("empty cluster sample")
    srt = np.sort(values, axis=0)
    idx = np.ceil(m * np.asarray(theta, dtype=float) - _QUANTILE_EPS).astype(int) - 1
    idx = np.clip(idx, 0, m - 1)
    return srt[idx, np.arange(values.shape[1])]


def ald_density(x, theta: float, xi: float, lam: float):
    """Asymmetric Laplace density lam*theta*(1-theta)*exp(-lam*Q(x,theta,xi))."""
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    q = quantile_discrepancy(x, theta, xi)
    return lam * theta * (1.0 - theta) * np.exp(-lam * q)


def ald_sample(count: int, theta: float, xi: float, lam: float, seed=None):
    """Inverse-CDF draws; P(X < xi) equals theta exactly.

    `seed` may be an int or a numpy Generator.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie in (0, 1)")
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = rng.random(count)
    left = u < theta
    out = np.empty(count)
    # piecewise exponential tails: rate lam*(1-theta) on the left, lam*theta right
    out[left] = xi + np.log(u[left] / theta) / (lam * (1.0 - theta))
    out[~left] = xi - np.log((1.0 - u[~left]) / (1.0 - theta)) / (lam * theta)
    return out


def discrepancy_to_barycenters(values: np.ndarray, params: ModelParams) -> np.ndarray:
    """n x K matrix of lambda-weighted discrepancies to each barycenter."""
    n = values.shape[0]
    k = params.barycenters.shape[0]
    cost = np.empty((n, k))
    theta = params.theta
    lam = params.lam
    for j in range(k):
        xi = params.barycenters[j]
        weight = theta + (1.0 - 2.0 * theta) * (values < xi)
        cost[:, j] = (weight * np.abs(values - xi)) @ lam
    return cost


def objective_value(data: Dataset, params: ModelParams, assignment: Assignment) -> float:
    """Penalized objective: lambda-weighted discrepancy plus the log
    normalization penalty -n * sum(log(lam*theta*(1-theta)))."""
    values = data.values
    n, p = values.shape
    if params.barycenters.shape[1] != p:
        raise ValueError("parameter dimension does not match data")
    if assignment.labels.shape[0] != n:
        raise ValueError("assignment length does not match data")
    xi = params.barycenters[assignment.labels - 1]
    weight = params.theta + (1.0 - 2.0 * params.theta) * (values < xi)
    disc = (weight * np.abs(values - xi)) @ params.lam
    penalty = -n * np.sum(np.log(params.lam * params.theta * (1.0 - params.theta)))
    return float(disc.sum() + penalty)


def dispersion_profile(sample, grid, penalized: bool = False) -> np.ndarray:
    """Dispersion sum_i Q(x_i, theta, q_n(theta)) over a theta grid.

    Returns an array of (theta, value) rows; the penalized variant adds
    -n*log(theta*(1-theta)).
    """
    sample = np.asarray(sample, dtype=float).ravel()
    grid = np.asarray(grid, dtype=float).ravel()
    if sample.size == 0:
        raise ValueError("empty sample")
    if grid.size == 0:
        raise ValueError("empty grid")
    if np.any(grid <= 0.0) or np.any(grid >= 1.0):
        raise ValueError("grid values must lie in (0, 1)")
    n = sample.size
    srt = np.sort(sample)
    idx = np.clip(np.ceil(n * grid - _QUANTILE_EPS).astype(int) - 1, 0, n - 1)
    quantiles = srt[idx]
    below = srt[None, :] < quantiles[:, None]
    weight = grid[:, None] + (1.0 - 2.0 * grid[:, None]) * below
    values = np.sum(weight * np.abs(srt[None, :] - quantiles[:, None]), axis=1)
    if penalized:
        values = values - n * np.log(grid * (1.0 - grid))
    return np.column_stack([grid, values])
