"""Synthetic benchmark scenarios with noise variables and optional
dependence via random correlation matrices."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import Assignment, Dataset


class Scenario(int, Enum):
    T_SHIFT = 1
    EXP_SHIFT = 2
    MIXED_TRANSFORMS = 3
    BETA_MILD = 4
    BETA_SKEW = 5


_VALID_K = (2, 3, 5)

# unit shifts around zero: 0, +1, -1, +2, -2 scaled by the scenario step
_SHIFT_ORDER = (0, 1, -1, 2, -2)


def _class_shifts(k: int, step: float) -> np.ndarray:
    if k == 2:
        return np.array([0.0, step])
    return step * np.array(_SHIFT_ORDER[:k], dtype=float)


@dataclass(frozen=True)
class ScenarioSpec:
    scenario: Scenario
    k: int
    n: int
    p: int
    relevant_fraction: float = 1.0
    dependent: bool = False
    seed: int = 0
    weights: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if self.k not in _VALID_K:
            raise ValueError("k must be one of 2, 3, 5")
        if self.n < self.k:
            raise ValueError("n must be at least k")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if not 0.0 < self.relevant_fraction <= 1.0:
            raise ValueError("relevant_fraction must lie in (0, 1]")
        if self.dependent and self.scenario not in (
            Scenario.T_SHIFT, Scenario.EXP_SHIFT, Scenario.MIXED_TRANSFORMS
        ):
            raise ValueError("dependent variables apply to scenarios 1-3 only")
        if self.weights is not None:
            w = tuple(float(x) for x in self.weights)
            if len(w) != self.k or any(x <= 0 for x in w):
                raise ValueError("weights must be k positive numbers")
            object.__setattr__(self, "weights", w)

    @property
    def n_relevant(self) -> int:
        return int(round(self.p * self.relevant_fraction))


@dataclass(frozen=True)
class LabeledDataset:
    data: Dataset
    truth: Assignment
    spec: ScenarioSpec


def random_correlation_matrix(p: int, seed=None) -> np.ndarray:
    """Onion-method draw, uniform over positive definite correlation matrices;
    each off-diagonal entry is marginally Beta(p/2, p/2) on (-1, 1)."""
    if p < 2:
        raise ValueError("p must be >= 2")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    corr = np.eye(p)
    beta = 1.0 + (p - 2) / 2.0
    r = 2.0 * rng.beta(beta, beta) - 1.0
    corr[0, 1] = corr[1, 0] = r
    for m in range(2, p):
        beta -= 0.5
        y = rng.beta(m / 2.0, beta)
        u = rng.standard_normal(m)
        u /= np.linalg.norm(u)
        w = np.sqrt(y) * u
        chol = np.linalg.cholesky(corr[:m, :m])
        z = chol @ w
        corr[:m, m] = z
        corr[m, :m] = z
    return corr


def _class_sizes(spec: ScenarioSpec) -> np.ndarray:
    if spec.weights is not None:
        w = np.asarray(spec.weights, dtype=float)
        sizes = np.floor(spec.n * w / w.sum()).astype(int)
        sizes = np.maximum(sizes, 1)
        # distribute the remainder to the lowest class indices
        for i in range(spec.n - sizes.sum()):
            sizes[i % spec.k] += 1
        return sizes
    base, rem = divmod(spec.n, spec.k)
    sizes = np.full(spec.k, base, dtype=int)
    sizes[:rem] += 1
    return sizes


def _gaussian_block(rng, n, cols, dependent):
    if dependent and cols >= 2:
        corr = random_correlation_matrix(cols, rng)
        chol = np.linalg.cholesky(corr)
        return rng.standard_normal((n, cols)) @ chol.T
    return rng.standard_normal((n, cols))


def _t3_block(rng, n, cols, dependent):
    # multivariate t: one chi-square divisor per row couples the block even
    # when the correlation matrix is the identity
    z = _gaussian_block(rng, n, cols, dependent)
    g = rng.chisquare(3, size=n)
    return z / np.sqrt(g / 3.0)[:, None]


_TRANSFORMS = (
    lambda w: w,
    np.exp,
    lambda w: np.log(np.abs(w)),
    np.square,
    lambda w: np.sqrt(np.abs(w)),
)


def _block_slices(cols: int):
    # five balanced blocks by column index; earlier blocks take the remainder
    base, rem = divmod(cols, 5)
    sizes = [base + (1 if b < rem else 0) for b in range(5)]
    out = []
    start = 0
    for s in sizes:
        out.append(slice(start, start + s))
        start += s
    return out


_BETA_SKEW_OPTIONS = {
    2: (((0.1, 1.0), (1.0, 10.0)), ((1.0, 10.0), (0.1, 1.0))),
    3: (((0.1, 1.0), (1.0, 10.0)), ((1.0, 10.0), (0.1, 1.0)),
        ((1.0, 3.0), (5.0, 10.0))),
    5: (((0.1, 1.0), (1.0, 5.0)), ((1.0, 5.0), (0.1, 1.0)),
        ((1.0, 3.0), (5.0, 10.0)), ((5.0, 10.0), (1.0, 3.0)),
        ((1.0, 3.0), (1.0, 3.0))),
}


def _draw_beta_params(rng, scenario: Scenario, k: int):
    if scenario == Scenario.BETA_MILD:
        return rng.uniform(1.0, 10.0), rng.uniform(1.0, 10.0)
    options = _BETA_SKEW_OPTIONS[k]
    (alo, ahi), (blo, bhi) = options[rng.integers(len(options))]
    return rng.uniform(alo, ahi), rng.uniform(blo, bhi)


def _beta_class_params(rng, scenario: Scenario, k: int, gap: float):
    """Per-class (a, b), each class resampled until its mean is within `gap`
    of every previously accepted class mean."""
    params = []
    means = []
    for _ in range(k):
        while True:
            a, b = _draw_beta_params(rng, scenario, k)
            mean = a / (a + b)
            if all(abs(mean - m) <= gap for m in means):
                params.append((a, b))
                means.append(mean)
                break
    return params


def generate(spec: ScenarioSpec) -> LabeledDataset:
    """Draw one labeled dataset for the given scenario."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    sizes = _class_sizes(spec)
    labels = np.repeat(np.arange(1, spec.k + 1), sizes)
    n, p = spec.n, spec.p
    n_rel = spec.n_relevant
    n_noise = p - n_rel
    shifts_per_row = None
    out = np.empty((n, p))

    if spec.scenario in (Scenario.T_SHIFT, Scenario.EXP_SHIFT):
        step = 1.0 if spec.scenario == Scenario.T_SHIFT else 0.6
        shifts = _class_shifts(spec.k, step)
        shifts_per_row = shifts[labels - 1]
        if spec.scenario == Scenario.T_SHIFT:
            w = _t3_block(rng, n, n_rel, spec.dependent)
            out[:, :n_rel] = w + shifts_per_row[:, None]
            out[:, n_rel:] = rng.standard_t(3, size=(n, n_noise))
        else:
            w = _gaussian_block(rng, n, n_rel, spec.dependent)
            out[:, :n_rel] = np.exp(w) + shifts_per_row[:, None]
            out[:, n_rel:] = np.exp(rng.standard_normal((n, n_noise)))
    elif spec.scenario == Scenario.MIXED_TRANSFORMS:
        shifts = 0.7 * np.arange(spec.k, dtype=float)
        shifts_per_row = shifts[labels - 1]
        w_rel = _gaussian_block(rng, n, n_rel, spec.dependent)
        rel = np.empty((n, n_rel))
        for transform, sl in zip(_TRANSFORMS, _block_slices(n_rel)):
            rel[:, sl] = transform(w_rel[:, sl] + shifts_per_row[:, None])
        out[:, :n_rel] = rel
        w_noise = rng.standard_normal((n, n_noise))
        noise = np.empty((n, n_noise))
        for transform, sl in zip(_TRANSFORMS, _block_slices(n_noise)):
            noise[:, sl] = transform(w_noise[:, sl])
        out[:, n_rel:] = noise
    else:
        gap = 0.2 if spec.scenario == Scenario.BETA_MILD else 0.1
        for col in range(n_rel):
            params = _beta_class_params(rng, spec.scenario, spec.k, gap)
            for cls, (a, b) in enumerate(params, start=1):
                mask = labels == cls
                out[mask, col] = rng.beta(a, b, size=int(mask.sum()))
        for col in range(n_rel, p):
            a, b = _draw_beta_params(rng, spec.scenario, spec.k)
            out[:, col] = rng.beta(a, b, size=n)

    data = Dataset(out)
    truth = Assignment.from_labels(labels, spec.k)
    return LabeledDataset(data=data, truth=truth, spec=spec)
