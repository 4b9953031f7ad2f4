"""Greedy Lloyd-style solver with closed-form theta/lambda/barycenter updates."""
from __future__ import annotations

import numpy as np

from .core import (
    Assignment,
    Dataset,
    FitResult,
    ModelParams,
    Variant,
    VariantConfig,
    column_quantiles,
    discrepancy_to_barycenters,
    objective_value,
)


def assign(data, params: ModelParams) -> Assignment:
    """Map each point to the barycenter with minimal lambda-weighted
    discrepancy; ties break to the lowest cluster index."""
    values = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    cost = discrepancy_to_barycenters(values, params)
    labels = np.argmin(cost, axis=1) + 1
    return Assignment.from_labels(labels, params.barycenters.shape[0])


def solve_theta(weighted_residual: float, count: float) -> float:
    """Root in (0,1) of  t^2*w - t*(2c + w) + c = 0  with w the lambda-weighted
    residual sum and c the effective observation count.

    The discriminant is 4c^2 + w^2, so both roots are real and exactly one
    lies in (0,1) (the polynomial is positive at 0 and negative at 1).
    """
    w = float(weighted_residual)
    c = float(count)
    if w == 0.0:
        return 0.5
    b = -(2.0 * c + w)
    sqrt_disc = np.hypot(2.0 * c, w)
    q = -(b + np.copysign(sqrt_disc, b)) / 2.0
    r1 = q / w
    r2 = c / q
    for root in (r2, r1):
        if 0.0 < root < 1.0:
            return float(root)
    raise FloatingPointError("theta root out of range")


def update_theta(data_column, xi_of, lam: float, theta_min: float = 1e-4) -> float:
    """Closed-form theta for one variable given per-point barycenter values."""
    x = np.asarray(data_column, dtype=float)
    residual = float(np.sum(x - np.asarray(xi_of, dtype=float)))
    theta = solve_theta(lam * residual, x.size)
    return float(np.clip(theta, theta_min, 1.0 - theta_min))


def update_lambda(
    data_column,
    xi_of,
    theta: float,
    lambda_floor: float = 1e-8,
    lambda_cap: float = 1e8,
) -> float:
    """Closed-form lambda = n / sum_i Q(x_i, theta, xi_i), clamped."""
    x = np.asarray(data_column, dtype=float)
    xi = np.asarray(xi_of, dtype=float)
    weight = theta + (1.0 - 2.0 * theta) * (x < xi)
    total = float(np.sum(weight * np.abs(x - xi)))
    if total <= 0.0:
        return lambda_cap
    return float(np.clip(x.size / total, lambda_floor, lambda_cap))


def update_barycenters(data, assignment: Assignment, theta) -> np.ndarray:
    """Within-cluster empirical theta_j-quantiles, one row per cluster."""
    values = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    theta = np.asarray(theta, dtype=float)
    k = assignment.cluster_sizes.shape[0]
    bary = np.empty((k, values.shape[1]))
    for j in range(k):
        members = values[assignment.labels == j + 1]
        if members.shape[0] == 0:
            raise ValueError("empty cluster sample")
        bary[j] = column_quantiles(members, theta)
    return bary


def initialize(data, config: VariantConfig, rng: np.random.Generator) -> ModelParams:
    """Random theta, equispaced-quantile barycenters, lambda = 1."""
    values = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    p = values.shape[1]
    lo, hi = config.theta_min, 1.0 - config.theta_min
    if config.variant.common_theta:
        theta = np.full(p, rng.uniform(lo, hi))
    else:
        theta = rng.uniform(lo, hi, size=p)
    k = config.k
    bary = np.empty((k, p))
    srt = np.sort(values, axis=0)
    cols = np.arange(p)
    n = values.shape[0]
    for j in range(k):
        if k == 1:
            theta_star = theta
        else:
            theta_star = (j / (2.0 * (k - 1))) + theta / 2.0
        idx = np.clip(np.ceil(n * theta_star - 1e-9).astype(int) - 1, 0, n - 1)
        bary[j] = srt[idx, cols]
    return ModelParams(theta=theta, lam=np.ones(p), barycenters=bary, config=config)


def _solve_theta_vec(weighted_residual: np.ndarray, count: float) -> np.ndarray:
    w = np.asarray(weighted_residual, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        b = -(2.0 * count + w)
        sqrt_disc = np.hypot(2.0 * count, w)
        q = -(b + np.copysign(sqrt_disc, b)) / 2.0
        r1 = q / w
        r2 = count / q
    out = np.where((r2 > 0.0) & (r2 < 1.0), r2, r1)
    out = np.where(w == 0.0, 0.5, out)
    if np.any((out <= 0.0) | (out >= 1.0) | ~np.isfinite(out)):
        raise FloatingPointError("theta root out of range")
    return out


def _reseed_empty_clusters(values, params, labels, sizes):
    """Move each empty cluster's barycenter to the worst-fitting point."""
    bary = params.barycenters.copy()
    xi = bary[labels - 1]
    weight = params.theta + (1.0 - 2.0 * params.theta) * (values < xi)
    disc = (weight * np.abs(values - xi)) @ params.lam
    for j in np.flatnonzero(sizes == 0):
        worst = int(np.argmax(disc))
        bary[j] = values[worst]
        disc[worst] = -np.inf
    return ModelParams(theta=params.theta, lam=params.lam, barycenters=bary,
                       config=params.config)


def _cluster_order_stats(values, labels, k):
    """Per-cluster sorted columns with zero-padded prefix sums, plus row sums
    of both for the common-theta fast path."""
    stats = []
    for j in range(k):
        members = np.sort(values[labels == j + 1], axis=0)
        prefix = np.vstack([np.zeros((1, members.shape[1])),
                            np.cumsum(members, axis=0)])
        stats.append((members, prefix, members.sum(axis=1), prefix.sum(axis=1)))
    return stats


def _quantile_rows(stats, theta):
    """Barycenter matrix: per-cluster empirical theta_j-quantiles."""
    p = theta.shape[0]
    cols = np.arange(p)
    bary = np.empty((len(stats), p))
    for j, (srt, _, _, _) in enumerate(stats):
        m = srt.shape[0]
        idx = np.clip(np.ceil(m * theta - 1e-9).astype(int) - 1, 0, m - 1)
        bary[j] = srt[idx, cols]
    return bary


def _segment_grid(stats, lo, hi):
    """Segment edges of the partition-restricted objective in theta.

    Barycenters are order statistics, so they only change when theta crosses
    a multiple of 1/m_k; between consecutive breakpoints the objective is
    smooth in theta.
    """
    pieces = [np.array([lo, hi])]
    for srt, _, _, _ in stats:
        m = srt.shape[0]
        pieces.append(np.arange(1, m) / m)
    cuts = np.unique(np.concatenate(pieces))
    return cuts[(cuts >= lo) & (cuts <= hi)]


def _chunk_masses(stats, mids, per_variable):
    """Upper/lower residual masses around the theta-quantile barycenters for
    a vector of theta values, one common theta per entry.

    Points equal to the barycenter contribute zero on either side, so
    counting them with the lower block is harmless; tiny negative values from
    prefix-sum cancellation are clipped.
    """
    c = mids.shape[0]
    if per_variable:
        p = stats[0][0].shape[1]
        upper = np.zeros((c, p))
        lower = np.zeros((c, p))
        for srt, prefix, _, _ in stats:
            m = srt.shape[0]
            idx = np.clip(np.ceil(m * mids - 1e-9).astype(int) - 1, 0, m - 1)
            xi = srt[idx]
            below = prefix[idx]
            total = prefix[m]
            lower += idx[:, None] * xi - below
            upper += (total - below) - (m - idx)[:, None] * xi
    else:
        upper = np.zeros(c)
        lower = np.zeros(c)
        for srt, _, row_sum, prefix_row_sum in stats:
            m = srt.shape[0]
            idx = np.clip(np.ceil(m * mids - 1e-9).astype(int) - 1, 0, m - 1)
            xi = row_sum[idx]
            below = prefix_row_sum[idx]
            total = prefix_row_sum[m]
            lower += idx * xi - below
            upper += (total - below) - (m - idx) * xi
    return np.maximum(upper, 0.0), np.maximum(lower, 0.0)


def _variable_masses(stats, theta):
    """Per-variable upper/lower masses at a per-variable theta vector."""
    p = theta.shape[0]
    cols = np.arange(p)
    upper = np.zeros(p)
    lower = np.zeros(p)
    for srt, prefix, _, _ in stats:
        m = srt.shape[0]
        idx = np.clip(np.ceil(m * theta - 1e-9).astype(int) - 1, 0, m - 1)
        xi = srt[idx, cols]
        below = prefix[idx, cols]
        total = prefix[m]
        lower += idx * xi - below
        upper += (total - below) - (m - idx) * xi
    return np.maximum(upper, 0.0), np.maximum(lower, 0.0)


def _clipped_lambda(discrepancy, n, config):
    with np.errstate(divide="ignore"):
        lam = np.where(discrepancy > 0.0, n / discrepancy, config.lambda_cap)
    return np.clip(lam, config.lambda_floor, config.lambda_cap)


_SEGMENT_CHUNK = 1 << 18


def _optimal_partition_params(values, assignment, config):
    """Exact minimizer of the objective over (theta, lambda, barycenters) for
    a fixed partition.

    Scans every smoothness segment of theta (see _segment_grid).  Within a
    segment the residual masses U, L are linear in theta and the optimum has
    a closed form: the quadratic root for CU/VU, sqrt(L)/(sqrt(U)+sqrt(L))
    per variable for VS (lambda profiled out), and a vectorized Newton solve
    for CS where variables couple through their discrepancy sums.  The result
    depends on the partition alone, which is what makes the scaled variants
    exactly scale-equivariant under positive column scalings.
    """
    n, p = values.shape
    variant = config.variant
    lo, hi = config.theta_min, 1.0 - config.theta_min
    stats = _cluster_order_stats(values, assignment.labels,
                                 assignment.cluster_sizes.shape[0])
    edges = _segment_grid(stats, lo, hi)
    seg_lo, seg_hi = edges[:-1], edges[1:]
    if seg_lo.size == 0:
        seg_lo, seg_hi = np.array([lo]), np.array([hi])
    chunk = max(1, _SEGMENT_CHUNK // max(p, 1))

    if variant.common_theta:
        best_value, best_theta = np.inf, 0.5
        for start in range(0, seg_lo.size, chunk):
            tlo = seg_lo[start:start + chunk]
            thi = seg_hi[start:start + chunk]
            mids = 0.5 * (tlo + thi)
            if variant == Variant.CU:
                upper, lower = _chunk_masses(stats, mids, per_variable=False)
                theta = np.clip(_solve_theta_vec(upper - lower, n * p), tlo, thi)
                value = (theta * upper + (1.0 - theta) * lower
                         - n * p * np.log(theta * (1.0 - theta)))
            else:  # CS: Newton on the pooled quadratic, vectorized over segments
                upper, lower = _chunk_masses(stats, mids, per_variable=True)
                residual = upper - lower
                theta = mids.copy()
                for _ in range(60):
                    disp = lower + theta[:, None] * residual
                    ratio = np.where(disp > 0.0,
                                     residual / np.where(disp > 0.0, disp, 1.0), 0.0)
                    w = n * ratio.sum(axis=1)
                    w_prime = -n * np.sum(ratio * ratio, axis=1)
                    f = theta * theta * w - theta * (2.0 * n * p + w) + n * p
                    f_prime = (2.0 * theta * w - (2.0 * n * p + w)
                               + (theta * theta - theta) * w_prime)
                    step = np.where(f_prime != 0.0, f / np.where(f_prime != 0.0, f_prime, 1.0), 0.0)
                    new = np.clip(theta - step, tlo, thi)
                    if np.array_equal(new, theta):
                        break
                    theta = new
                disp = theta[:, None] * upper + (1.0 - theta[:, None]) * lower
                lam = _clipped_lambda(disp, n, config)
                value = (np.sum(lam * disp, axis=1) - n * np.sum(np.log(lam), axis=1)
                         - n * p * np.log(theta * (1.0 - theta)))
            pick = int(np.argmin(value))
            if value[pick] < best_value:
                best_value, best_theta = float(value[pick]), float(theta[pick])
        theta = np.full(p, best_theta)
    else:
        best_value = np.full(p, np.inf)
        theta = np.full(p, 0.5)
        for start in range(0, seg_lo.size, chunk):
            tlo = seg_lo[start:start + chunk, None]
            thi = seg_hi[start:start + chunk, None]
            mids = 0.5 * (tlo[:, 0] + thi[:, 0])
            upper, lower = _chunk_masses(stats, mids, per_variable=True)
            if variant == Variant.VS:  # lambda profiled out per variable
                root_u, root_l = np.sqrt(upper), np.sqrt(lower)
                denom = root_u + root_l
                cand = np.where(denom > 0.0,
                                root_l / np.where(denom > 0.0, denom, 1.0), 0.5)
                cand = np.clip(cand, tlo, thi)
                disp = cand * upper + (1.0 - cand) * lower
                lam = _clipped_lambda(disp, n, config)
                value = lam * disp - n * np.log(lam * cand * (1.0 - cand))
            else:  # VU
                cand = np.clip(_solve_theta_vec(upper - lower, n), tlo, thi)
                value = (cand * upper + (1.0 - cand) * lower
                         - n * np.log(cand * (1.0 - cand)))
            pick = np.argmin(value, axis=0)
            cols = np.arange(p)
            better = value[pick, cols] < best_value
            best_value = np.where(better, value[pick, cols], best_value)
            theta = np.where(better, cand[pick, cols], theta)

    if variant.scaled:
        upper, lower = _variable_masses(stats, theta)
        lam = _clipped_lambda(theta * upper + (1.0 - theta) * lower, n, config)
    else:
        lam = np.ones(p)
    bary = _quantile_rows(stats, theta)
    return ModelParams(theta=theta, lam=lam, barycenters=bary, config=config)


def fit_once(data, config: VariantConfig, seed=None, collect_trace: bool = False) -> FitResult:
    """One greedy run: assign, update theta, update lambda (scaled variants),
    update barycenters, until the labels are stable and the objective stops
    decreasing.

    Stopping only on label equality would leave theta and lambda at whatever
    mid-trajectory values they held when the partition froze; the extra sweeps
    drive them to the exact fixed point of the final partition, so the
    reported parameters depend on the partition alone.  Termination is still
    guaranteed: the objective is non-increasing and a strictly decreasing
    float sequence is finite.
    """
    dataset = data if isinstance(data, Dataset) else Dataset(np.asarray(data, dtype=float))
    values = dataset.values
    n, p = values.shape
    if n < config.k:
        raise ValueError("fewer points than clusters")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    params = initialize(dataset, config, rng)
    variant = config.variant

    trace = []
    prev_labels = None
    prev_objective = np.inf
    converged = False
    iterations = 0
    assignment = None

    def record(step, assignment, exempt=False):
        if collect_trace:
            trace.append((step, objective_value(dataset, params, assignment), exempt))

    for iterations in range(1, config.max_iter + 1):
        assignment = assign(values, params)
        exempt = False
        if np.any(assignment.cluster_sizes == 0):
            for _ in range(config.k):
                params = _reseed_empty_clusters(
                    values, params, assignment.labels, assignment.cluster_sizes)
                assignment = assign(values, params)
                exempt = True
                if not np.any(assignment.cluster_sizes == 0):
                    break
        record("assign", assignment, exempt)
        labels_stable = (prev_labels is not None
                         and np.array_equal(assignment.labels, prev_labels))
        prev_labels = assignment.labels

        xi = params.barycenters[assignment.labels - 1]
        residuals = values - xi

        if variant.common_theta:
            pooled = float(np.sum(params.lam * residuals.sum(axis=0)))
            theta_val = solve_theta(pooled, n * p)
            theta = np.full(p, np.clip(theta_val, config.theta_min, 1.0 - config.theta_min))
        else:
            weighted = params.lam * residuals.sum(axis=0)
            theta = np.clip(_solve_theta_vec(weighted, n),
                            config.theta_min, 1.0 - config.theta_min)
        params = ModelParams(theta=theta, lam=params.lam,
                             barycenters=params.barycenters, config=config)
        record("theta", assignment)

        if variant.scaled:
            weight = theta + (1.0 - 2.0 * theta) * (values < xi)
            totals = np.sum(weight * np.abs(residuals), axis=0)
            with np.errstate(divide="ignore"):
                lam = np.where(totals > 0.0, n / totals, config.lambda_cap)
            lam = np.clip(lam, config.lambda_floor, config.lambda_cap)
            params = ModelParams(theta=theta, lam=lam,
                                 barycenters=params.barycenters, config=config)
            record("lambda", assignment)

        bary = update_barycenters(values, assignment, theta)
        params = ModelParams(theta=params.theta, lam=params.lam,
                             barycenters=bary, config=config)
        record("barycenters", assignment)

        objective = objective_value(dataset, params, assignment)
        prev_objective = min(prev_objective, objective)
        if labels_stable:
            polished = _optimal_partition_params(values, assignment, config)
            polished_objective = objective_value(dataset, polished, assignment)
            if polished_objective < prev_objective:
                params = polished
                record("polish", assignment)
                prev_objective = polished_objective
                continue
            converged = True
            break

    objective = objective_value(dataset, params, assignment)
    return FitResult(params=params, assignment=assignment, objective=objective,
                     iterations=iterations, restart_index=0, converged=converged,
                     trace=tuple(trace))


def fit(data, config: VariantConfig, collect_trace: bool = False) -> FitResult:
    """Multi-restart solver; returns the restart with the smallest objective.

    Deterministic given (data, config.seed): restart r draws its generator
    from the r-th spawn of the master seed sequence.
    """
    children = np.random.SeedSequence(config.seed).spawn(config.restarts)
    best = None
    for r, child in enumerate(children):
        result = fit_once(data, config, seed=np.random.default_rng(child),
                          collect_trace=collect_trace)
        if best is None or result.objective < best.objective:
            best = FitResult(params=result.params, assignment=result.assignment,
                             objective=result.objective, iterations=result.iterations,
                             restart_index=r, converged=result.converged,
                             trace=result.trace)
    return best
