"""Command-line entry points: fit, simulate, benchmark, profile."""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from .baseline import kmeans_fit
from .core import Dataset, Variant, VariantConfig, dispersion_profile
from .datagen import Scenario, ScenarioSpec, generate
from .estimator import fit
from .metrics import adjusted_rand_index

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

_FLOAT_FMT = "%.17g"


class DataError(Exception):
    pass


def _read_csv_matrix(path, truth_col=None):
    """Parse a numeric CSV; returns (matrix, truth_labels_or_None).

    A non-numeric first row is treated as a header. `truth_col` may be a
    header name or a 0-based column index.
    """
    try:
        with open(path, newline="") as handle:
            rows = [row for row in csv.reader(handle) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")

    header = None
    first = rows[0]
    try:
        [float(cell) for cell in first]
    except ValueError:
        header = [cell.strip() for cell in first]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path} has no data rows")

    width = len(rows[0])
    matrix = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"row {i + 1} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            try:
                matrix[i, j] = float(cell)
            except ValueError:
                raise DataError(
                    f"non-numeric value {cell!r} at row {i + 1}, column {j + 1}"
                ) from None

    truth = None
    if truth_col is not None:
        if header is not None and truth_col in header:
            idx = header.index(truth_col)
        else:
            try:
                idx = int(truth_col)
            except ValueError:
                raise DataError(f"unknown truth column {truth_col!r}") from None
            if not 0 <= idx < width:
                raise DataError(f"truth column index {idx} out of range")
        truth = matrix[:, idx].astype(int)
        matrix = np.delete(matrix, idx, axis=1)
    if not np.all(np.isfinite(matrix)):
        bad = np.argwhere(~np.isfinite(matrix))[0]
        raise DataError(f"non-finite value at row {bad[0] + 1}, column {bad[1] + 1}")
    return matrix, truth


def _write_matrix(path, matrix):
    np.savetxt(path, np.atleast_2d(matrix), fmt=_FLOAT_FMT, delimiter=",")


def _config_from_args(args) -> VariantConfig:
    return VariantConfig(
        variant=Variant(args.variant),
        k=args.k,
        restarts=args.restarts,
        max_iter=args.max_iter,
        seed=args.seed,
    )


def cmd_fit(args) -> int:
    matrix, truth = _read_csv_matrix(args.csv, args.truth_col)
    config = _config_from_args(args)
    if matrix.shape[0] < config.k:
        raise UsageError("fewer points than clusters")
    result = fit(Dataset(matrix), config)
    report = {
        "variant": config.variant.value,
        "k": config.k,
        "restarts": config.restarts,
        "max_iter": config.max_iter,
        "seed": config.seed,
        "theta": result.params.theta.tolist(),
        "lambda": result.params.lam.tolist(),
        "barycenters": result.params.barycenters.tolist(),
        "objective": result.objective,
        "iterations": result.iterations,
        "restart_index": result.restart_index,
        "converged": result.converged,
    }
    if truth is not None:
        report["ari"] = adjusted_rand_index(truth, result.assignment.labels)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out + ".json", "w") as handle:
            handle.write(text)
        _write_matrix(args.out + "_labels.csv",
                      result.assignment.labels.reshape(-1, 1))
    sys.stdout.write(text)
    return EXIT_OK


def _spec_from_args(args, seed=None) -> ScenarioSpec:
    return ScenarioSpec(
        scenario=Scenario(args.scenario),
        k=args.k,
        n=args.n,
        p=args.p,
        relevant_fraction=args.relevant,
        dependent=args.dependent,
        seed=args.seed if seed is None else seed,
    )


def cmd_simulate(args) -> int:
    labeled = generate(_spec_from_args(args))
    out = args.out or "kq_sim"
    _write_matrix(out + "_data.csv", labeled.data.values)
    _write_matrix(out + "_truth.csv", labeled.truth.labels.reshape(-1, 1))
    sys.stdout.write(f"{out}_data.csv\n{out}_truth.csv\n")
    return EXIT_OK


_BENCH_METHODS = ("cu", "cs", "vu", "vs", "kmeans")


def run_benchmark(args):
    """Per-method ARI for each replicate; returns (methods, R x M array)."""
    seeds = np.random.SeedSequence(args.seed).generate_state(2 * args.replicates)
    scores = np.empty((args.replicates, len(_BENCH_METHODS)))
    for r in range(args.replicates):
        labeled = generate(_spec_from_args(args, seed=int(seeds[2 * r])))
        fit_seed = int(seeds[2 * r + 1])
        truth = labeled.truth.labels
        for m, method in enumerate(_BENCH_METHODS):
            if method == "kmeans":
                res = kmeans_fit(labeled.data, args.k, restarts=args.restarts,
                                 max_iter=args.max_iter, seed=fit_seed)
                labels = res.labels
            else:
                config = VariantConfig(variant=Variant(method), k=args.k,
                                       restarts=args.restarts,
                                       max_iter=args.max_iter, seed=fit_seed)
                labels = fit(labeled.data, config).assignment.labels
            scores[r, m] = adjusted_rand_index(truth, labels)
    return _BENCH_METHODS, scores


def cmd_benchmark(args) -> int:
    if args.replicates < 1:
        raise UsageError("replicates must be >= 1")
    start = time.perf_counter()
    methods, scores = run_benchmark(args)
    elapsed = time.perf_counter() - start
    lines = ["method,mean_ari_x100,se_x100,replicates"]
    for m, method in enumerate(methods):
        col = scores[:, m] * 100.0
        se = float(col.std(ddof=1) / np.sqrt(len(col))) if len(col) > 1 else 0.0
        lines.append(f"{method},{col.mean():.2f},{se:.2f},{len(col)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
        rep_lines = ["replicate,method,ari"]
        for r in range(scores.shape[0]):
            for m, method in enumerate(methods):
                rep_lines.append(f"{r},{method},{_FLOAT_FMT % scores[r, m]}")
        with open(args.out + ".replicates.csv", "w") as handle:
            handle.write("\n".join(rep_lines) + "\n")
    sys.stdout.write(text)
    print(f"benchmark wall-clock: {elapsed * 1000.0:.0f} ms", file=sys.stderr)
    return EXIT_OK


_PROFILE_DISTS = ("gaussian", "pos-skew", "neg-skew")


def cmd_profile(args) -> int:
    if args.csv:
        matrix, _ = _read_csv_matrix(args.csv)
    else:
        rng = np.random.default_rng(args.seed)
        draws = rng.standard_normal(args.n)
        if args.dist == "gaussian":
            column = draws
        elif args.dist == "pos-skew":
            column = np.exp(draws)
        else:
            column = -np.exp(draws)
        matrix = column.reshape(-1, 1)
    grid = np.arange(1, args.grid + 1) / (args.grid + 1)
    lines = ["column,theta,dispersion,penalized"]
    for j in range(matrix.shape[1]):
        plain = dispersion_profile(matrix[:, j], grid, penalized=False)
        pen = dispersion_profile(matrix[:, j], grid, penalized=True)
        for (theta, disp), (_, pval) in zip(plain, pen):
            lines.append(
                f"{j},{_FLOAT_FMT % theta},{_FLOAT_FMT % disp},{_FLOAT_FMT % pval}"
            )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    sys.stdout.write(text)
    return EXIT_OK


class UsageError(Exception):
    pass


def _add_solver_flags(parser):
    parser.add_argument("--variant", choices=[v.value for v in Variant], default="cu")
    parser.add_argument("--k", type=int, required=True)
    parser.add_argument("--restarts", type=int, default=30)
    parser.add_argument("--max-iter", type=int, default=1000, dest="max_iter")
    parser.add_argument("--seed", type=int, default=0)


def _add_scenario_flags(parser):
    parser.add_argument("--scenario", type=int, choices=[1, 2, 3, 4, 5], required=True)
    parser.add_argument("--k", type=int, required=True)
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--p", type=int, required=True)
    parser.add_argument("--relevant", type=float, default=1.0)
    parser.add_argument("--dependent", action="store_true")
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kquantiles",
        description="Quantile-based clustering: fit, simulate, benchmark, profile.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="cluster a CSV matrix")
    p_fit.add_argument("csv")
    _add_solver_flags(p_fit)
    p_fit.add_argument("--truth-col", dest="truth_col", default=None)
    p_fit.add_argument("--out", default=None)
    p_fit.set_defaults(func=cmd_fit)

    p_sim = sub.add_parser("simulate", help="generate a synthetic dataset")
    _add_scenario_flags(p_sim)
    p_sim.add_argument("--out", default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_bench = sub.add_parser("benchmark", help="ARI benchmark over replicates")
    _add_scenario_flags(p_bench)
    p_bench.add_argument("--replicates", type=int, default=1)
    p_bench.add_argument("--restarts", type=int, default=30)
    p_bench.add_argument("--max-iter", type=int, default=1000, dest="max_iter")
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=cmd_benchmark)

    p_prof = sub.add_parser("profile", help="dispersion profile over theta grid")
    p_prof.add_argument("--csv", default=None)
    p_prof.add_argument("--dist", choices=_PROFILE_DISTS, default="gaussian")
    p_prof.add_argument("--n", type=int, default=10000)
    p_prof.add_argument("--grid", type=int, default=99)
    p_prof.add_argument("--seed", type=int, default=0)
    p_prof.add_argument("--out", default=None)
    p_prof.set_defaults(func=cmd_profile)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        # constructor validation errors are usage errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
