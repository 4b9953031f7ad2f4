"""Quantile-based clustering with a Lloyd-style greedy solver."""

from .baseline import KMeansResult, kmeans_fit
from .core import (
    Assignment,
    Dataset,
    FitResult,
    ModelParams,
    Variant,
    VariantConfig,
    ald_density,
    ald_sample,
    dispersion_profile,
    empirical_quantile,
    multivariate_discrepancy,
    objective_value,
    quantile_discrepancy,
)
from .datagen import (
    LabeledDataset,
    Scenario,
    ScenarioSpec,
    generate,
    random_correlation_matrix,
)
from .estimator import (
    assign,
    fit,
    fit_once,
    initialize,
    update_barycenters,
    update_lambda,
    update_theta,
)
from .metrics import ContingencyTable, adjusted_rand_index

__all__ = [
    "Assignment",
    "ContingencyTable",
    "Dataset",
    "FitResult",
    "KMeansResult",
    "LabeledDataset",
    "ModelParams",
    "Scenario",
    "ScenarioSpec",
    "Variant",
    "VariantConfig",
    "adjusted_rand_index",
    "ald_density",
    "ald_sample",
    "assign",
    "dispersion_profile",
    "empirical_quantile",
    "fit",
    "fit_once",
    "generate",
    "initialize",
    "kmeans_fit",
    "multivariate_discrepancy",
    "objective_value",
    "quantile_discrepancy",
    "random_correlation_matrix",
    "update_barycenters",
    "update_lambda",
    "update_theta",
]

__version__ = "0.1.0"
