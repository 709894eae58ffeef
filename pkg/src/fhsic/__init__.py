"""Modified HSIC independence testing for curves observed on a grid."""

from .errors import CurveFormatError, DimensionError, DomainError, FhsicError
from .hsic import (
    HsicEstimate,
    TestOutcome,
    WeightScheme,
    alpha_hat,
    independence_test,
    modified_hsic,
    naive_hsic,
    norm_cdf,
    norm_ppf,
    permutation_test_naive,
    sigma_sq_hat,
    weight_sequence,
)
from .kernels import (
    CurveSet,
    Grid,
    KernelSpec,
    gram_matrix,
    kernel_eval,
    l2_squared_distance,
    trapezoid_weights,
)

__all__ = [
    "CurveFormatError",
    "CurveSet",
    "DimensionError",
    "DomainError",
    "FhsicError",
    "Grid",
    "HsicEstimate",
    "KernelSpec",
    "TestOutcome",
    "WeightScheme",
    "alpha_hat",
    "gram_matrix",
    "independence_test",
    "kernel_eval",
    "l2_squared_distance",
    "modified_hsic",
    "naive_hsic",
    "norm_cdf",
    "norm_ppf",
    "permutation_test_naive",
    "sigma_sq_hat",
    "trapezoid_weights",
    "weight_sequence",
]

__version__ = "0.1.0"
