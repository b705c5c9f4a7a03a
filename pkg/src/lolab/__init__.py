"""Exact Littlewood-Offord anticoncentration toolkit."""

from lolab.config import Budget, BudgetExceeded, CertificateError, PreconditionError
from lolab.exactmath import GR, GaussianRational, kernel_basis, rank, solve_linear

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "BudgetExceeded",
    "CertificateError",
    "PreconditionError",
    "GR",
    "GaussianRational",
    "kernel_basis",
    "rank",
    "solve_linear",
]
