"""Regularized linear regression for noisy Gaussian mixture classification.

Solves ridge / l1 / max-norm regularized least squares on two-component
Gaussian mixture data with corrupted labels, and predicts the resulting
classification error, sparsity, and sign-compression behavior from
low-dimensional scalar optimizations that the high-dimensional programs
concentrate on.
"""

from gmmreg import approx, classify, datagen, harness, mathkit, solvers, theory

__all__ = [
    "approx",
    "classify",
    "datagen",
    "harness",
    "mathkit",
    "solvers",
    "theory",
]

__version__ = "0.1.0"
