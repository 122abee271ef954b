"""Classifier evaluation and the reference classifiers built from true means.

The exact generalization error of sign(x^T w) on the two-class mixture is

    1/2 Q(mu1^T w / sqrt(w' Sigma1 w)) + 1/2 Q(-mu2^T w / sqrt(w' Sigma2 w))

which this module evaluates directly, estimates by Monte Carlo, and uses to
score the mean-difference / sign / top-k oracle classifiers as well as the
1-bit (sign) compression and top-k sparsification of solver outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gmmreg.datagen import Means
from gmmreg.mathkit import q_function

__all__ = [
    "ErrorReport",
    "error_exact",
    "error_mc",
    "oracle_classifier",
    "compress_sign",
    "sparsify_topk",
]


@dataclass(frozen=True)
class ErrorReport:
    exact_error: float
    mc_error: float
    mc_samples: int
    mc_stderr: float


def _quadratic_form(w: np.ndarray, cov) -> float:
    """w' Sigma w where cov is a variance scalar, a diagonal, or a matrix."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim == 0:
        q = float(cov) * float(w @ w)
    elif cov.ndim == 1:
        if cov.shape != w.shape:
            raise ValueError("diagonal covariance length does not match w")
        q = float(np.sum(cov * w * w))
    elif cov.ndim == 2:
        if cov.shape != (w.size, w.size):
            raise ValueError("covariance matrix shape does not match w")
        q = float(w @ (cov @ w))
    else:
        raise ValueError("covariance must be scalar, diagonal, or matrix")
    if q <= 0.0 or not math.isfinite(q):
        raise ValueError("covariance is not positive definite along w")
    return q


def error_exact(w: np.ndarray, mu1: np.ndarray, mu2: np.ndarray,
                sigma1_sq, sigma2_sq) -> float:
    """Exact misclassification probability of sign(x^T w).

    sigma1_sq / sigma2_sq are the class covariances: a scalar is the
    isotropic shorthand (variance sigma^2, i.e. Sigma = sigma_sq * I), a
    vector a diagonal, a 2-D array the full matrix. Scale invariant in w.
    """
    w = np.asarray(w, dtype=float)
    if not np.any(w):
        raise ValueError("error_exact is undefined for w = 0")
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    a1 = float(mu1 @ w) / math.sqrt(_quadratic_form(w, sigma1_sq))
    a2 = float(mu2 @ w) / math.sqrt(_quadratic_form(w, sigma2_sq))
    return 0.5 * float(q_function(a1)) + 0.5 * float(q_function(-a2))


def error_mc(w: np.ndarray, means: Means, sigma: float, samples: int,
             rng: np.random.Generator) -> ErrorReport:
    """Monte Carlo misclassification frequency over fresh test points.

    A test point x ~ N(mu_b, sigma^2 I) with label b is misclassified by w
    exactly when b * mu_b^T w + sigma * ||w|| * g < 0 with g ~ N(0, 1), so the
    draw is reduced to its sufficient statistic along w: the frequency has
    the identical distribution to materializing d-dimensional points, at any
    dimension. Exact reduction, not an approximation.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    w = np.asarray(w, dtype=float)
    if not np.any(w):
        raise ValueError("error_mc is undefined for w = 0")
    norm_w = float(np.linalg.norm(w))
    m1 = float(means.mu1 @ w)
    m2 = float(means.mu2 @ w)
    labels = np.where(rng.random(samples) < 0.5, 1.0, -1.0)
    signal = np.where(labels > 0, m1, -m2)
    margin = signal + sigma * norm_w * rng.standard_normal(samples)
    phat = float(np.mean(margin < 0.0))
    stderr = math.sqrt(phat * (1.0 - phat) / samples)
    exact = error_exact(w, means.mu1, means.mu2, sigma * sigma, sigma * sigma)
    return ErrorReport(exact_error=exact, mc_error=phat,
                       mc_samples=samples, mc_stderr=stderr)


def oracle_classifier(kind: str, mu1: np.ndarray, mu2: np.ndarray,
                      k: int | None = None, *, sigma: float,
                      r: float) -> tuple[np.ndarray, float]:
    """Reference classifiers built from the true means, with predicted error.

    kind "optimal": w = mu1 - mu2, predicted Q(sqrt(d(1-r)/(2 sigma^2))).
    kind "onebit":  w = sign(mu1 - mu2), predicted Q(sqrt(d(1-r)/(pi sigma^2))).
    kind "ksparse": top-k magnitudes of mu1 - mu2, predicted via error_exact.

    The optimal/onebit predictions use the population identities
    ||mu1 - mu2||^2 ~ 2(1-r)d and ||mu1 - mu2||_1 ~ 2d sqrt((1-r)/pi), hence
    the extra sigma and r arguments (r is unused for "ksparse").
    """
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    d = mu1.size
    diff = mu1 - mu2
    if kind == "optimal":
        return diff.copy(), float(q_function(
            math.sqrt(d * (1.0 - r) / (2.0 * sigma * sigma))))
    if kind == "onebit":
        w = compress_sign(diff)
        return w, float(q_function(
            math.sqrt(d * (1.0 - r) / (math.pi * sigma * sigma))))
    if kind == "ksparse":
        if k is None or not 1 <= k <= d:
            raise ValueError(f"ksparse needs 1 <= k <= {d}, got {k}")
        w = sparsify_topk(diff, k)
        return w, error_exact(w, mu1, mu2, sigma * sigma, sigma * sigma)
    raise ValueError(f"unknown oracle kind {kind!r}")


def compress_sign(w: np.ndarray) -> np.ndarray:
    """1-bit compression: the sign pattern of w, with sign(0) := +1."""
    w = np.asarray(w, dtype=float)
    if not np.any(w):
        raise ValueError("compress_sign is undefined for w = 0")
    return np.where(w >= 0.0, 1.0, -1.0)


def sparsify_topk(w: np.ndarray, k: int) -> np.ndarray:
    """Keep the k largest-magnitude entries (ties to the lower index)."""
    w = np.asarray(w, dtype=float)
    if not 1 <= k <= w.size:
        raise ValueError(f"k must be in [1, {w.size}], got {k}")
    # stable sort on negated magnitudes keeps the lower index first on ties
    order = np.argsort(-np.abs(w), kind="stable")
    out = np.zeros_like(w)
    keep = order[:k]
    out[keep] = w[keep]
    return out
