"""Large-lambda approximations and the score-based one-bit classifier.

Once the regularizer dominates the fit term, each scalarized problem from
`theory` collapses to something much simpler: a closed form for ridge, and a
one-variable minimization over a multiplier eta for the l1 / l-inf penalties.
These are cheap companions to the full predictors, good to a few 1e-3 in
error once lambda is a few orders of magnitude above sigma^2 n.

The eta solutions also carry the (gamma, beta) pair that weights the
empirical-mean score vector behind `build_onebit_from_scores`, the
plug-in construction of a +-1 classifier from training data alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import error_exact
from .datagen import GmmInstance, ProblemConfig
from .mathkit import q_function

__all__ = [
    "RidgeApprox",
    "EtaSolution",
    "ridge_large_lambda",
    "l1_eta_solve",
    "linf_eta_solve",
    "build_onebit_from_scores",
]

# golden-section bracket for eta (log10 space) and iteration cap
_ETA_LO = 1e-18
_ETA_HI = 1e6
_GOLDEN_ITERS = 200
_UNIMODAL_POINTS = 121


@dataclass(frozen=True)
class RidgeApprox:
    """Closed-form ridge scalars and error for the heavy-regularization regime.

    gamma scales the mean-difference direction, beta_dir the independent
    Gaussian direction (it is a direction coefficient, not a dual variable).
    limit_argument is the sigma << sqrt(n) limit of the error's Q-argument,
    sqrt(d(1-r)) / (sigma sqrt(2)); predicted_error keeps the full argument.
    """

    gamma: float
    beta_dir: float
    predicted_error: float
    limit_argument: float


@dataclass(frozen=True)
class EtaSolution:
    """Minimizer of a one-variable eta objective plus the induced scalars.

    derivative_residual is the projected stationarity residual at eta,
    normalized by the sum of the derivative's term magnitudes: 0 at an
    interior critical point, and also 0 when eta = 0 with the objective
    increasing to the right (the bound is active).
    """

    eta: float
    gamma: float
    beta: float
    regularizer: str
    derivative_residual: float


def ridge_large_lambda(config: ProblemConfig) -> RidgeApprox:
    """Closed-form approximation of the ridge scalars and error.

    gamma = (1-2c) / (d(1-r+2 sigma^2/n) + 2 lambda/n),
    beta_dir = 2 sqrt(n c (1-c)) / (d sigma^2 + lambda), and the error is
    Q(d(1-r) gamma / (sigma sqrt(2d(1-r+2 sigma^2/n) gamma^2 + d sigma^2
    beta_dir^2))). Accurate once lambda >> sigma^2 n; evaluable for any
    lambda > 0.
    """
    if config.lam <= 0.0:
        raise ValueError("ridge_large_lambda needs lambda > 0")
    n, d, c, r, sigma = (config.n, config.d, config.c, config.r, config.sigma)
    s2 = sigma * sigma
    shape = 1.0 - r + 2.0 * s2 / n

    gamma = (1.0 - 2.0 * c) / (d * shape + 2.0 * config.lam / n)
    beta_dir = 2.0 * math.sqrt(n * c * (1.0 - c)) / (d * s2 + config.lam)

    denom = sigma * math.sqrt(2.0 * d * shape * gamma * gamma
                              + d * s2 * beta_dir * beta_dir)
    if denom == 0.0:
        error = 0.5
    else:
        error = float(q_function(d * (1.0 - r) * gamma / denom))

    limit_argument = math.sqrt(d * (1.0 - r)) / (sigma * math.sqrt(2.0))
    return RidgeApprox(gamma=gamma, beta_dir=beta_dir,
                       predicted_error=error, limit_argument=limit_argument)


def _golden_min(fun, lo: float, hi: float, iters: int) -> float:
    """Golden-section minimizer of a unimodal fun on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(iters):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = fun(x2)
        if b - a <= 1e-15 * max(abs(a), abs(b), 1.0):
            break
    return 0.5 * (a + b)


def _check_unimodal(fun, lo_log10: float, hi_log10: float, label: str) -> int:
    """Assert a single descending-to-ascending pattern on a log grid.

    Returns the grid argmin index. Raises ArithmeticError when the sampled
    objective rises and then falls again (golden-section assumptions broken)
    or when the minimum sits on the upper bracket edge (bracketing failure).
    """
    ts = np.linspace(lo_log10, hi_log10, _UNIMODAL_POINTS)
    vals = np.array([fun(t) for t in ts])
    scale = float(np.max(np.abs(vals))) + 1.0
    diffs = np.diff(vals)
    rising = False
    for step in diffs:
        if step > 1e-12 * scale:
            rising = True
        elif rising and step < -1e-12 * scale:
            raise ArithmeticError(
                f"{label} eta objective is not unimodal on the bracket "
                f"[{_ETA_LO:g}, {_ETA_HI:g}]")
    idx = int(np.argmin(vals))
    if idx == _UNIMODAL_POINTS - 1:
        raise ArithmeticError(
            f"{label} eta bracket [{_ETA_LO:g}, {_ETA_HI:g}] does not "
            "contain the minimizer (objective still decreasing at the "
            "upper edge)")
    return idx


def _eta_solve(objective, derivative_terms, scalars, label: str) -> EtaSolution:
    """Shared driver: unimodality check, golden section, boundary snap.

    objective(eta) -> value; derivative_terms(eta) -> tuple of the
    derivative's addends (their sum is d objective / d eta); scalars(eta) ->
    (gamma, beta).
    """
    lo_t, hi_t = math.log10(_ETA_LO), math.log10(_ETA_HI)
    _check_unimodal(lambda t: objective(10.0 ** t), lo_t, hi_t, label)

    t_star = _golden_min(lambda t: objective(10.0 ** t), lo_t, hi_t,
                         _GOLDEN_ITERS)
    eta = 10.0 ** t_star
    # eta = 0 is feasible and is the minimizer whenever the objective is
    # increasing on the whole bracket; the log search cannot land on it
    if objective(0.0) <= objective(eta):
        eta = 0.0

    terms = derivative_terms(eta)
    slope = math.fsum(terms)
    scale = 1.0 + math.fsum(abs(t) for t in terms)
    residual = min(slope, 0.0) / scale if eta == 0.0 else slope / scale

    gamma, beta = scalars(eta)
    return EtaSolution(eta=eta, gamma=gamma, beta=beta, regularizer=label,
                       derivative_residual=residual)


def l1_eta_solve(config: ProblemConfig) -> EtaSolution:
    """One-variable reduction of the l1 scalars for heavy regularization.

    Minimizes over eta >= 0

        lambda^2 eta + n(1-2c)^2 / (1 + 4 n eta (1-r+2 sigma^2/n) log(2d))
                     + 4 n c(1-c) / (1 + 8 sigma^2 eta log(2d))

    (log(2d) enters through the expected sup of d independent Gaussians)
    and reports gamma = -2(1-2c) / (first denominator),
    beta = -4 sqrt(c(1-c)) / (second denominator). The leading signs are
    kept as derived; consumers fix the overall classifier orientation.
    """
    if config.lam <= 0.0:
        raise ValueError("l1_eta_solve needs lambda > 0")
    n, d, c, r, sigma = (config.n, config.d, config.c, config.r, config.sigma)
    lam2 = config.lam * config.lam
    L = math.log(2.0 * d)
    a1 = 4.0 * n * (1.0 - r + 2.0 * sigma * sigma / n) * L
    a2 = 8.0 * sigma * sigma * L
    k1 = n * (1.0 - 2.0 * c) ** 2
    k2 = 4.0 * n * c * (1.0 - c)

    def objective(eta: float) -> float:
        return lam2 * eta + k1 / (1.0 + a1 * eta) + k2 / (1.0 + a2 * eta)

    def derivative_terms(eta: float) -> tuple[float, ...]:
        return (lam2,
                -k1 * a1 / (1.0 + a1 * eta) ** 2,
                -k2 * a2 / (1.0 + a2 * eta) ** 2)

    def scalars(eta: float) -> tuple[float, float]:
        gamma = -2.0 * (1.0 - 2.0 * c) / (1.0 + a1 * eta)
        beta = -4.0 * math.sqrt(c * (1.0 - c)) / (1.0 + a2 * eta)
        return gamma, beta

    return _eta_solve(objective, derivative_terms, scalars, "l1")


def linf_eta_solve(config: ProblemConfig) -> EtaSolution:
    """One-variable reduction of the l-inf scalars for heavy regularization.

    Same shape as l1_eta_solve with the concentration constant log(2d)
    replaced by d^2/pi (the sup becomes an l1 norm of d Gaussians) and the
    mass terms picking up extra n factors:

        lambda^2 eta + n^2 (1-2c)^2 / (2 + 4 n^2 eta (1-r+2 sigma^2/n) d^2/pi)
                     + 4 n^2 c(1-c) / (1 + 8 n sigma^2 eta d^2/pi)

    gamma and beta keep the l1 functional form with the substituted
    constant: gamma = -2(1-2c) / (1 + 4 n eta (1-r+2 sigma^2/n) d^2/pi),
    beta = -4 sqrt(c(1-c)) / (1 + 8 sigma^2 eta d^2/pi).
    """
    if config.lam <= 0.0:
        raise ValueError("linf_eta_solve needs lambda > 0")
    n, d, c, r, sigma = (config.n, config.d, config.c, config.r, config.sigma)
    lam2 = config.lam * config.lam
    K = d * d / math.pi
    shape = 1.0 - r + 2.0 * sigma * sigma / n
    b1 = 4.0 * n * n * shape * K
    b2 = 8.0 * n * sigma * sigma * K
    k1 = n * n * (1.0 - 2.0 * c) ** 2
    k2 = 4.0 * n * n * c * (1.0 - c)

    def objective(eta: float) -> float:
        return lam2 * eta + k1 / (2.0 + b1 * eta) + k2 / (1.0 + b2 * eta)

    def derivative_terms(eta: float) -> tuple[float, ...]:
        return (lam2,
                -k1 * b1 / (2.0 + b1 * eta) ** 2,
                -k2 * b2 / (1.0 + b2 * eta) ** 2)

    def scalars(eta: float) -> tuple[float, float]:
        gamma = -2.0 * (1.0 - 2.0 * c) / (1.0 + 4.0 * n * shape * K * eta)
        beta = (-4.0 * math.sqrt(c * (1.0 - c))
                / (1.0 + 8.0 * sigma * sigma * K * eta))
        return gamma, beta

    return _eta_solve(objective, derivative_terms, scalars, "linf")


def build_onebit_from_scores(instance: GmmInstance, gamma: float,
                             beta: float) -> np.ndarray:
    """+-1 classifier from the empirical score vector.

    Scores t = (n/2) gamma (m1_hat - m2_hat) + sqrt(n) beta a_hat, where
    m1_hat / m2_hat are the per-class empirical means of the training rows
    and a_hat is the instance's dedicated N(0, sigma^2 I) draw (re-derived
    per call, so the construction is pure). Returns -sign(t), then flips the
    whole vector if its exact error exceeds 1/2: the scalars are defined up
    to overall sign and only the orientation-fixed pattern is meaningful.
    """
    if not (math.isfinite(gamma) and math.isfinite(beta)):
        raise ValueError("gamma and beta must be finite")
    cfg = instance.config
    half = cfg.n // 2
    m1_hat = instance.X[:half].mean(axis=0)
    m2_hat = instance.X[half:].mean(axis=0)
    a_hat = instance.onebit_rng().normal(0.0, cfg.sigma, size=cfg.d)

    t = (cfg.n / 2.0) * gamma * (m1_hat - m2_hat) + math.sqrt(cfg.n) * beta * a_hat
    w = -np.sign(t)
    if not np.any(w):
        raise ValueError("score vector is identically zero; "
                         "gamma and beta cannot both vanish")
    s2 = cfg.sigma * cfg.sigma
    if error_exact(w, instance.means.mu1, instance.means.mu2, s2, s2) > 0.5:
        w = -w
    return w
