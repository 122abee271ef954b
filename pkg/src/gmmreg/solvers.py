"""First-party solvers for min_w ||X w - z||^2 + lambda * f(w).

solve_ridge handles f = ||w||^2 exactly through the n x n dual system (d > n
makes the primal normal equations the expensive route). solve_prox is an
accelerated proximal-gradient (FISTA-style) loop with adaptive restart and
optional backtracking that covers f = l1, max-norm, quadratic, or any custom
separable penalty through its proximal map. Everything is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from gmmreg.mathkit import prox_linf

__all__ = [
    "SolveOptions",
    "SolveResult",
    "solve_ridge",
    "solve_prox",
    "solve_linf",
    "lipschitz_estimate",
    "objective_value",
]

# Weights are plain 1-D float arrays of length d throughout this package.


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 50_000
    tolerance: float = 1e-9  # relative objective decrease
    step_rule: str = "lipschitz_backtracking"  # or "fixed"

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.step_rule not in ("lipschitz_backtracking", "fixed"):
            raise ValueError(f"unknown step_rule {self.step_rule!r}")


@dataclass(frozen=True)
class SolveResult:
    """Best iterate found, with convergence bookkeeping."""

    w: np.ndarray
    converged: bool
    iterations: int
    objective: float


def solve_ridge(X: np.ndarray, z: np.ndarray, lam: float) -> np.ndarray:
    """Exact minimizer of ||Xw - z||^2 + lam ||w||^2 via the dual system.

    w = X^T (X X^T + lam I)^{-1} z, an n x n solve. Requires lam > 0: at
    lam = 0 the over-parametrized problem has no unique minimizer.
    """
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    if lam <= 0.0:
        raise ValueError("solve_ridge needs lam > 0 (lam = 0 is degenerate "
                         "in the over-parametrized regime)")
    n = X.shape[0]
    if z.shape != (n,):
        raise ValueError(f"z has shape {z.shape}, expected ({n},)")
    K = X @ X.T
    K[np.diag_indices_from(K)] += lam
    w = X.T @ np.linalg.solve(K, z)
    # normal equations: (X^T X + lam I) w = X^T z
    lhs = X.T @ (X @ w) + lam * w
    rhs = X.T @ z
    scale = max(float(np.linalg.norm(rhs)), 1e-300)
    rel = float(np.linalg.norm(lhs - rhs)) / scale
    if rel > 1e-8:
        raise ArithmeticError(f"ridge normal-equation residual {rel:.2e} > 1e-8; "
                              "system is too ill-conditioned")
    return w


def lipschitz_estimate(X: np.ndarray) -> float:
    """2 * sigma_max(X)^2 by power iteration on the smaller Gram matrix."""
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    B = X @ X.T if n <= d else X.T @ X
    m = B.shape[0]
    if not np.any(B):
        raise ValueError("lipschitz_estimate needs a nonzero matrix")
    # fixed, generic start direction keeps the whole solve deterministic
    v = np.cos(np.arange(m)) + 1.1
    v /= np.linalg.norm(v)
    rho = 0.0
    rho_prev = -1.0
    for _ in range(10_000):
        Bv = B @ v
        norm = float(np.linalg.norm(Bv))
        if norm == 0.0:  # v landed in the null space; nudge deterministically
            v = np.roll(v, 1) + 1e-3
            v /= np.linalg.norm(v)
            continue
        v = Bv / norm
        rho = float(v @ (B @ v))
        if abs(rho - rho_prev) <= 1e-14 * max(rho, 1.0):
            break
        rho_prev = rho
    return 2.0 * rho


def objective_value(X: np.ndarray, z: np.ndarray, lam: float,
                    f: Callable[[np.ndarray], float], w: np.ndarray) -> float:
    """||Xw - z||^2 + lam * f(w), exactly as written."""
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    if X.shape[1] != w.shape[0] or X.shape[0] != z.shape[0]:
        raise ValueError(f"dimension mismatch: X {X.shape}, z {z.shape}, "
                         f"w {w.shape}")
    res = X @ w - z
    return float(res @ res) + lam * float(f(w))


def solve_prox(X: np.ndarray, z: np.ndarray, lam: float,
               prox: Callable[[np.ndarray, float], np.ndarray],
               opts: SolveOptions = SolveOptions(), *,
               f: Callable[[np.ndarray], float]) -> SolveResult:
    """Accelerated proximal gradient for ||Xw - z||^2 + lam f(w).

    prox(v, t) must be the proximal map of t*f, and f the penalty itself
    (needed by the objective-decrease termination rule). Runs FISTA momentum
    with restart on objective increase; with the default step rule the
    Lipschitz estimate is doubled whenever the quadratic upper bound fails.
    Terminates once ten consecutive iterations jointly improve the best
    objective by less than tolerance * (1 + |objective|), or at the iteration
    cap, in which case the result is flagged not converged.
    """
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    n, d = X.shape
    if z.shape != (n,):
        raise ValueError(f"z has shape {z.shape}, expected ({n},)")
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")

    Xt = X.T
    L = lipschitz_estimate(X)
    backtracking = opts.step_rule == "lipschitz_backtracking"

    w = np.zeros(d)
    Xw = np.zeros(n)
    w_prev = w
    Xw_prev = Xw
    theta = 1.0
    obj_prev = float(z @ z) + (lam * float(f(w)) if lam > 0.0 else 0.0)
    best_obj = obj_prev
    best_w = w.copy()
    anchor_obj = best_obj  # objective at the last meaningful-progress point
    stall = 0
    converged = False
    it = 0
    for it in range(1, opts.max_iterations + 1):
        coef = (theta - 1.0) / (0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta)))
        y = w + coef * (w - w_prev)
        Xy = Xw + coef * (Xw - Xw_prev)
        r_y = Xy - z
        grad = 2.0 * (Xt @ r_y)
        g_y = float(r_y @ r_y)
        while True:
            step = 1.0 / L
            v = y - step * grad
            w_new = prox(v, lam * step) if lam > 0.0 else v
            Xw_new = X @ w_new
            r_new = Xw_new - z
            g_new = float(r_new @ r_new)
            if not backtracking:
                break
            dw = w_new - y
            bound = g_y + float(grad @ dw) + 0.5 * L * float(dw @ dw)
            if g_new <= bound * (1.0 + 1e-12) + 1e-12:
                break
            L *= 2.0
        obj_new = g_new + (lam * float(f(w_new)) if lam > 0.0 else 0.0)

        last_best = best_obj
        if obj_new < best_obj:
            best_obj, best_w = obj_new, w_new.copy()
        assert best_obj <= last_best  # best-iterate sequence is non-increasing

        theta_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
        if obj_new > obj_prev:  # adaptive restart: drop the momentum
            theta_next = 1.0
            w_prev, Xw_prev = w_new, Xw_new
        else:
            w_prev, Xw_prev = w, Xw
        w, Xw = w_new, Xw_new
        theta = theta_next
        obj_prev = obj_new

        rel_drop = (anchor_obj - best_obj) / (1.0 + abs(best_obj))
        if rel_drop < opts.tolerance:
            stall += 1
            if stall >= 10:
                converged = True
                break
        else:
            stall = 0
            anchor_obj = best_obj

    return SolveResult(w=best_w, converged=converged, iterations=it,
                       objective=best_obj)


def solve_linf(X: np.ndarray, z: np.ndarray, lam: float,
               opts: SolveOptions = SolveOptions()) -> SolveResult:
    """solve_prox specialized to the max-norm penalty."""
    return solve_prox(X, z, lam, prox_linf, opts,
                      f=lambda w: float(np.max(np.abs(w))))
