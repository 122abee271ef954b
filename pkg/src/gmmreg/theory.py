"""Scalar saddle-point predictors for the regularized regression programs.

Each regularizer's high-dimensional program concentrates on a 2-3 variable
min-max problem whose solution scalars (tau, beta, gamma, ...) determine the
asymptotic classification error through a single Q-function expression
(error_from_scalars), plus the sparsity count of the l1 solution and the
at-bound count of the max-norm solution.

The searches mirror one architecture: a grid over the outer (min) variables,
a vectorized grid plus multistart compass ascent over the inner (max)
variables, two refinement rounds that shrink every box tenfold around the
incumbent, and a final derivative-free polish. Ridge is special: its
scalarization is a plain jointly convex 2-variable minimum, solved by nested
bounded 1-D minimization with rigorous brackets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from gmmreg.datagen import ProblemConfig
from gmmreg.mathkit import (EnvelopeSpec, QuadratureRule, q_function,
                            truncated_moment)

__all__ = [
    "MinimaxError",
    "Axis",
    "MinimaxOptions",
    "MinimaxResult",
    "scalar_minimax",
    "error_from_scalars",
    "RidgeSolution",
    "L1Solution",
    "LinfSolution",
    "MasterSolution",
    "predict_ridge",
    "predict_l1",
    "predict_linf",
    "predict_master",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


# --------------------------------------------------------------------------
# error formula shared by every predictor
# --------------------------------------------------------------------------

def error_from_scalars(gamma: float, tau: float, n: int, c: float) -> float:
    """Classification error implied by the saddle scalars (gamma, tau).

    Q(gamma / (2 sqrt(radicand))) with
    radicand = 1/(n tau^2) - (1-c)(gamma/2 - 1)^2 - c(gamma/2 + 1)^2,
    the squared norm sigma^2 ||w||^2 reconstructed from the fixed-point
    identities. A nonpositive radicand means the scalars cannot have come
    from a valid solution.
    """
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    radicand = (1.0 / (n * tau * tau)
                - (1.0 - c) * (gamma / 2.0 - 1.0) ** 2
                - c * (gamma / 2.0 + 1.0) ** 2)
    if radicand <= 0.0:
        raise ValueError("scalars inconsistent with a valid w norm "
                         f"(radicand {radicand:.3e} <= 0 at gamma={gamma}, "
                         f"tau={tau}, n={n}, c={c})")
    return float(q_function(gamma / (2.0 * math.sqrt(radicand))))


# reconstructed squared norms this many times below 1/(n tau^2) are treated
# as the zero-solution branch rather than fed through the error formula
_DEGENERATE_RTOL = 1e-9


def _error_or_degenerate(gamma: float, tau: float, n: int,
                         c: float) -> tuple[float, bool]:
    """error_from_scalars, with the vanishing-norm branch mapped to chance.

    Above the penalty's kill threshold the saddle search converges to the
    boundary where the reconstructed norm vanishes (gamma -> 0, the radicand
    -> 0+). There the solution is w = 0, the classifier abstains, and the
    error is 1/2 by convention; the raw formula Q(gamma / (2 sqrt(radicand)))
    is a 0/0 limit whose numerical value would depend on how the optimizer
    happened to stall. Returns (error, degenerate_flag).
    """
    radicand = (1.0 / (n * tau * tau)
                - (1.0 - c) * (gamma / 2.0 - 1.0) ** 2
                - c * (gamma / 2.0 + 1.0) ** 2)
    if radicand <= _DEGENERATE_RTOL / (n * tau * tau):
        return 0.5, True
    return error_from_scalars(gamma, tau, n, c), False


# --------------------------------------------------------------------------
# generic grid / ascent min-max engine
# --------------------------------------------------------------------------

class MinimaxError(RuntimeError):
    """Saddle search failure: infeasible grid or a solution on a box face."""


@dataclass(frozen=True)
class Axis:
    """One search dimension of scalar_minimax.

    scale "linear" or "log" (lo > 0), or "log0": the grid is {0} plus a
    log-spaced tail over the top `decades` decades below hi, for variables
    whose natural scale is unknown but whose constraint boundary is 0.
    lo_natural / hi_natural mark faces that are legitimate constraint
    boundaries; landing on any other face of the original box is an error.
    """

    name: str
    lo: float
    hi: float
    scale: str = "linear"
    points: int = 33
    lo_natural: bool = False
    hi_natural: bool = False
    decades: float = 8.0  # log0 only: span of the positive part

    def __post_init__(self) -> None:
        if self.scale not in ("linear", "log", "log0"):
            raise ValueError(f"unknown axis scale {self.scale!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"axis {self.name}: box must be finite")
        if self.lo >= self.hi:
            raise ValueError(f"axis {self.name}: lo must be < hi")
        if self.scale == "log" and self.lo <= 0.0:
            raise ValueError(f"axis {self.name}: log scale needs lo > 0")
        if self.scale == "log0" and self.lo != 0.0:
            raise ValueError(f"axis {self.name}: log0 scale needs lo == 0")
        if self.points < 2:
            raise ValueError(f"axis {self.name}: needs >= 2 points")

    # metric coordinates: the space in which steps and shrinks are uniform
    def to_metric(self, x: float) -> float:
        if self.scale == "linear":
            return x
        floor = self.hi * 10.0 ** (-self.decades) if self.scale == "log0" else self.lo
        return math.log10(max(x, floor))

    def from_metric(self, m: float) -> float:
        if self.scale == "linear":
            return m
        return 10.0 ** m

    def from_metric_array(self, m: np.ndarray) -> np.ndarray:
        if self.scale == "linear":
            return np.asarray(m, dtype=float)
        return 10.0 ** np.asarray(m, dtype=float)

    def metric_bounds(self) -> tuple[float, float]:
        if self.scale == "linear":
            return self.lo, self.hi
        if self.scale == "log":
            return math.log10(self.lo), math.log10(self.hi)
        top = math.log10(self.hi)
        return top - self.decades, top

    def grid(self) -> np.ndarray:
        if self.scale == "linear":
            return np.linspace(self.lo, self.hi, self.points)
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        top = math.log10(self.hi)
        tail = np.logspace(top - self.decades, top, self.points - 1)
        return np.concatenate([[0.0], tail])

    def shrunk(self, center: float, factor: float) -> "Axis":
        """The axis with its box shrunk by `factor` around center, clipped
        to the original box. log0 axes keep their zero point; a zero center
        leaves the axis unchanged (the log tail already resolves all
        scales toward 0)."""
        if self.scale == "log0" and center == 0.0:
            return self
        lo_m, hi_m = self.metric_bounds()
        half = (hi_m - lo_m) / (2.0 * factor)
        c_m = min(max(self.to_metric(center), lo_m), hi_m)
        new_lo_m = max(lo_m, c_m - half)
        new_hi_m = min(hi_m, c_m + half)
        if self.scale == "log0":
            return replace(self, hi=10.0 ** new_hi_m,
                           decades=max(new_hi_m - new_lo_m, 1e-6))
        return replace(self, lo=self.from_metric(new_lo_m),
                       hi=self.from_metric(new_hi_m))


@dataclass(frozen=True)
class MinimaxOptions:
    starts: int = 9               # multistart count for the inner ascent
    rounds: int = 3               # initial pass + two shrink refinements
    shrink: float = 10.0
    polish_candidates: int = 5    # accepted outer candidates per round
    max_scan: int = 48            # rows examined per round before giving up
    ascent_iters: int = 100
    final_polish: bool = True
    check_faces: bool = True
    face_tol: float = 1e-3        # in metric units


@dataclass(frozen=True)
class MinimaxResult:
    outer: tuple[float, ...]
    inner: tuple[float, ...]
    value: float
    evaluations: int


def _cartesian(grids: Sequence[np.ndarray]) -> np.ndarray:
    """All combinations, shape (prod(len), len(grids))."""
    if not grids:
        return np.zeros((1, 0))
    mesh = np.meshgrid(*grids, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _compass_ascend(fun: Callable[[np.ndarray], float], x0_m: np.ndarray,
                    lo_m: np.ndarray, hi_m: np.ndarray, iters: int,
                    sign: float) -> tuple[np.ndarray, float, int]:
    """Deterministic compass (pattern) search in metric coordinates.

    Maximizes sign * fun. Returns (point, sign*value, evaluations).
    """
    x = np.clip(x0_m, lo_m, hi_m)
    fx = sign * fun(x)
    evals = 1
    h = (hi_m - lo_m) / 8.0
    span = hi_m - lo_m
    for _ in range(iters):
        moved = False
        for j in range(x.size):
            if h[j] <= 0.0:
                continue
            for sgn in (1.0, -1.0):
                xt = x.copy()
                xt[j] = min(max(x[j] + sgn * h[j], lo_m[j]), hi_m[j])
                if xt[j] == x[j]:
                    continue
                ft = sign * fun(xt)
                evals += 1
                if np.isfinite(ft) and ft > fx:
                    x, fx = xt, ft
                    moved = True
        if not moved:
            h = h / 3.0
            if np.all(h < 1e-12 * np.maximum(span, 1.0)):
                break
    return x, fx, evals


def _poll_ascend(matrix_fun: Callable[[np.ndarray], np.ndarray],
                 x0_m: np.ndarray, lo_m: np.ndarray, hi_m: np.ndarray,
                 iters: int) -> tuple[np.ndarray, float]:
    """Multistart poll-style pattern maximization in metric coordinates.

    x0_m has one row per start; every iteration polls all +-h moves of all
    starts in a single batched call of matrix_fun (rows of points -> values).
    Returns the best (point, value) over the starts. Deterministic: the poll
    winner is the first best index, per start.
    """
    x = np.clip(np.atleast_2d(np.asarray(x0_m, dtype=float)), lo_m, hi_m)
    n_starts, k = x.shape
    f = matrix_fun(x)
    f = np.where(np.isfinite(f), f, -np.inf)
    h = np.tile((hi_m - lo_m) / 8.0, (n_starts, 1))
    span = np.maximum(hi_m - lo_m, 1.0)
    for _ in range(iters):
        probes = np.repeat(x[:, None, :], 2 * k, axis=1)
        for j in range(k):
            probes[:, 2 * j, j] += h[:, j]
            probes[:, 2 * j + 1, j] -= h[:, j]
        np.clip(probes, lo_m, hi_m, out=probes)
        vals = matrix_fun(probes.reshape(-1, k)).reshape(n_starts, 2 * k)
        vals = np.where(np.isfinite(vals), vals, -np.inf)
        best = vals.argmax(axis=1)
        best_val = vals[np.arange(n_starts), best]
        improved = best_val > f
        x[improved] = probes[improved, best[improved]]
        f[improved] = best_val[improved]
        h[~improved] /= 3.0
        if np.all(h < 1e-12 * span):
            break
    winner = int(np.argmax(f))
    return x[winner], float(f[winner])


def scalar_minimax(objective: Callable, outer_axes: Sequence[Axis],
                   inner_axes: Sequence[Axis],
                   opts: MinimaxOptions = MinimaxOptions(),
                   candidate_filter: Callable | None = None) -> MinimaxResult:
    """min over the outer box of max over the inner box of objective.

    objective(outer, inner) receives one broadcastable column per axis
    (outer columns shaped (No, 1), inner columns (1, Ni); single points pass
    shape-(1, 1) arrays) and must return the matching value array. Non-finite
    values mark infeasible points: they lose every inner max, and an outer
    point with no feasible inner point is skipped. Ties break toward the
    lowest flat grid index (the inner point returned for a degenerate saddle
    is one of the maximizers, not a canonical one). Deterministic throughout.

    Refinement rounds shrink the outer boxes only: the max player always
    searches its full original box, otherwise a shrunk inner box could
    understate the inner max elsewhere and pull the outer min off the saddle.

    candidate_filter(outer_pt, inner_pt, value), if given, accepts or rejects
    a polished outer candidate. Rejected candidates are skipped (rows are
    scanned in ascending value order, up to max_scan per round), and during
    the final polish a rejected probe acts as an infinite wall, so the search
    stops at the feasibility boundary instead of crossing it. This is how a
    scalarization whose formal min-max is degenerate (the inf approached
    through saddle-free regions) is restricted to its consistent branch.

    Raises MinimaxError if every grid point is infeasible, if no candidate
    passes the filter, or (for axes not flagged natural) if the solution
    lands on a face of the original box.
    """
    outer_axes = list(outer_axes)
    inner_axes = list(inner_axes)
    if not outer_axes:
        raise ValueError("need at least one outer axis")
    evals = 0

    def eval_matrix(outer_pts: np.ndarray, inner_pts: np.ndarray) -> np.ndarray:
        nonlocal evals
        no, ni = outer_pts.shape[0], inner_pts.shape[0]
        outer_cols = tuple(outer_pts[:, j].reshape(-1, 1)
                           for j in range(outer_pts.shape[1]))
        inner_cols = tuple(inner_pts[:, j].reshape(1, -1)
                           for j in range(inner_pts.shape[1]))
        with np.errstate(all="ignore"):
            vals = np.asarray(objective(outer_cols, inner_cols), dtype=float)
        vals = np.broadcast_to(vals, (no, ni)).copy()
        evals += no * ni
        return vals

    def eval_point(outer_pt: np.ndarray, inner_pt: np.ndarray) -> float:
        return float(eval_matrix(outer_pt.reshape(1, -1),
                                 inner_pt.reshape(1, -1))[0, 0])

    def inner_max_at(outer_pt: np.ndarray, cur_in_axes: Sequence[Axis],
                     start_pts: np.ndarray) -> tuple[np.ndarray, float]:
        """Multistart poll ascent; start_pts in plain coordinates."""
        if not cur_in_axes:
            return np.zeros(0), eval_point(outer_pt, np.zeros(0))
        lo_m = np.array([a.metric_bounds()[0] for a in cur_in_axes])
        hi_m = np.array([a.metric_bounds()[1] for a in cur_in_axes])
        outer_row = outer_pt.reshape(1, -1)

        def matrix_fun(x_m: np.ndarray) -> np.ndarray:
            pts = np.column_stack([a.from_metric_array(x_m[:, j])
                                   for j, a in enumerate(cur_in_axes)])
            return eval_matrix(outer_row, pts)[0]

        x0 = np.column_stack([
            np.array([a.to_metric(float(sp[j])) for sp in start_pts])
            for j, a in enumerate(cur_in_axes)])
        best_m, best_f = _poll_ascend(matrix_fun, x0, lo_m, hi_m,
                                      opts.ascent_iters)
        pt = np.array([a.from_metric(v) for a, v in zip(cur_in_axes, best_m)])
        return pt, best_f

    cur_out = outer_axes
    inner_pts = _cartesian([a.grid() for a in inner_axes])
    best_outer = best_inner = None
    best_value = math.inf
    for rnd in range(opts.rounds):
        outer_pts = _cartesian([a.grid() for a in cur_out])
        vals = eval_matrix(outer_pts, inner_pts)
        finite = np.isfinite(vals)
        row_has = finite.any(axis=1)
        if not row_has.any():
            raise MinimaxError(
                f"all {vals.size} grid points infeasible in round {rnd + 1} "
                f"(outer axes {[a.name for a in cur_out]}; check the boxes)")
        masked = np.where(finite, vals, -np.inf)
        row_max = np.where(row_has, masked.max(axis=1), np.inf)

        order = np.argsort(row_max, kind="stable")
        rnd_best = None
        accepted = rejected = scanned = 0

        def try_row(row: int, precheck: bool) -> None:
            nonlocal rnd_best, accepted, rejected
            outer_pt = outer_pts[row]
            if inner_pts.shape[1] > 0:
                row_vals = masked[row]
                if precheck and candidate_filter is not None:
                    # grid-level reject before paying for an ascent: on the
                    # degenerate sheet the row is flat in the inner variables
                    # and ascent cannot move it onto the feasible branch
                    gi = int(np.argmax(row_vals))
                    if not candidate_filter(outer_pt, inner_pts[gi],
                                            float(row_vals[gi])):
                        rejected += 1
                        return
                top = np.argsort(-row_vals, kind="stable")[:opts.starts]
                starts = [inner_pts[int(t)] for t in top
                          if np.isfinite(row_vals[int(t)])]
                if best_inner is not None:
                    starts.append(np.asarray(best_inner))
                if not starts:
                    return
                inner_pt, value = inner_max_at(outer_pt, inner_axes,
                                               np.array(starts))
            else:
                inner_pt = np.zeros(0)
                value = float(row_max[row])
            if candidate_filter is not None and \
                    not candidate_filter(outer_pt, inner_pt, value):
                rejected += 1
                return
            accepted += 1
            if rnd_best is None or value < rnd_best[2]:
                rnd_best = (outer_pt, inner_pt, value)

        for row_i in order[:opts.max_scan]:
            if not np.isfinite(row_max[int(row_i)]):
                break  # ascending order: the rest are infeasible too
            if accepted >= opts.polish_candidates:
                break
            scanned += 1
            try_row(int(row_i), precheck=False)
        if rnd_best is None and candidate_filter is not None:
            # the filter can reject everything the capped scan saw when the
            # degenerate sheet (rows whose inner max carries no valid norm)
            # fills the bottom of the value ordering; keep scanning the
            # remaining rows, pre-screening each on its grid argmax so the
            # sheet is skipped cheaply
            for row_i in order[opts.max_scan:]:
                if not np.isfinite(row_max[int(row_i)]):
                    break
                if accepted >= opts.polish_candidates:
                    break
                scanned += 1
                try_row(int(row_i), precheck=True)
        if rnd_best is None:
            raise MinimaxError(
                f"no acceptable saddle candidate in round {rnd + 1}: "
                f"{rejected} candidates rejected by the consistency filter "
                f"out of {scanned} scanned")
        if rnd_best[2] < best_value or best_outer is None:
            best_outer, best_inner, best_value = rnd_best
        if rnd + 1 < opts.rounds:
            cur_out = [a.shrunk(c, opts.shrink)
                       for a, c in zip(cur_out, best_outer)]

    if opts.final_polish:
        lo_m = np.array([a.metric_bounds()[0] for a in outer_axes])
        hi_m = np.array([a.metric_bounds()[1] for a in outer_axes])
        inner_hold = np.asarray(best_inner)

        def neg_inner_max(x_m: np.ndarray) -> float:
            nonlocal inner_hold
            pt = np.array([a.from_metric(v) for a, v in zip(outer_axes, x_m)])
            if inner_axes:
                inner_pt, value = inner_max_at(pt, inner_axes,
                                               inner_hold.reshape(1, -1))
            else:
                inner_pt, value = np.zeros(0), eval_point(pt, np.zeros(0))
            if candidate_filter is not None and \
                    not candidate_filter(pt, inner_pt, value):
                return math.inf  # wall: stay on the consistent branch
            if inner_axes:
                inner_hold = inner_pt
            return value

        x0 = np.array([a.to_metric(v) for a, v in zip(outer_axes, best_outer)])
        x_m, neg_val, _ = _compass_ascend(neg_inner_max, x0, lo_m, hi_m,
                                          opts.ascent_iters, -1.0)
        if -neg_val <= best_value:
            cand_outer = np.array([a.from_metric(v)
                                   for a, v in zip(outer_axes, x_m)])
            cand_inner, cand_value = best_inner, -neg_val
            if inner_axes:
                cand_inner, cand_value = inner_max_at(
                    cand_outer, inner_axes, inner_hold.reshape(1, -1))
            # the refreshed inner point can drift past a filter wall even
            # though every step of the walk stayed on the feasible branch;
            # keep the pre-polish best (already filter-clean) in that case
            if candidate_filter is None or candidate_filter(
                    cand_outer, cand_inner, cand_value):
                best_outer, best_inner, best_value = (cand_outer, cand_inner,
                                                      cand_value)

    if opts.check_faces:
        for axes, pts, kind in ((outer_axes, best_outer, "outer"),
                                (inner_axes, best_inner, "inner")):
            for a, x in zip(axes, np.atleast_1d(pts)):
                lo_m, hi_m = a.metric_bounds()
                x_m = a.to_metric(float(x))
                if not a.lo_natural and x_m - lo_m <= opts.face_tol \
                        and not (a.scale == "log0" and float(x) == 0.0):
                    raise MinimaxError(
                        f"{kind} variable {a.name} = {float(x):.6g} landed on "
                        f"the lower box face [{a.lo:.3g}, {a.hi:.3g}]; widen "
                        "the box")
                if not a.hi_natural and hi_m - x_m <= opts.face_tol:
                    raise MinimaxError(
                        f"{kind} variable {a.name} = {float(x):.6g} landed on "
                        f"the upper box face [{a.lo:.3g}, {a.hi:.3g}]; widen "
                        "the box")

    return MinimaxResult(outer=tuple(float(v) for v in np.atleast_1d(best_outer)),
                         inner=tuple(float(v) for v in np.atleast_1d(best_inner)),
                         value=float(best_value), evaluations=evals)


# --------------------------------------------------------------------------
# solution records
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RidgeSolution:
    alpha: float
    gamma: float
    objective: float
    predicted_error: float


@dataclass(frozen=True)
class L1Solution:
    tau: float
    beta: float
    gamma: float
    sigma_tilde: float
    s: float
    predicted_error: float
    predicted_sparsity: int


@dataclass(frozen=True)
class LinfSolution:
    tau: float
    delta: float
    gamma: float
    xi: float
    predicted_error: float
    predicted_bound_count: int  # entries at each of +delta/lam and -delta/lam


@dataclass(frozen=True)
class MasterSolution:
    tau: float
    beta: float
    gamma: float
    predicted_error: float
    envelope: EnvelopeSpec


def _effective_c(config: ProblemConfig, c_realized: float | None) -> float:
    """config.c, or the realized rate override (which may equal 0.5)."""
    if c_realized is None:
        return config.c
    if not 0.0 <= c_realized <= 0.5:
        raise ValueError(f"c_realized must be in [0, 0.5], got {c_realized}")
    return float(c_realized)


def _require_positive_lambda(config: ProblemConfig) -> None:
    if config.lam <= 0.0:
        raise ValueError("theory predictors need lambda > 0")


# --------------------------------------------------------------------------
# ridge: nested bounded 1-D minimization of a jointly convex objective
# --------------------------------------------------------------------------

def _ridge_objective(alpha, gamma, n, d, c, r, sigma, lam):
    """(alpha sigma^2 d + sqrt(n sigma^2 Omega + Theta))_+^2 + lam Omega."""
    s2 = sigma * sigma
    omega = alpha * alpha * s2 * d + 2.0 * d * (1.0 - r) * gamma * gamma
    dg = d * (1.0 - r) * gamma
    theta = n * (1.0 - c) * (dg - 1.0) ** 2 + n * c * (dg + 1.0) ** 2
    hinge = alpha * s2 * d + np.sqrt(n * s2 * omega + theta)
    return np.maximum(hinge, 0.0) ** 2 + lam * omega


def _ridge_min_alpha(gamma: float, n, d, c, r, sigma, lam) -> tuple[float, float]:
    """min over alpha at fixed gamma, with a rigorous bracket."""
    at_zero = float(_ridge_objective(0.0, gamma, n, d, c, r, sigma, lam))
    # lam * sigma^2 d alpha^2 <= objective <= at_zero at any candidate optimum
    bound = math.sqrt(at_zero / (lam * sigma * sigma * d)) * 1.001 + 1e-300
    res = minimize_scalar(
        lambda a: float(_ridge_objective(a, gamma, n, d, c, r, sigma, lam)),
        bounds=(-bound, bound), method="bounded",
        options={"xatol": bound * 1e-12 + 1e-300})
    return float(res.x), float(res.fun)


def predict_ridge(config: ProblemConfig, *,
                  c_realized: float | None = None) -> RidgeSolution:
    """Solve the 2-variable convex ridge scalarization.

    Nested exact 1-D minimization (alpha inside gamma), both with rigorous
    brackets derived from the lam * Omega term, then a shifted re-run whose
    agreement within 1e-6 certifies the global minimum of the jointly convex
    objective. predicted_error =
    Q(gamma d (1-r) / sqrt(alpha^2 sigma^4 d + 2 sigma^2 gamma^2 d (1-r))).
    """
    _require_positive_lambda(config)
    n, d, r, sigma, lam = (config.n, config.d, config.r, config.sigma,
                           config.lam)
    c = _effective_c(config, c_realized)

    if r >= 1.0:  # classes coincide: gamma is irrelevant, error is chance
        alpha, obj = _ridge_min_alpha(0.0, n, d, c, r, sigma, lam)
        return RidgeSolution(alpha=alpha, gamma=0.0, objective=obj,
                             predicted_error=0.5)

    # lam * 2 d (1-r) gamma^2 <= objective <= objective(0, 0) = Theta(0) = n
    gamma_cap = math.sqrt(n / (2.0 * lam * d * (1.0 - r))) * 1.001

    def phi(gamma: float) -> float:
        return _ridge_min_alpha(gamma, n, d, c, r, sigma, lam)[1]

    def solve_on(lo: float, hi: float) -> tuple[float, float]:
        res = minimize_scalar(phi, bounds=(lo, hi), method="bounded",
                              options={"xatol": gamma_cap * 1e-12 + 1e-300})
        return float(res.x), float(res.fun)

    g1, f1 = solve_on(-gamma_cap, gamma_cap)
    # restart on a shifted bracket; joint convexity means both runs must meet
    half = gamma_cap / 3.0
    g2, f2 = solve_on(max(-gamma_cap, g1 - half), min(gamma_cap, g1 + half))
    if abs(f1 - f2) > 1e-6 * (1.0 + abs(f1)):
        raise ArithmeticError(
            f"ridge restarts disagree: {f1!r} vs {f2!r} at gamma {g1!r}/{g2!r}")
    gamma, obj = (g1, f1) if f1 <= f2 else (g2, f2)
    alpha, obj = _ridge_min_alpha(gamma, n, d, c, r, sigma, lam)

    s2 = sigma * sigma
    denom = math.sqrt(alpha * alpha * s2 * s2 * d
                      + 2.0 * s2 * gamma * gamma * d * (1.0 - r))
    arg = gamma * d * (1.0 - r) / denom if denom > 0.0 else 0.0
    return RidgeSolution(alpha=alpha, gamma=gamma, objective=obj,
                         predicted_error=float(q_function(arg)))


# --------------------------------------------------------------------------
# master objective (any separable penalty, expectation by quadrature)
# --------------------------------------------------------------------------

def _xi_value(gamma, tau, n, c, r, sigma):
    s2 = sigma * sigma
    return np.sqrt((1.0 - r) / (2.0 * s2 * s2) * (gamma / 2.0 - 1.0 + 2.0 * c) ** 2
                   + 1.0 / (n * n * tau * tau * s2))


def _master_objective_fn(n, d, c, r, sigma, lam, envelope: EnvelopeSpec,
                         rule: QuadratureRule):
    s2 = sigma * sigma
    nodes, weights = rule.nodes, rule.weights

    def value(outer, inner):
        (tau,) = outer
        beta, gamma = inner
        xi = _xi_value(gamma, tau, n, c, r, sigma)
        t = np.where(beta > 0.0, lam / (beta * tau * n * s2 + 1e-300), 1e300)
        expectation = 0.0
        for g, wt in zip(nodes, weights):  # nodes stay out of the big arrays
            expectation = expectation + wt * envelope.envelope(xi * g, t)
        quad_term = (beta * tau / 2.0) * (
            -(n / 4.0) * gamma ** 2
            - (n * d * (1.0 - r) / (2.0 * s2)) * (gamma / 2.0 - 1.0 + 2.0 * c) ** 2
            + n)
        return (quad_term + (beta / (2.0 * tau)) * (1.0 - d / n)
                - beta ** 2 / 4.0 + d * lam * expectation)

    return value


# --------------------------------------------------------------------------
# l1 objective: the proof-form 3-variable expression with the closed-form
# truncated moment (an independent transcription from the master route)
# --------------------------------------------------------------------------

def _l1_objective_fn(n, d, c, r, sigma, lam):
    s2 = sigma * sigma

    def value(outer, inner):
        (tau,) = outer
        beta, gamma = inner
        safe_beta = np.where(beta > 0.0, beta, 1.0)
        st = np.sqrt(s2 / (n * n * tau * tau)
                     + 2.0 * (gamma / 4.0 - (1.0 - 2.0 * c) / 2.0) ** 2 * (1.0 - r))
        u = lam / (n * safe_beta * tau * st)
        q = q_function(u)
        tm = truncated_moment(np.maximum(1.0 / u, 1e-300))
        k_corr = ((1.0 - 2.0 * c) / 2.0 - gamma / 4.0) * (1.0 - r)
        val = (-(2.0 * d * safe_beta / (n * tau)) * q
               + safe_beta / (2.0 * tau)
               + (safe_beta * tau * n / 2.0) * (
                   d * s2 * (lam / (n * safe_beta * tau * s2)) ** 2 * tm
                   + (2.0 * gamma * d / s2) * q * k_corr)
               + (safe_beta * tau * n / 2.0) * (
                   -gamma ** 2 / 4.0 + 1.0
                   - (4.0 * d * (1.0 - 2.0 * c) / s2) * q * k_corr)
               - safe_beta ** 2 / 4.0
               + (2.0 * d * lam * st / (s2 * _SQRT_2PI)) * np.exp(-0.5 * u * u)
               - (2.0 * d * lam ** 2 / (n * safe_beta * tau * s2)) * q)
        return np.where(beta > 0.0, val, 0.0)

    return value


# --------------------------------------------------------------------------
# max-norm objective: delta + (max over gamma of W)_+^2, fed to the engine
# as delta + (W)_+^2 which has the identical inner max by monotonicity
# --------------------------------------------------------------------------

def _linf_objective_fn(n, d, c, r, sigma, lam):
    s2 = sigma * sigma

    def value(outer, inner):
        tau, delta = outer
        (gamma,) = inner
        xi = _xi_value(gamma, tau, n, c, r, sigma)
        ratio = delta / (lam * xi)
        w = (1.0 / (2.0 * tau)
             + (tau / 2.0) * (-(n / 4.0) * gamma ** 2 + n)
             - n * d * s2 * tau * xi * xi / 2.0
             - (n * d * s2 * tau * delta * xi / (lam * _SQRT_2PI))
             * np.exp(-0.5 * ratio * ratio)
             + n * d * s2 * tau * (xi * xi + (delta / lam) ** 2)
             * q_function(ratio))
        return delta + np.maximum(w, 0.0) ** 2

    return value


# --------------------------------------------------------------------------
# the three saddle predictors
# --------------------------------------------------------------------------

def _tau_axis(n: int) -> Axis:
    return Axis("tau", 1e-6 / n, 1e2 / n, "log", 200)

def _beta_axis(n: int) -> Axis:
    # log0: the saddle beta spans orders of magnitude as lambda varies
    return Axis("beta", 0.0, 10.0 * math.sqrt(n), "log0", 45,
                lo_natural=True, decades=8.0)

def _gamma_axis(points: int = 65) -> Axis:
    return Axis("gamma", -4.0, 4.0, "linear", points)


def _consistency_filter(n: int, c: float, gamma_index: int):
    """Accept only candidates whose scalars admit a valid solution norm.

    The formal min over tau is degenerate (its inf is approached through
    regions carrying no saddle), so outer candidates must lie on the branch
    where the reconstructed squared norm (the error formula's radicand) and
    the saddle value are positive.
    """

    def accept(outer_pt, inner_pt, value) -> bool:
        tau = float(outer_pt[0])
        gamma = float(inner_pt[gamma_index])
        radicand = (1.0 / (n * tau * tau)
                    - (1.0 - c) * (gamma / 2.0 - 1.0) ** 2
                    - c * (gamma / 2.0 + 1.0) ** 2)
        return radicand > 0.0 and value > 0.0

    return accept


def predict_l1(config: ProblemConfig, *,
               c_realized: float | None = None) -> L1Solution:
    """Saddle of the 3-variable l1 scalarization, plus the sparsity count.

    predicted_sparsity = floor(2 d Q(lam / (n beta tau sigma_tilde))),
    the count of nonzero coordinates the solution is expected to keep.
    """
    _require_positive_lambda(config)
    n, d, r, sigma, lam = (config.n, config.d, config.r, config.sigma,
                           config.lam)
    c = _effective_c(config, c_realized)
    objective = _l1_objective_fn(n, d, c, r, sigma, lam)
    result = scalar_minimax(objective, [_tau_axis(n)],
                            [_beta_axis(n), _gamma_axis()],
                            candidate_filter=_consistency_filter(n, c, 1))
    (tau,) = result.outer
    beta, gamma = result.inner
    st = math.sqrt(sigma ** 2 / (n * n * tau * tau)
                   + 2.0 * (gamma / 4.0 - (1.0 - 2.0 * c) / 2.0) ** 2 * (1.0 - r))
    s = st * n * beta * tau / lam
    err, degenerate = _error_or_degenerate(gamma, tau, n, c)
    if degenerate or s <= 0.0:
        # zero solution: no support survives the soft threshold
        sparsity = 0
    else:
        sparsity = int(math.floor(2.0 * d * float(q_function(1.0 / s))))
    return L1Solution(tau=tau, beta=beta, gamma=gamma, sigma_tilde=st, s=s,
                      predicted_error=err, predicted_sparsity=sparsity)


def _clipped_gauss_norm_sq(delta: float, lam: float, xi: float,
                           d: int) -> float:
    """Squared norm of the predicted max-norm solution profile.

    The solution's entries behave like Xi G clipped to [-delta/lam,
    delta/lam] for standard normal G, so E||w||^2 over d coordinates is
    the clipped second moment. Equals the error formula's radicand
    (over sigma^2) wherever the saddle keeps beta > 0, but stays correct
    at small lambda where the saddle pins to beta -> 0 (the interpolation
    regime) and the radicand reconstruction loses its meaning.
    """
    if delta <= 0.0:
        return 0.0
    u = delta / (lam * xi)
    q = float(q_function(u))
    return (2.0 * d * (delta / lam) ** 2 * q
            - 2.0 * d * delta * xi / (lam * _SQRT_2PI) * math.exp(-0.5 * u * u)
            + d * xi * xi * (1.0 - 2.0 * q))


def predict_linf(config: ProblemConfig, *,
                 c_realized: float | None = None) -> LinfSolution:
    """Saddle of the max-norm scalarization, plus the at-bound count.

    The delta box [0, 10 lam Xi(gamma0, tau0)] is seeded by a coarse
    pre-pass; predicted_bound_count = floor(d Q(delta / (lam Xi))) counts
    the entries expected at each of +-delta/lam. predicted_error is
    Q(gamma / (2 sigma ||w||)) with ||w||^2 the clipped-Gaussian second
    moment of the solution profile, which remains valid when the saddle
    sits at the beta -> 0 interpolation pin (small lambda).
    """
    _require_positive_lambda(config)
    n, d, r, sigma, lam = (config.n, config.d, config.r, config.sigma,
                           config.lam)
    c = _effective_c(config, c_realized)
    objective = _linf_objective_fn(n, d, c, r, sigma, lam)

    tau_mid = 1e-2 / n
    delta_cap = 10.0 * lam * float(_xi_value(0.0, tau_mid, n, c, r, sigma))
    pre = scalar_minimax(
        objective,
        [Axis("tau", 1e-6 / n, 1e2 / n, "log", 40),
         Axis("delta", 0.0, delta_cap, "log0", 25, lo_natural=True,
              decades=10.0)],
        [_gamma_axis(33)],
        MinimaxOptions(rounds=1, polish_candidates=3, final_polish=False,
                       check_faces=False),
        candidate_filter=_consistency_filter(n, c, 0))
    tau0 = pre.outer[0]
    gamma0 = pre.inner[0]
    delta_hi = 10.0 * lam * float(_xi_value(gamma0, tau0, n, c, r, sigma))

    result = scalar_minimax(
        objective,
        [_tau_axis(n),
         Axis("delta", 0.0, delta_hi, "log0", 60, lo_natural=True,
              decades=10.0)],
        [_gamma_axis(61)],
        candidate_filter=_consistency_filter(n, c, 0))
    tau, delta = result.outer
    (gamma,) = result.inner
    xi = float(_xi_value(gamma, tau, n, c, r, sigma))
    norm_sq = _clipped_gauss_norm_sq(delta, lam, xi, d)
    if norm_sq <= 0.0:
        # delta = 0: the box collapses and the solution is w = 0
        return LinfSolution(tau=tau, delta=delta, gamma=gamma, xi=xi,
                            predicted_error=0.5, predicted_bound_count=0)
    err = float(q_function(gamma / (2.0 * sigma * math.sqrt(norm_sq))))
    count = int(math.floor(d * float(q_function(delta / (lam * xi)))))
    return LinfSolution(tau=tau, delta=delta, gamma=gamma, xi=xi,
                        predicted_error=err, predicted_bound_count=count)


def predict_master(config: ProblemConfig, envelope: EnvelopeSpec,
                   rule: QuadratureRule | int = 61, *,
                   c_realized: float | None = None) -> MasterSolution:
    """Saddle of the master scalarization for any separable penalty.

    The envelope expectation is evaluated by Gauss-Hermite quadrature with
    the given rule (default 61 nodes), making this an independent route to
    the ridge / l1 answers, which use closed forms instead.
    """
    _require_positive_lambda(config)
    if isinstance(rule, int):
        rule = QuadratureRule(rule)
    n, d, r, sigma, lam = (config.n, config.d, config.r, config.sigma,
                           config.lam)
    c = _effective_c(config, c_realized)
    objective = _master_objective_fn(n, d, c, r, sigma, lam, envelope, rule)
    result = scalar_minimax(objective, [_tau_axis(n)],
                            [_beta_axis(n), _gamma_axis()],
                            candidate_filter=_consistency_filter(n, c, 1))
    (tau,) = result.outer
    beta, gamma = result.inner
    err, _ = _error_or_degenerate(gamma, tau, n, c)
    return MasterSolution(tau=tau, beta=beta, gamma=gamma,
                          predicted_error=err, envelope=envelope)
