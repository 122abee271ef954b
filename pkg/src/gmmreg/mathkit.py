"""Scalar math kernels: Gaussian tails, quadrature, envelopes, projections.

Everything here is deterministic, vectorized over numpy arrays, and free of
problem-specific context. The rest of the package builds on these kernels.
NaNs propagate; nothing is silently clamped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.special
from scipy.special import erfc

__all__ = [
    "q_function",
    "gauss_pdf",
    "QuadratureRule",
    "gauss_expectation",
    "envelope_abs",
    "prox_abs",
    "envelope_quad",
    "prox_quad",
    "project_l1_ball",
    "prox_linf",
    "truncated_moment",
    "EnvelopeSpec",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def q_function(x):
    """Gaussian upper tail Q(x) = P(G > x) for G ~ N(0, 1).

    Computed as erfc(x / sqrt(2)) / 2, which stays accurate in the far tail
    where 1 - Phi(x) would cancel. Accepts scalars or arrays; +-inf map to
    0 / 1 and NaN propagates.
    """
    x = np.asarray(x, dtype=float)
    out = 0.5 * erfc(x / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def gauss_pdf(x):
    """Standard normal density exp(-x^2/2) / sqrt(2 pi)."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / _SQRT_2PI
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule recast for expectations against N(0, 1).

    nodes are the abscissas after the change of variables g = sqrt(2) x
    (x the physicists' Hermite nodes) and weights are normalized to sum to 1
    exactly, so that dot(weights, h(nodes)) approximates E[h(G)] and is exact
    for polynomials of degree <= 2 * node_count - 1.
    """

    node_count: int = 61
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise ValueError(f"node_count must be >= 1, got {self.node_count}")
        # roots_hermite stays stable at node counts where the naive
        # recurrence overflows (a few hundred nodes and beyond)
        x, w = scipy.special.roots_hermite(self.node_count)
        if not (np.isfinite(x).all() and np.isfinite(w).all()):
            raise ArithmeticError(
                f"Gauss-Hermite rule with {self.node_count} nodes is not finite")
        w = w / w.sum()  # exact normalization beats dividing by sqrt(pi)
        nodes = math.sqrt(2.0) * x
        nodes.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)


_RULE_CACHE: dict[int, QuadratureRule] = {}


def _rule(node_count: int) -> QuadratureRule:
    # hermgauss is not cheap and rules are reused heavily
    rule = _RULE_CACHE.get(node_count)
    if rule is None:
        rule = QuadratureRule(node_count)
        _RULE_CACHE[node_count] = rule
    return rule


def gauss_expectation(h: Callable[[np.ndarray], np.ndarray],
                      rule: QuadratureRule | int = 61) -> float:
    """E[h(G)] for G ~ N(0,1) by Gauss-Hermite quadrature.

    h must accept a numpy array of evaluation points and return values of the
    same shape. Pass a QuadratureRule or a node count (default 61). A
    non-finite value of h at any node is an error naming that node.
    """
    if isinstance(rule, int):
        rule = _rule(rule)
    vals = np.asarray(h(rule.nodes), dtype=float)
    if vals.shape != rule.nodes.shape:
        raise ValueError("h must map the node array to an equal-shaped array")
    bad = ~np.isfinite(vals)
    if bad.any():
        node = rule.nodes[bad][0]
        raise ValueError(f"h is not finite at quadrature node {node!r}")
    return float(np.dot(rule.weights, vals))


def _positive_param(t, label: str):
    """Validate a prox/envelope parameter: scalar or array, all entries > 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        bad = float(t) if t.ndim == 0 else float(t[t <= 0.0][0])
        raise ValueError(f"{label} parameter must be positive, got {bad}")
    return t


def envelope_abs(w, t):
    """Moreau envelope of |.| with parameter t > 0 (the Huber function).

    min_x (w - x)^2 / (2 t) + |x|, which is w^2 / (2 t) for |w| <= t and
    |w| - t/2 beyond. t may be an array broadcastable against w.
    """
    w = np.asarray(w, dtype=float)
    t = _positive_param(t, "envelope")
    aw = np.abs(w)
    return np.where(aw <= t, w * w / (2.0 * t), aw - 0.5 * t)


def prox_abs(w, t):
    """Proximal map of |.| with parameter t > 0: soft thresholding at t."""
    w = np.asarray(w, dtype=float)
    t = _positive_param(t, "prox")
    return np.sign(w) * np.maximum(np.abs(w) - t, 0.0)


def envelope_quad(w, t):
    """Moreau envelope of x^2 with parameter t > 0: w^2 / (1 + 2 t)."""
    w = np.asarray(w, dtype=float)
    t = _positive_param(t, "envelope")
    return w * w / (1.0 + 2.0 * t)


def prox_quad(w, t):
    """Proximal map of x^2 with parameter t > 0: w / (1 + 2 t)."""
    w = np.asarray(w, dtype=float)
    t = _positive_param(t, "prox")
    return w / (1.0 + 2.0 * t)


def project_l1_ball(v: np.ndarray, radius: float) -> np.ndarray:
    """Euclidean projection of v onto the l1 ball of the given radius.

    Exact sort-based algorithm: if v is already feasible it is returned
    unchanged (same values, fresh array); otherwise the unique soft threshold
    theta with sum(max(|v| - theta, 0)) == radius is found from the sorted
    magnitudes and applied.
    """
    v = np.asarray(v, dtype=float)
    radius = float(radius)
    if radius < 0.0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    if radius == 0.0:
        return np.zeros_like(v)
    u = np.sort(a)[::-1]
    cum = np.cumsum(u) - radius
    k = np.arange(1, u.size + 1)
    # largest k with u_k > cum_k / k; nonempty in exact arithmetic because v
    # is infeasible, but a radius below the rounding resolution of the top
    # magnitude can vanish from cum, emptying the set
    idx = np.nonzero(u > cum / k)[0]
    if idx.size == 0:
        theta = float(u[0])
    else:
        theta = cum[idx[-1]] / (idx[-1] + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def prox_linf(v: np.ndarray, t: float) -> np.ndarray:
    """Proximal map of t * max-norm via Moreau decomposition, t > 0.

    prox_{t ||.||_inf}(v) = v - P_{t B_1}(v), with P the l1-ball projection.
    The subtraction makes prox_linf(v, t) + project_l1_ball(v, t) == v hold
    bit for bit.
    """
    v = np.asarray(v, dtype=float)
    t = float(t)
    if t <= 0.0:
        raise ValueError(f"prox parameter must be positive, got {t}")
    return v - project_l1_ball(v, t)


def truncated_moment(s):
    """E[(|X| - 1)^2 ; |X| > 1] for X ~ N(0, s^2), s > 0.

    Closed form 2 (s^2 + 1) Q(1/s) - (2 s / sqrt(2 pi)) exp(-1/(2 s^2)).
    Vectorized; every entry of s must be strictly positive.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise ValueError("s must be strictly positive")
    inv = 1.0 / s
    out = (2.0 * (s * s + 1.0) * q_function(inv)
           - 2.0 * s * np.exp(-0.5 * inv * inv) / _SQRT_2PI)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class EnvelopeSpec:
    """A separable penalty, described by the scalar function and its prox.

    kind is one of "absolute" (|x|), "quadratic" (x^2), or "custom". Custom
    specs supply a vectorized convex function f_fn(w) and its proximal map
    prox_fn(w, t) (prox of t*f, same conventions as prox_abs); the Moreau
    envelope of a custom spec is derived from the prox via
    e(w; t) = (w - p)^2 / (2 t) + f(p) with p = prox(w, t). Both callables
    must broadcast over arrays of w and t.
    """

    kind: str
    f_fn: Callable | None = None
    prox_fn: Callable | None = None

    _KINDS = ("absolute", "quadratic", "custom")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"kind must be one of {self._KINDS}, got {self.kind!r}")
        if self.kind == "custom":
            if self.f_fn is None or self.prox_fn is None:
                raise ValueError("custom EnvelopeSpec needs f_fn and prox_fn")
        elif self.f_fn is not None or self.prox_fn is not None:
            raise ValueError("builtin EnvelopeSpec kinds take no callables")

    @classmethod
    def absolute(cls) -> "EnvelopeSpec":
        return cls("absolute")

    @classmethod
    def quadratic(cls) -> "EnvelopeSpec":
        return cls("quadratic")

    @classmethod
    def custom(cls, f_fn: Callable, prox_fn: Callable) -> "EnvelopeSpec":
        return cls("custom", f_fn, prox_fn)

    def f(self, w):
        """The penalty function itself, elementwise."""
        w = np.asarray(w, dtype=float)
        if self.kind == "absolute":
            return np.abs(w)
        if self.kind == "quadratic":
            return w * w
        return np.asarray(self.f_fn(w), dtype=float)

    def envelope(self, w, t):
        if self.kind == "absolute":
            return envelope_abs(w, t)
        if self.kind == "quadratic":
            return envelope_quad(w, t)
        w = np.asarray(w, dtype=float)
        t = _positive_param(t, "envelope")
        p = np.asarray(self.prox_fn(w, t), dtype=float)
        return (w - p) ** 2 / (2.0 * t) + self.f(p)

    def prox(self, w, t):
        if self.kind == "absolute":
            return prox_abs(w, t)
        if self.kind == "quadratic":
            return prox_quad(w, t)
        t = _positive_param(t, "prox")
        return np.asarray(self.prox_fn(np.asarray(w, dtype=float), t), dtype=float)
