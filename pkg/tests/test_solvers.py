"""Convex-program solvers against closed forms and independent references."""

import numpy as np
import pytest

import oracles as orc
from gmmreg import mathkit as mk
from gmmreg.solvers import (
    SolveOptions,
    SolveResult,
    lipschitz_estimate,
    objective_value,
    solve_linf,
    solve_prox,
    solve_ridge,
)


def l1_norm(w: np.ndarray) -> float:
    return float(np.sum(np.abs(w)))


def linf_norm(w: np.ndarray) -> float:
    return float(np.max(np.abs(w)))


@pytest.fixture(scope="module")
def problems():
    """Fixed random instances shared across the module."""
    rng = np.random.default_rng(42)
    out = {}
    out["neumann"] = (rng.standard_normal((12, 30)),
                      rng.choice([-1.0, 1.0], size=12))
    out["mid"] = (rng.standard_normal((5, 12)),
                  rng.choice([-1.0, 1.0], size=5))
    out["tall"] = (rng.standard_normal((10, 6)),
                   rng.choice([-1.0, 1.0], size=10))
    out["tiny"] = (rng.standard_normal((3, 4)),
                   np.array([1.0, -1.0, 1.0]))
    out["linf4"] = (rng.standard_normal((6, 4)),
                    rng.choice([-1.0, 1.0], size=6))
    out["wide"] = (rng.standard_normal((20, 50)),
                   rng.choice([-1.0, 1.0], size=20))
    return out


# ---------------------------------------------------------------------------
# options

def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(max_iterations=0)
    with pytest.raises(ValueError):
        SolveOptions(tolerance=0.0)
    with pytest.raises(ValueError, match="step_rule"):
        SolveOptions(step_rule="newton")


# ---------------------------------------------------------------------------
# ridge

def test_ridge_scalar_closed_form():
    # min (2w - 3)^2 + w^2 -> w = 6/5
    w = solve_ridge(np.array([[2.0]]), np.array([3.0]), 1.0)
    assert w.shape == (1,)
    assert w[0] == pytest.approx(1.2, abs=1e-14)


def test_ridge_rejects_zero_lambda():
    with pytest.raises(ValueError, match="lam"):
        solve_ridge(np.eye(2), np.ones(2), 0.0)


def test_ridge_shape_mismatch():
    with pytest.raises(ValueError):
        solve_ridge(np.eye(3), np.ones(2), 1.0)


def test_ridge_matches_stacked_least_squares(problems):
    X, z = problems["mid"]
    w = solve_ridge(X, z, 3.0)
    ref = orc.ridge_stacked_lstsq(X, z, 3.0)
    assert np.max(np.abs(w - ref)) <= 1e-10


def test_ridge_dual_equals_primal(problems):
    # d < n here, so the primal d x d normal equations are well posed and
    # independently checkable
    X, z = problems["tall"]
    lam = 2.5
    ref = np.linalg.solve(X.T @ X + lam * np.eye(X.shape[1]), X.T @ z)
    assert np.max(np.abs(solve_ridge(X, z, lam) - ref)) <= 1e-8


def test_ridge_large_lambda_neumann_expansion(problems):
    # w = X^T z / lam - X^T X X^T z / lam^2 + O(lam^-3)
    X, z = problems["neumann"]
    lam = 1e8
    w = solve_ridge(X, z, lam)
    first = X.T @ z / lam
    second = np.linalg.norm(X.T @ (X @ (X.T @ z))) / lam ** 2
    assert np.linalg.norm(w - first) <= 1.1 * second


# ---------------------------------------------------------------------------
# lipschitz constant

def test_lipschitz_identity():
    assert lipschitz_estimate(np.eye(2)) == pytest.approx(2.0, rel=1e-12)


def test_lipschitz_scaling(problems):
    X, _ = problems["mid"]
    base = lipschitz_estimate(X)
    assert lipschitz_estimate(3.0 * X) == pytest.approx(9.0 * base, rel=1e-10)


def test_lipschitz_matches_svd(problems):
    X, _ = problems["mid"]
    assert lipschitz_estimate(X) == pytest.approx(orc.lipschitz_svd(X),
                                                  rel=1e-10)


def test_lipschitz_zero_matrix():
    with pytest.raises(ValueError, match="nonzero"):
        lipschitz_estimate(np.zeros((3, 5)))


# ---------------------------------------------------------------------------
# objective

def test_objective_at_zero_is_label_energy(problems):
    X, z = problems["mid"]
    assert objective_value(X, z, 7.0, l1_norm,
                           np.zeros(X.shape[1])) == float(len(z))


def test_objective_lambda_additivity(problems):
    X, z = problems["mid"]
    rng = np.random.default_rng(1)
    w = rng.standard_normal(X.shape[1])
    o0 = objective_value(X, z, 0.0, l1_norm, w)
    o5 = objective_value(X, z, 5.0, l1_norm, w)
    assert o5 - o0 == pytest.approx(5.0 * l1_norm(w), rel=1e-12)


def test_objective_accumulation_order(problems):
    X, z = problems["mid"]
    rng = np.random.default_rng(1)
    w = rng.standard_normal(X.shape[1])
    ours = objective_value(X, z, 5.0, l1_norm, w)
    ref = orc.objective_fsum(X, z, 5.0, l1_norm(w), w)
    assert ours == pytest.approx(ref, rel=1e-10)


def test_objective_dimension_mismatch(problems):
    X, z = problems["mid"]
    with pytest.raises(ValueError, match="mismatch"):
        objective_value(X, z, 1.0, l1_norm, np.zeros(3))


# ---------------------------------------------------------------------------
# proximal solver

def test_prox_quad_matches_ridge(problems):
    X, z = problems["mid"]
    ref = solve_ridge(X, z, 3.0)
    res = solve_prox(X, z, 3.0, mk.prox_quad,
                     SolveOptions(tolerance=1e-13),
                     f=lambda w: float(w @ w))
    assert res.converged
    assert np.max(np.abs(res.w - ref)) <= 1e-6


def test_prox_l1_matches_coordinate_descent(problems):
    X, z = problems["tiny"]
    lam = 0.7
    res = solve_prox(X, z, lam, mk.prox_abs, f=l1_norm)
    ref = orc.l1_coordinate_descent(X, z, lam)
    ours = objective_value(X, z, lam, l1_norm, res.w)
    theirs = objective_value(X, z, lam, l1_norm, ref)
    assert abs(ours - theirs) <= 1e-5
    assert np.max(np.abs(res.w - ref)) <= 1e-2


def test_l1_optimum_is_prox_fixed_point(problems):
    # independent optimum (coordinate descent to machine precision) must be
    # a fixed point of the prox-gradient map at any step size
    X, z = problems["tiny"]
    lam = 0.7
    w = orc.l1_coordinate_descent(X, z, lam)
    for step in (1.0 / lipschitz_estimate(X), 0.01, 1.0):
        g = 2.0 * X.T @ (X @ w - z)
        assert np.max(np.abs(mk.prox_abs(w - step * g, lam * step) - w)) \
            <= 1e-12


def test_prox_l1_huge_lambda_exact_zero(problems):
    X, z = problems["tiny"]
    res = solve_prox(X, z, 1e9, mk.prox_abs, f=l1_norm)
    assert res.converged
    assert np.all(res.w == 0.0)


def test_prox_rejects_negative_lambda(problems):
    X, z = problems["tiny"]
    with pytest.raises(ValueError, match="nonnegative"):
        solve_prox(X, z, -1.0, mk.prox_abs, f=l1_norm)


def test_prox_shape_mismatch(problems):
    X, _ = problems["tiny"]
    with pytest.raises(ValueError, match="shape"):
        solve_prox(X, np.ones(5), 1.0, mk.prox_abs, f=l1_norm)


def test_prox_iteration_cap_flags_not_converged(problems):
    X, z = problems["tiny"]
    res = solve_prox(X, z, 0.7, mk.prox_abs,
                     SolveOptions(max_iterations=3), f=l1_norm)
    assert not res.converged
    assert res.iterations == 3


def test_prox_fixed_step_rule(problems):
    X, z = problems["tiny"]
    lam = 0.7
    res = solve_prox(X, z, lam, mk.prox_abs,
                     SolveOptions(step_rule="fixed"), f=l1_norm)
    ref = objective_value(X, z, lam, l1_norm,
                          orc.l1_coordinate_descent(X, z, lam))
    assert objective_value(X, z, lam, l1_norm, res.w) <= ref + 1e-5


def test_prox_deterministic(problems):
    X, z = problems["tiny"]
    a = solve_prox(X, z, 0.7, mk.prox_abs, f=l1_norm)
    b = solve_prox(X, z, 0.7, mk.prox_abs, f=l1_norm)
    assert np.array_equal(a.w, b.w)
    assert a.objective == b.objective
    assert a.iterations == b.iterations


def test_prox_result_fields(problems):
    X, z = problems["tiny"]
    res = solve_prox(X, z, 0.7, mk.prox_abs, f=l1_norm)
    assert isinstance(res, SolveResult)
    assert res.objective == pytest.approx(
        objective_value(X, z, 0.7, l1_norm, res.w), rel=1e-12)


# ---------------------------------------------------------------------------
# max-norm solver

def test_linf_huge_lambda_exact_zero(problems):
    X, z = problems["tiny"]
    res = solve_linf(X, z, 1e9)
    assert np.all(res.w == 0.0)


def test_linf_matches_grid_search(problems):
    X, z = problems["linf4"]
    lam = 2.0
    res = solve_linf(X, z, lam)
    ours = objective_value(X, z, lam, linf_norm, res.w)
    ref = orc.linf_grid_search(X, z, lam)
    assert ours <= ref + 1e-4
    assert abs(ours - ref) <= 1e-4


def test_linf_solution_saturates_strict_subset(problems):
    # max-norm regularization pins a block of coordinates at the common
    # bound; at this size a strict, nonempty subset saturates (31 of 50)
    X, z = problems["wide"]
    res = solve_linf(X, z, 5.0, SolveOptions(tolerance=1e-12))
    assert res.converged
    peak = np.max(np.abs(res.w))
    assert peak > 0.0
    at_bound = int(np.sum(np.abs(res.w) >= peak * (1.0 - 1e-6)))
    assert 0 < at_bound < X.shape[1]
