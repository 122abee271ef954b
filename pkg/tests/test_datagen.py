"""Mixture sampling: correlated means, corrupted labels, purpose streams."""

import io
import math

import numpy as np
import pytest

from gmmreg.datagen import (
    PURPOSE_MEANS,
    PURPOSE_ONEBIT,
    PURPOSE_TEST,
    PURPOSE_TRAIN,
    GmmInstance,
    Means,
    ProblemConfig,
    build_training_set,
    dump_instance,
    flips_per_class,
    purpose_rng,
    realized_corruption,
    sample_instance,
    sample_means,
    sample_test_point,
)


def nominal(**kw):
    base = dict(n=200, d=2000, c=0.2, r=0.8, sigma=2.0, lam=1.0, seed=0)
    base.update(kw)
    return ProblemConfig(**base)


# ---------------------------------------------------------------------------
# config validation

@pytest.mark.parametrize("kw", [
    dict(n=201),            # odd
    dict(n=0),
    dict(n=-4),
    dict(d=200),            # d must exceed n
    dict(d=150),
    dict(c=0.5),            # half-corruption excluded
    dict(c=-0.01),
    dict(r=1.5),
    dict(r=-1.0001),
    dict(sigma=0.0),
    dict(sigma=-2.0),
    dict(lam=-1e-9),
    dict(seed=-1),
    dict(seed=2 ** 64),
])
def test_config_rejects_invalid(kw):
    with pytest.raises(ValueError):
        nominal(**kw)


def test_config_accepts_boundaries():
    nominal(c=0.0)
    nominal(c=0.49)
    nominal(r=1.0)
    nominal(r=-1.0)
    nominal(lam=0.0)
    nominal(seed=2 ** 64 - 1)


def test_with_lambda_replaces_only_lambda():
    cfg = nominal()
    cfg2 = cfg.with_lambda(77.0)
    assert cfg2.lam == 77.0
    assert cfg2.n == cfg.n and cfg2.seed == cfg.seed
    assert cfg.lam == 1.0  # original untouched


def test_flip_count_and_realized_rate():
    cfg = nominal()
    assert flips_per_class(cfg) == 20
    assert realized_corruption(cfg) == 0.2
    # rounding shows up at small n
    tiny = ProblemConfig(n=6, d=10, c=0.2, r=0.5, sigma=1.0, lam=1.0, seed=0)
    assert flips_per_class(tiny) == 1
    assert realized_corruption(tiny) == pytest.approx(1.0 / 3.0)


# ---------------------------------------------------------------------------
# means

def test_means_exact_at_full_correlation():
    m = sample_means(50, 1.0, purpose_rng(3, PURPOSE_MEANS))
    assert np.array_equal(m.mu2, m.mu1)
    m = sample_means(50, -1.0, purpose_rng(3, PURPOSE_MEANS))
    assert np.array_equal(m.mu2, -m.mu1)


def test_means_empirical_correlation():
    m = sample_means(10 ** 5, 0.8, purpose_rng(0, PURPOSE_MEANS))
    corr = float(np.corrcoef(m.mu1, m.mu2)[0, 1])
    assert abs(corr - 0.8) <= 0.01  # measured 0.00072 at this seed


def test_means_reject_bad_r():
    with pytest.raises(ValueError):
        sample_means(10, 1.2, purpose_rng(0, PURPOSE_MEANS))


def test_means_arrays_readonly():
    m = sample_means(10, 0.5, purpose_rng(0, PURPOSE_MEANS))
    with pytest.raises(ValueError):
        m.mu1[0] = 99.0


# ---------------------------------------------------------------------------
# training set

def test_clean_labels_at_zero_corruption():
    cfg = nominal(c=0.0, n=40, d=60)
    inst = sample_instance(cfg)
    assert np.array_equal(inst.z, inst.z_clean)
    assert not inst.corrupted.any()


def test_exact_flip_count_per_class():
    inst = sample_instance(nominal())
    half = 100
    assert int(inst.corrupted[:half].sum()) == 20
    assert int(inst.corrupted[half:].sum()) == 20
    assert int(np.sum(inst.z != inst.z_clean)) == 40


def test_label_algebra():
    inst = sample_instance(nominal(n=20, d=50))
    assert set(np.unique(inst.z_clean)) == {-1.0, 1.0}
    assert set(np.unique(inst.z)) <= {-1.0, 1.0}
    assert np.array_equal(inst.z_clean[:10], np.ones(10))
    assert np.array_equal(inst.z_clean[10:], -np.ones(10))
    assert np.array_equal(inst.z, np.where(inst.corrupted, -inst.z_clean,
                                           inst.z_clean))


def test_column_means_within_clt_band():
    # |colmean - mu| <= 4 sigma / sqrt(n/2) entrywise; seeds with measured
    # margins: seed 4 max z = 2.61, seed 5 max z = 2.72
    for seed in (4, 5):
        cfg = ProblemConfig(n=200, d=300, c=0.2, r=0.8, sigma=2.0, lam=1.0,
                            seed=seed)
        inst = sample_instance(cfg)
        half = cfg.n // 2
        band = 4.0 * cfg.sigma / math.sqrt(half)
        assert np.all(np.abs(inst.X[:half].mean(axis=0) - inst.means.mu1)
                      <= band)
        assert np.all(np.abs(inst.X[half:].mean(axis=0) - inst.means.mu2)
                      <= band)


def test_noise_gram_diagonal():
    # ||A_i||^2 concentrates at d sigma^2 with SD sigma^2 sqrt(2d); allow 5
    # SDs per row (measured max 2.88 across seeds 4, 5)
    for seed in (4, 5):
        cfg = ProblemConfig(n=200, d=300, c=0.2, r=0.8, sigma=2.0, lam=1.0,
                            seed=seed)
        inst = sample_instance(cfg)
        half = cfg.n // 2
        M = np.vstack([np.tile(inst.means.mu1, (half, 1)),
                       np.tile(inst.means.mu2, (half, 1))])
        A = inst.X - M
        diag = np.einsum("ij,ij->i", A, A)
        sd = cfg.sigma ** 2 * math.sqrt(2.0 * cfg.d)
        assert np.all(np.abs(diag - cfg.d * cfg.sigma ** 2) <= 5.0 * sd)


def test_dimension_mismatch_rejected():
    m = sample_means(30, 0.5, purpose_rng(0, PURPOSE_MEANS))
    with pytest.raises(ValueError):
        build_training_set(m, nominal(n=20, d=50),
                           purpose_rng(0, PURPOSE_TRAIN))


def test_instance_arrays_readonly():
    inst = sample_instance(nominal(n=20, d=50))
    with pytest.raises(ValueError):
        inst.X[0, 0] = 0.0
    with pytest.raises(ValueError):
        inst.z[0] = -1.0


# ---------------------------------------------------------------------------
# test points

def test_test_point_collapses_to_class_mean():
    m = sample_means(20, 0.3, purpose_rng(7, PURPOSE_MEANS))
    x, label = sample_test_point(m, 1e-12, purpose_rng(7, PURPOSE_TEST))
    mu = m.mu1 if label == 1 else m.mu2
    np.testing.assert_allclose(x, mu, atol=1e-10)


def test_test_point_rejects_nonpositive_sigma():
    m = sample_means(5, 0.0, purpose_rng(0, PURPOSE_MEANS))
    with pytest.raises(ValueError):
        sample_test_point(m, 0.0, purpose_rng(0, PURPOSE_TEST))


def test_test_point_statistics():
    # 1e5 draws at seed 11: class-1 frequency 0.50032, worst per-coordinate
    # variance error 0.32%
    m = sample_means(5, 0.3, purpose_rng(11, PURPOSE_MEANS))
    rng = purpose_rng(11, PURPOSE_TEST)
    count = 10 ** 5
    pts = np.empty((count, 5))
    labs = np.empty(count)
    for i in range(count):
        pts[i], labs[i] = sample_test_point(m, 1.5, rng)
    freq = float(np.mean(labs == 1))
    assert abs(freq - 0.5) <= 0.01
    centered = pts - np.where((labs == 1)[:, None], m.mu1, m.mu2)
    var = centered.var(axis=0, ddof=1)
    assert np.all(np.abs(var / 1.5 ** 2 - 1.0) <= 0.05)


# ---------------------------------------------------------------------------
# determinism and streams

def test_instance_bit_identical():
    a = sample_instance(nominal())
    b = sample_instance(nominal())
    assert np.array_equal(a.X, b.X)
    assert np.array_equal(a.z, b.z)
    assert np.array_equal(a.means.mu1, b.means.mu1)
    assert np.array_equal(a.corrupted, b.corrupted)


def test_purpose_streams_independent():
    draws = {p: purpose_rng(0, p).standard_normal(8)
             for p in (PURPOSE_MEANS, PURPOSE_TRAIN, PURPOSE_TEST,
                       PURPOSE_ONEBIT)}
    streams = list(draws.values())
    for i in range(len(streams)):
        for j in range(i + 1, len(streams)):
            assert not np.array_equal(streams[i], streams[j])


def test_onebit_stream_rederived_per_call():
    inst = sample_instance(nominal(n=20, d=50))
    a = inst.onebit_rng().standard_normal(16)
    b = inst.onebit_rng().standard_normal(16)
    assert np.array_equal(a, b)


def test_seed_changes_instance():
    a = sample_instance(nominal(seed=0))
    b = sample_instance(nominal(seed=1))
    assert not np.array_equal(a.X, b.X)


# ---------------------------------------------------------------------------
# text dump

def test_dump_layout_and_roundtrip():
    cfg = nominal(n=4, d=6, c=0.2, seed=9)
    # c=0.2 at n=4 would flip round(0.4)=0 rows; fine for a layout test
    inst = sample_instance(cfg)
    buf = io.StringIO()
    dump_instance(inst, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].split() == ["4", "6", "0.20000000000000001",
                                "0.80000000000000004", "2", "9"]
    assert len(lines) == 1 + 4 + 1
    parsed = np.array([[float(tok) for tok in line.split()]
                       for line in lines[1:5]])
    assert np.array_equal(parsed, inst.X)  # 17 digits round-trip doubles
    labels = [int(tok) for tok in lines[5].split()]
    assert labels == [int(v) for v in inst.z]
