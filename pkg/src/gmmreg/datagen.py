"""Gaussian mixture training data with corrupted labels.

The model: two classes with correlated means mu1, mu2 (componentwise bivariate
normal, correlation r), isotropic noise sigma^2 I, n/2 training rows per class,
and exactly round(c * n/2) labels flipped per class. The design matrix is
X = A + M where A is the iid noise and M stacks the class means rowwise.

Randomness is counter-based (Philox) with one documented substream per
purpose, so trials are reproducible and independent:

    purpose 0: class means          purpose 2: test points
    purpose 1: training set         purpose 3: one-bit score noise
               (noise draws, then flip choices, from one stream)
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import IO

import numpy as np

__all__ = [
    "ProblemConfig",
    "Means",
    "GmmInstance",
    "purpose_rng",
    "sample_means",
    "build_training_set",
    "sample_test_point",
    "sample_instance",
    "flips_per_class",
    "realized_corruption",
    "dump_instance",
]

PURPOSE_MEANS = 0
PURPOSE_TRAIN = 1
PURPOSE_TEST = 2
PURPOSE_ONEBIT = 3


@dataclass(frozen=True)
class ProblemConfig:
    """Model and experiment parameters.

    n: training count (positive, even). d: dimension, d > n. c: corruption
    rate in [0, 0.5). r: mean cross-correlation in [-1, 1]. sigma: noise std,
    positive. lam: regularization strength, nonnegative. seed: u64.
    """

    n: int
    d: int
    c: float
    r: float
    sigma: float
    lam: float
    seed: int

    def __post_init__(self) -> None:
        if self.n <= 0 or self.n % 2 != 0:
            raise ValueError(f"n must be positive and even, got {self.n}")
        if self.d <= self.n:
            raise ValueError(f"d must exceed n, got d={self.d}, n={self.n}")
        if not 0.0 <= self.c < 0.5:
            raise ValueError(f"c must be in [0, 0.5), got {self.c}")
        if not -1.0 <= self.r <= 1.0:
            raise ValueError(f"r must be in [-1, 1], got {self.r}")
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.lam < 0.0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if flips_per_class(self) >= self.n // 2:
            raise ValueError("corruption would flip an entire class")

    def with_lambda(self, lam: float) -> "ProblemConfig":
        return replace(self, lam=lam)


def flips_per_class(config: ProblemConfig) -> int:
    """round(c * n / 2), the exact number of labels flipped in each class."""
    return int(round(config.c * config.n / 2.0))


def realized_corruption(config: ProblemConfig) -> float:
    """The corruption rate actually realized after rounding: flips / (n/2)."""
    return flips_per_class(config) / (config.n / 2.0)


def purpose_rng(seed: int, purpose: int) -> np.random.Generator:
    """Philox generator for one purpose substream of a master seed."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(purpose,))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Means:
    """The two class means; arrays are read-only."""

    mu1: np.ndarray
    mu2: np.ndarray

    def __post_init__(self) -> None:
        for name in ("mu1", "mu2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.mu1.shape != self.mu2.shape or self.mu1.ndim != 1:
            raise ValueError("mu1 and mu2 must be 1-D arrays of equal length")


@dataclass(frozen=True)
class GmmInstance:
    """One sampled training problem. All arrays are read-only.

    X = A + M (rows 1..n/2 centered at mu1, the rest at mu2); z_clean holds
    the true labels; z the corrupted ones; corrupted marks the flipped rows,
    exactly round(c*n/2) per class.
    """

    means: Means
    X: np.ndarray
    z_clean: np.ndarray
    z: np.ndarray
    corrupted: np.ndarray
    config: ProblemConfig

    def __post_init__(self) -> None:
        for name in ("X", "z_clean", "z", "corrupted"):
            arr = getattr(self, name)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def onebit_rng(self) -> np.random.Generator:
        """The instance's dedicated score-noise stream.

        Re-derived on each call, so consumers drawing the same amount get
        identical values: functions built on it stay pure.
        """
        return purpose_rng(self.config.seed, PURPOSE_ONEBIT)


def sample_means(d: int, r: float, rng: np.random.Generator) -> Means:
    """Correlated class means: (mu1_i, mu2_i) iid bivariate N(0, [[1,r],[r,1]]).

    Sampled as mu1 = g1, mu2 = r g1 + sqrt(1-r^2) g2 so that r = +-1 gives
    exact equality / negation coordinatewise.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not -1.0 <= r <= 1.0:
        raise ValueError(f"r must be in [-1, 1], got {r}")
    g1 = rng.standard_normal(d)
    g2 = rng.standard_normal(d)
    mu1 = g1
    mu2 = r * g1 + np.sqrt(max(0.0, 1.0 - r * r)) * g2
    return Means(mu1=mu1, mu2=mu2)


def build_training_set(means: Means, config: ProblemConfig,
                       rng: np.random.Generator) -> GmmInstance:
    """Assemble X = A + M and the corrupted labels.

    The stream is consumed in a fixed order: first the n*d noise entries,
    then the flip choices (uniform without replacement within each class),
    so the instance is a pure function of (means, config, rng state).
    """
    n, d = config.n, config.d
    if means.mu1.size != d:
        raise ValueError(f"means have dimension {means.mu1.size}, config says {d}")
    half = n // 2
    flips = flips_per_class(config)
    if flips >= half:
        raise ValueError("corruption would flip an entire class")

    A = rng.normal(0.0, config.sigma, size=(n, d))
    M = np.vstack([np.tile(means.mu1, (half, 1)), np.tile(means.mu2, (half, 1))])
    X = A + M

    z_clean = np.concatenate([np.ones(half), -np.ones(half)])
    corrupted = np.zeros(n, dtype=bool)
    for block in range(2):
        picks = rng.choice(half, size=flips, replace=False)
        corrupted[block * half + picks] = True
    z = np.where(corrupted, -z_clean, z_clean)

    return GmmInstance(means=means, X=X, z_clean=z_clean, z=z,
                       corrupted=corrupted, config=config)


def sample_test_point(means: Means, sigma: float,
                      rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """One fresh test draw: fair class coin, then x ~ N(mu_class, sigma^2 I)."""
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    label = 1 if rng.random() < 0.5 else -1
    mu = means.mu1 if label == 1 else means.mu2
    x = mu + sigma * rng.standard_normal(mu.size)
    return x, label


def sample_instance(config: ProblemConfig) -> GmmInstance:
    """Sample means and training set from the config's purpose substreams."""
    means = sample_means(config.d, config.r,
                         purpose_rng(config.seed, PURPOSE_MEANS))
    return build_training_set(means, config,
                              purpose_rng(config.seed, PURPOSE_TRAIN))


def dump_instance(instance: GmmInstance, fh: IO[str]) -> None:
    """Write an instance as plain decimal text for cross-tool debugging.

    One header line "n d c r sigma seed", then n rows of X (d values each),
    then one row with the n corrupted labels. 17 significant digits.
    """
    cfg = instance.config
    fh.write(f"{cfg.n} {cfg.d} {cfg.c:.17g} {cfg.r:.17g} "
             f"{cfg.sigma:.17g} {cfg.seed}\n")
    for row in instance.X:
        fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
    fh.write(" ".join(f"{int(v):d}" for v in instance.z) + "\n")
