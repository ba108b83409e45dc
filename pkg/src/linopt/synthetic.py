"""Small reproducible datasets for tests, demos and the bundled examples."""

from __future__ import annotations

import numpy as np

from .dataio import Dataset


def make_classification(n=200, m=10, n_informative=None, noise=0.5,
                        density=1.0, seed=0) -> Dataset:
    """Binary data with labels in {-1, +1} from a noisy linear rule.

    Only the first ``n_informative`` features carry signal; the rest are
    noise, which gives L1 models something to prune.
    """
    rng = np.random.default_rng(seed)
    k = m if n_informative is None else n_informative
    X = rng.standard_normal((n, m))
    if density < 1.0:
        X *= rng.random((n, m)) < density
    w_true = np.zeros(m)
    w_true[:k] = rng.standard_normal(k) * 2.0
    score = X @ w_true + noise * rng.standard_normal(n)
    y = np.where(score >= 0, 1.0, -1.0)
    return Dataset.from_dense(X, y)


def make_multiclass(n=300, m=10, n_classes=3, spread=3.0, seed=0) -> Dataset:
    """Gaussian blobs, one per class, with labels ``0 .. n_classes-1``.

    A constant last feature acts as an intercept.
    """
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((n_classes, m - 1)) * spread
    y = np.arange(n) % n_classes
    X = centers[y] + rng.standard_normal((n, m - 1))
    X = np.hstack([X, np.ones((n, 1))])
    return Dataset.from_dense(X, y.astype(float))


def make_regression(n=100, m=5, noise=0.1, seed=0) -> Dataset:
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, m))
    w_true = rng.standard_normal(m)
    y = X @ w_true + noise * rng.standard_normal(n)
    return Dataset.from_dense(X, y)
