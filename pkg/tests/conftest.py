import numpy as np
import pytest

from factorbreaks.pca import estimate_factors
from factorbreaks.projection import decompose


def make_factor_panel(T=120, N=40, r=2, noise=0.3, seed=0, break_at=None, post_scale=None):
    """Two-regime factor panel with optional rotational change post-break."""
    rng = np.random.default_rng(seed)
    k = break_at if break_at is not None else T // 2
    F = rng.standard_normal((T, r))
    L = rng.standard_normal((N, r))
    X = np.empty((T, N))
    X[:k] = F[:k] @ L.T
    if post_scale is None:
        X[k:] = F[k:] @ L.T
    else:
        X[k:] = F[k:] @ (L * post_scale).T
    X += noise * rng.standard_normal((T, N))
    return X, k


def fit_two_regimes(X, k, r):
    T = X.shape[0]
    est1 = estimate_factors(X[:k], r, span=(0, k))
    est2 = estimate_factors(X[k:], r, span=(k, T))
    return est1, est2, decompose(est1, est2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
