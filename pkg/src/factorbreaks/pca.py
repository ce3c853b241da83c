"""Principal-components factor estimation on a (sub)sample.

Normalization: factors satisfy F'F/T = I_r, so F is sqrt(T) times the top
eigenvectors of X X', and the least-squares loadings reduce to X'F/T.
Loadings then satisfy L'L/N = diag(eigenvalues of X X'/(N T)).

For efficiency the eigenproblem is solved on whichever Gram matrix is
smaller: X X' (T x T) when T <= N, else X'X (N x N).  If v is a unit
eigenvector of X'X with eigenvalue m, then X v / sqrt(m) is the matching
unit eigenvector of X X', which gives identical estimates either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient, ShapeError
from .numerics import eigh_topk, fix_signs

_RANK_TOL = 1e-12


@dataclass(frozen=True)
class FactorEstimate:
    """PCA factors and loadings for one sample or regime.

    factors:  T_m x r, normalized so factors'factors / T_m = I_r
    loadings: N x r least-squares loadings
    eigvals:  top-r eigenvalues of X X' / (N T_m), descending
    span:     half-open row range (start, stop) within the parent panel
    """

    factors: np.ndarray
    loadings: np.ndarray
    eigvals: np.ndarray
    span: tuple[int, int]

    @property
    def n_periods(self) -> int:
        return self.factors.shape[0]

    @property
    def n_series(self) -> int:
        return self.loadings.shape[0]

    @property
    def n_factors(self) -> int:
        return self.factors.shape[1]

    def common_component(self) -> np.ndarray:
        """Fitted values F L' (the rank-r approximation of the sample)."""
        return self.factors @ self.loadings.T


def estimate_factors(X: np.ndarray, r: int, span: tuple[int, int] | None = None) -> FactorEstimate:
    """Estimate r factors and loadings from a T_m x N data block.

    Raises
    ------
    ShapeError
        If r >= min(T_m, N).
    RankDeficient
        If the r-th eigenvalue is below 1e-12 times the first.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeError("X must be a 2-d array")
    T_m, N = X.shape
    if r < 1:
        raise ShapeError(f"need at least one factor, got r={r}")
    if r >= min(T_m, N):
        raise ShapeError(f"r={r} must be below min(T, N)={min(T_m, N)}")

    if T_m <= N:
        eig = eigh_topk(X @ X.T, r)
        factors = math.sqrt(T_m) * eig.eigenvectors
    else:
        eig = eigh_topk(X.T @ X, r)
        vals = np.maximum(eig.eigenvalues, 0.0)
        if vals[-1] <= _RANK_TOL * max(vals[0], 1e-300):
            raise RankDeficient(
                f"eigenvalue {r} is {vals[-1]:.3e}, not separated from zero"
            )
        factors = math.sqrt(T_m) * (X @ eig.eigenvectors) / np.sqrt(vals)
        factors = fix_signs(factors)

    vals = np.maximum(eig.eigenvalues, 0.0)
    if vals[-1] <= _RANK_TOL * max(vals[0], 1e-300):
        raise RankDeficient(
            f"eigenvalue {r} is {vals[-1]:.3e}, not separated from zero"
        )
    loadings = X.T @ factors / T_m
    if span is None:
        span = (0, T_m)
    return FactorEstimate(
        factors=factors,
        loadings=loadings,
        eigvals=vals / (N * T_m),
        span=span,
    )


def _pca_eigenvalues(X: np.ndarray, k: int) -> tuple[np.ndarray, float]:
    """Top-k eigenvalues of X X' plus the total sum of squares of X."""
    T, N = X.shape
    gram = X @ X.T if T <= N else X.T @ X
    eig = eigh_topk(gram, k)
    return np.maximum(eig.eigenvalues, 0.0), float(np.trace(gram))


def ic_p2(X: np.ndarray, r_max: int) -> int:
    """Select the number of factors by the IC_p(2) information criterion.

    Minimizes log V(k) + k ((N+T)/(N T)) log(min(N, T)) over k = 1..r_max,
    where V(k) is the mean squared residual of the rank-k PCA fit.  V(k)
    follows from the eigenvalues of X X': the fit is an orthogonal
    projection, so V(k) = (||X||_F^2 - sum of top-k eigenvalues) / (N T).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeError("X must be a 2-d array")
    T, N = X.shape
    if not 1 <= r_max < min(T, N):
        raise ShapeError(f"r_max={r_max} must satisfy 1 <= r_max < min(T, N)")
    vals, total_ss = _pca_eigenvalues(X, r_max)
    resid_ss = np.maximum(total_ss - np.cumsum(vals), 0.0)
    # exact low-rank fits leave V(k) at fp-cancellation level; flooring at a
    # relative threshold keeps log finite and ties those k, so the penalty
    # picks the smallest one
    v = np.maximum(resid_ss, 1e-12 * max(total_ss, 1e-300)) / (N * T)
    k = np.arange(1, r_max + 1)
    penalty = k * ((N + T) / (N * T)) * math.log(min(N, T))
    return int(np.argmin(np.log(v) + penalty)) + 1


def eigenvalue_ratio(X: np.ndarray, r_max: int) -> int:
    """Select the number of factors by the largest adjacent eigenvalue ratio.

    Maximizes l_k / l_{k+1} over k = 1..r_max, where l_k are eigenvalues
    of X X' / (N T).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeError("X must be a 2-d array")
    T, N = X.shape
    if not 1 <= r_max < min(T, N):
        raise ShapeError(f"r_max={r_max} must satisfy 1 <= r_max < min(T, N)")
    vals, _ = _pca_eigenvalues(X, r_max + 1)
    vals = vals / (N * T)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = vals[:-1] / vals[1:]
    ratios = np.where(np.isnan(ratios), -np.inf, ratios)
    return int(np.argmax(ratios)) + 1
