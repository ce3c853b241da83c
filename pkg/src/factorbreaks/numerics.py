"""Shared numerical primitives.

Symmetric eigendecomposition with a fixed ordering/sign convention,
half-vectorization, and chi-square tail probabilities.  The chi-square
routines use the regularized incomplete gamma function (series expansion
for small arguments, Lentz continued fraction otherwise, as in Numerical
Recipes ch. 6) so the package has no dependency beyond numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError, ShapeError

_GAMMA_TOL = 1e-15
_GAMMA_MAX_ITER = 500


@dataclass(frozen=True)
class SymmetricEigenResult:
    """Top-k eigenpairs of a symmetric matrix.

    eigenvalues are sorted descending; eigenvectors holds the matching
    orthonormal columns.  Each column is flipped so that its entry of
    largest magnitude is positive, which makes results reproducible
    across LAPACK implementations.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_symmetric(S: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {S.shape}")
    scale = np.abs(S).max()
    if scale > 0 and np.abs(S - S.T).max() > rtol * scale:
        raise ShapeError("matrix is not symmetric within tolerance")
    return S


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    idx = np.abs(vectors).argmax(axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eigh_topk(S: np.ndarray, k: int) -> SymmetricEigenResult:
    """Top-k eigenpairs of a symmetric matrix, by algebraic value, descending.

    Parameters
    ----------
    S : (n, n) symmetric array
    k : number of eigenpairs to keep, 1 <= k <= n

    Raises
    ------
    ShapeError
        If S is not square/symmetric or k is out of range.
    NumericalError
        If the underlying eigensolver fails to converge.
    """
    S = _check_symmetric(S)
    n = S.shape[0]
    if not 1 <= k <= n:
        raise ShapeError(f"k={k} out of range for {n}x{n} matrix")
    try:
        vals, vecs = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(vals)[::-1][:k]
    return SymmetricEigenResult(
        eigenvalues=vals[order].copy(),
        eigenvectors=fix_signs(vecs[:, order]),
    )


def vech(S: np.ndarray) -> np.ndarray:
    """Column-major stack of the lower triangle of S, diagonal included.

    For r x r input the output has length r(r+1)/2.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ShapeError(f"vech expects a square matrix, got shape {S.shape}")
    rows, cols = vech_indices(S.shape[0])
    return S[rows, cols].copy()


def vech_indices(r: int) -> tuple[np.ndarray, np.ndarray]:
    """(row, col) index arrays selecting the lower triangle column by column."""
    cols, rows = np.triu_indices(r)  # upper triangle in row-major order
    # (j, i) of the upper triangle walked row-major is exactly the lower
    # triangle walked column-major.
    return rows, cols


def unvech(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vech`: rebuild the symmetric matrix."""
    v = np.asarray(v, dtype=float)
    m = v.shape[0]
    r = int(round((math.isqrt(8 * m + 1) - 1) / 2))
    if r * (r + 1) // 2 != m:
        raise ShapeError(f"length {m} is not a triangular number")
    S = np.zeros((r, r))
    rows, cols = vech_indices(r)
    S[rows, cols] = v
    S[cols, rows] = v
    return S


def _gamma_p_series(a: float, x: float) -> float:
    # P(a, x) by the power series; converges fast for x < a + 1.
    if x == 0.0:
        return 0.0
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_TOL:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise NumericalError("incomplete gamma series did not converge")


def _gamma_q_cf(a: float, x: float) -> float:
    # Q(a, x) by modified Lentz continued fraction; for x >= a + 1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_TOL:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise NumericalError("incomplete gamma continued fraction did not converge")


def gammainc_upper(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = Gamma(a, x)/Gamma(a)."""
    if a <= 0.0:
        raise DomainError("shape parameter must be positive")
    if x < 0.0:
        raise DomainError("argument must be nonnegative")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_cf(a, x)


def chi2_sf(x: float, df: int) -> float:
    """Chi-square survival function P(X > x) with df degrees of freedom."""
    if df < 1:
        raise DomainError(f"df must be a positive integer, got {df}")
    if x < 0.0:
        raise DomainError(f"chi-square statistic must be nonnegative, got {x}")
    return min(1.0, max(0.0, gammainc_upper(0.5 * df, 0.5 * x)))


def chi2_quantile(p: float, df: int) -> float:
    """Inverse CDF: x such that P(X <= x) = p, by safeguarded bisection."""
    if not 0.0 <= p < 1.0:
        raise DomainError(f"p must lie in [0, 1), got {p}")
    if p == 0.0:
        return 0.0
    target = 1.0 - p  # survival value at the quantile
    lo, hi = 0.0, max(float(df), 1.0)
    while chi2_sf(hi, df) > target:
        hi *= 2.0
        if hi > 1e10:  # pragma: no cover - unreachable for sane p
            raise NumericalError("chi2_quantile bracket expansion failed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_sf(mid, df) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)
