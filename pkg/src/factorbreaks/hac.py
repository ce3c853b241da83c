"""Bartlett-kernel long-run covariance estimation.

The estimator is the Newey-West form

    LRV = G_0 + sum_{j=1}^{b} (1 - j/(b+1)) (G_j + G_j'),
    G_j = (1/T) sum_{t=j+1}^{T} u_t u_{t-j}',

with lag weights 1 - j/(b+1) so the estimate is positive semidefinite.
Score series fed to the break tests are centered at zero under their null
by construction and are therefore not demeaned; ``demean`` exists for
diagnostics only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BandwidthError, ShapeError


def default_bandwidth(T: int, scale: float = 1.0) -> int:
    """Lag truncation floor(scale * T^(1/3)); scale=1 is the default rule."""
    if T < 1:
        raise ShapeError(f"sample size must be positive, got {T}")
    # epsilon guards exact cubes against fp cube-root undershoot (1000^(1/3))
    return int(math.floor(scale * T ** (1.0 / 3.0) + 1e-9))


@dataclass(frozen=True)
class HACConfig:
    """Bartlett HAC settings.

    bandwidth None means "resolve per sample" via :func:`default_bandwidth`
    with the given scale, so split-sample tests use each regime's own lag
    truncation.
    """

    bandwidth: int | None = None
    bandwidth_scale: float = 1.0
    kernel: str = "bartlett"
    demean: bool = False

    def __post_init__(self) -> None:
        if self.kernel != "bartlett":
            raise ValueError(f"unsupported kernel {self.kernel!r}")
        if self.bandwidth is not None and self.bandwidth < 0:
            raise ValueError("bandwidth must be nonnegative")
        if self.bandwidth_scale <= 0:
            raise ValueError("bandwidth_scale must be positive")

    def resolve_bandwidth(self, T: int) -> int:
        if self.bandwidth is not None:
            return self.bandwidth
        return default_bandwidth(T, self.bandwidth_scale)


def bartlett_weights(bandwidth: int) -> np.ndarray:
    """Weights for lags 1..bandwidth: 1 - j/(b+1)."""
    j = np.arange(1, bandwidth + 1, dtype=float)
    return 1.0 - j / (bandwidth + 1.0)


def bartlett_lrv(
    series: np.ndarray,
    cfg: HACConfig | None = None,
    return_clipped: bool = False,
) -> np.ndarray | tuple[np.ndarray, float]:
    """Bartlett long-run covariance of a T x p score series.

    Returns a symmetric PSD p x p matrix; negative eigenvalues arising
    from roundoff are clipped to zero.  With ``return_clipped=True`` also
    returns the total clipped eigenvalue mass.

    Raises
    ------
    BandwidthError
        If the resolved bandwidth is not smaller than T.
    """
    if cfg is None:
        cfg = HACConfig()
    u = np.asarray(series, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.ndim != 2:
        raise ShapeError(f"expected a T x p series, got shape {series.shape}")
    T, p = u.shape
    if T < 1 or p < 1:
        raise ShapeError(f"degenerate series shape {u.shape}")
    b = cfg.resolve_bandwidth(T)
    if b >= T:
        raise BandwidthError(f"bandwidth {b} must be smaller than T={T}")
    if cfg.demean:
        u = u - u.mean(axis=0)

    lrv = u.T @ u / T
    for j, w in zip(range(1, b + 1), bartlett_weights(b)):
        gamma_j = u[j:].T @ u[:-j] / T
        lrv += w * (gamma_j + gamma_j.T)
    lrv = 0.5 * (lrv + lrv.T)

    vals, vecs = np.linalg.eigh(lrv)
    clipped = float(-vals[vals < 0].sum())
    if clipped > 0.0:
        vals = np.clip(vals, 0.0, None)
        lrv = (vecs * vals) @ vecs.T
        lrv = 0.5 * (lrv + lrv.T)
    if return_clipped:
        return lrv, clipped
    return lrv
