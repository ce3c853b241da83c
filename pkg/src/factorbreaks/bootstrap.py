"""Moving-block bootstrap confidence interval for the trace ratio.

Whole cross-sectional rows are resampled in overlapping time blocks,
independently within each regime, so both serial and cross-sectional
dependence survive resampling and the break location is preserved.
Replicate RNG streams are derived from the master seed by replicate
index, which makes results independent of execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BootstrapUnstable, NumericalError, ShapeError
from .panel import BreakSpec, Panel
from .pca import estimate_factors
from .projection import decompose, trace_ratio


@dataclass(frozen=True)
class BootstrapConfig:
    """Settings for the moving-block bootstrap.

    block_length None resolves to floor(T^(1/3)).  ``level`` is the
    significance level: 0.05 gives a 95% percentile interval.
    """

    replications: int = 399
    block_length: int | None = None
    level: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if self.replications < 100:
            raise ValueError("need at least 100 bootstrap replications")
        if self.block_length is not None and self.block_length < 1:
            raise ValueError("block length must be at least 1")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must lie strictly inside (0, 1)")


def _resample_block_rows(X: np.ndarray, L: int, rng: np.random.Generator) -> np.ndarray:
    """Overlapping-block resample of the rows of X, same length out."""
    T = X.shape[0]
    n_blocks = math.ceil(T / L)
    starts = rng.integers(0, T - L + 1, size=n_blocks)
    idx = (starts[:, None] + np.arange(L)[None, :]).ravel()[:T]
    return X[idx]


def block_bootstrap_ci(
    panel: Panel | np.ndarray,
    break_spec: BreakSpec,
    r: int | tuple[int, int],
    cfg: BootstrapConfig,
) -> tuple[float, float]:
    """Percentile interval for the trace ratio under block resampling.

    Replicates whose factor estimation fails (rank loss in a resample)
    are skipped and counted; more than 10% skips raises
    BootstrapUnstable.
    """
    X = panel.values if isinstance(panel, Panel) else np.asarray(panel, dtype=float)
    k, T = break_spec.k, break_spec.T
    if X.shape[0] != T:
        raise ShapeError(f"panel has {X.shape[0]} rows, break spec expects {T}")
    r1, r2 = (r, r) if isinstance(r, int) else (int(r[0]), int(r[1]))
    T1, T2 = k, T - k
    L = cfg.block_length
    if L is None:
        L = max(1, int(math.floor(T ** (1.0 / 3.0))))
    if not 1 <= L < min(T1, T2):
        raise ShapeError(f"block length {L} must satisfy 1 <= L < min(T1, T2)={min(T1, T2)}")

    X1, X2 = X[:k], X[k:]
    ratios = []
    skipped = 0
    for b in range(cfg.replications):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(b,)))
        X1_star = _resample_block_rows(X1, L, rng)
        X2_star = _resample_block_rows(X2, L, rng)
        try:
            est1 = estimate_factors(X1_star, r1)
            est2 = estimate_factors(X2_star, r2)
            ratios.append(trace_ratio(decompose(est1, est2)))
        except NumericalError:
            skipped += 1
    if skipped > 0.1 * cfg.replications:
        raise BootstrapUnstable(
            f"{skipped} of {cfg.replications} bootstrap replicates failed"
        )
    lower = float(np.percentile(ratios, 100.0 * cfg.level / 2.0))
    upper = float(np.percentile(ratios, 100.0 * (1.0 - cfg.level / 2.0)))
    return lower, upper
