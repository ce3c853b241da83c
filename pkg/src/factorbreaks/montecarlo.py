"""Simulation harness: data-generating process and size/power experiments.

The DGP draws two independent N(0, I_r) loading matrices, keeps the first
as the pre-break loadings, and uses the projection residual of the second
on the first as the orthogonal shift direction.  Post-break loadings for
series i are Z l_i + omega w_i, where Z is either the identity or a lower
triangular matrix with diagonal [2.5, 1.5, 0.5] (r = 3) and N(0, 1)
entries below the diagonal.  Factors follow an AR(1) driven by standard
normal innovations; errors follow an AR(1) across time with jointly
normal innovations whose cross-sectional covariance is Toeplitz
beta^|i-j|, and enter scaled by sqrt(theta), so theta = 3 with r = 3
puts the signal-to-noise ratio at 50% when the factors are white noise.

Neither AR(1) rescales its innovations for persistence, so at rho != 0
each factor has marginal variance 1/(1 - rho^2) rather than 1.  Set
``rescale_factor_innovations`` to shrink the innovations by
sqrt(1 - rho^2) for unit marginal variance; the default (no rescaling)
is the convention consistent with the reference size/power tables, most
visibly through the full-sample factor-count diagnostic and test power
in the combined-break design at rho = 0.7.

Replicates use RNG streams derived from the cell seed by replicate
index, so experiments are reproducible regardless of scheduling.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .break_tests import disentangle, holm_adjust
from .panel import Panel
from .pca import ic_p2

BREAK_TYPES = ("NONE", "W_ONLY", "Z_ONLY", "BOTH")
Z_SPECS = ("IDENTITY", "LOWER_TRIANGULAR_PAPER")


@dataclass(frozen=True)
class DGPConfig:
    """All knobs of the simulated two-regime factor model."""

    N: int
    T: int
    r: int = 3
    pi: float = 0.5
    rho: float = 0.0       # factor AR(1)
    alpha: float = 0.0     # error AR(1)
    beta: float = 0.0      # cross-sectional Toeplitz correlation
    theta: float = 3.0     # noise variance multiplier
    omega: float = 1.0     # loading-shift size (only active for W breaks)
    break_type: str = "NONE"
    z_spec: str = "LOWER_TRIANGULAR_PAPER"
    fix_z: bool = False    # draw Z once per cell instead of per replicate
    rescale_factor_innovations: bool = False  # True: unit marginal factor variance
    seed: int = 0

    def __post_init__(self) -> None:
        if self.N < 2 or self.T < 4:
            raise ValueError("N >= 2 and T >= 4 required")
        if not 0.0 < self.pi < 1.0:
            raise ValueError("break fraction must lie strictly inside (0, 1)")
        if not (abs(self.rho) < 1 and abs(self.alpha) < 1 and abs(self.beta) < 1):
            raise ValueError("AR and correlation parameters must be < 1 in magnitude")
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.break_type not in BREAK_TYPES:
            raise ValueError(f"break_type must be one of {BREAK_TYPES}")
        if self.z_spec not in Z_SPECS:
            raise ValueError(f"z_spec must be one of {Z_SPECS}")

    @property
    def k(self) -> int:
        return int(math.floor(self.pi * self.T))

    @property
    def has_z_break(self) -> bool:
        return self.break_type in ("Z_ONLY", "BOTH")

    @property
    def has_w_break(self) -> bool:
        return self.break_type in ("W_ONLY", "BOTH")


@dataclass(frozen=True)
class GroundTruth:
    """True quantities behind a simulated panel, for oracle checks."""

    loadings_pre: np.ndarray
    loadings_post: np.ndarray
    shift: np.ndarray
    rotation: np.ndarray
    factors: np.ndarray
    k: int


def _draw_rotation(cfg: DGPConfig, rng: np.random.Generator) -> np.ndarray:
    if not cfg.has_z_break or cfg.z_spec == "IDENTITY":
        return np.eye(cfg.r)
    # diagonal follows the r = 3 pattern [2.5, 1.5, 0.5]
    Z = np.diag(np.linspace(2.5, 0.5, cfg.r))
    low = np.tril_indices(cfg.r, k=-1)
    Z[low] = rng.standard_normal(low[0].shape[0])
    return Z


def _ar1_path(innov: np.ndarray, coef: float, start: np.ndarray) -> np.ndarray:
    """x_t = coef * x_{t-1} + innov_t with x_0 = start (start is returned row 0's lag)."""
    out = np.empty_like(innov)
    prev = start
    for t in range(innov.shape[0]):
        prev = coef * prev + innov[t]
        out[t] = prev
    return out


def simulate_dgp(
    cfg: DGPConfig,
    rng: np.random.Generator | None = None,
    fixed_z: np.ndarray | None = None,
) -> tuple[Panel, GroundTruth]:
    """Draw one panel from the two-regime DGP.

    Returns the simulated panel together with the true loadings, shift,
    rotation, factors and break index.  AR processes start from their
    stationary distributions, so no burn-in is needed.
    """
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    N, T, r = cfg.N, cfg.T, cfg.r
    k = cfg.k

    loadings_pre = rng.standard_normal((N, r))
    lambda2_raw = rng.standard_normal((N, r))
    Z = fixed_z if fixed_z is not None else _draw_rotation(cfg, rng)
    # orthogonal shift = projection residual of the second draw on the first
    coefs = np.linalg.solve(loadings_pre.T @ loadings_pre, loadings_pre.T @ lambda2_raw)
    shift = lambda2_raw - loadings_pre @ coefs
    omega = cfg.omega if cfg.has_w_break else 0.0
    loadings_post = loadings_pre @ Z.T + omega * shift

    # factors: AR(1) from its stationary distribution; standard normal
    # innovations by default (marginal variance 1/(1 - rho^2)), optionally
    # rescaled so the marginal variance is 1
    innov_sd = math.sqrt(1.0 - cfg.rho ** 2) if cfg.rescale_factor_innovations else 1.0
    start_sd = innov_sd / math.sqrt(1.0 - cfg.rho ** 2)
    f_start = rng.standard_normal(r) * start_sd
    f_innov = rng.standard_normal((T, r)) * innov_sd
    factors = _ar1_path(f_innov, cfg.rho, f_start)

    # errors: AR(1) in t, innovations jointly normal with Toeplitz covariance
    chol = np.linalg.cholesky(cfg.beta ** np.abs(np.subtract.outer(np.arange(N), np.arange(N))))
    e_start = (rng.standard_normal(N) @ chol.T) / math.sqrt(1.0 - cfg.alpha ** 2)
    e_innov = rng.standard_normal((T, N)) @ chol.T
    errors = _ar1_path(e_innov, cfg.alpha, e_start)

    X = np.empty((T, N))
    X[:k] = factors[:k] @ loadings_pre.T
    X[k:] = factors[k:] @ loadings_post.T
    X += math.sqrt(cfg.theta) * errors

    panel = Panel(
        values=X,
        series_ids=[f"s{i + 1:03d}" for i in range(N)],
        time_index=[f"t{t + 1:04d}" for t in range(T)],
        standardized=False,
    )
    truth = GroundTruth(
        loadings_pre=loadings_pre,
        loadings_post=loadings_post,
        shift=shift,
        rotation=Z,
        factors=factors,
        k=k,
    )
    return panel, truth


@dataclass(frozen=True)
class ExperimentResult:
    """Rejection frequencies and diagnostics for one DGP cell."""

    config: DGPConfig
    reps: int
    level: float
    z_reject: float
    z_reject_holm: float
    w_reject: float
    w_reject_holm: float
    w_individual_rate: float
    mean_factor_count: float

    def mc_se(self, p: float) -> float:
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.reps)

    def to_row(self) -> dict:
        c = self.config
        return {
            "break_type": c.break_type,
            "T": c.T,
            "N": c.N,
            "r": c.r,
            "pi": c.pi,
            "rho": c.rho,
            "alpha": c.alpha,
            "beta": c.beta,
            "theta": c.theta,
            "omega": c.omega if c.has_w_break else 0.0,
            "reps": self.reps,
            "level": self.level,
            "z_reject": self.z_reject,
            "z_reject_se": self.mc_se(self.z_reject),
            "z_reject_holm": self.z_reject_holm,
            "w_reject": self.w_reject,
            "w_reject_se": self.mc_se(self.w_reject),
            "w_reject_holm": self.w_reject_holm,
            "w_individual_rate": self.w_individual_rate,
            "mean_factor_count": self.mean_factor_count,
        }


def _run_replicate(cfg: DGPConfig, rep: int, level: float, r_max: int,
                   fixed_z: np.ndarray | None) -> tuple[float, float, float, float]:
    """One replicate: (variance-test p, joint-shift p, individual rate, r-hat)."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(rep,)))
    panel, _ = simulate_dgp(cfg, rng=rng, fixed_z=fixed_z)
    report = disentangle(panel.values, cfg.k, cfg.r, level=level)
    n = len(report.w_individual)
    indiv_rate = sum(t.p_value < level for t in report.w_individual) / n
    rhat = ic_p2(panel.values, r_max)
    return (report.z_result.p_value, report.w_joint_result.p_value,
            indiv_rate, float(rhat))


def _run_cell(cfg: DGPConfig, reps: int, level: float, r_max: int,
              n_jobs: int | None) -> ExperimentResult:
    fixed_z = None
    if cfg.fix_z:
        master = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(2 ** 32,)))
        fixed_z = _draw_rotation(cfg, master)

    if n_jobs is None:
        n_jobs = os.cpu_count() or 1
    if n_jobs > 1 and reps > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(
                _run_replicate,
                [cfg] * reps, range(reps), [level] * reps, [r_max] * reps,
                [fixed_z] * reps,
                chunksize=max(1, reps // (8 * n_jobs)),
            ))
    else:
        rows = [_run_replicate(cfg, rep, level, r_max, fixed_z) for rep in range(reps)]

    p_z = np.array([row[0] for row in rows])
    p_w = np.array([row[1] for row in rows])
    adjusted = np.array([holm_adjust([a, b]) for a, b in zip(p_z, p_w)])
    return ExperimentResult(
        config=cfg,
        reps=reps,
        level=level,
        z_reject=float((p_z < level).mean()),
        z_reject_holm=float((adjusted[:, 0] < level).mean()),
        w_reject=float((p_w < level).mean()),
        w_reject_holm=float((adjusted[:, 1] < level).mean()),
        w_individual_rate=float(np.mean([row[2] for row in rows])),
        mean_factor_count=float(np.mean([row[3] for row in rows])),
    )


def run_experiment(
    grid: list[DGPConfig],
    reps: int,
    level: float = 0.05,
    r_max: int = 8,
    n_jobs: int | None = None,
) -> list[ExperimentResult]:
    """Run every cell of a simulation grid.

    For each cell, ``reps`` panels are simulated and the full
    disentangling procedure runs with the true break index and factor
    count.  Rejection frequencies at ``level`` are tabulated for the raw
    and Holm-adjusted p-values, together with the mean individual
    rejection rate and the mean full-sample IC_p(2) factor count.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    return [_run_cell(cfg, reps, level, r_max, n_jobs) for cfg in grid]


def results_to_csv(results: list[ExperimentResult], path) -> None:
    if not results:
        raise ValueError("no results to write")
    rows = [res.to_row() for res in results]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def grid_from_dicts(cells: list[dict], base_seed: int | None = None) -> list[DGPConfig]:
    """Build DGP configs from parsed grid-file entries.

    Cells without an explicit seed get base_seed + index (or the index
    itself when no base seed is given).
    """
    grid = []
    for i, cell in enumerate(cells):
        cell = dict(cell)
        if "seed" not in cell:
            cell["seed"] = (base_seed or 0) + i
        elif base_seed is not None:
            cell["seed"] = int(cell["seed"]) + base_seed
        grid.append(DGPConfig(**cell))
    return grid
