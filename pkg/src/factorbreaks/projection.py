"""Projection-based decomposition of the loading change between regimes.

Given pre- and post-break loading estimates L1 (N x r1) and L2 (N x r2),
the post-break loadings are split into the part explained by a linear map
of the pre-break loadings and an orthogonal remainder:

    Z = (L1'L1)^{-1} L1'L2          (r1 x r2 rotational change)
    W = L2 - L1 Z                   (N x r2 orthogonal shift, L1'W = 0)

Post-multiplying the regime-2 factors by Z' maps them onto the regime-1
normalization basis; the combined series F_hat = [F1; F2 Z'] then has a
second-moment process whose pre/post difference isolates changes in the
factor covariance, while W carries genuine loading shifts.

When r1 > r2 (a factor disappears post-break) Z is rectangular and the
combined series keeps r1 columns, with the regime-2 block lying in the
rank-r2 image of Z'.  The emerging-factor case is handled by swapping the
two regimes before calling :func:`decompose`.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient, ShapeError
from .panel import BreakSpec, Panel
from .pca import FactorEstimate

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ProjectionDecomposition:
    """Estimated rotational change, orthogonal shift, and rotated factors."""

    Z: np.ndarray       # r1 x r2
    W: np.ndarray       # N x r2
    F_hat: np.ndarray   # T x r1: regime 1 factors, then regime 2 mapped via Z
    break_spec: BreakSpec

    @property
    def r1(self) -> int:
        return self.Z.shape[0]

    @property
    def r2(self) -> int:
        return self.Z.shape[1]

    @property
    def n_series(self) -> int:
        return self.W.shape[0]

    def shift_norms(self) -> np.ndarray:
        """Euclidean norm of each series' orthogonal shift row."""
        return np.linalg.norm(self.W, axis=1)

    def to_dict(self) -> dict:
        return {
            "k": self.break_spec.k,
            "T": self.break_spec.T,
            "pi": self.break_spec.pi,
            "r1": self.r1,
            "r2": self.r2,
            "Z": self.Z.tolist(),
            "shift_norms": self.shift_norms().tolist(),
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict() | {"W": self.W.tolist()}, fh, indent=2)

    def to_csv(self, path, series_ids: list[str] | None = None) -> None:
        """Per-series table: shift row and its norm."""
        ids = series_ids or [f"s{i}" for i in range(self.n_series)]
        if len(ids) != self.n_series:
            raise ShapeError("series_ids length does not match W rows")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["series_id"] + [f"w_{j + 1}" for j in range(self.r2)] + ["shift_norm"]
            )
            norms = self.shift_norms()
            for sid, row, nrm in zip(ids, self.W, norms):
                writer.writerow([sid, *(f"{x:.10g}" for x in row), f"{nrm:.10g}"])


def decompose(est1: FactorEstimate, est2: FactorEstimate) -> ProjectionDecomposition:
    """Split the regime-2 loadings into a rotation of regime 1 plus a shift.

    The two estimates must share the cross-section; r1 >= r2 is allowed
    (disappearing factors).  Raises RankDeficient when the regime-1
    loading Gram matrix is numerically singular.
    """
    L1, L2 = est1.loadings, est2.loadings
    if L1.shape[0] != L2.shape[0]:
        raise ShapeError(
            f"estimates cover different cross-sections: {L1.shape[0]} vs {L2.shape[0]}"
        )
    gram = L1.T @ L1
    # under the PCA normalization gram/N is diagonal with the regime-1
    # eigenvalues, so conditioning trouble means near-zero eigenvalues
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond):
        raise RankDeficient("regime-1 loading Gram matrix is singular")
    if cond > _COND_LIMIT:
        Z, _, rank, _ = np.linalg.lstsq(L1, L2, rcond=None)
        if rank < L1.shape[1]:
            raise RankDeficient(
                f"regime-1 loadings have rank {rank} < {L1.shape[1]}"
            )
    else:
        Z = np.linalg.solve(gram, L1.T @ L2)
    W = L2 - L1 @ Z

    k = est1.n_periods
    T = k + est2.n_periods
    F_hat = np.vstack([est1.factors, est2.factors @ Z.T])
    return ProjectionDecomposition(
        Z=Z, W=W, F_hat=F_hat, break_spec=BreakSpec(k=k, T=T)
    )


def trace_ratio(decomp: ProjectionDecomposition) -> float:
    """Post-to-pre ratio of total factor variance, tr(Z Z') / r1.

    Under the PCA normalization the pre-break second moment of the
    combined factor series is I_{r1} (trace r1) and the post-break second
    moment is Z Z', so the ratio estimates how much the total factor
    variance (de)inflated across the break.
    """
    return float(np.trace(decomp.Z @ decomp.Z.T) / decomp.r1)


def r_squared_decomposition(
    panel: Panel | np.ndarray,
    est1: FactorEstimate,
    est2: FactorEstimate,
    decomp: ProjectionDecomposition,
    restrict_w: bool = False,
) -> np.ndarray:
    """Per-series R-squared of the fitted common component.

    Unrestricted fit: [F1 L1'; F2 L2'].  With ``restrict_w`` the regime-2
    loadings are replaced by L1 Z, i.e. the loading shift is zeroed out.
    R^2_i = 1 - sum_t (fit - x)^2 / sum_t x^2, which can be negative when
    the restricted fit is worse than predicting zero.
    """
    X = panel.values if isinstance(panel, Panel) else np.asarray(panel, dtype=float)
    T = X.shape[0]
    k = decomp.break_spec.k
    if est1.span != (0, k) or est2.span != (k, T):
        raise ShapeError(
            f"estimate spans {est1.span}, {est2.span} do not tile a {T}-row panel "
            f"split at k={k}"
        )
    fit1 = est1.common_component()
    if restrict_w:
        fit2 = est2.factors @ (est1.loadings @ decomp.Z).T
    else:
        fit2 = est2.common_component()
    fitted = np.vstack([fit1, fit2])
    resid_ss = ((fitted - X) ** 2).sum(axis=0)
    total_ss = (X ** 2).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = 1.0 - resid_ss / total_ss
    return r2
