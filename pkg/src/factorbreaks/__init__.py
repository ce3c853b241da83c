"""Disentangling factor-variance and loading breaks in large factor models.

The package estimates an approximate factor model separately on the two
sides of a candidate break date, decomposes the loading change into a
rotational component (a factor-covariance break) and an orthogonal shift
(a genuine loading break), and runs Wald tests for each break type,
together with trace-ratio break-size estimates, block-bootstrap
intervals, R^2 decompositions, and a Monte Carlo harness.
"""

__version__ = "0.1.0"

from . import errors
from .bootstrap import BootstrapConfig, block_bootstrap_ci
from .break_tests import (
    DisentangleReport,
    TestResult,
    disentangle,
    holm_adjust,
    w_all_individual_tests,
    w_individual_test,
    w_joint_test,
    z_lm_test,
    z_wald_test,
)
from .hac import HACConfig, bartlett_lrv, default_bandwidth
from .montecarlo import (
    DGPConfig,
    ExperimentResult,
    GroundTruth,
    results_to_csv,
    run_experiment,
    simulate_dgp,
)
from .numerics import (
    SymmetricEigenResult,
    chi2_quantile,
    chi2_sf,
    eigh_topk,
    unvech,
    vech,
)
from .panel import (
    BreakSpec,
    Panel,
    RawPanel,
    apply_transform,
    finalize,
    load_csv,
    resolve_break,
)
from .pca import FactorEstimate, eigenvalue_ratio, estimate_factors, ic_p2
from .projection import (
    ProjectionDecomposition,
    decompose,
    r_squared_decomposition,
    trace_ratio,
)

__all__ = [
    "__version__",
    "errors",
    "BootstrapConfig",
    "block_bootstrap_ci",
    "DisentangleReport",
    "TestResult",
    "disentangle",
    "holm_adjust",
    "w_all_individual_tests",
    "w_individual_test",
    "w_joint_test",
    "z_lm_test",
    "z_wald_test",
    "HACConfig",
    "bartlett_lrv",
    "default_bandwidth",
    "DGPConfig",
    "ExperimentResult",
    "GroundTruth",
    "results_to_csv",
    "run_experiment",
    "simulate_dgp",
    "SymmetricEigenResult",
    "chi2_quantile",
    "chi2_sf",
    "eigh_topk",
    "unvech",
    "vech",
    "BreakSpec",
    "Panel",
    "RawPanel",
    "apply_transform",
    "finalize",
    "load_csv",
    "resolve_break",
    "FactorEstimate",
    "eigenvalue_ratio",
    "estimate_factors",
    "ic_p2",
    "ProjectionDecomposition",
    "decompose",
    "r_squared_decomposition",
    "trace_ratio",
]
