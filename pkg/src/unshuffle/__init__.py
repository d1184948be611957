"""Sparse recovery from shuffled linear measurements.

Two-stage robust-Lasso permutation/support recovery, an exhaustive
maximum-likelihood oracle for tiny instances, information-theoretic
threshold calculators and a Monte Carlo phase-transition harness.
"""

from .model import (
    DimensionError,
    NumericError,
    Permutation,
    ProblemInstance,
    RecoveryResult,
    SparseSignal,
    Truth,
    apply_permutation,
    hamming_distance,
)
from .datagen import GenSpec, generate_instance, sigma_from_snr
from .solver import RobustLassoSolution, SolverConfig, lasso, robust_lasso, soft_threshold
from .recovery import (
    AssignmentSolution,
    hard_threshold_topk,
    lap_bruteforce,
    lap_match,
    recover,
)
from .oracle import ml_estimate, projection_residual
from .bounds import (
    BoundQuery,
    approx_recovery_infeasible,
    exact_recovery_infeasible,
    log_factorial,
    log_zeta,
)
from .harness import SweepResult, SweepSpec, emit_plotdata, run_sweep, write_csv

__version__ = "0.1.0"
