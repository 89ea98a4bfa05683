"""Layer-wise pruning of linear layers under hard sparsity budgets.

Given the Gram matrix H = X^T X of calibration activations and dense
weights W_hat, the solvers here minimize the layer reconstruction error
tr((W_hat - W)^T H (W_hat - W)) subject to a global or n:m sparsity
budget on W, and verify their own convergence behavior from recorded
iteration traces.
"""

from .admm import (
    AdmmConfig,
    AdmmState,
    ScaledProblem,
    admm_solve,
    admm_step,
    budget_from_sparsity,
    initial_state,
    preprocess,
    rho_update,
)
from .baselines import (
    PruneSolution,
    activation_weighted_prune,
    backsolve_exact,
    brute_force_support,
    magnitude_prune,
)
from .diagnostics import (
    IterRecord,
    IterTrace,
    TheoremBound,
    Violation,
    check_lemma1,
    check_lemma2,
    theorem1_residual_bound,
)
from .errors import (
    BadMagicError,
    BreakdownError,
    DegenerateInstanceError,
    DegenerateSupportError,
    InvalidInputError,
    InvalidTraceError,
    MatrixFileError,
    NonFiniteDataError,
    PruneError,
    TruncatedFileError,
)
from .linalg import (
    EigenCache,
    eigendecompose,
    gram_from_activations,
    layer_objective,
    relative_error,
    ridge_solve,
    validate_gram,
)
from .matrixio import read_matrix, write_matrix
from .pcg import PcgConfig, pcg_refine
from .projections import (
    NM,
    SparsityBudget,
    SupportMask,
    Unstructured,
    project,
    project_nm,
    project_topk,
    support_change,
    support_of,
)

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "BadMagicError",
    "BreakdownError",
    "DegenerateInstanceError",
    "DegenerateSupportError",
    "EigenCache",
    "InvalidInputError",
    "InvalidTraceError",
    "IterRecord",
    "IterTrace",
    "MatrixFileError",
    "NM",
    "NonFiniteDataError",
    "PcgConfig",
    "PruneError",
    "PruneSolution",
    "ScaledProblem",
    "SparsityBudget",
    "SupportMask",
    "TheoremBound",
    "TruncatedFileError",
    "Unstructured",
    "Violation",
    "activation_weighted_prune",
    "admm_solve",
    "admm_step",
    "backsolve_exact",
    "brute_force_support",
    "budget_from_sparsity",
    "check_lemma1",
    "check_lemma2",
    "eigendecompose",
    "gram_from_activations",
    "initial_state",
    "layer_objective",
    "magnitude_prune",
    "pcg_refine",
    "preprocess",
    "project",
    "project_nm",
    "project_topk",
    "read_matrix",
    "relative_error",
    "rho_update",
    "ridge_solve",
    "support_change",
    "support_of",
    "theorem1_residual_bound",
    "validate_gram",
    "write_matrix",
]

__version__ = "0.1.0"
