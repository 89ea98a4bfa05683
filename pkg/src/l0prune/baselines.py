"""Reference solvers and pruning baselines.

backsolve_exact is the optimality oracle for a fixed support;
brute_force_support is the global oracle for instances small enough to
enumerate. magnitude_prune and activation_weighted_prune are the two
standard one-shot baselines the solver is compared against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .diagnostics import IterTrace
from .errors import DegenerateInstanceError, DegenerateSupportError, InvalidInputError
from .linalg import as_matrix, layer_objective, relative_error, validate_gram
from .projections import (
    NM,
    SparsityBudget,
    SupportMask,
    Unstructured,
    check_budget,
    nm_mask,
    support_of,
    topk_mask,
)

BRUTE_FORCE_LIMIT = 20


@dataclass
class PruneSolution:
    """A pruned weight matrix with its quality metrics.

    objective and rel_error are evaluated against the Gram matrix when
    one is available; methods that never see a Gram leave them None.
    """

    w: np.ndarray
    support: SupportMask
    objective: float | None
    rel_error: float | None
    method: str
    stabilized: bool = True
    iterations: int = 0
    rho_final: float | None = None
    pcg_iters_used: int = 0
    trace: IterTrace | None = field(default=None, repr=False)


def _metrics(h, w_hat, w):
    if h is None:
        return None, None
    return layer_objective(h, w_hat, w), relative_error(h, w_hat, w)


def backsolve_exact(h, w_hat, support: SupportMask) -> np.ndarray:
    """Exact restricted least squares, column by column.

    For each output column solves the normal equations of the layer
    objective restricted to that column's support rows. Columns with an
    empty support come back zero. A singular restricted system raises
    DegenerateSupportError naming the offending column.
    """
    h = validate_gram(h)
    w_hat = as_matrix(w_hat, "dense weights")
    if w_hat.shape[0] != h.shape[0] or support.mask.shape != w_hat.shape:
        raise InvalidInputError("gram, weights, and support shapes do not conform")
    g = h @ w_hat
    w = np.zeros_like(w_hat)
    for j in range(w_hat.shape[1]):
        rows = np.flatnonzero(support.mask[:, j])
        if rows.size == 0:
            continue
        try:
            w[rows, j] = np.linalg.solve(h[np.ix_(rows, rows)], g[rows, j])
        except np.linalg.LinAlgError:
            raise DegenerateSupportError(j) from None
        if not np.all(np.isfinite(w[rows, j])):
            raise DegenerateSupportError(j)
    return w


def brute_force_support(h, w_hat, k: int) -> PruneSolution:
    """Global optimum by enumerating every support of size k.

    Only available for at most BRUTE_FORCE_LIMIT weights; the candidate
    count explodes combinatorially beyond that. Supports whose restricted
    system is singular cannot be certified by the exact solver and are
    skipped. Objective ties resolve to the lexicographically smallest
    support, which enumeration order provides for free.
    """
    h = validate_gram(h)
    w_hat = as_matrix(w_hat, "dense weights")
    n_in, n_out = w_hat.shape
    size = n_in * n_out
    if size > BRUTE_FORCE_LIMIT:
        raise InvalidInputError(
            f"instance has {size} weights; enumeration is capped at {BRUTE_FORCE_LIMIT}"
        )
    if k < 0 or k > size:
        raise InvalidInputError(f"k={k} out of range for {size} weights")

    best_w = None
    best_obj = np.inf
    for indices in combinations(range(size), k):
        mask = np.zeros(size, dtype=bool)
        mask[list(indices)] = True
        candidate = SupportMask(mask=mask.reshape(n_in, n_out), count=k)
        try:
            w = backsolve_exact(h, w_hat, candidate)
        except DegenerateSupportError:
            continue
        obj = layer_objective(h, w_hat, w)
        if obj < best_obj:
            best_obj = obj
            best_w = w
    if best_w is None:
        raise DegenerateInstanceError("every candidate support was singular")
    objective, rel = _metrics(h, w_hat, best_w)
    return PruneSolution(
        w=best_w,
        support=support_of(best_w),
        objective=objective,
        rel_error=rel,
        method="brute_force",
    )


def magnitude_prune(w_hat, budget: SparsityBudget, gram=None) -> PruneSolution:
    """Keep the largest-magnitude weights allowed by the budget."""
    w_hat = as_matrix(w_hat, "dense weights")
    check_budget(budget, w_hat.shape)
    if isinstance(budget, Unstructured):
        mask = topk_mask(np.abs(w_hat), budget.k)
    else:
        mask = nm_mask(np.abs(w_hat), budget.n, budget.m)
    w = np.where(mask, w_hat, 0.0)
    objective, rel = _metrics(gram, w_hat, w)
    return PruneSolution(
        w=w,
        support=support_of(w),
        objective=objective,
        rel_error=rel,
        method="magnitude",
    )


def activation_weighted_prune(w_hat, h, budget: SparsityBudget) -> PruneSolution:
    """Keep weights scoring highest on |weight| times input activation norm.

    The score for weight (i, j) is |W_hat[i, j]| * sqrt(H[i, i]), i.e. the
    weight magnitude scaled by the calibration norm of input channel i.
    Selection follows the budget (global top-k or per-group top-n) and the
    surviving weights keep their dense values. This scores against the
    Gram diagonal only, ignoring cross-channel correlation, so it is an
    approximation of activation-aware selection rather than a solver.
    """
    h = validate_gram(h)
    w_hat = as_matrix(w_hat, "dense weights")
    if w_hat.shape[0] != h.shape[0]:
        raise InvalidInputError("gram and weight shapes do not conform")
    check_budget(budget, w_hat.shape)
    channel_norms = np.sqrt(np.clip(np.diag(h), 0.0, None))
    scores = np.abs(w_hat) * channel_norms[:, None]
    if isinstance(budget, Unstructured):
        mask = topk_mask(scores, budget.k)
    else:
        mask = nm_mask(scores, budget.n, budget.m)
    w = np.where(mask, w_hat, 0.0)
    objective, rel = _metrics(h, w_hat, w)
    return PruneSolution(
        w=w,
        support=support_of(w),
        objective=objective,
        rel_error=rel,
        method="activation_weighted",
    )
