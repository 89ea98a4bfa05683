"""Sparsity budgets and projections onto them.

Two budget shapes are supported: a global cap of k nonzeros, and n:m
group sparsity where every group of m consecutive entries down each
output column keeps at most n. Projections keep the largest magnitudes
and preserve the surviving values exactly; magnitude ties resolve toward
the smaller row-major linear index so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidInputError
from .linalg import as_matrix


@dataclass(frozen=True)
class Unstructured:
    """Keep at most k nonzero weights across the whole matrix."""

    k: int

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 0:
            raise InvalidInputError(f"k must be a nonnegative integer, got {self.k!r}")


@dataclass(frozen=True)
class NM:
    """Keep at most n nonzeros in every group of m consecutive input weights."""

    n: int
    m: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.n > self.m:
            raise InvalidInputError(f"need 1 <= n <= m, got n={self.n}, m={self.m}")


SparsityBudget = Union[Unstructured, NM]


def check_budget(budget: SparsityBudget, shape: tuple[int, int]) -> None:
    """Reject budgets that cannot bind to a matrix of the given shape."""
    n_in, n_out = shape
    if isinstance(budget, Unstructured):
        if budget.k > n_in * n_out:
            raise InvalidInputError(
                f"budget k={budget.k} exceeds matrix size {n_in * n_out}"
            )
    elif isinstance(budget, NM):
        if n_in % budget.m != 0:
            raise InvalidInputError(
                f"input dimension {n_in} not divisible by group size {budget.m}"
            )
    else:
        raise InvalidInputError(f"unknown budget type {type(budget).__name__}")


def budget_size(budget: SparsityBudget, shape: tuple[int, int]) -> int:
    """Maximum number of kept weights a budget allows on the given shape."""
    check_budget(budget, shape)
    n_in, n_out = shape
    if isinstance(budget, Unstructured):
        return min(budget.k, n_in * n_out)
    return budget.n * (n_in // budget.m) * n_out


@dataclass(frozen=True, eq=False)
class SupportMask:
    """Boolean nonzero pattern with its population count cached."""

    mask: np.ndarray
    count: int


def support_of(a) -> SupportMask:
    """Support (exact-nonzero pattern) of a matrix."""
    a = as_matrix(a, "matrix")
    mask = a != 0.0
    return SupportMask(mask=mask, count=int(mask.sum()))


def support_change(a: SupportMask, b: SupportMask) -> int:
    """Size of the symmetric difference between two supports."""
    if a.mask.shape != b.mask.shape:
        raise InvalidInputError(
            f"support shapes differ: {a.mask.shape} vs {b.mask.shape}"
        )
    return int((a.mask ^ b.mask).sum())


def topk_mask(scores: np.ndarray, k: int) -> np.ndarray:
    """Boolean mask of the k largest scores, ties to the smaller flat index."""
    flat = scores.ravel()
    size = flat.size
    if k <= 0:
        return np.zeros(scores.shape, dtype=bool)
    if k >= size:
        return np.ones(scores.shape, dtype=bool)
    threshold = np.partition(flat, size - k)[size - k]
    mask = flat > threshold
    # Entries strictly above the threshold always survive; the remaining
    # slots go to threshold-valued entries in index order.
    short = k - int(mask.sum())
    if short > 0:
        mask[np.flatnonzero(flat == threshold)[:short]] = True
    return mask.reshape(scores.shape)


def nm_mask(scores: np.ndarray, n: int, m: int) -> np.ndarray:
    """Per-group top-n mask over groups of m consecutive rows per column."""
    n_in, n_out = scores.shape
    grouped = scores.reshape(n_in // m, m, n_out)
    # Stable sort on negated scores keeps equal values in index order.
    order = np.argsort(-grouped, axis=1, kind="stable")
    mask = np.zeros_like(grouped, dtype=bool)
    np.put_along_axis(mask, order[:, :n, :], True, axis=1)
    return mask.reshape(n_in, n_out)


def project_topk(a, k: int) -> np.ndarray:
    """Projection onto matrices with at most k nonzeros.

    Keeps the k largest-magnitude entries at their exact values and
    zeroes the rest; the closest such matrix in Frobenius distance.
    """
    a = as_matrix(a, "matrix")
    if k < 0 or k > a.size:
        raise InvalidInputError(f"k={k} out of range for a matrix with {a.size} entries")
    return np.where(topk_mask(np.abs(a), k), a, 0.0)


def project_nm(a, n: int, m: int) -> np.ndarray:
    """Projection onto n:m sparsity along the input dimension.

    Each output column is cut into groups of m consecutive weights; the
    n largest magnitudes per group survive unchanged.
    """
    a = as_matrix(a, "matrix")
    if m < 1 or n < 1 or n > m:
        raise InvalidInputError(f"need 1 <= n <= m, got n={n}, m={m}")
    if a.shape[0] % m != 0:
        raise InvalidInputError(
            f"input dimension {a.shape[0]} not divisible by group size {m}"
        )
    return np.where(nm_mask(np.abs(a), n, m), a, 0.0)


def project(a, budget: SparsityBudget) -> np.ndarray:
    """Project onto whichever budget shape is active."""
    if isinstance(budget, Unstructured):
        return project_topk(a, budget.k)
    if isinstance(budget, NM):
        return project_nm(a, budget.n, budget.m)
    raise InvalidInputError(f"unknown budget type {type(budget).__name__}")
