"""Dense linear algebra kernels for the layer reconstruction objective.

Everything here operates on the Gram matrix H = X^T X of calibration
activations. The objective tr((W_hat - W)^T H (W_hat - W)) is fully
determined by H and the dense weights, so activations can be discarded
once the Gram is accumulated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInstanceError, InvalidInputError

SYMMETRY_RTOL = 1e-9
EIG_NEG_RTOL = 1e-8


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array with finite entries and positive dims."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must have positive dimensions, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def gram_from_activations(x, block_rows: int = 4096) -> np.ndarray:
    """Accumulate H = X^T X over row blocks.

    Blocked accumulation keeps the working set at block_rows x n_in no
    matter how many samples the activation matrix carries. The result is
    symmetrized to kill rounding skew.
    """
    x = as_matrix(x, "activations")
    if block_rows < 1:
        raise InvalidInputError("block_rows must be positive")
    n = x.shape[1]
    h = np.zeros((n, n))
    for start in range(0, x.shape[0], block_rows):
        blk = x[start : start + block_rows]
        h += blk.T @ blk
    return (h + h.T) / 2.0


def validate_gram(h) -> np.ndarray:
    """Check that h is square, finite, and symmetric within tolerance."""
    h = as_matrix(h, "gram")
    if h.shape[0] != h.shape[1]:
        raise InvalidInputError(f"gram must be square, got {h.shape}")
    scale = np.abs(h).max()
    if not np.allclose(h, h.T, rtol=0.0, atol=SYMMETRY_RTOL * max(scale, 1e-300)):
        raise InvalidInputError("gram is not symmetric within tolerance")
    return h


@dataclass(frozen=True, eq=False)
class EigenCache:
    """Eigendecomposition H = Q diag(eigenvalues) Q^T, reused across solves.

    Eigenvalues are ascending and clamped to be nonnegative. Negative
    values beyond the rounding tolerance are rejected upstream.
    """

    q: np.ndarray
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def spectral_norm(self) -> float:
        return float(self.eigenvalues[-1])


def eigendecompose(h) -> EigenCache:
    """Factor a PSD Gram matrix once so ridge systems solve in O(n^2) per rhs.

    Eigenvalues in [-EIG_NEG_RTOL * max_eig, 0) are rounding noise and get
    clamped to zero; anything more negative means the input is not PSD.
    """
    h = validate_gram(h)
    eigenvalues, q = np.linalg.eigh(h)
    max_eig = max(float(eigenvalues[-1]), 0.0)
    if eigenvalues[0] < -EIG_NEG_RTOL * max_eig:
        raise InvalidInputError(
            f"gram is not positive semidefinite: min eigenvalue {eigenvalues[0]:.3e} "
            f"vs max {max_eig:.3e}"
        )
    return EigenCache(q=q, eigenvalues=np.clip(eigenvalues, 0.0, None))


def ridge_solve(cache: EigenCache, rho: float, b) -> np.ndarray:
    """Solve (H + rho*I) W = B through the cached eigenbasis."""
    if not rho > 0:
        raise InvalidInputError(f"rho must be positive, got {rho}")
    b = as_matrix(b, "rhs")
    if b.shape[0] != cache.dim:
        raise InvalidInputError(
            f"rhs has {b.shape[0]} rows, expected {cache.dim}"
        )
    qtb = cache.q.T @ b
    qtb /= (cache.eigenvalues + rho)[:, None]
    return cache.q @ qtb


def layer_objective(h, w_hat, w) -> float:
    """Reconstruction gap tr((W_hat - W)^T H (W_hat - W)), clamped at zero."""
    h = as_matrix(h, "gram")
    w_hat = as_matrix(w_hat, "dense weights")
    w = as_matrix(w, "weights")
    if w.shape != w_hat.shape or w_hat.shape[0] != h.shape[0]:
        raise InvalidInputError("shape mismatch between gram and weights")
    delta = w_hat - w
    # The quadratic form can go mildly negative from rounding on PSD input.
    return max(float(np.vdot(delta, h @ delta)), 0.0)


def relative_error(h, w_hat, w) -> float:
    """Relative reconstruction error of W against the dense weights W_hat.

    Defined as tr((W_hat-W)^T H (W_hat-W)) / tr(W_hat^T H W_hat). The
    denominator is the energy of the dense layer output; a zero value
    means the instance carries no signal to preserve.
    """
    h = as_matrix(h, "gram")
    w_hat = as_matrix(w_hat, "dense weights")
    denom = float(np.vdot(w_hat, h @ w_hat))
    if denom <= 0.0:
        raise DegenerateInstanceError("dense weights have zero output energy")
    return layer_objective(h, w_hat, w) / denom
