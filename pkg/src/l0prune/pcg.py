"""Support-restricted conjugate gradient refinement.

Solves min ||X(W_hat - W)||_F^2 over matrices supported on a fixed mask S
by running diagonally preconditioned CG on the normal equations
H W = H W_hat for all output columns at once, re-projecting the residual
onto S every iteration. A single step size couples the columns, which
makes each iteration two dense matrix products instead of a per-column
solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BreakdownError, InvalidInputError
from .linalg import as_matrix
from .projections import SupportMask


@dataclass(frozen=True)
class PcgConfig:
    max_iters: int = 10
    rel_tol: float = 1e-8
    abs_floor: float = 1e-14

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be at least 1")
        if self.rel_tol < 0 or self.abs_floor < 0:
            raise InvalidInputError("tolerances must be nonnegative")


def pcg_refine(
    h,
    w_hat,
    support: SupportMask,
    w0,
    cfg: PcgConfig = PcgConfig(),
    stats: dict | None = None,
) -> np.ndarray:
    """Refine weights on a fixed support toward the restricted optimum.

    Parameters
    ----------
    h : square Gram matrix.
    w_hat : dense reference weights.
    support : mask the solution must live on.
    w0 : warm start, already supported on the mask.
    cfg : iteration cap and stopping tolerances.
    stats : optional dict; receives iterations used and final residual.

    Returns the refined weights, supported on the mask. Raises
    BreakdownError when curvature along a search direction vanishes while
    the residual is still above tolerance, which signals a singular
    restricted system.
    """
    h = as_matrix(h, "gram")
    w_hat = as_matrix(w_hat, "dense weights")
    w0 = as_matrix(w0, "warm start")
    if h.shape[0] != h.shape[1] or h.shape[0] != w_hat.shape[0]:
        raise InvalidInputError("gram and weight shapes do not conform")
    if w0.shape != w_hat.shape or support.mask.shape != w_hat.shape:
        raise InvalidInputError("support or warm start shape mismatch")
    if np.any(w0[~support.mask] != 0.0):
        raise InvalidInputError("warm start has mass outside the support")

    # Jacobi preconditioner from the Gram diagonal; dead coordinates get 1
    # so the scaling stays finite (their residual rows are zero anyway).
    m_inv = np.diag(h).copy()
    m_inv[m_inv <= 0.0] = 1.0
    np.reciprocal(m_inv, out=m_inv)
    m_inv = m_inv[:, None]
    s_f = support.mask.astype(np.float64)

    w = w0.copy()
    r = h @ (w_hat - w)
    r *= s_f
    r0_norm = float(np.linalg.norm(r))
    if stats is not None:
        stats["iterations"] = 0
        stats["rel_residual"] = 0.0
    if r0_norm <= cfg.abs_floor:
        return w

    z = r * m_inv
    p = z.copy()
    rz = np.vdot(r, z)
    hp = np.empty_like(w)
    tmp = np.empty_like(w)
    rel_residual = 1.0
    iterations = 0
    for _ in range(cfg.max_iters):
        np.dot(h, p, out=hp)
        denom = np.vdot(p, hp)
        if denom <= 0.0:
            if rel_residual <= cfg.rel_tol:
                break
            raise BreakdownError(
                f"curvature {denom:.3e} along search direction with residual "
                f"{rel_residual:.3e} of start"
            )
        alpha = rz / denom
        np.multiply(p, alpha, out=tmp)
        w += tmp
        np.multiply(hp, alpha, out=tmp)
        r -= tmp
        r *= s_f
        np.multiply(r, m_inv, out=z)
        iterations += 1
        rel_residual = float(np.linalg.norm(r)) / r0_norm
        if rel_residual <= cfg.rel_tol:
            break
        rz_new = np.vdot(r, z)
        if rz_new == 0.0:
            break
        beta = rz_new / rz
        rz = rz_new
        np.multiply(p, beta, out=tmp)
        np.add(z, tmp, out=p)

    if stats is not None:
        stats["iterations"] = iterations
        stats["rel_residual"] = rel_residual
    return w
