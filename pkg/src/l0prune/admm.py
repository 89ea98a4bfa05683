"""Alternating solver for the budget-constrained layer reconstruction problem.

The solver splits the weights into a dense iterate W and a budget-feasible
iterate D coupled by a dual variable V, alternating

    W <- (H + rho I)^{-1} (G - V + rho D)        with G = H W_hat,
    D <- project(W + V / rho)                     onto the budget,
    V <- V + rho (W - D),

on a diagonally rescaled problem. The penalty rho starts small so the
support can move, and grows on a step schedule driven by how much the
support of D changed over the last few iterations. Once the support stops
changing the loop ends and conjugate-gradient refinement solves for the
optimal weights on the frozen support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .baselines import PruneSolution
from .diagnostics import IterRecord, IterTrace
from .errors import DegenerateInstanceError, InvalidInputError
from .linalg import (
    EigenCache,
    as_matrix,
    eigendecompose,
    layer_objective,
    relative_error,
    ridge_solve,
    validate_gram,
)
from .pcg import PcgConfig, pcg_refine
from .projections import (
    SparsityBudget,
    SupportMask,
    Unstructured,
    budget_size,
    check_budget,
    project,
    support_change,
    support_of,
)

DEAD_DIAG_RTOL = 1e-12


@dataclass(frozen=True)
class AdmmConfig:
    """Solver knobs. Defaults follow the reference schedule."""

    rho0: float = 0.1
    check_period: int = 3
    multipliers: tuple[float, float, float] = (1.3, 1.2, 1.1)
    thresholds: tuple[float, float] = (0.1, 0.005)
    max_iters: int = 300
    pcg_iters: int = 10

    def __post_init__(self):
        if not self.rho0 > 0:
            raise InvalidInputError("rho0 must be positive")
        if self.check_period < 1:
            raise InvalidInputError("check_period must be at least 1")
        if len(self.multipliers) != 3 or any(m <= 1.0 for m in self.multipliers):
            raise InvalidInputError("multipliers must be three factors above 1")
        if len(self.thresholds) != 2 or not 0 < self.thresholds[1] < self.thresholds[0]:
            raise InvalidInputError("thresholds must satisfy 0 < low < high")
        if self.max_iters < 1 or self.pcg_iters < 1:
            raise InvalidInputError("iteration caps must be positive")


def budget_from_sparsity(s: float, n_in: int, n_out: int) -> Unstructured:
    """Budget keeping floor((1 - s) * n_in * n_out) weights at sparsity s."""
    if not 0.0 <= s <= 1.0:
        raise InvalidInputError(f"sparsity must lie in [0, 1], got {s}")
    if n_in < 1 or n_out < 1:
        raise InvalidInputError("dimensions must be positive")
    # The nudge absorbs representation error when (1-s)*size is an exact
    # integer, e.g. s=0.9 on 100 weights.
    return Unstructured(int(math.floor(n_in * n_out * (1.0 - s) + 1e-9)))


@dataclass(frozen=True, eq=False)
class ScaledProblem:
    """Diagonally rescaled instance with unit Gram diagonal on live coords.

    scale holds the positive diagonal E with W = E W'; gram is E H E and
    w_hat is E^{-1} W_hat. Dead coordinates (vanishing Gram diagonal) are
    recorded, decoupled from the Gram, and their dense rows zeroed, which
    keeps every iterate exactly zero there.
    """

    scale: np.ndarray
    gram: np.ndarray
    w_hat: np.ndarray
    dead: np.ndarray


def preprocess(h, w_hat) -> ScaledProblem:
    """Rescale so the Gram has unit diagonal wherever it is positive."""
    h = validate_gram(h)
    w_hat = as_matrix(w_hat, "dense weights")
    if w_hat.shape[0] != h.shape[0]:
        raise InvalidInputError("gram and weight shapes do not conform")
    diag = np.diag(h).copy()
    max_diag = float(diag.max())
    if max_diag <= 0.0:
        raise DegenerateInstanceError("gram diagonal is entirely zero")
    dead = diag <= DEAD_DIAG_RTOL * max_diag
    scale = np.ones_like(diag)
    live = ~dead
    scale[live] = 1.0 / np.sqrt(diag[live])
    gram = h * scale[:, None] * scale[None, :]
    if dead.any():
        # Quarantine dead coordinates: congruence with a projection keeps
        # the matrix PSD, and zero rows pin their iterates at zero.
        gram[dead, :] = 0.0
        gram[:, dead] = 0.0
    gram = (gram + gram.T) / 2.0
    w_scaled = w_hat / scale[:, None]
    w_scaled[dead, :] = 0.0
    return ScaledProblem(scale=scale, gram=gram, w_hat=w_scaled, dead=dead)


@dataclass(frozen=True, eq=False)
class AdmmState:
    """One solve's iterates; created by initial_state, advanced by admm_step."""

    w: np.ndarray
    d: np.ndarray
    v: np.ndarray
    rho: float
    iteration: int
    prev_support: SupportMask
    g: np.ndarray
    cache: EigenCache


def initial_state(scaled: ScaledProblem, cache: EigenCache, rho0: float) -> AdmmState:
    """Start from the dense weights: D = W = w_hat, V = 0."""
    if not rho0 > 0:
        raise InvalidInputError("rho0 must be positive")
    w_hat = scaled.w_hat
    return AdmmState(
        w=w_hat.copy(),
        d=w_hat.copy(),
        v=np.zeros_like(w_hat),
        rho=rho0,
        iteration=0,
        prev_support=support_of(w_hat),
        g=scaled.gram @ w_hat,
        cache=cache,
    )


def admm_step(state: AdmmState, budget: SparsityBudget) -> AdmmState:
    """Advance W, D, V one iteration, in that order, under one rho."""
    rho = state.rho
    w = ridge_solve(state.cache, rho, state.g - state.v + rho * state.d)
    d = project(w + state.v / rho, budget)
    v = state.v + rho * (w - d)
    return replace(state, w=w, d=d, v=v, iteration=state.iteration + 1)


def rho_update(
    rho: float,
    s_t: int,
    k: int,
    multipliers: tuple[float, float, float] = (1.3, 1.2, 1.1),
    thresholds: tuple[float, float] = (0.1, 0.005),
) -> float | None:
    """Step-function penalty growth from the support change s_t.

    Large churn relative to the budget k grows rho aggressively, mild
    churn gently. Returns None when the support did not move at all,
    which signals the caller to stop iterating.
    """
    if s_t < 0:
        raise InvalidInputError("support change cannot be negative")
    if s_t == 0:
        return None
    if s_t >= thresholds[0] * k:
        return multipliers[0] * rho
    if s_t >= thresholds[1] * k:
        return multipliers[1] * rho
    return multipliers[2] * rho


def _frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def admm_solve(
    h,
    w_hat,
    budget: SparsityBudget,
    cfg: AdmmConfig = AdmmConfig(),
) -> PruneSolution:
    """Solve the layer pruning problem under a sparsity budget.

    Runs the alternating updates on the rescaled problem until the
    support of D survives a whole check period unchanged (or max_iters is
    hit, reported via the stabilized flag), then refines the weights on
    the frozen support with conjugate gradient and undoes the scaling.
    The returned solution carries a per-iteration trace for the
    convergence diagnostics.
    """
    h = validate_gram(h)
    w_hat = as_matrix(w_hat, "dense weights")
    if w_hat.shape[0] != h.shape[0]:
        raise InvalidInputError("gram and weight shapes do not conform")
    check_budget(budget, w_hat.shape)

    scaled = preprocess(h, w_hat)
    cache = eigendecompose(scaled.gram)
    state = initial_state(scaled, cache, cfg.rho0)
    k_eff = budget_size(budget, w_hat.shape)
    trace = IterTrace(
        records=[], h_spectral=cache.spectral_norm, g_norm=_frob(state.g)
    )

    # H D and H V for the trace, updated as the iterates move. D starts at
    # the (rescaled) dense weights, so H D starts at G.
    hd = state.g.copy()
    hv = np.zeros_like(state.g)
    stabilized = False
    while state.iteration < cfg.max_iters:
        rho_t = state.rho
        d_prev = state.d
        d_norm = _frob(d_prev)
        v_norm = _frob(state.v)
        grad_gap = _frob(state.g - hd)
        hv_norm = _frob(hv)

        state = admm_step(state, budget)

        delta = None
        boundary = state.iteration % cfg.check_period == 0
        if boundary:
            current = support_of(state.d)
            delta = support_change(current, state.prev_support)
            state = replace(state, prev_support=current)
        trace.records.append(
            IterRecord(
                rho=rho_t,
                d_norm=d_norm,
                v_norm=v_norm,
                grad_gap=grad_gap,
                hv_norm=hv_norm,
                v_next_norm=_frob(state.v),
                d_change=_frob(state.d - d_prev),
                wd_gap=_frob(state.w - state.d),
                support_change=delta,
            )
        )
        if boundary:
            new_rho = rho_update(
                rho_t, delta, k_eff, cfg.multipliers, cfg.thresholds
            )
            if new_rho is None:
                stabilized = True
                break
            state = replace(state, rho=new_rho)
        if state.iteration < cfg.max_iters:
            hd = scaled.gram @ state.d
            hv = scaled.gram @ state.v

    support = support_of(state.d)
    pcg_stats: dict = {}
    refined = pcg_refine(
        scaled.gram,
        scaled.w_hat,
        support,
        state.d,
        PcgConfig(max_iters=cfg.pcg_iters),
        stats=pcg_stats,
    )
    w = scaled.scale[:, None] * refined
    return PruneSolution(
        w=w,
        support=support_of(w),
        objective=layer_objective(h, w_hat, w),
        rel_error=relative_error(h, w_hat, w),
        method="admm",
        stabilized=stabilized,
        iterations=len(trace.records),
        rho_final=state.rho,
        pcg_iters_used=pcg_stats.get("iterations", 0),
        trace=trace,
    )
