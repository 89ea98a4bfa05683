import numpy as np
import pytest

from l0prune import (
    NM,
    AdmmConfig,
    DegenerateInstanceError,
    InvalidInputError,
    Unstructured,
    admm_solve,
    admm_step,
    brute_force_support,
    budget_from_sparsity,
    eigendecompose,
    layer_objective,
    preprocess,
    rho_update,
)
from l0prune.admm import initial_state
from l0prune.projections import budget_size

from conftest import random_problem, random_psd


# --- budget_from_sparsity ---


@pytest.mark.parametrize(
    "s,n_in,n_out,k",
    [
        (0.0, 4, 4, 16),
        (1.0, 4, 4, 0),
        (0.7, 10, 10, 30),
        (0.9, 10, 10, 10),  # (1-0.9)*100 is not exact in binary; floor must not lose a slot
        (0.5, 3, 3, 4),
    ],
)
def test_budget_from_sparsity_counts_kept_weights(s, n_in, n_out, k):
    assert budget_from_sparsity(s, n_in, n_out) == Unstructured(k)


def test_budget_from_sparsity_range_check():
    with pytest.raises(InvalidInputError):
        budget_from_sparsity(1.5, 4, 4)


# --- config ---


def test_config_defaults():
    cfg = AdmmConfig()
    assert cfg.rho0 == 0.1
    assert cfg.check_period == 3
    assert cfg.multipliers == (1.3, 1.2, 1.1)
    assert cfg.thresholds == (0.1, 0.005)
    assert cfg.max_iters == 300
    assert cfg.pcg_iters == 10


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rho0": 0.0},
        {"check_period": 0},
        {"multipliers": (1.3, 1.0, 1.1)},
        {"multipliers": (1.3, 1.2)},
        {"thresholds": (0.005, 0.1)},
        {"max_iters": 0},
        {"pcg_iters": 0},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(InvalidInputError):
        AdmmConfig(**kwargs)


# --- preprocess ---


def test_preprocess_unit_diagonal():
    scaled = preprocess(np.diag([4.0, 1.0]), np.ones((2, 1)))
    np.testing.assert_allclose(scaled.scale, [0.5, 1.0])
    np.testing.assert_allclose(scaled.gram, np.eye(2))
    np.testing.assert_allclose(scaled.w_hat, [[2.0], [1.0]])


def test_preprocess_identity_unchanged():
    rng = np.random.default_rng(0)
    w_hat = rng.standard_normal((3, 2))
    scaled = preprocess(np.eye(3), w_hat)
    np.testing.assert_array_equal(scaled.gram, np.eye(3))
    np.testing.assert_array_equal(scaled.w_hat, w_hat)


def test_preprocess_preserves_objective():
    rng = np.random.default_rng(1)
    h = random_psd(rng, 5)
    w_hat = rng.standard_normal((5, 3))
    w = rng.standard_normal((5, 3))
    scaled = preprocess(h, w_hat)
    direct = layer_objective(h, w_hat, w)
    rescaled = layer_objective(scaled.gram, scaled.w_hat, w / scaled.scale[:, None])
    assert rescaled == pytest.approx(direct, rel=1e-10)


def test_preprocess_zero_diagonal_rejected():
    with pytest.raises(DegenerateInstanceError):
        preprocess(np.zeros((3, 3)), np.ones((3, 1)))


def test_preprocess_quarantines_dead_coordinates():
    h = np.diag([2.0, 0.0, 1.0])
    w_hat = np.array([[1.0], [5.0], [1.0]])
    scaled = preprocess(h, w_hat)
    assert scaled.dead.tolist() == [False, True, False]
    assert not scaled.gram[1].any() and not scaled.gram[:, 1].any()
    assert scaled.w_hat[1, 0] == 0.0


# --- admm_step ---


def test_first_step_fixes_dense_weights():
    # From the start state the dense update has W_hat as its exact solution.
    rng = np.random.default_rng(2)
    h, w_hat = random_problem(rng, 6, 3)
    scaled = preprocess(h, w_hat)
    state = initial_state(scaled, eigendecompose(scaled.gram), 0.1)
    stepped = admm_step(state, Unstructured(18))
    np.testing.assert_allclose(stepped.w, scaled.w_hat, atol=1e-12)


def test_step_with_zero_gram_copies_sparse_iterate():
    scaled = preprocess(np.diag([1.0, 1.0]), np.zeros((2, 2)))
    state = initial_state(scaled, eigendecompose(scaled.gram), 0.5)
    # Force G = 0 and V = 0 by zero weights; then W = (rho D) / (H + rho).
    stepped = admm_step(state, Unstructured(4))
    np.testing.assert_allclose(stepped.w, state.d / 3.0, atol=1e-14)


def test_step_matches_explicit_inverse():
    rng = np.random.default_rng(3)
    h, w_hat = random_problem(rng, 5, 2)
    scaled = preprocess(h, w_hat)
    cache = eigendecompose(scaled.gram)
    state = initial_state(scaled, cache, 0.1)
    budget = Unstructured(4)
    for _ in range(3):
        state = admm_step(state, budget)

    rho = state.rho
    hp, wp = scaled.gram, state
    inv = np.linalg.inv(hp + rho * np.eye(5))
    w = inv @ (wp.g - wp.v + rho * wp.d)
    d = np.where(
        np.abs(w + wp.v / rho)
        >= np.partition(np.abs(w + wp.v / rho).ravel(), -4)[-4],
        w + wp.v / rho,
        0.0,
    )
    v = wp.v + rho * (w - d)
    after = admm_step(state, budget)
    np.testing.assert_allclose(after.w, w, atol=1e-8)
    np.testing.assert_allclose(after.d, d, atol=1e-8)
    np.testing.assert_allclose(after.v, v, atol=1e-8)


def test_sparse_iterate_feasible_after_every_step():
    rng = np.random.default_rng(4)
    h, w_hat = random_problem(rng, 6, 4)
    scaled = preprocess(h, w_hat)
    state = initial_state(scaled, eigendecompose(scaled.gram), 0.1)
    for budget in (Unstructured(7), NM(2, 3)):
        s = state
        cap = budget_size(budget, w_hat.shape)
        for _ in range(10):
            s = admm_step(s, budget)
            assert np.count_nonzero(s.d) <= cap


# --- rho_update ---


@pytest.mark.parametrize(
    "rho,s_t,k,expected",
    [
        (0.1, 10, 100, 0.13),   # s_t >= 0.1 k
        (0.1, 5, 100, 0.12),    # 0.005 k <= s_t < 0.1 k
        (0.1, 1, 100, 0.12),    # k too small for the gentlest tier
        (0.1, 1, 240, 0.11),    # 1 <= s_t < 0.005 k needs k > 200
        (0.5, 120, 100, 0.65),
    ],
)
def test_rho_update_step_function(rho, s_t, k, expected):
    assert rho_update(rho, s_t, k) == pytest.approx(expected)


def test_rho_update_signals_stabilized():
    assert rho_update(0.5, 0, 100) is None


def test_rho_update_rejects_negative_change():
    with pytest.raises(InvalidInputError):
        rho_update(0.1, -1, 10)


# --- admm_solve ---


def test_full_budget_recovers_dense_weights():
    rng = np.random.default_rng(5)
    h, w_hat = random_problem(rng, 6, 3)
    sol = admm_solve(h, w_hat, Unstructured(18))
    assert sol.rel_error <= 1e-12
    np.testing.assert_allclose(sol.w, w_hat, atol=1e-8)


def test_solution_support_is_exactly_k():
    rng = np.random.default_rng(6)
    h, w_hat = random_problem(rng, 8, 4)
    sol = admm_solve(h, w_hat, Unstructured(10))
    assert sol.support.count == 10
    assert np.array_equal(sol.w != 0, sol.support.mask)


def test_near_optimal_on_enumerable_instance():
    rng = np.random.default_rng(1)
    h, w_hat = random_problem(rng, 4, 2)
    optimum = brute_force_support(h, w_hat, 3).objective
    sol = admm_solve(h, w_hat, Unstructured(3))
    assert sol.objective >= optimum - 1e-9
    assert sol.objective <= 1.05 * optimum


def test_never_beats_the_exhaustive_oracle():
    for seed in range(8):
        rng = np.random.default_rng(seed)
        h, w_hat = random_problem(rng, 3, 2)
        optimum = brute_force_support(h, w_hat, 3).objective
        assert admm_solve(h, w_hat, Unstructured(3)).objective >= optimum - 1e-9


def test_zero_budget_solution():
    rng = np.random.default_rng(7)
    h, w_hat = random_problem(rng, 6, 3)
    sol = admm_solve(h, w_hat, Unstructured(0))
    assert sol.support.count == 0
    assert sol.rel_error == pytest.approx(1.0)
    assert sol.stabilized


def test_nm_budget_feasible_groupwise():
    rng = np.random.default_rng(8)
    h, w_hat = random_problem(rng, 8, 4)
    sol = admm_solve(h, w_hat, NM(2, 4))
    groups = sol.w.reshape(2, 4, 4)
    assert (np.count_nonzero(groups, axis=1) <= 2).all()


def test_iteration_cap_reported_not_raised():
    rng = np.random.default_rng(9)
    h, w_hat = random_problem(rng, 6, 3)
    sol = admm_solve(h, w_hat, Unstructured(8), AdmmConfig(max_iters=1))
    assert not sol.stabilized
    assert sol.iterations == 1
    assert sol.support.count == 8  # still budget-feasible


def test_trace_matches_run_length_and_rho_monotone():
    rng = np.random.default_rng(10)
    h, w_hat = random_problem(rng, 8, 4)
    sol = admm_solve(h, w_hat, Unstructured(10))
    assert len(sol.trace) == sol.iterations
    rhos = [rec.rho for rec in sol.trace.records]
    assert all(b >= a for a, b in zip(rhos, rhos[1:]))
    assert sol.rho_final >= 0.1
    boundary_records = sol.trace.records[2::3]
    assert all(rec.support_change is not None for rec in boundary_records)


def test_dead_channels_never_enter_the_support():
    rng = np.random.default_rng(11)
    h, w_hat = random_problem(rng, 6, 3)
    h = h.copy()
    h[2, :] = 0.0
    h[:, 2] = 0.0
    w_hat[2, :] = 100.0  # large weights on a channel the data never sees
    sol = admm_solve(h, w_hat, Unstructured(8))
    assert not sol.support.mask[2].any()
    assert not sol.w[2].any()
    assert sol.support.count == 8


def test_solve_is_deterministic():
    rng = np.random.default_rng(12)
    h, w_hat = random_problem(rng, 6, 3)
    a = admm_solve(h, w_hat, Unstructured(8))
    b = admm_solve(h, w_hat, Unstructured(8))
    assert np.array_equal(a.w, b.w)
    assert a.objective == b.objective


def test_budget_bound_checked():
    rng = np.random.default_rng(13)
    h, w_hat = random_problem(rng, 4, 2)
    with pytest.raises(InvalidInputError):
        admm_solve(h, w_hat, Unstructured(9))
    with pytest.raises(InvalidInputError):
        admm_solve(h, w_hat, NM(2, 3))
