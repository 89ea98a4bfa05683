"""Compare support quality across methods on synthetic layers.

For each sparsity level, prunes random correlated-Gaussian instances with
the alternating solver, magnitude selection, and activation-weighted
selection, then backsolves every support so the comparison isolates
support choice from weight refinement. Prints mean relative error per
method and the solver's win rate.

Usage: python scripts/support_quality.py [--n-in 64] [--n-out 32]
       [--instances 20] [--samples 256] [--cond 100] [--seed 0]
"""

import argparse

import numpy as np

import l0prune as lp


def correlated_activations(rng, nl, n_in, cond):
    q, _ = np.linalg.qr(rng.standard_normal((n_in, n_in)))
    sing = np.logspace(0.0, -0.5 * np.log10(cond), n_in)
    return rng.standard_normal((nl, n_in)) @ (q * sing) @ q.T


def backsolved_error(h, w_hat, support):
    return lp.relative_error(h, w_hat, lp.backsolve_exact(h, w_hat, support))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-in", type=int, default=64)
    parser.add_argument("--n-out", type=int, default=32)
    parser.add_argument("--instances", type=int, default=20)
    parser.add_argument("--samples", type=int, default=256)
    parser.add_argument("--cond", type=float, default=100.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--sparsities", type=float, nargs="+", default=[0.5, 0.6, 0.7, 0.8]
    )
    args = parser.parse_args()

    print(f"{'sparsity':>8} {'solver':>10} {'magnitude':>10} {'act-wtd':>10} {'wins':>7}")
    for s in args.sparsities:
        rows = []
        wins = 0
        for i in range(args.instances):
            rng = np.random.default_rng(args.seed * 10_000 + i)
            x = correlated_activations(rng, args.samples, args.n_in, args.cond)
            h = x.T @ x
            h = (h + h.T) / 2.0
            w_hat = rng.standard_normal((args.n_in, args.n_out))
            budget = lp.budget_from_sparsity(s, args.n_in, args.n_out)

            solver = backsolved_error(h, w_hat, lp.admm_solve(h, w_hat, budget).support)
            mp = backsolved_error(h, w_hat, lp.magnitude_prune(w_hat, budget).support)
            aw = backsolved_error(
                h, w_hat, lp.activation_weighted_prune(w_hat, h, budget).support
            )
            rows.append((solver, mp, aw))
            wins += solver <= min(mp, aw)
        means = np.mean(rows, axis=0)
        print(
            f"{s:>8.2f} {means[0]:>10.4f} {means[1]:>10.4f} {means[2]:>10.4f}"
            f" {wins:>4}/{args.instances}"
        )


if __name__ == "__main__":
    main()
