"""Command line interface.

Four subcommands: prune (run a solver or baseline on weight/gram files),
eval (relative error of a pruned file), oracle (exact reference solvers),
and gram (accumulate X^T X from an activations file). Exit codes: 0 on
success, 2 for invalid input of any kind, 3 for degenerate instances.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from dataclasses import dataclass

import numpy as np

from .admm import AdmmConfig, admm_solve, budget_from_sparsity
from .baselines import (
    PruneSolution,
    activation_weighted_prune,
    backsolve_exact,
    brute_force_support,
    magnitude_prune,
)
from .diagnostics import check_lemma1, check_lemma2, theorem1_residual_bound
from .errors import (
    BreakdownError,
    DegenerateInstanceError,
    InvalidInputError,
    PruneError,
)
from .linalg import gram_from_activations, layer_objective, relative_error, validate_gram
from .matrixio import read_matrix, write_matrix
from .projections import NM, SparsityBudget, Unstructured, support_of

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DEGENERATE = 3


@dataclass
class RunReport:
    """Structured record of one pruning run, serialized as JSON."""

    method: str
    budget: dict
    dims: list[int]
    iterations: int
    rho_final: float | None
    stabilized: bool
    objective: float | None
    rel_error: float | None
    support_size: int
    pcg_iters_used: int
    lemma1_violations: int | None
    lemma2_violations: int | None
    theorem1_ratio: float | None
    runtime_ms: float
    seed: int | None

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2)


def _parse_nm(text: str) -> NM:
    match = re.fullmatch(r"(\d+):(\d+)", text)
    if not match:
        raise InvalidInputError(f"expected N:M like 2:4, got {text!r}")
    return NM(n=int(match.group(1)), m=int(match.group(2)))


def _load_gram(args) -> np.ndarray:
    if getattr(args, "gram", None):
        return validate_gram(read_matrix(args.gram))
    return gram_from_activations(read_matrix(args.activations))


def _budget_for(args, shape) -> SparsityBudget:
    if args.sparsity is not None:
        return budget_from_sparsity(args.sparsity, shape[0], shape[1])
    if args.nm is not None:
        return _parse_nm(args.nm)
    return Unstructured(args.k)


def _budget_block(budget: SparsityBudget, shape) -> dict:
    size = shape[0] * shape[1]
    if isinstance(budget, Unstructured):
        return {
            "kind": "unstructured",
            "k": budget.k,
            "sparsity": 1.0 - budget.k / size,
        }
    return {
        "kind": "nm",
        "n": budget.n,
        "m": budget.m,
        "sparsity": 1.0 - budget.n / budget.m,
    }


def _report_for(
    solution: PruneSolution,
    method: str,
    budget_block: dict,
    shape,
    runtime_ms: float,
    seed: int | None,
) -> RunReport:
    lemma1 = lemma2 = None
    ratio = None
    if solution.trace is not None and solution.trace.records:
        lemma1 = len(check_lemma1(solution.trace))
        lemma2 = len(check_lemma2(solution.trace))
        horizon = max(1000, len(solution.trace.records))
        ratio = theorem1_residual_bound(solution.trace, horizon=horizon).worst_ratio
    return RunReport(
        method=method,
        budget=budget_block,
        dims=[int(shape[0]), int(shape[1])],
        iterations=solution.iterations,
        rho_final=solution.rho_final,
        stabilized=solution.stabilized,
        objective=solution.objective,
        rel_error=solution.rel_error,
        support_size=solution.support.count,
        pcg_iters_used=solution.pcg_iters_used,
        lemma1_violations=lemma1,
        lemma2_violations=lemma2,
        theorem1_ratio=ratio,
        runtime_ms=runtime_ms,
        seed=seed,
    )


def _emit(report: RunReport, solution: PruneSolution, args) -> None:
    if args.out:
        write_matrix(args.out, solution.w)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report.to_json() + "\n")
    else:
        print(report.to_json())


def cmd_prune(args) -> int:
    w_hat = read_matrix(args.weights)
    h = _load_gram(args)
    budget = _budget_for(args, w_hat.shape)
    start = time.perf_counter()
    if args.method == "alps":
        cfg = AdmmConfig(
            rho0=args.rho0, max_iters=args.max_iters, pcg_iters=args.pcg_iters
        )
        solution = admm_solve(h, w_hat, budget, cfg)
    elif args.method == "mp":
        solution = magnitude_prune(w_hat, budget, gram=h)
    else:
        solution = activation_weighted_prune(w_hat, h, budget)
    runtime_ms = (time.perf_counter() - start) * 1000.0
    report = _report_for(
        solution, args.method, _budget_block(budget, w_hat.shape),
        w_hat.shape, runtime_ms, args.seed,
    )
    _emit(report, solution, args)
    return EXIT_OK


def cmd_eval(args) -> int:
    w_hat = read_matrix(args.weights)
    w = read_matrix(args.pruned)
    h = _load_gram(args)
    print(f"{relative_error(h, w_hat, w):.6f}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    w_hat = read_matrix(args.weights)
    h = _load_gram(args)
    start = time.perf_counter()
    if args.pruned is not None:
        support = support_of(read_matrix(args.pruned))
        w = backsolve_exact(h, w_hat, support)
        solution = PruneSolution(
            w=w,
            support=support_of(w),
            objective=layer_objective(h, w_hat, w),
            rel_error=relative_error(h, w_hat, w),
            method="backsolve",
        )
        method = "backsolve"
        k = support.count
    else:
        solution = brute_force_support(h, w_hat, args.brute_k)
        method = "brute_force"
        k = args.brute_k
    runtime_ms = (time.perf_counter() - start) * 1000.0
    size = w_hat.shape[0] * w_hat.shape[1]
    block = {"kind": "unstructured", "k": k, "sparsity": 1.0 - k / size}
    report = _report_for(solution, method, block, w_hat.shape, runtime_ms, args.seed)
    _emit(report, solution, args)
    return EXIT_OK


def cmd_gram(args) -> int:
    x = read_matrix(args.activations)
    write_matrix(args.out, gram_from_activations(x))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l0prune",
        description="Layer-wise pruning under hard sparsity budgets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    prune = sub.add_parser("prune", help="prune a weight matrix")
    prune.add_argument("--weights", required=True, help="dense weights file")
    source = prune.add_mutually_exclusive_group(required=True)
    source.add_argument("--gram", help="precomputed Gram matrix file")
    source.add_argument("--activations", help="calibration activations file")
    budget = prune.add_mutually_exclusive_group(required=True)
    budget.add_argument("--sparsity", type=float, help="fraction of weights to zero")
    budget.add_argument("--nm", help="structured budget as N:M, e.g. 2:4")
    budget.add_argument("--k", type=int, help="number of weights to keep")
    prune.add_argument(
        "--method", choices=("alps", "mp", "wanda"), default="alps",
        help="solver (alps) or baseline selection rule",
    )
    prune.add_argument("--out", help="where to write the pruned weights")
    prune.add_argument("--report", help="where to write the JSON report")
    prune.add_argument("--rho0", type=float, default=0.1)
    prune.add_argument("--max-iters", type=int, default=300)
    prune.add_argument("--pcg-iters", type=int, default=10)
    prune.add_argument("--seed", type=int, default=None)
    prune.set_defaults(func=cmd_prune)

    evaluate = sub.add_parser("eval", help="relative error of a pruned file")
    evaluate.add_argument("--weights", required=True)
    evaluate.add_argument("--pruned", required=True)
    source = evaluate.add_mutually_exclusive_group(required=True)
    source.add_argument("--gram")
    source.add_argument("--activations")
    evaluate.set_defaults(func=cmd_eval)

    oracle = sub.add_parser("oracle", help="exact reference solvers")
    oracle.add_argument("--weights", required=True)
    source = oracle.add_mutually_exclusive_group(required=True)
    source.add_argument("--gram")
    source.add_argument("--activations")
    mode = oracle.add_mutually_exclusive_group(required=True)
    mode.add_argument("--pruned", help="solve exactly on this file's support")
    mode.add_argument(
        "--brute-k", type=int, help="enumerate every support of this size"
    )
    oracle.add_argument("--out")
    oracle.add_argument("--report")
    oracle.add_argument("--seed", type=int, default=None)
    oracle.set_defaults(func=cmd_oracle)

    gram = sub.add_parser("gram", help="accumulate X^T X from activations")
    gram.add_argument("--activations", required=True)
    gram.add_argument("--out", required=True)
    gram.set_defaults(func=cmd_gram)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    try:
        return args.func(args)
    except (DegenerateInstanceError, BreakdownError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (InvalidInputError, PruneError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
