"""Timing comparison of the compiled Monte Carlo kernels vs pure numpy.

Each hot kernel ships in two implementations: a numba-compiled one and a
pure-numpy fallback (selected at import time via STACKREIN_FORCE_NUMPY=1).
This script times both in one process on base-case workloads and prints a
speedup table. Run as:

    python3 benchmarks/bench_kernels.py [--paths N] [--steps M]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from stackrein import _kernels
from stackrein.config import load_config
from stackrein.simulation import (
    InsurerOptimalRule,
    ReinsurerOptimalRule,
    SimulationConfig,
    simulate,
)
from stackrein.equilibrium import solve_equilibrium


def _best_of(fn, repeats: int = 5) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeats))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, default=100_000)
    parser.add_argument("--steps", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    cfg = load_config(None)
    market, terms = cfg.market, cfg.terms
    contract = terms.contract
    eq = solve_equilibrium(cfg.insurer_utility, cfg.reinsurer_utility,
                           terms, market)
    sim = SimulationConfig(n_paths=args.paths, n_steps=args.steps, seed=3,
                           antithetic=False)
    ensemble = simulate(market, contract.maturity,
                        contract.benchmark_fraction, sim,
                        contract.benchmark_initial)
    dw1, dw2 = ensemble.brownian_increments()
    times = ensemble.times
    dt = times[1] - times[0]
    s21 = market.sigma2 * market.rho
    s22 = market.sigma2 * np.sqrt(1.0 - market.rho ** 2)
    ex1, ex2 = market.mu1 - market.r, market.mu2 - market.r
    s_bench = contract.benchmark_fraction * market.sigma2
    vb, s2 = ensemble.benchmark, ensemble.asset2
    insurer_rule = InsurerOptimalRule.from_equilibrium(
        eq, cfg.insurer_utility, terms, market)
    reinsurer_rule = ReinsurerOptimalRule.from_equilibrium(
        eq, cfg.reinsurer_utility, terms, market)

    cases = {
        "normal_draws": lambda impl: impl(
            3, 0, args.paths, 2 * args.steps),
        "evolve_constant_mix": lambda impl: impl(
            dw1, dw2, dt, 100.0, market.r, ex1, ex2, market.sigma1,
            s21, s22, 0.2948, 0.0),
        "evolve_insurer_optimal": lambda impl: impl(
            dw1, dw2, vb, times, 93.0, market.r, ex1, market.sigma1,
            insurer_rule.merton1_aux, insurer_rule.contracts,
            insurer_rule.floor_shift, contract.maturity,
            insurer_rule.guarantee, s_bench, insurer_rule.dividend_yield),
        "evolve_reinsurer_optimal": lambda impl: impl(
            dw1, dw2, vb, times, 101.0, market.r, ex1, ex2, market.sigma1,
            s21, s22, reinsurer_rule.merton1, reinsurer_rule.merton2,
            reinsurer_rule.contracts, contract.benchmark_fraction,
            contract.maturity, reinsurer_rule.guarantee, s_bench),
        "replicate_put_terminal": lambda impl: impl(
            s2, vb, times, market.r, contract.guarantee, s_bench,
            contract.benchmark_fraction),
    }

    print(f"backend = {_kernels.BACKEND}, paths = {args.paths}, "
          f"steps = {args.steps}, best of {args.repeats}")
    header = (f"{'kernel':<26} {'numpy [ms]':>12} "
              f"{'active [ms]':>12} {'speedup':>9}")
    print(header)
    print("-" * len(header))
    for name, call in cases.items():
        reference = getattr(_kernels, f"{name}_numpy")
        active = getattr(_kernels, name)
        call(active)  # warm-up: trigger any JIT compilation
        t_numpy = _best_of(lambda: call(reference), args.repeats)
        t_active = _best_of(lambda: call(active), args.repeats)
        print(f"{name:<26} {1e3 * t_numpy:>12.2f} "
              f"{1e3 * t_active:>12.2f} {t_numpy / t_active:>9.2f}x")
    if _kernels.BACKEND == "numpy":
        print("note: the active backend already is numpy (numba missing or "
              "STACKREIN_FORCE_NUMPY=1), so speedups are ~1")


if __name__ == "__main__":
    main()
