"""Monte Carlo engine: path generation, wealth evolution, and verification.

``simulate`` draws a ``PathEnsemble``: Brownian paths on a uniform grid
with every derived process (assets, benchmark fund, both pricing kernels)
obtained from the exact lognormal solutions, so ensemble-level quantities
carry no discretization bias. Discretization enters only through
``evolve_wealth``, which integrates the self-financing wealth SDE under a
portfolio rule with log-Euler steps, and ``hedge_error``, which rebalances
the put-replication portfolio at finite frequency.

Randomness follows the counter-based generator in the kernels module: the
seed and path index determine every draw, so results are bit-reproducible
for a fixed backend, ensembles of different sizes share their common path
prefix, and antithetic pairs occupy adjacent path slots (2j, 2j+1).

``expected_utility_mc`` and ``loss_probability`` are the oracles the test
suite uses to confront every closed form in this package with simulation;
``hedge_error`` quantifies the replication quality of the discretely
rebalanced hedge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, NamedTuple, Optional, Union

import numpy as np
from scipy.special import ndtr

from . import _kernels
from .equilibrium import (
    ContractTerms,
    StackelbergEquilibrium,
    reinsurer_lagrange,
)
from .market import (DualShift, MarketParams, ReinsuranceContract,
                     optimal_dual_shift)
from .pricing import auxiliary_dividend_yield
from .strategies import merton_portfolio
from .utility import LogUtility, Utility

__all__ = [
    "SimulationConfig",
    "EstimateWithError",
    "PathEnsemble",
    "WealthPaths",
    "ConstantMixRule",
    "InsurerOptimalRule",
    "ReinsurerOptimalRule",
    "LossProbability",
    "simulate",
    "evolve_wealth",
    "expected_utility_mc",
    "loss_probability",
    "hedge_error",
]


@dataclass(frozen=True)
class SimulationConfig:
    """Size, grid, and seeding of a path ensemble.

    Attributes:
        n_paths: number of simulated paths (>= 2; even when antithetic)
        n_steps: number of uniform time steps (>= 1)
        seed: 64-bit master seed
        antithetic: mirror each Brownian stream into a +/- pair
    """

    n_paths: int
    n_steps: int
    seed: int
    antithetic: bool = False

    def __post_init__(self) -> None:
        if self.n_paths < 2:
            raise ValueError("n_paths must be at least 2")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if self.antithetic and self.n_paths % 2 != 0:
            raise ValueError("antithetic sampling requires an even n_paths")


@dataclass(frozen=True)
class EstimateWithError:
    """A Monte Carlo mean with its standard error and sample count."""

    mean: float
    standard_error: float
    n: int

    def __post_init__(self) -> None:
        if self.standard_error < 0.0:
            raise ValueError("standard_error must be non-negative")

    def gap_in_errors(self, target: float) -> float:
        """|mean - target| measured in standard errors (inf if se = 0)."""
        gap = abs(self.mean - target)
        if self.standard_error == 0.0:
            return 0.0 if gap == 0.0 else math.inf
        return gap / self.standard_error

    def agrees_with(self, target: float, n_errors: float = 3.0) -> bool:
        return self.gap_in_errors(target) <= n_errors


class PathEnsemble:
    """Seeded Brownian paths plus lazily derived market processes.

    Brownian paths are materialized eagerly; assets, benchmark, and kernels
    are cached on first access, each computed by its exact lognormal
    formula from the Brownian levels (no stepping error).
    """

    def __init__(self, params: MarketParams, horizon: float,
                 benchmark_fraction: float, benchmark_initial: float,
                 config: SimulationConfig):
        if not horizon > 0.0:
            raise ValueError("horizon must be strictly positive")
        if benchmark_fraction < 0.0:
            raise ValueError("benchmark_fraction must be non-negative")
        if not benchmark_initial > 0.0:
            raise ValueError("benchmark_initial must be strictly positive")
        self.params = params
        self.horizon = float(horizon)
        self.benchmark_fraction = float(benchmark_fraction)
        self.benchmark_initial = float(benchmark_initial)
        self.config = config
        self.times = np.linspace(0.0, self.horizon, config.n_steps + 1)

        n, m = config.n_paths, config.n_steps
        dt = self.horizon / m
        if config.antithetic:
            draws = _kernels.normal_draws(config.seed, 0, n // 2, m)
            dw = np.empty((n, m, 2))
            dw[0::2] = draws
            dw[1::2] = -draws
        else:
            dw = _kernels.normal_draws(config.seed, 0, n, m)
        dw *= math.sqrt(dt)
        self.w1 = np.zeros((n, m + 1))
        self.w2 = np.zeros((n, m + 1))
        np.cumsum(dw[:, :, 0], axis=1, out=self.w1[:, 1:])
        np.cumsum(dw[:, :, 1], axis=1, out=self.w2[:, 1:])

    @property
    def n_paths(self) -> int:
        return self.config.n_paths

    @property
    def n_steps(self) -> int:
        return self.config.n_steps

    def brownian_increments(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-step increments of (W1, W2), each (n_paths, n_steps)."""
        return np.diff(self.w1, axis=1), np.diff(self.w2, axis=1)

    def _exp_drift_diffusion(self, drift: float, load1: float,
                             load2: float, initial: float) -> np.ndarray:
        t = self.times[None, :]
        return initial * np.exp(drift * t + load1 * self.w1
                                + load2 * self.w2)

    @cached_property
    def asset1(self) -> np.ndarray:
        p = self.params
        return self._exp_drift_diffusion(p.mu1 - 0.5 * p.sigma1 ** 2,
                                         p.sigma1, 0.0, p.s1)

    @cached_property
    def asset2(self) -> np.ndarray:
        p = self.params
        s21 = p.sigma2 * p.rho
        s22 = p.sigma2 * math.sqrt(1.0 - p.rho ** 2)
        return self._exp_drift_diffusion(p.mu2 - 0.5 * p.sigma2 ** 2,
                                         s21, s22, p.s2)

    @cached_property
    def benchmark(self) -> np.ndarray:
        p = self.params
        f = self.benchmark_fraction
        s21 = p.sigma2 * p.rho
        s22 = p.sigma2 * math.sqrt(1.0 - p.rho ** 2)
        drift = p.r + f * (p.mu2 - p.r) - 0.5 * (f * p.sigma2) ** 2
        return self._exp_drift_diffusion(drift, f * s21, f * s22,
                                         self.benchmark_initial)

    def _kernel_paths(self, shift: DualShift) -> np.ndarray:
        p = self.params
        g = p.price_of_risk(shift)
        norm_sq = float(g @ g)
        return self._exp_drift_diffusion(-(p.r + 0.5 * norm_sq),
                                         -float(g[0]), -float(g[1]), 1.0)

    @cached_property
    def kernel(self) -> np.ndarray:
        """Pricing-kernel paths of the basic market."""
        return self._kernel_paths(DualShift(0.0))

    @cached_property
    def kernel_aux(self) -> np.ndarray:
        """Pricing-kernel paths of the auxiliary market (optimal shift)."""
        return self._kernel_paths(optimal_dual_shift(self.params))


def simulate(params: MarketParams, horizon: float,
             benchmark_fraction: float, config: SimulationConfig,
             benchmark_initial: float = 1.0) -> PathEnsemble:
    """Draw a seeded ensemble of all driving processes on a uniform grid."""
    return PathEnsemble(params, horizon, benchmark_fraction,
                        benchmark_initial, config)


@dataclass(frozen=True)
class ConstantMixRule:
    """Hold fixed wealth fractions (weight1, weight2) in the risky assets."""

    weight1: float
    weight2: float


@dataclass(frozen=True)
class InsurerOptimalRule:
    """Feedback form of the insurer's optimal strategy.

    Invests ``merton1_aux * (V + floor e^{-r tau} + contracts * P_aux(t))/V``
    in asset 1 and nothing in asset 2, with the auxiliary put price
    evaluated at the running benchmark level.
    """

    merton1_aux: float
    contracts: float
    floor_shift: float
    dividend_yield: float
    guarantee: float

    @classmethod
    def from_equilibrium(cls, equilibrium: StackelbergEquilibrium,
                         utility: Utility, terms: ContractTerms,
                         market: MarketParams) -> "InsurerOptimalRule":
        b = 0.0 if isinstance(utility, LogUtility) else utility.exponent
        merton1 = (market.mu1 - market.r) / ((1.0 - b) * market.sigma1 ** 2)
        return cls(merton1_aux=merton1, contracts=equilibrium.xi_star,
                   floor_shift=utility.floor,
                   dividend_yield=auxiliary_dividend_yield(
                       market, terms.contract),
                   guarantee=terms.contract.guarantee)


@dataclass(frozen=True)
class ReinsurerOptimalRule:
    """Feedback form of the reinsurer's optimal strategy.

    Merton weights on the cushion above the ceded put value plus the
    replication overlay in asset 2.
    """

    merton1: float
    merton2: float
    contracts: float
    guarantee: float

    @classmethod
    def from_equilibrium(cls, equilibrium: StackelbergEquilibrium,
                         utility: Utility, terms: ContractTerms,
                         market: MarketParams) -> "ReinsurerOptimalRule":
        b = 0.0 if isinstance(utility, LogUtility) else utility.exponent
        merton = merton_portfolio(b, market)
        return cls(merton1=float(merton[0]), merton2=float(merton[1]),
                   contracts=equilibrium.xi_star,
                   guarantee=terms.contract.guarantee)


#: a portfolio rule is a built-in feedback form or a callable
#: rule(t, wealth, asset1, asset2, benchmark) -> (n_paths, 2) weights
PortfolioRule = Union[ConstantMixRule, InsurerOptimalRule,
                      ReinsurerOptimalRule,
                      Callable[..., np.ndarray]]


class WealthPaths(NamedTuple):
    """Evolved wealth paths and per-path absorption flags."""

    wealth: np.ndarray
    absorbed: np.ndarray


def evolve_wealth(ensemble: PathEnsemble, rule: PortfolioRule,
                  initial_wealth: float) -> WealthPaths:
    """Integrate self-financing wealth under a portfolio rule.

    Log-Euler (geometric) stepping keeps wealth positive within each step;
    a path whose wealth stops being finite and positive is absorbed at 0
    and flagged. Built-in rules dispatch to the compiled kernels; callables
    are evaluated once per step on the whole path cross-section.
    """
    if not initial_wealth > 0.0:
        raise ValueError("initial_wealth must be strictly positive")
    p = ensemble.params
    dw1, dw2 = ensemble.brownian_increments()
    times = ensemble.times
    dt = times[1] - times[0]
    s21 = p.sigma2 * p.rho
    s22 = p.sigma2 * math.sqrt(1.0 - p.rho ** 2)
    ex1, ex2 = p.mu1 - p.r, p.mu2 - p.r
    s_bench = ensemble.benchmark_fraction * p.sigma2

    if isinstance(rule, ConstantMixRule):
        wealth = _kernels.evolve_constant_mix(
            dw1, dw2, dt, initial_wealth, p.r, ex1, ex2,
            p.sigma1, s21, s22, rule.weight1, rule.weight2)
        return WealthPaths(wealth, np.zeros(ensemble.n_paths, dtype=bool))
    if isinstance(rule, InsurerOptimalRule):
        wealth, absorbed = _kernels.evolve_insurer_optimal(
            dw1, dw2, ensemble.benchmark, times, initial_wealth, p.r, ex1,
            p.sigma1, rule.merton1_aux, rule.contracts, rule.floor_shift,
            ensemble.horizon, rule.guarantee, s_bench, rule.dividend_yield)
        return WealthPaths(wealth, absorbed)
    if isinstance(rule, ReinsurerOptimalRule):
        wealth, absorbed = _kernels.evolve_reinsurer_optimal(
            dw1, dw2, ensemble.benchmark, times, initial_wealth, p.r, ex1,
            ex2, p.sigma1, s21, s22, rule.merton1, rule.merton2,
            rule.contracts, ensemble.benchmark_fraction, ensemble.horizon,
            rule.guarantee, s_bench)
        return WealthPaths(wealth, absorbed)
    if not callable(rule):
        raise TypeError(f"unsupported rule type: {type(rule).__name__}")

    n, m = ensemble.n_paths, ensemble.n_steps
    wealth = np.empty((n, m + 1))
    wealth[:, 0] = initial_wealth
    absorbed = np.zeros(n, dtype=bool)
    value = np.full(n, float(initial_wealth))
    s1, s2, vb = ensemble.asset1, ensemble.asset2, ensemble.benchmark
    for k in range(m):
        weights = np.asarray(rule(times[k], value, s1[:, k], s2[:, k],
                                  vb[:, k]), dtype=np.float64)
        if weights.shape != (n, 2) or not np.all(np.isfinite(weights)):
            raise ValueError("portfolio rule must return finite weights of "
                             f"shape ({n}, 2)")
        live = ~absorbed
        w1c, w2c = weights[:, 0], weights[:, 1]
        vol1 = p.sigma1 * w1c + s21 * w2c
        vol2 = s22 * w2c
        growth = np.exp((p.r + w1c * ex1 + w2c * ex2
                         - 0.5 * (vol1 ** 2 + vol2 ** 2)) * dt
                        + vol1 * dw1[:, k] + vol2 * dw2[:, k])
        value = np.where(live, value * growth, 0.0)
        bad = live & ~(np.isfinite(value) & (value > 0.0))
        if bad.any():
            absorbed |= bad
            value[bad] = 0.0
        wealth[:, k + 1] = value
    return WealthPaths(wealth, absorbed)


def expected_utility_mc(ensemble: PathEnsemble,
                        expression: Callable[[PathEnsemble], np.ndarray],
                        ) -> EstimateWithError:
    """Mean and standard error of a per-path terminal expression.

    With antithetic sampling the estimator averages the (2j, 2j+1) pair
    means and the standard error is computed across pairs, so the
    variance reduction is measured rather than assumed. Non-finite samples
    abort with the offending path indices.
    """
    samples = np.asarray(expression(ensemble), dtype=np.float64)
    if samples.shape != (ensemble.n_paths,):
        raise ValueError("expression must return one value per path")
    bad = ~np.isfinite(samples)
    if bad.any():
        idx = np.flatnonzero(bad)
        head = ", ".join(str(i) for i in idx[:8])
        raise ValueError(f"{idx.size} non-finite samples (paths: {head}"
                         + ("..." if idx.size > 8 else "") + ")")
    if ensemble.config.antithetic:
        pair_means = 0.5 * (samples[0::2] + samples[1::2])
        n_eff = pair_means.size
        se = (float(np.std(pair_means, ddof=1)) / math.sqrt(n_eff)
              if n_eff > 1 else 0.0)
        return EstimateWithError(float(np.mean(pair_means)), se,
                                 ensemble.n_paths)
    n = samples.size
    se = float(np.std(samples, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return EstimateWithError(float(np.mean(samples)), se, n)


@dataclass(frozen=True)
class LossProbability:
    """Reinsurer's loss probability at a discounted loading.

    ``closed_form`` is the exact lognormal tail of the event that the
    optimal terminal wealth net of the ceded put payoff falls below the
    initial capital; ``estimate`` is its Monte Carlo counterpart when a
    simulation config was supplied.
    """

    alpha: float
    loading: float
    closed_form: float
    estimate: Optional[EstimateWithError] = None


def loss_probability(alpha: float, equilibrium: StackelbergEquilibrium,
                     reinsurer_utility: Utility, terms: ContractTerms,
                     market: MarketParams,
                     config: Optional[SimulationConfig] = None,
                     ) -> LossProbability:
    """Probability that selling at the discounted loading loses money.

    The reinsurer offers the loading ``alpha * theta_star``; the insurer
    still buys the maximal amount (the discounted loading is weakly below
    the critical one). The loss event compares the Merton part of terminal
    wealth, ``I_R(y_R Z(T))``, against the initial capital ``v_R``; under
    lognormality of the kernel its probability is an explicit normal tail,
    strictly decreasing in alpha.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    b = (0.0 if isinstance(reinsurer_utility, LogUtility)
         else reinsurer_utility.exponent)
    loading = alpha * equilibrium.theta_star
    y_r = reinsurer_lagrange(loading, equilibrium.xi_star,
                             reinsurer_utility, terms, market)
    horizon = terms.contract.maturity
    gamma = market.market_price_of_risk
    norm_sq = float(gamma @ gamma)
    mean_log = -(market.r + 0.5 * norm_sq) * horizon
    sd_log = math.sqrt(norm_sq * horizon)
    threshold = ((b - 1.0) * math.log(terms.reinsurer_capital)
                 - math.log(y_r))
    closed = 1.0 - float(ndtr((threshold - mean_log) / sd_log))

    estimate = None
    if config is not None:
        ensemble = simulate(market, horizon,
                            terms.contract.benchmark_fraction,
                            replace(config, n_steps=1),
                            terms.contract.benchmark_initial)
        v_r = terms.reinsurer_capital

        def indicator(ens: PathEnsemble) -> np.ndarray:
            z = ens.kernel[:, -1]
            merton_wealth = reinsurer_utility.inverse_marginal(y_r * z)
            return (merton_wealth < v_r).astype(np.float64)

        estimate = expected_utility_mc(ensemble, indicator)
    return LossProbability(alpha=alpha, loading=loading,
                           closed_form=closed, estimate=estimate)


def hedge_error(ensemble: PathEnsemble, contract: ReinsuranceContract,
                params: MarketParams,
                step_counts: tuple[int, ...]) -> dict[int, float]:
    """RMS terminal error of the discretely rebalanced put replication.

    For each requested rebalancing count ``m`` (which must divide the
    ensemble's step count) the replication portfolio starts at the exact
    put price, holds the closed-form asset-2 position between rebalancing
    dates, and is compared against the realized payoff at maturity.
    ``contract`` and ``params`` must describe the same market and fund the
    ensemble was drawn from.
    """
    p = ensemble.params
    if params != p:
        raise ValueError("params do not match the ensemble's market")
    if contract.maturity != ensemble.horizon:
        raise ValueError(f"contract maturity {contract.maturity} does not "
                         f"match the ensemble horizon {ensemble.horizon}")
    if contract.benchmark_fraction != ensemble.benchmark_fraction:
        raise ValueError("contract benchmark_fraction does not match the "
                         "ensemble")
    if contract.benchmark_initial != ensemble.benchmark_initial:
        raise ValueError("contract benchmark_initial does not match the "
                         "ensemble")
    guarantee = contract.guarantee
    m_total = ensemble.n_steps
    s_bench = ensemble.benchmark_fraction * p.sigma2
    payoff = np.maximum(guarantee - ensemble.benchmark[:, -1], 0.0)
    out: dict[int, float] = {}
    for m in step_counts:
        if m < 1 or m_total % m != 0:
            raise ValueError(f"step count {m} must divide {m_total}")
        stride = m_total // m
        terminal = _kernels.replicate_put_terminal(
            ensemble.asset2[:, ::stride], ensemble.benchmark[:, ::stride],
            ensemble.times[::stride], p.r, guarantee, s_bench,
            ensemble.benchmark_fraction)
        out[m] = float(np.sqrt(np.mean((terminal - payoff) ** 2)))
    return out
