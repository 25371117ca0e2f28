"""Time-t optimal portfolios and closed-form optimal wealth processes.

Both parties' optimal wealths admit martingale representations driven by
the pricing-kernel level at the evaluated state, so everything here is a
pure function of a ``MarketState`` snapshot; no path integration happens in
this module (the simulation module integrates the SDEs separately and
compares against these closed forms).

The insurer's optimal weights decompose into three economically distinct
parts, surfaced in ``PortfolioDecomposition``:

* the unconstrained Merton vector for the basic market;
* a constraint correction proportional to the dual shift, which exactly
  cancels the asset-2 exposure of the Merton vector;
* a reinsurance correction that levers the position up by the current
  auxiliary value of the indemnity.

The reinsurer runs a generalized CPPI: the Merton rule on the cushion
above the value of the ceded put liability, plus the short-put replication
overlay in asset 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .equilibrium import ContractTerms, StackelbergEquilibrium
from .market import (
    DualShift,
    MarketParams,
    kernel_moment,
    optimal_dual_shift,
)
from .pricing import put_price, put_price_auxiliary
from .utility import HaraUtility, LogUtility, Utility

__all__ = [
    "MarketState",
    "PortfolioDecomposition",
    "merton_portfolio",
    "insurer_portfolio",
    "reinsurer_portfolio",
    "insurer_wealth",
    "reinsurer_wealth",
]

#: tolerance for the decomposition-closure validation
_CLOSURE_ATOL = 1e-12


@dataclass(frozen=True)
class MarketState:
    """Snapshot of every driving level the optimal rules depend on.

    Attributes:
        t: time in years
        s0: bank account level e^{rt}
        s1, s2: risky asset levels
        benchmark: benchmark fund level V_B(t)
        kernel: pricing-kernel level of the basic market
        kernel_aux: pricing-kernel level of the auxiliary market
    """

    t: float
    s0: float
    s1: float
    s2: float
    benchmark: float
    kernel: float
    kernel_aux: float

    def __post_init__(self) -> None:
        if self.t < 0.0:
            raise ValueError("t must be non-negative")
        for name in ("s0", "s1", "s2", "benchmark", "kernel", "kernel_aux"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class PortfolioDecomposition:
    """Insurer portfolio split into Merton, constraint, and reinsurance parts.

    ``total`` is the implemented weight vector; the three parts sum to it
    (validated on construction). The constraint correction cancels the
    Merton vector's asset-2 exposure; the reinsurance correction vanishes
    with the reinsured amount.
    """

    merton: np.ndarray
    constraint_correction: np.ndarray
    reinsurance_correction: np.ndarray
    total: np.ndarray

    def __post_init__(self) -> None:
        gap = np.max(np.abs(self.merton + self.constraint_correction
                            + self.reinsurance_correction - self.total))
        if gap > _CLOSURE_ATOL:
            raise ValueError(f"decomposition does not close: gap {gap:.3e}")


def _exponent(utility: Utility) -> float:
    """Power-family exponent; 0 encodes the logarithmic limit."""
    return 0.0 if isinstance(utility, LogUtility) else utility.exponent


def _reject_hara_reinsurer(utility: Utility) -> None:
    if isinstance(utility, HaraUtility):
        raise ValueError("reinsurer formulas support power or logarithmic "
                         "utility only")


def merton_portfolio(exponent: float, market: MarketParams,
                     shift: Optional[DualShift] = None) -> np.ndarray:
    """Merton weights (sigma sigma^T)^{-1}(mu + lambda - r 1) / (1 - b).

    ``exponent`` is the power-family b < 1 with 0 meaning logarithmic
    preferences (coefficient 1). With the optimal dual shift the second
    component vanishes and the first is (mu1 - r)/((1 - b) sigma1^2).
    """
    if not exponent < 1.0:
        raise ValueError("exponent must be < 1")
    excess = market.excess_return.copy()
    if shift is not None:
        excess = excess + shift.as_vector()
    sigma = market.volatility_matrix
    cov = sigma @ sigma.T
    return np.linalg.solve(cov, excess) / (1.0 - exponent)


def _auxiliary_merton_first(exponent: float, market: MarketParams) -> float:
    """First component of the auxiliary-market Merton vector, exact form."""
    return (market.mu1 - market.r) / ((1.0 - exponent)
                                      * market.sigma1 ** 2)


def insurer_wealth(state: MarketState,
                   equilibrium: StackelbergEquilibrium,
                   utility: Utility, terms: ContractTerms,
                   market: MarketParams) -> float:
    """Closed-form optimal insurer wealth at the given state.

    The total position (wealth plus indemnity plus discounted floor) is the
    auxiliary-market Merton wealth ``(y Z_aux)^{1/(b-1)}`` times a
    conditional kernel moment; financial wealth subtracts the discounted
    floor shift and the auxiliary value of the indemnity. At t = 0 this
    reduces to the post-premium capital ``v_I - xi (1 + theta) P(0)``.
    """
    contract = terms.contract
    if state.t > contract.maturity:
        raise ValueError("state time is past maturity")
    tau = contract.maturity - state.t
    b = _exponent(utility)
    shift = optimal_dual_shift(market)
    base = (equilibrium.y_insurer_star * state.kernel_aux)
    factor = kernel_moment(market, shift, b / (b - 1.0), tau)
    total = base ** (1.0 / (b - 1.0)) * factor
    floor_pv = utility.floor * math.exp(-market.r * tau)
    paux = put_price_auxiliary(state.t, state.benchmark, contract, market,
                               shift).price
    wealth = total - floor_pv - equilibrium.xi_star * paux
    if isinstance(utility, HaraUtility) and total <= 0.0:
        raise ValueError("state outside the shifted-power domain: total "
                         "position non-positive")
    return wealth


def reinsurer_wealth(state: MarketState,
                     equilibrium: StackelbergEquilibrium,
                     utility: Utility, terms: ContractTerms,
                     market: MarketParams) -> float:
    """Closed-form optimal reinsurer wealth at the given state.

    Merton wealth on the budget ``v_R + xi theta P(0)`` driven by the basic
    kernel, plus the market value of the ceded put liability's replicating
    portfolio. At t = 0 this is ``v_R + xi (1 + theta) P(0)``.
    """
    _reject_hara_reinsurer(utility)
    contract = terms.contract
    if state.t > contract.maturity:
        raise ValueError("state time is past maturity")
    tau = contract.maturity - state.t
    b = _exponent(utility)
    base = equilibrium.y_reinsurer_star * state.kernel
    factor = kernel_moment(market, DualShift(0.0), b / (b - 1.0), tau)
    merton_wealth = base ** (1.0 / (b - 1.0)) * factor
    p = put_price(state.t, state.benchmark, contract, market).price
    return merton_wealth + equilibrium.xi_star * p


def insurer_portfolio(state: MarketState,
                      equilibrium: StackelbergEquilibrium,
                      utility: Utility, terms: ContractTerms,
                      market: MarketParams) -> PortfolioDecomposition:
    """Insurer's optimal weights at the state, with their decomposition.

    The implemented vector is
    ``pi_aux_merton * (V + a e^{-r tau} + xi P_aux(t)) / V`` with zero
    asset-2 weight; the decomposition scales the Merton and constraint
    parts by the floor-adjusted wealth ratio so that the reinsurance
    correction vanishes exactly when xi = 0.
    """
    contract = terms.contract
    wealth = insurer_wealth(state, equilibrium, utility, terms, market)
    if wealth <= 0.0:
        raise ValueError("insurer wealth at state must be strictly positive")
    tau = contract.maturity - state.t
    b = _exponent(utility)
    shift = optimal_dual_shift(market)
    paux = put_price_auxiliary(state.t, state.benchmark, contract, market,
                               shift).price
    aux1 = _auxiliary_merton_first(b, market)
    floor_pv = utility.floor * math.exp(-market.r * tau)

    floor_scale = (wealth + floor_pv) / wealth
    merton_part = merton_portfolio(b, market) * floor_scale
    sigma = market.volatility_matrix
    cov = sigma @ sigma.T
    constraint_part = (np.linalg.solve(cov, shift.as_vector())
                       / (1.0 - b)) * floor_scale
    reins_part = np.array([aux1 * equilibrium.xi_star * paux / wealth, 0.0])
    total = np.array(
        [aux1 * (wealth + floor_pv + equilibrium.xi_star * paux) / wealth,
         0.0])
    return PortfolioDecomposition(merton_part, constraint_part, reins_part,
                                  total)


def reinsurer_portfolio(state: MarketState,
                        equilibrium: StackelbergEquilibrium,
                        utility: Utility, terms: ContractTerms,
                        market: MarketParams) -> np.ndarray:
    """Reinsurer's optimal weights at the state (generalized CPPI).

    Merton weights applied to the cushion above the ceded liability value,
    plus the put-replication overlay in asset 2:
    ``pi_merton (V - xi P(t))/V + (0, pi_cm V_B (Phi(d_plus) - 1) xi / V)``.
    Collapses to the plain Merton vector when xi = 0 or the guarantee is 0.
    """
    _reject_hara_reinsurer(utility)
    contract = terms.contract
    wealth = reinsurer_wealth(state, equilibrium, utility, terms, market)
    if wealth <= 0.0:
        raise ValueError("reinsurer wealth at state must be strictly "
                         "positive")
    b = _exponent(utility)
    quote = put_price(state.t, state.benchmark, contract, market)
    cushion_scale = (wealth - equilibrium.xi_star * quote.price) / wealth
    hedge2 = (contract.benchmark_fraction * state.benchmark
              * quote.benchmark_delta * equilibrium.xi_star / wealth)
    return (merton_portfolio(b, market) * cushion_scale
            + np.array([0.0, hedge2]))
