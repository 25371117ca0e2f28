"""Stackelberg equilibrium of the reinsurance pricing game.

The reinsurer (leader) posts a proportional safety loading theta on the
fair premium of the guarantee put; the insurer (follower) chooses how many
reinsurance contracts xi in [0, xi_bar] to buy and, simultaneously, an
investment strategy that may not touch asset 2. Both closed-form value
functions are driven by one scalar comparison:

* one contract costs ``(1 + theta) * P(0)`` (market price plus loading) and
  is worth ``P_aux(0)`` to the constrained insurer (its price in the
  auxiliary market that internalizes the no-asset-2 constraint);
* the insurer therefore buys the maximum below the critical loading
  ``(P_aux(0) - P(0)) / P(0)``, nothing above it, and is exactly
  indifferent at it;
* the reinsurer's value increases in the loading income, so the optimal
  loading is the critical one capped at the admissible maximum, and the
  indifferent insurer accepts the reinsurer-preferred maximal amount (the
  optimistic tie-break, surfaced explicitly in BestResponse rather than
  hidden, since the discount analysis in the analysis module builds on it).

``solve_equilibrium`` evaluates this in closed form; ``brute_force_search``
verifies it by scanning a loading/amount lattice using nothing but the two
value functions.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .market import (
    DualShift,
    MarketParams,
    ReinsuranceContract,
    kernel_moment,
    log_kernel_mean,
    optimal_dual_shift,
)
from .pricing import put_price, put_price_auxiliary
from .utility import HaraUtility, LogUtility, Utility

__all__ = [
    "ContractTerms",
    "BestResponse",
    "StackelbergEquilibrium",
    "BruteForceResult",
    "critical_loading",
    "insurer_budget",
    "insurer_lagrange",
    "insurer_value",
    "insurer_best_response",
    "reinsurer_budget",
    "reinsurer_lagrange",
    "reinsurer_value",
    "solve_equilibrium",
    "brute_force_search",
]

#: relative indifference tolerance: a per-contract surplus below this times
#: P(0) counts as exact indifference of the insurer
_INDIFFERENCE_RTOL = 1e-12


@dataclass(frozen=True)
class ContractTerms:
    """Exogenous terms of the game besides the market parameters.

    Attributes:
        insurer_capital: insurer's initial capital v_I (> 0)
        reinsurer_capital: reinsurer's initial capital v_R (> 0)
        max_loading: cap theta_max on the safety loading (>= 0)
        max_contracts: cap xi_bar on the number of contracts (> 0)
        contract: the underlying guarantee terms

    The closed forms additionally assume the premium can never exhaust the
    insurer's capital, ``max_contracts * (1 + max_loading) * P(0) < v_I``;
    that requires a price, so it is enforced by ``check_premium_cap`` at
    solve time rather than here.
    """

    insurer_capital: float
    reinsurer_capital: float
    max_loading: float
    max_contracts: float
    contract: ReinsuranceContract

    def __post_init__(self) -> None:
        if not self.insurer_capital > 0.0:
            raise ValueError("insurer_capital must be strictly positive")
        if not self.reinsurer_capital > 0.0:
            raise ValueError("reinsurer_capital must be strictly positive")
        if self.max_loading < 0.0:
            raise ValueError("max_loading must be non-negative")
        if not self.max_contracts > 0.0:
            raise ValueError("max_contracts must be strictly positive")

    def check_premium_cap(self, p0: float) -> None:
        """Reject terms whose worst-case premium exhausts the capital."""
        worst = self.max_contracts * (1.0 + self.max_loading) * p0
        if worst >= self.insurer_capital:
            raise ValueError(
                "premium cap violated: max_contracts * (1 + max_loading) * "
                f"P(0) = {worst:.6g} >= insurer_capital = "
                f"{self.insurer_capital:.6g}; the fixed-cap closed forms do "
                "not apply to capital-constrained demand")


@dataclass(frozen=True)
class BestResponse:
    """The insurer's optimal contract amount(s) at a given loading.

    ``lower == upper`` means the optimum is unique. ``lower < upper`` means
    every amount in [lower, upper] is optimal and ``selected`` is the
    reinsurer-preferred element of that set (optimistic tie-break).
    """

    selected: float
    lower: float
    upper: float

    @property
    def is_indifferent(self) -> bool:
        return self.lower < self.upper


@dataclass(frozen=True)
class StackelbergEquilibrium:
    """Closed-form equilibrium of the loading/amount game.

    Attributes:
        theta_star: equilibrium safety loading
        xi_star: equilibrium number of reinsurance contracts
        critical_loading: loading at which the insurer is indifferent
        p0: market-kernel put price at time 0
        p0_aux: auxiliary-market put price at time 0
        y_insurer_star: insurer's Lagrange multiplier at the equilibrium
        y_reinsurer_star: reinsurer's Lagrange multiplier at the equilibrium
        value_insurer: insurer's optimal expected utility
        value_reinsurer: reinsurer's optimal expected utility
        pi_insurer_0: insurer's time-0 portfolio weights (2,)
        pi_reinsurer_0: reinsurer's time-0 portfolio weights (2,)
        insurer_response: the insurer's best-response set at theta_star
        degenerate: True when the premium is zero or reinsurance has
            non-positive value to the insurer, so no meaningful trade pins
            the loading down
    """

    theta_star: float
    xi_star: float
    critical_loading: float
    p0: float
    p0_aux: float
    y_insurer_star: float
    y_reinsurer_star: float
    value_insurer: float
    value_reinsurer: float
    pi_insurer_0: Optional[np.ndarray]
    pi_reinsurer_0: Optional[np.ndarray]
    insurer_response: BestResponse
    degenerate: bool = False


class BruteForceResult(NamedTuple):
    """Numerical equilibrium from a grid search over (loading, amount)."""

    theta: float
    xi: float
    insurer_value: float
    reinsurer_value: float


def critical_loading(contract: ReinsuranceContract,
                     market: MarketParams) -> float:
    """Loading that makes the insurer indifferent to reinsurance.

    Equals ``(P_aux(0) - P(0)) / P(0)``; infinite when the put is worthless.
    """
    p0 = put_price(0.0, contract.benchmark_initial, contract, market).price
    paux = put_price_auxiliary(0.0, contract.benchmark_initial, contract,
                               market).price
    if p0 <= 0.0:
        return math.inf
    return (paux - p0) / p0


def _initial_prices(terms: ContractTerms,
                    market: MarketParams) -> tuple[float, float]:
    contract = terms.contract
    p0 = put_price(0.0, contract.benchmark_initial, contract, market).price
    paux = put_price_auxiliary(0.0, contract.benchmark_initial, contract,
                               market).price
    return p0, paux


def _check_actions(xi: float, theta: float, terms: ContractTerms) -> None:
    if not 0.0 <= xi <= terms.max_contracts:
        raise ValueError(f"xi = {xi:.6g} outside [0, {terms.max_contracts:.6g}]")
    if theta < 0.0:
        raise ValueError("theta must be non-negative")


def insurer_budget(xi: float, theta: float, terms: ContractTerms,
                   market: MarketParams) -> float:
    """Auxiliary-market budget for the insurer's total terminal position.

    The insurer pays the premium ``xi (1 + theta) P(0)`` and holds an
    indemnity worth ``xi * P_aux(0)`` at the auxiliary prices that govern
    its constrained optimization, so the budget for terminal wealth
    including the indemnity is
    ``v_I - xi (1 + theta) P(0) + xi P_aux(0)``.
    """
    p0, paux = _initial_prices(terms, market)
    return (terms.insurer_capital - xi * (1.0 + theta) * p0 + xi * paux)


def _dual_optimum(utility: Utility, budget: float, market: MarketParams,
                  shift: DualShift, horizon: float) -> tuple[float, float]:
    """Multiplier and optimal value of max E[U(X)] s.t. E[Z_lambda X] = budget.

    Standard martingale-method closed forms: the optimal claim is
    X* = (U')^{-1}(y Z_lambda(T)) and lognormality of the kernel reduces
    everything to one moment. The shifted-power floor enters only through
    the effective budget ``budget + a e^{-rT}``.
    """
    if isinstance(utility, LogUtility):
        if budget <= 0.0:
            raise ValueError("budget must be strictly positive")
        return 1.0 / budget, math.log(budget) - log_kernel_mean(
            market, shift, horizon)
    b = utility.exponent
    effective = budget + utility.floor * math.exp(-market.r * horizon)
    if effective <= 0.0:
        raise ValueError("effective budget (wealth plus discounted floor "
                         "shift) must be strictly positive")
    moment = kernel_moment(market, shift, b / (b - 1.0), horizon)
    y = (effective / moment) ** (b - 1.0)
    value = (effective ** b) * (moment ** (1.0 - b)) / b
    return y, value


def insurer_lagrange(xi: float, theta: float, utility: Utility,
                     terms: ContractTerms, market: MarketParams) -> float:
    """Lagrange multiplier y_I of the insurer's constrained problem."""
    _check_actions(xi, theta, terms)
    shift = optimal_dual_shift(market)
    budget = insurer_budget(xi, theta, terms, market)
    y, _ = _dual_optimum(utility, budget, market, shift,
                         terms.contract.maturity)
    return y


def insurer_value(xi: float, theta: float, utility: Utility,
                  terms: ContractTerms, market: MarketParams) -> float:
    """Insurer's optimal expected utility buying xi contracts at loading theta.

    Strictly monotone in xi with the sign of the per-contract surplus
    ``P_aux(0) - (1 + theta) P(0)``; constant in xi exactly at the critical
    loading.
    """
    _check_actions(xi, theta, terms)
    shift = optimal_dual_shift(market)
    budget = insurer_budget(xi, theta, terms, market)
    _, value = _dual_optimum(utility, budget, market, shift,
                             terms.contract.maturity)
    return value


def insurer_best_response(theta: float, utility: Utility,
                          terms: ContractTerms,
                          market: MarketParams) -> BestResponse:
    """Optimal contract amount(s) of the insurer at loading theta.

    Positive per-contract surplus means buy the maximum, negative means buy
    nothing, zero (within ``1e-12 * P(0)``) means the whole interval
    [0, xi_bar] is optimal with the maximum selected. The response does not
    depend on the utility within the supported families; the argument is
    kept so callers state whose response it is.
    """
    del utility  # response is preference-free for the supported families
    if theta < 0.0:
        raise ValueError("theta must be non-negative")
    p0, paux = _initial_prices(terms, market)
    surplus = paux - (1.0 + theta) * p0
    tol = _INDIFFERENCE_RTOL * max(p0, 1e-300)
    if p0 <= 0.0 or abs(surplus) <= tol:
        return BestResponse(terms.max_contracts, 0.0, terms.max_contracts)
    if surplus > 0.0:
        return BestResponse(terms.max_contracts, terms.max_contracts,
                            terms.max_contracts)
    return BestResponse(0.0, 0.0, 0.0)


def reinsurer_budget(theta: float, xi: float, terms: ContractTerms,
                     market: MarketParams) -> float:
    """Budget backing the reinsurer's Merton part: v_R + xi * theta * P(0).

    The premium income is ``xi (1 + theta) P(0)`` of which ``xi P(0)``
    replicates the ceded liability, leaving the loading income on top of
    the initial capital for unconstrained investment.
    """
    contract = terms.contract
    p0 = put_price(0.0, contract.benchmark_initial, contract, market).price
    return terms.reinsurer_capital + xi * theta * p0


def reinsurer_lagrange(theta: float, xi: float, utility: Utility,
                       terms: ContractTerms, market: MarketParams) -> float:
    """Lagrange multiplier y_R of the reinsurer's problem."""
    _check_actions(xi, theta, terms)
    budget = reinsurer_budget(theta, xi, terms, market)
    y, _ = _dual_optimum(utility, budget, market, DualShift(0.0),
                         terms.contract.maturity)
    return y


def reinsurer_value(theta: float, xi: float, utility: Utility,
                    terms: ContractTerms, market: MarketParams) -> float:
    """Reinsurer's optimal expected utility selling xi contracts at theta.

    The ceded put liability is perfectly replicable, so the reinsurer's
    problem is an unconstrained Merton problem on the budget
    ``v_R + xi theta P(0)`` regardless of the hedge overlay; the value is
    strictly increasing in the product xi * theta.
    """
    _check_actions(xi, theta, terms)
    budget = reinsurer_budget(theta, xi, terms, market)
    _, value = _dual_optimum(utility, budget, market, DualShift(0.0),
                             terms.contract.maturity)
    return value


def solve_equilibrium(insurer_utility: Utility, reinsurer_utility: Utility,
                      terms: ContractTerms,
                      market: MarketParams) -> StackelbergEquilibrium:
    """Closed-form Stackelberg equilibrium of the loading/amount game.

    The loading is the critical one capped at ``terms.max_loading``; the
    amount is ``terms.max_contracts`` (strictly optimal below the critical
    loading, optimistically selected at it). Degenerate cases, a worthless
    put or reinsurance worth less than its fair price to the insurer, are
    returned flagged instead of raising. Time-0 portfolio weights are
    populated from the strategies module.
    """
    if isinstance(reinsurer_utility, HaraUtility):
        raise ValueError("reinsurer utility must be power or logarithmic; "
                         "the shifted-power closed forms are implemented "
                         "for the insurer only")
    contract = terms.contract
    p0, paux = _initial_prices(terms, market)
    terms.check_premium_cap(p0)
    shift = optimal_dual_shift(market)
    horizon = contract.maturity

    if p0 <= 0.0:
        crit = math.inf
        theta_star, xi_star = terms.max_loading, terms.max_contracts
        response = BestResponse(xi_star, 0.0, xi_star)
        degenerate = True
    else:
        crit = (paux - p0) / p0
        if crit < 0.0:
            # reinsurance destroys value for the insurer at any loading
            theta_star, xi_star = 0.0, 0.0
            response = BestResponse(0.0, 0.0, 0.0)
            degenerate = True
        else:
            theta_star = min(crit, terms.max_loading)
            xi_star = terms.max_contracts
            response = insurer_best_response(theta_star, insurer_utility,
                                             terms, market)
            degenerate = False

    y_i, nu_i = _dual_optimum(
        insurer_utility,
        insurer_budget(xi_star, theta_star, terms, market),
        market, shift, horizon)
    y_r, nu_r = _dual_optimum(
        reinsurer_utility,
        reinsurer_budget(theta_star, xi_star, terms, market),
        market, DualShift(0.0), horizon)

    equilibrium = StackelbergEquilibrium(
        theta_star=theta_star, xi_star=xi_star, critical_loading=crit,
        p0=p0, p0_aux=paux, y_insurer_star=y_i, y_reinsurer_star=y_r,
        value_insurer=nu_i, value_reinsurer=nu_r,
        pi_insurer_0=None, pi_reinsurer_0=None,
        insurer_response=response, degenerate=degenerate)

    # local import: strategies consumes the equilibrium type defined above
    from .strategies import (MarketState, insurer_portfolio,
                             reinsurer_portfolio)

    state0 = MarketState(t=0.0, s0=1.0, s1=market.s1, s2=market.s2,
                         benchmark=contract.benchmark_initial,
                         kernel=1.0, kernel_aux=1.0)
    pi_i0 = insurer_portfolio(state0, equilibrium, insurer_utility, terms,
                              market).total
    pi_r0 = reinsurer_portfolio(state0, equilibrium, reinsurer_utility,
                                terms, market)
    return dataclasses.replace(equilibrium, pi_insurer_0=pi_i0,
                               pi_reinsurer_0=pi_r0)


def _grid_values(utility: Utility, budgets: np.ndarray,
                 market: MarketParams, shift: DualShift,
                 horizon: float) -> np.ndarray:
    """Vectorized optimal values over an array of budgets (-inf infeasible)."""
    budgets = np.asarray(budgets, dtype=np.float64)
    if isinstance(utility, LogUtility):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(budgets > 0.0,
                            np.log(np.maximum(budgets, 1e-300))
                            - log_kernel_mean(market, shift, horizon),
                            -np.inf)
    b = utility.exponent
    effective = budgets + utility.floor * math.exp(-market.r * horizon)
    moment = kernel_moment(market, shift, b / (b - 1.0), horizon)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(effective > 0.0,
                        np.power(np.maximum(effective, 1e-300), b)
                        * moment ** (1.0 - b) / b,
                        -np.inf)


def brute_force_search(insurer_utility: Utility, reinsurer_utility: Utility,
                       terms: ContractTerms, market: MarketParams,
                       theta_grid: np.ndarray,
                       xi_grid: np.ndarray) -> BruteForceResult:
    """Backward-induction grid search that ignores the closed-form solution.

    For every loading on ``theta_grid`` the insurer's value is maximized
    over ``xi_grid`` (ties resolved toward the largest amount, the
    optimistic tie-break); the reinsurer then maximizes its value over the
    loadings given that response (ties toward the largest loading).
    Intended as an independent check of ``solve_equilibrium`` up to grid
    spacing.
    """
    theta_grid = np.asarray(theta_grid, dtype=np.float64)
    xi_grid = np.asarray(xi_grid, dtype=np.float64)
    p0, paux = _initial_prices(terms, market)
    shift = optimal_dual_shift(market)
    horizon = terms.contract.maturity

    theta = theta_grid[:, None]
    xi = xi_grid[None, :]
    budgets_i = (terms.insurer_capital - xi * (1.0 + theta) * p0
                 + xi * paux)
    values_i = _grid_values(insurer_utility, budgets_i, market, shift,
                            horizon)
    # argmax with ties resolved toward the largest amount
    n_xi = xi_grid.size
    best_xi_idx = n_xi - 1 - np.argmax(values_i[:, ::-1], axis=1)

    budgets_r = (terms.reinsurer_capital
                 + xi_grid[best_xi_idx] * theta_grid * p0)
    values_r = _grid_values(reinsurer_utility, budgets_r, market,
                            DualShift(0.0), horizon)
    n_theta = theta_grid.size
    best_theta_idx = n_theta - 1 - int(np.argmax(values_r[::-1]))

    i, j = best_theta_idx, int(best_xi_idx[best_theta_idx])
    return BruteForceResult(float(theta_grid[i]), float(xi_grid[j]),
                            float(values_i[i, j]), float(values_r[i]))
