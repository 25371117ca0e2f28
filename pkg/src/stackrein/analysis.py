"""Comparative statics on top of the equilibrium closed forms.

This module answers the "so what" questions about the game's solution:

* ``weuc`` turns expected-utility gaps between two action combinations into
  a wealth-equivalent utility change: the fraction of initial capital the
  alternative combination would need on top to match the reference.
* ``discount_select`` picks the loading discount ``alpha`` the reinsurer
  can offer under a cap on its own WEUC, on the increase of its loss
  probability, or on the absolute loss probability.
* ``reinsurer_incentive`` compares selling at a discounted loading with
  not selling at all.
* ``sensitivity_sweep`` recomputes the equilibrium along one-parameter
  grids (risk aversions, rate, horizon, guarantee).
* ``verify_model`` is the master gate confronting every closed form with
  its Monte Carlo oracle on one seeded ensemble.

Wherever the value function is an affine-power (or affine-log) function of
initial capital, WEUC roots are computed in closed form; only combinations
without such a profile (constant-mix with a reinsurance position, or a
shifted-power utility on a constant-mix strategy) fall back to Monte Carlo
plus a bracketed root solve, with a warning.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional, Union

import numpy as np
from scipy.optimize import brentq

from .equilibrium import (
    ContractTerms,
    StackelbergEquilibrium,
    solve_equilibrium,
)
from .market import (
    DualShift,
    MarketParams,
    kernel_moment,
    log_kernel_mean,
    optimal_dual_shift,
)
from .pricing import put_price, put_price_auxiliary
from .simulation import (
    EstimateWithError,
    SimulationConfig,
    ConstantMixRule,
    evolve_wealth,
    expected_utility_mc,
    loss_probability,
    simulate,
)
from .utility import HaraUtility, LogUtility, PowerUtility, Utility

__all__ = [
    "OptimalStrategy",
    "ConstantMixStrategy",
    "ActionCombination",
    "WeucResult",
    "WeucCap",
    "LossProbIncrease",
    "MaxLossProb",
    "IncentiveComparison",
    "SweepPoint",
    "VerificationRow",
    "VerificationReport",
    "SWEEP_PARAMETERS",
    "expected_utility_closed_form",
    "weuc",
    "discount_select",
    "reinsurer_incentive",
    "sensitivity_sweep",
    "verify_model",
]

_PARTIES = ("insurer", "reinsurer")
_RESUBSTITUTION_RTOL = 1e-9
_BRACKET = (-0.99, 10.0)
_ROOT_TOL = 1e-10
_ALPHA_TOL = 1e-6
_FALLBACK_CONFIG = SimulationConfig(n_paths=200_000, n_steps=1,
                                    seed=914203, antithetic=True)


@dataclass(frozen=True)
class OptimalStrategy:
    """Marker: the party follows its optimal dynamic portfolio."""


@dataclass(frozen=True)
class ConstantMixStrategy:
    """Fixed wealth fractions (weight1, weight2) held throughout."""

    weight1: float
    weight2: float


InsurerStrategy = Union[OptimalStrategy, ConstantMixStrategy]


@dataclass(frozen=True)
class ActionCombination:
    """A (possibly off-equilibrium) pair of actions to evaluate.

    ``loading`` is the safety loading applied to the put premium,
    ``contracts`` the number of puts bought by the insurer. The insurer may
    follow its optimal dynamic strategy or a constant-mix strategy; the
    reinsurer is always evaluated on its optimal strategy.
    """

    loading: float
    contracts: float
    insurer_strategy: InsurerStrategy = field(default_factory=OptimalStrategy)

    def __post_init__(self) -> None:
        if self.loading < 0.0:
            raise ValueError("loading must be non-negative")
        if self.contracts < 0.0:
            raise ValueError("contracts must be non-negative")

    def validate(self, terms: ContractTerms) -> None:
        if self.loading > terms.max_loading:
            raise ValueError(f"loading {self.loading} exceeds the cap "
                             f"{terms.max_loading}")
        if self.contracts > terms.max_contracts:
            raise ValueError(f"contracts {self.contracts} exceeds the cap "
                             f"{terms.max_contracts}")


@dataclass(frozen=True)
class WeucResult:
    """Wealth-equivalent utility change of a reference vs an alternative.

    Positive means the reference combination is better: following the
    alternative, the party would need ``value`` times its initial capital
    on top to reach the reference expected utility.
    """

    value: float
    party: str

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError("WEUC value must be finite")
        if self.party not in _PARTIES:
            raise ValueError(f"party must be one of {_PARTIES}")

    @property
    def basis_points(self) -> float:
        return self.value * 1e4


def _check_party(party: str) -> None:
    if party not in _PARTIES:
        raise ValueError(f"party must be one of {_PARTIES}, got {party!r}")


def _capital(party: str, terms: ContractTerms) -> float:
    return (terms.insurer_capital if party == "insurer"
            else terms.reinsurer_capital)


def _exponent(utility: Utility) -> float:
    return 0.0 if isinstance(utility, LogUtility) else utility.exponent


def _constant_mix_growth(weights: tuple[float, float], exponent: float,
                         market: MarketParams) -> float:
    """Annualized certainty-growth rate of a constant-mix strategy.

    For exponent b the expected utility of v invested at fixed weights pi
    over T years is U(v * exp(g T)) in the power/log sense, with
    g = r + pi'(mu - r) - (1 - b)/2 ||sigma' pi||^2.
    """
    pi = np.asarray(weights, dtype=np.float64)
    excess = float(pi @ market.excess_return)
    vol_sq = float(np.sum((market.volatility_matrix.T @ pi) ** 2))
    return market.r + excess - 0.5 * (1.0 - exponent) * vol_sq


@dataclass(frozen=True)
class _ValueProfile:
    """Expected utility as a function of initial capital v.

    Power family: EU(v) = (1/b) (v + offset)^b * scale.
    Log family (exponent 0): EU(v) = ln(v + offset) + log_drift.
    """

    exponent: float
    offset: float
    scale: float = 1.0
    log_drift: float = 0.0

    def value(self, capital: float) -> float:
        effective = capital + self.offset
        if effective <= 0.0:
            raise ValueError("combination is infeasible: non-positive "
                             "effective budget")
        if self.exponent == 0.0:
            return math.log(effective) + self.log_drift
        return (self.scale / self.exponent) * effective ** self.exponent

    def capital_for(self, target_value: float) -> float:
        """Initial capital at which this profile reaches ``target_value``."""
        if self.exponent == 0.0:
            return math.exp(target_value - self.log_drift) - self.offset
        scaled = self.exponent * target_value / self.scale
        if scaled <= 0.0:
            raise ValueError("target expected utility is out of range for "
                             "this profile")
        return math.exp(math.log(scaled) / self.exponent) - self.offset


def _value_profile(combination: ActionCombination, party: str,
                   utility: Utility, terms: ContractTerms,
                   market: MarketParams) -> Optional[_ValueProfile]:
    """Affine-power representation of the combination's value, if any."""
    b = _exponent(utility)
    contract = terms.contract
    horizon = contract.maturity
    if party == "reinsurer":
        p0 = put_price(0.0, contract.benchmark_initial, contract,
                       market).price
        offset = combination.contracts * combination.loading * p0
        basic = DualShift(0.0)
        if b == 0.0:
            return _ValueProfile(0.0, offset,
                                 log_drift=-log_kernel_mean(market, basic,
                                                            horizon))
        moment = kernel_moment(market, basic, b / (b - 1.0), horizon)
        return _ValueProfile(b, offset, scale=moment ** (1.0 - b))

    strategy = combination.insurer_strategy
    if isinstance(strategy, OptimalStrategy):
        p0 = put_price(0.0, contract.benchmark_initial, contract,
                       market).price
        p0_aux = put_price_auxiliary(0.0, contract.benchmark_initial,
                                     contract, market).price
        offset = (combination.contracts
                  * (p0_aux - (1.0 + combination.loading) * p0)
                  + utility.floor * math.exp(-market.r * horizon))
        shift = optimal_dual_shift(market)
        if b == 0.0:
            return _ValueProfile(0.0, offset,
                                 log_drift=-log_kernel_mean(market, shift,
                                                            horizon))
        moment = kernel_moment(market, shift, b / (b - 1.0), horizon)
        return _ValueProfile(b, offset, scale=moment ** (1.0 - b))

    # constant mix: affine-power only without a reinsurance position and
    # without a utility floor shift
    if combination.contracts == 0.0 and utility.floor == 0.0:
        g = _constant_mix_growth((strategy.weight1, strategy.weight2),
                                 b, market)
        if b == 0.0:
            return _ValueProfile(0.0, 0.0, log_drift=g * horizon)
        return _ValueProfile(b, 0.0, scale=math.exp(b * g * horizon))
    return None


def _mc_value_function(combination: ActionCombination, utility: Utility,
                       terms: ContractTerms, market: MarketParams,
                       config: Optional[SimulationConfig],
                       ) -> tuple[Callable[[float], float], float]:
    """Monte Carlo insurer value as a function of initial capital.

    One seeded terminal ensemble is drawn and reused across capital levels,
    so the returned function is deterministic and smooth in the capital
    argument (common random numbers). Also returns the premium outlay,
    the infeasibility threshold on initial capital.
    """
    strategy = combination.insurer_strategy
    if not isinstance(strategy, ConstantMixStrategy):
        raise ValueError("Monte Carlo fallback supports only constant-mix "
                         "insurer strategies")
    contract = terms.contract
    cfg = config if config is not None else _FALLBACK_CONFIG
    cfg = replace(cfg, n_steps=1)
    ensemble = simulate(market, contract.maturity,
                        contract.benchmark_fraction, cfg,
                        contract.benchmark_initial)
    growth = evolve_wealth(ensemble, ConstantMixRule(strategy.weight1,
                                                     strategy.weight2),
                           1.0).wealth[:, -1]
    payoff = np.maximum(contract.guarantee - ensemble.benchmark[:, -1], 0.0)
    p0 = put_price(0.0, contract.benchmark_initial, contract, market).price
    premium_rate = combination.contracts * (1.0 + combination.loading) * p0

    def value(capital: float) -> float:
        liquid = capital - premium_rate
        if liquid <= 0.0:
            raise ValueError("combination is infeasible: premium consumes "
                             "the initial capital")
        total = liquid * growth + combination.contracts * payoff
        return expected_utility_mc(ensemble,
                                   lambda _: utility.value(total)).mean

    return value, premium_rate


def expected_utility_closed_form(combination: ActionCombination, party: str,
                                 utility: Utility, terms: ContractTerms,
                                 market: MarketParams,
                                 config: Optional[SimulationConfig] = None,
                                 ) -> float:
    """Expected utility of a party under an action combination.

    Closed form whenever the combination admits an affine-power value
    profile; otherwise (constant-mix with reinsurance, or a floor-shifted
    utility on a constant mix) the value is estimated by Monte Carlo with
    a warning.
    """
    _check_party(party)
    combination.validate(terms)
    profile = _value_profile(combination, party, utility, terms, market)
    capital = _capital(party, terms)
    if profile is not None:
        return profile.value(capital)
    warnings.warn("no closed form for this utility/strategy pair; falling "
                  "back to Monte Carlo", RuntimeWarning, stacklevel=2)
    value, _ = _mc_value_function(combination, utility, terms, market,
                                  config)
    return value(capital)


def weuc(reference: ActionCombination, alternative: ActionCombination,
         party: str, utility: Utility, terms: ContractTerms,
         market: MarketParams,
         config: Optional[SimulationConfig] = None) -> WeucResult:
    """Wealth-equivalent utility change of ``reference`` vs ``alternative``.

    Solves EU_alternative(v (1 + w)) = EU_reference(v) for w, where v is
    the party's initial capital. Positive w means the reference is better.
    Closed form when the alternative has an affine-power profile; otherwise
    a bracketed root solve on [-0.99, 10]. The solution is re-substituted
    and must reproduce the reference expected utility to 1e-9 relative.
    """
    _check_party(party)
    reference.validate(terms)
    alternative.validate(terms)
    capital = _capital(party, terms)

    ref_profile = _value_profile(reference, party, utility, terms, market)
    if ref_profile is not None:
        eu_ref = ref_profile.value(capital)
    else:
        warnings.warn("reference combination has no closed form; using "
                      "Monte Carlo", RuntimeWarning, stacklevel=2)
        ref_value, _ = _mc_value_function(reference, utility, terms, market,
                                          config)
        eu_ref = ref_value(capital)

    alt_profile = _value_profile(alternative, party, utility, terms, market)
    if alt_profile is not None:
        matched = alt_profile.capital_for(eu_ref)
        w = matched / capital - 1.0
        resub = alt_profile.value(matched)
        gap = abs(resub - eu_ref)
        if gap > _RESUBSTITUTION_RTOL * max(abs(eu_ref), 1e-300):
            raise ArithmeticError("re-substitution check failed: "
                                  f"|{resub} - {eu_ref}| = {gap}")
        return WeucResult(w, party)

    warnings.warn("alternative combination has no closed form; solving the "
                  "WEUC root on Monte Carlo values", RuntimeWarning,
                  stacklevel=2)
    alt_value, premium = _mc_value_function(alternative, utility, terms,
                                            market, config)

    def gap(w: float) -> float:
        return alt_value(capital * (1.0 + w)) - eu_ref

    lo, hi = _BRACKET
    # stay above the capital level the premium outlay would exhaust
    floor = premium / capital - 1.0
    if floor >= hi:
        raise ValueError("alternative combination cannot afford its premium "
                         "anywhere on the search bracket")
    lo = max(lo, floor + 0.01)
    g_lo, g_hi = gap(lo), gap(hi)
    if g_lo == 0.0:
        return WeucResult(lo, party)
    if g_hi == 0.0:
        return WeucResult(hi, party)
    if g_lo * g_hi > 0.0:
        raise ValueError(f"WEUC root is not bracketed on [{lo}, {hi}]: "
                         f"gap({lo}) = {g_lo:.3e}, gap({hi}) = {g_hi:.3e}")
    w = float(brentq(gap, lo, hi, xtol=_ROOT_TOL))
    return WeucResult(w, party)


@dataclass(frozen=True)
class WeucCap:
    """Largest WEUC (relative units) the reinsurer accepts to give up."""

    cap: float

    def __post_init__(self) -> None:
        if self.cap < 0.0:
            raise ValueError("cap must be non-negative")


@dataclass(frozen=True)
class LossProbIncrease:
    """Largest acceptable increase of the loss probability over Q(1)."""

    increase: float

    def __post_init__(self) -> None:
        if self.increase < 0.0:
            raise ValueError("increase must be non-negative")


@dataclass(frozen=True)
class MaxLossProb:
    """Absolute ceiling on the reinsurer's loss probability."""

    bound: float

    def __post_init__(self) -> None:
        if not 0.0 < self.bound < 1.0:
            raise ValueError("bound must lie strictly between 0 and 1")


SelectionCriterion = Union[WeucCap, LossProbIncrease, MaxLossProb]


def discount_select(criterion: SelectionCriterion,
                    equilibrium: StackelbergEquilibrium,
                    reinsurer_utility: Utility, terms: ContractTerms,
                    market: MarketParams) -> float:
    """Discount factor alpha at which the criterion binds exactly.

    The reinsurer considers offering the loading ``alpha * theta_star``;
    this solves for the alpha where its WEUC against the undiscounted
    equilibrium hits the cap, or where the loss probability hits the
    allowed level. Infeasible criteria raise instead of clamping.
    """
    eq_actions = ActionCombination(equilibrium.theta_star,
                                   equilibrium.xi_star)

    if isinstance(criterion, WeucCap):
        def excess(alpha: float) -> float:
            discounted = ActionCombination(alpha * equilibrium.theta_star,
                                           equilibrium.xi_star)
            w = weuc(eq_actions, discounted, "reinsurer", reinsurer_utility,
                     terms, market)
            return w.value - criterion.cap

        full = excess(0.0)
        if full < 0.0:
            raise ValueError(
                "criterion is infeasible: even a free contract (alpha = 0) "
                f"gives up only {full + criterion.cap:.6e} < cap")
        if full == 0.0:
            return 0.0
        return float(brentq(excess, 0.0, 1.0, xtol=_ALPHA_TOL))

    def q(alpha: float) -> float:
        return loss_probability(alpha, equilibrium, reinsurer_utility,
                                terms, market).closed_form

    q_full, q_free = q(1.0), q(0.0)
    if isinstance(criterion, LossProbIncrease):
        target = q_full + criterion.increase
    else:
        target = criterion.bound
    if target < q_full:
        raise ValueError(f"criterion is infeasible: target {target:.6e} "
                         f"lies below the full-loading probability "
                         f"{q_full:.6e}")
    if target > q_free:
        raise ValueError(f"criterion is infeasible: target {target:.6e} "
                         f"exceeds the zero-loading probability "
                         f"{q_free:.6e}")
    return float(brentq(lambda a: q(a) - target, 0.0, 1.0, xtol=_ALPHA_TOL))


class IncentiveComparison(NamedTuple):
    """Reinsurer expected utility with and without selling the contract."""

    selling: float
    not_selling: float

    @property
    def gap(self) -> float:
        return self.selling - self.not_selling


def reinsurer_incentive(alpha: float,
                        equilibrium: StackelbergEquilibrium,
                        reinsurer_utility: Utility, terms: ContractTerms,
                        market: MarketParams) -> IncentiveComparison:
    """Selling at the discounted loading vs not selling at all.

    At alpha = 0 the premium equals the fair hedge cost and both expected
    utilities coincide; for alpha > 0 selling strictly dominates.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    selling = ActionCombination(alpha * equilibrium.theta_star,
                                equilibrium.xi_star)
    keep_out = ActionCombination(0.0, 0.0)
    sell_value = expected_utility_closed_form(selling, "reinsurer",
                                              reinsurer_utility, terms,
                                              market)
    stay_value = expected_utility_closed_form(keep_out, "reinsurer",
                                              reinsurer_utility, terms,
                                              market)
    return IncentiveComparison(sell_value, stay_value)


SWEEP_PARAMETERS = ("RRA_I", "RRA_R", "r", "T", "G_T")


@dataclass(frozen=True)
class SweepPoint:
    """Equilibrium summary at one grid point of a sensitivity sweep."""

    parameter: str
    value: float
    theta_star: float
    xi_star: float
    pi_insurer_0: np.ndarray
    pi_reinsurer_0: np.ndarray


def _with_risk_aversion(utility: Utility, rra: float) -> Utility:
    if rra <= 0.0:
        raise ValueError("relative risk aversion must be positive")
    if rra == 1.0:
        return LogUtility()
    if isinstance(utility, HaraUtility):
        return HaraUtility(utility.floor_shift, 1.0 - rra)
    return PowerUtility(1.0 - rra)


def sensitivity_sweep(parameter: str, grid, insurer_utility: Utility,
                      reinsurer_utility: Utility, terms: ContractTerms,
                      market: MarketParams,
                      recompute_benchmark_fraction: bool = False,
                      ) -> list[SweepPoint]:
    """Equilibrium along a one-parameter grid.

    ``parameter`` is one of RRA_I, RRA_R, r, T, G_T. By default the
    benchmark constant-mix fraction is held fixed across the grid; with
    ``recompute_benchmark_fraction`` it is reset at every point to the
    insurer's Merton fraction in the first asset.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"parameter must be one of {SWEEP_PARAMETERS}, "
                         f"got {parameter!r}")
    points = []
    for value in grid:
        value = float(value)
        u_i, u_r, mkt, trm = (insurer_utility, reinsurer_utility, market,
                              terms)
        if parameter == "RRA_I":
            u_i = _with_risk_aversion(insurer_utility, value)
        elif parameter == "RRA_R":
            u_r = _with_risk_aversion(reinsurer_utility, value)
        elif parameter == "r":
            mkt = replace(market, r=value)
        elif parameter == "T":
            trm = replace(terms, contract=replace(terms.contract,
                                                  maturity=value))
        else:
            trm = replace(terms, contract=replace(terms.contract,
                                                  guarantee=value))
        if recompute_benchmark_fraction:
            fraction = ((mkt.mu1 - mkt.r)
                        / ((1.0 - _exponent(u_i)) * mkt.sigma1 ** 2))
            trm = replace(trm, contract=replace(trm.contract,
                                                benchmark_fraction=fraction))
        eq = solve_equilibrium(u_i, u_r, trm, mkt)
        points.append(SweepPoint(parameter=parameter, value=value,
                                 theta_star=eq.theta_star,
                                 xi_star=eq.xi_star,
                                 pi_insurer_0=eq.pi_insurer_0,
                                 pi_reinsurer_0=eq.pi_reinsurer_0))
    return points


@dataclass(frozen=True)
class VerificationRow:
    """One closed-form quantity confronted with its Monte Carlo oracle."""

    name: str
    closed_form: float
    estimate: EstimateWithError
    max_errors: float = 3.0

    @property
    def n_errors(self) -> float:
        return self.estimate.gap_in_errors(self.closed_form)

    @property
    def passed(self) -> bool:
        return self.n_errors <= self.max_errors


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of the closed-form vs Monte Carlo verification gate."""

    rows: tuple[VerificationRow, ...]

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def worst(self) -> VerificationRow:
        return max(self.rows, key=lambda row: row.n_errors)

    def format_table(self) -> str:
        header = (f"{'quantity':<28} {'closed form':>14} {'monte carlo':>14} "
                  f"{'std err':>11} {'sigmas':>7}  status")
        lines = [header, "-" * len(header)]
        for row in self.rows:
            status = "PASS" if row.passed else "FAIL"
            lines.append(f"{row.name:<28} {row.closed_form:>14.6e} "
                         f"{row.estimate.mean:>14.6e} "
                         f"{row.estimate.standard_error:>11.3e} "
                         f"{row.n_errors:>7.2f}  {status}")
        return "\n".join(lines)


def verify_model(insurer_utility: Utility, reinsurer_utility: Utility,
                 terms: ContractTerms, market: MarketParams,
                 config: SimulationConfig) -> VerificationReport:
    """Master verification gate on one seeded terminal ensemble.

    Confronts the put price, the auxiliary put price, both parties'
    equilibrium expected utilities, and the full-loading loss probability
    with their Monte Carlo oracles. Terminal draws are exact (one-step
    lognormal), so any disagreement beyond three standard errors indicts
    the closed forms, not the discretization.
    """
    eq = solve_equilibrium(insurer_utility, reinsurer_utility, terms, market)
    contract = terms.contract
    ensemble = simulate(market, contract.maturity,
                        contract.benchmark_fraction,
                        replace(config, n_steps=1),
                        contract.benchmark_initial)
    guarantee = contract.guarantee

    def payoff(ens) -> np.ndarray:
        return np.maximum(guarantee - ens.benchmark[:, -1], 0.0)

    def insurer_total(ens) -> np.ndarray:
        claim = insurer_utility.inverse_marginal(
            eq.y_insurer_star * ens.kernel_aux[:, -1])
        return insurer_utility.value(
            np.maximum(claim, eq.xi_star * payoff(ens)))

    def reinsurer_total(ens) -> np.ndarray:
        wealth = reinsurer_utility.inverse_marginal(
            eq.y_reinsurer_star * ens.kernel[:, -1])
        return reinsurer_utility.value(wealth)

    loss = loss_probability(1.0, eq, reinsurer_utility, terms, market,
                            config=config)
    rows = (
        VerificationRow("put_price",
                        eq.p0,
                        expected_utility_mc(
                            ensemble,
                            lambda e: e.kernel[:, -1] * payoff(e))),
        VerificationRow("put_price_auxiliary",
                        eq.p0_aux,
                        expected_utility_mc(
                            ensemble,
                            lambda e: e.kernel_aux[:, -1] * payoff(e))),
        VerificationRow("insurer_expected_utility",
                        eq.value_insurer,
                        expected_utility_mc(ensemble, insurer_total)),
        VerificationRow("reinsurer_expected_utility",
                        eq.value_reinsurer,
                        expected_utility_mc(ensemble, reinsurer_total)),
        VerificationRow("loss_probability",
                        loss.closed_form,
                        loss.estimate),
    )
    return VerificationReport(rows)
