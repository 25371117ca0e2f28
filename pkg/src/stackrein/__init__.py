"""Stackelberg reinsurance and investment equilibria for equity-linked
insurance with a capital guarantee.

A reinsurer (leader) quotes a safety loading on a put written on the
insurer's benchmark fund; the insurer (follower) picks the reinsured
amount and invests under a no-second-asset constraint. The package solves
the game in closed form, prices and hedges the guarantee put, simulates
both parties' optimal wealth, and quantifies outcomes through loss
probabilities and wealth-equivalent utility comparisons.

The heavy Monte Carlo kernels are compiled with numba when available; set
``STACKREIN_FORCE_NUMPY=1`` before import to force the pure-numpy
fallback.
"""

from .analysis import (
    ActionCombination,
    ConstantMixStrategy,
    IncentiveComparison,
    LossProbIncrease,
    MaxLossProb,
    OptimalStrategy,
    SweepPoint,
    VerificationReport,
    VerificationRow,
    WeucCap,
    WeucResult,
    discount_select,
    expected_utility_closed_form,
    reinsurer_incentive,
    sensitivity_sweep,
    verify_model,
    weuc,
)
from .config import RunConfig, load_config
from .equilibrium import (
    BestResponse,
    BruteForceResult,
    ContractTerms,
    StackelbergEquilibrium,
    brute_force_search,
    critical_loading,
    insurer_best_response,
    insurer_budget,
    insurer_lagrange,
    insurer_value,
    reinsurer_budget,
    reinsurer_lagrange,
    reinsurer_value,
    solve_equilibrium,
)
from .market import (
    DualShift,
    MarketParams,
    ReinsuranceContract,
    kernel_moment,
    log_kernel_mean,
    optimal_dual_shift,
)
from .pricing import (
    HedgePosition,
    PutQuote,
    auxiliary_dividend_yield,
    put_price,
    put_price_auxiliary,
    replication_strategy,
)
from .simulation import (
    ConstantMixRule,
    EstimateWithError,
    InsurerOptimalRule,
    LossProbability,
    PathEnsemble,
    ReinsurerOptimalRule,
    SimulationConfig,
    WealthPaths,
    evolve_wealth,
    expected_utility_mc,
    hedge_error,
    loss_probability,
    simulate,
)
from .strategies import (
    MarketState,
    PortfolioDecomposition,
    insurer_portfolio,
    insurer_wealth,
    merton_portfolio,
    reinsurer_portfolio,
    reinsurer_wealth,
)
from .utility import HaraUtility, LogUtility, PowerUtility, Utility

__version__ = "0.1.0"

__all__ = [
    "ActionCombination",
    "BestResponse",
    "BruteForceResult",
    "ConstantMixRule",
    "ConstantMixStrategy",
    "ContractTerms",
    "DualShift",
    "EstimateWithError",
    "HaraUtility",
    "HedgePosition",
    "IncentiveComparison",
    "InsurerOptimalRule",
    "LogUtility",
    "LossProbIncrease",
    "LossProbability",
    "MarketParams",
    "MarketState",
    "MaxLossProb",
    "OptimalStrategy",
    "PathEnsemble",
    "PortfolioDecomposition",
    "PowerUtility",
    "PutQuote",
    "ReinsuranceContract",
    "ReinsurerOptimalRule",
    "RunConfig",
    "SimulationConfig",
    "StackelbergEquilibrium",
    "SweepPoint",
    "Utility",
    "VerificationReport",
    "VerificationRow",
    "WealthPaths",
    "WeucCap",
    "WeucResult",
    "auxiliary_dividend_yield",
    "brute_force_search",
    "critical_loading",
    "discount_select",
    "evolve_wealth",
    "expected_utility_closed_form",
    "expected_utility_mc",
    "hedge_error",
    "insurer_best_response",
    "insurer_budget",
    "insurer_lagrange",
    "insurer_portfolio",
    "insurer_value",
    "insurer_wealth",
    "kernel_moment",
    "load_config",
    "log_kernel_mean",
    "loss_probability",
    "merton_portfolio",
    "optimal_dual_shift",
    "put_price",
    "put_price_auxiliary",
    "reinsurer_budget",
    "reinsurer_incentive",
    "reinsurer_lagrange",
    "reinsurer_portfolio",
    "reinsurer_value",
    "reinsurer_wealth",
    "replication_strategy",
    "sensitivity_sweep",
    "simulate",
    "solve_equilibrium",
    "verify_model",
    "weuc",
]
