"""Shared fixtures: the base-case market, contract terms and equilibrium."""

import pytest

from stackrein import (
    ContractTerms,
    MarketParams,
    PowerUtility,
    ReinsuranceContract,
    SimulationConfig,
    solve_equilibrium,
)


@pytest.fixture(scope="session")
def base_market() -> MarketParams:
    return MarketParams(r=0.0102, mu1=0.1752, mu2=0.1237,
                        sigma1=0.2366, sigma2=0.2198, rho=0.8012)


@pytest.fixture(scope="session")
def benchmark_fraction(base_market) -> float:
    # insurer Merton fraction in the first asset at relative risk aversion 10
    return ((base_market.mu1 - base_market.r)
            / (10.0 * base_market.sigma1 ** 2))


@pytest.fixture(scope="session")
def base_contract(benchmark_fraction) -> ReinsuranceContract:
    return ReinsuranceContract(guarantee=100.0, maturity=10.0,
                               benchmark_fraction=benchmark_fraction,
                               benchmark_initial=100.0)


@pytest.fixture(scope="session")
def base_terms(base_contract) -> ContractTerms:
    return ContractTerms(insurer_capital=100.0, reinsurer_capital=100.0,
                         max_loading=0.5, max_contracts=1.5,
                         contract=base_contract)


@pytest.fixture(scope="session")
def insurer_utility() -> PowerUtility:
    return PowerUtility(-9.0)


@pytest.fixture(scope="session")
def reinsurer_utility() -> PowerUtility:
    return PowerUtility(-9.0)


@pytest.fixture(scope="session")
def base_equilibrium(insurer_utility, reinsurer_utility, base_terms,
                     base_market):
    return solve_equilibrium(insurer_utility, reinsurer_utility, base_terms,
                             base_market)


@pytest.fixture()
def mc_config() -> SimulationConfig:
    """Terminal-draw ensemble config sized for 3-standard-error checks."""
    return SimulationConfig(n_paths=400_000, n_steps=1, seed=20240817,
                            antithetic=True)
