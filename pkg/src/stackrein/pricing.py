"""Closed-form valuation and replication of the guarantee put.

The insured fund is a constant-mix portfolio holding a fixed fraction of
wealth in asset 2, so its value is lognormal with volatility
``fraction * sigma2`` and the shortfall ``max(G - V_B(T), 0)`` is a European
put priced by the Black-Scholes formula. Two prices are needed:

* ``put_price``: the arbitrage-free price under the market pricing kernel,
  which sets the reinsurance premium;
* ``put_price_auxiliary``: the price under the shifted kernel of the
  auxiliary market in which the insurer's no-asset-2 constraint is relaxed.
  There the benchmark drifts at ``r - q`` with an effective dividend yield
  ``q = fraction * lambda2``, so the standard dividend-adjusted formula
  applies. This closed form is cross-checked against an independent
  quadrature oracle in the test suite before anything downstream trusts it.

``replication_strategy`` returns the self-financing hedge of the put in the
bank account and asset 2; asset 1 is never needed because the benchmark is
driven by asset 2 alone (``V_B`` is proportional to ``S2 ** fraction`` up to
a deterministic factor). The normal CDF comes from scipy's erfc-based
``ndtr``, accurate to full double precision, so quoted numbers are stable
across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from scipy.special import ndtr

from .market import (
    DualShift,
    MarketParams,
    ReinsuranceContract,
    optimal_dual_shift,
)

__all__ = [
    "PutQuote",
    "HedgePosition",
    "put_price",
    "put_price_auxiliary",
    "auxiliary_dividend_yield",
    "replication_strategy",
]

#: below this value of vol * sqrt(time-to-go) the put is priced as its
#: deterministic forward payoff (same cutoff as the simulation kernels)
_DEGENERATE_WIDTH = 1e-12


@dataclass(frozen=True)
class PutQuote:
    """A priced put on the benchmark fund at one point in time.

    Attributes:
        price: put value
        d1: lower Black-Scholes argument (strike side)
        d2: upper Black-Scholes argument, ``d1 + s * sqrt(tau)``; this is
            the ``d_plus`` that drives the hedge position
        time_to_maturity: remaining time tau
        benchmark_level: fund level the quote was computed at
        dividend_yield: effective yield q (0 for the market-kernel price)
    """

    price: float
    d1: float
    d2: float
    time_to_maturity: float
    benchmark_level: float
    dividend_yield: float = 0.0

    @property
    def d_plus(self) -> float:
        """Alias for ``d2``, the argument entering Phi(d_plus) - 1."""
        return self.d2

    @property
    def benchmark_delta(self) -> float:
        """Sensitivity of the put price to the benchmark level.

        Equals ``exp(-q tau) * (Phi(d_plus) - 1)``; it is 0 when the put is
        sure to expire worthless and ``-exp(-q tau)`` when the payout is
        certain.
        """
        return math.exp(-self.dividend_yield * self.time_to_maturity) * (
            float(ndtr(self.d2)) - 1.0)


class HedgePosition(NamedTuple):
    """Share holdings replicating the put: bank account, asset 1, asset 2."""

    bank_units: float
    asset1_units: float
    asset2_units: float


def _quote(level: float, guarantee: float, r: float, s: float, tau: float,
           q: float) -> PutQuote:
    """Dividend-adjusted Black-Scholes put with degenerate-case handling."""
    if not level > 0.0:
        raise ValueError("benchmark level must be strictly positive")
    if tau < 0.0:
        raise ValueError("valuation time is past maturity")
    if guarantee <= 0.0:
        return PutQuote(0.0, math.inf, math.inf, tau, level, q)
    width = s * math.sqrt(tau)
    disc_g = math.exp(-r * tau) * guarantee
    fwd = level * math.exp(-q * tau)
    if width <= _DEGENERATE_WIDTH:
        # expired or riskless benchmark: the payoff is deterministic
        price = max(disc_g - fwd, 0.0)
        d = -math.inf if price > 0.0 else math.inf
        return PutQuote(price, d, d, tau, level, q)
    d1 = (math.log(level / guarantee) + (r - q - 0.5 * s * s) * tau) / width
    d2 = d1 + width
    price = disc_g * float(ndtr(-d1)) - fwd * float(ndtr(-d2))
    return PutQuote(price, d1, d2, tau, level, q)


def put_price(t: float, benchmark_level: float,
              contract: ReinsuranceContract,
              params: MarketParams) -> PutQuote:
    """Market-kernel price of the guarantee put at time ``t``.

    Args:
        t: valuation time in [0, maturity]; at maturity the quote is the
            payoff itself
        benchmark_level: current fund value
        contract: guarantee terms
        params: market parameters

    Returns:
        PutQuote with the price and the Black-Scholes arguments.
    """
    if t > contract.maturity:
        raise ValueError("valuation time is past maturity")
    if t < 0.0:
        raise ValueError("valuation time must be non-negative")
    return _quote(benchmark_level, contract.guarantee, params.r,
                  contract.benchmark_volatility(params),
                  contract.maturity - t, 0.0)


def auxiliary_dividend_yield(params: MarketParams,
                             contract: ReinsuranceContract,
                             shift: Optional[DualShift] = None) -> float:
    """Effective dividend yield of the benchmark in the auxiliary market."""
    if shift is None:
        shift = optimal_dual_shift(params)
    return contract.benchmark_fraction * shift.lambda2


def put_price_auxiliary(t: float, benchmark_level: float,
                        contract: ReinsuranceContract,
                        params: MarketParams,
                        shift: Optional[DualShift] = None) -> PutQuote:
    """Auxiliary-market price of the guarantee put at time ``t``.

    This is the value of the reinsurance indemnity from the constrained
    insurer's perspective: the conditional expectation of the discounted
    payoff under the shifted kernel, equivalently a dividend-adjusted put
    with yield ``q = fraction * lambda2``. The shift defaults to the
    closed-form optimal one; with ``lambda2 = 0`` the quote coincides with
    ``put_price``.
    """
    if t > contract.maturity:
        raise ValueError("valuation time is past maturity")
    if t < 0.0:
        raise ValueError("valuation time must be non-negative")
    q = auxiliary_dividend_yield(params, contract, shift)
    return _quote(benchmark_level, contract.guarantee, params.r,
                  contract.benchmark_volatility(params),
                  contract.maturity - t, q)


def replication_strategy(t: float, benchmark_level: float,
                         asset2_price: float,
                         contract: ReinsuranceContract,
                         params: MarketParams) -> HedgePosition:
    """Self-financing hedge of the market-kernel put.

    Holds ``fraction * V_B * (Phi(d_plus) - 1) / S2`` shares of asset 2
    (non-positive while the put is alive), nothing in asset 1, and a bank
    position financing the difference so the portfolio value matches the
    put price: ``bank * e^{r t} + shares * S2 = P(t)``.

    Args:
        t: valuation time in [0, maturity)
        benchmark_level: current fund value
        asset2_price: current asset-2 price S2(t)
        contract: guarantee terms
        params: market parameters
    """
    if t >= contract.maturity:
        raise ValueError("replication requires time before maturity")
    if not asset2_price > 0.0:
        raise ValueError("asset2_price must be strictly positive")
    quote = put_price(t, benchmark_level, contract, params)
    shares = (contract.benchmark_fraction * benchmark_level
              * quote.benchmark_delta / asset2_price)
    bank = (quote.price - shares * asset2_price) * math.exp(-params.r * t)
    return HedgePosition(bank, 0.0, shares)
