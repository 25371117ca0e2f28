"""Market primitives: a two-risky-asset Black-Scholes market, the pricing
kernel, and the auxiliary (dual-shifted) market used to price claims for an
investor barred from the second asset.

The market has a bank account growing at the short rate r and two lognormal
assets. Asset 1 is tradable by every agent; asset 2 drives the policyholders'
benchmark fund and is off-limits to the insurer. The volatility matrix is the
lower-triangular Cholesky factor

    sigma = [[sigma1,            0          ],
             [sigma2*rho, sigma2*sqrt(1-rho^2)]]

so the market price of risk is gamma = sigma^{-1} (mu - r 1) and the pricing
kernel is Z(t) = exp(-(r + |gamma|^2 / 2) t - gamma . W(t)).

Shifting the drift of the constrained asset by a dual variable lambda = (0, l2)
produces the auxiliary market whose kernel Z_lambda uses
gamma_lambda = gamma + sigma^{-1} lambda. The shift that makes the no-asset-2
constraint non-binding is available in closed form (`optimal_dual_shift`).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "MarketParams",
    "DualShift",
    "ReinsuranceContract",
    "optimal_dual_shift",
    "kernel_moment",
    "log_kernel_mean",
]

#: Relative tolerance used when validating that |rho| is strictly below one.
_RHO_TOL = 1e-9


@dataclass(frozen=True)
class MarketParams:
    """Parameters of the two-risky-asset Black-Scholes market.

    Attributes:
        r: continuously compounded short rate (may be negative)
        mu1, mu2: drifts of assets 1 and 2
        sigma1, sigma2: volatilities of assets 1 and 2 (strictly positive)
        rho: instantaneous correlation between the two assets, |rho| < 1
        s1, s2: initial asset prices (strictly positive)
    """

    r: float
    mu1: float
    mu2: float
    sigma1: float
    sigma2: float
    rho: float
    s1: float = 1.0
    s2: float = 1.0

    def __post_init__(self) -> None:
        if not (self.sigma1 > 0.0 and self.sigma2 > 0.0):
            raise ValueError("asset volatilities must be strictly positive")
        if not abs(self.rho) < 1.0 - _RHO_TOL:
            raise ValueError("rho must satisfy |rho| < 1 (volatility matrix "
                             "must be invertible)")
        if not (self.mu1 > self.r and self.mu2 > self.r):
            raise ValueError("both risky assets must carry a positive "
                             "excess return (mu1 > r and mu2 > r)")
        if not (self.s1 > 0.0 and self.s2 > 0.0):
            raise ValueError("initial asset prices must be strictly positive")

    @cached_property
    def volatility_matrix(self) -> np.ndarray:
        """Lower-triangular volatility matrix (2 x 2)."""
        return np.array(
            [
                [self.sigma1, 0.0],
                [self.sigma2 * self.rho,
                 self.sigma2 * np.sqrt(1.0 - self.rho**2)],
            ]
        )

    @cached_property
    def drift(self) -> np.ndarray:
        """Drift vector (mu1, mu2)."""
        return np.array([self.mu1, self.mu2])

    @cached_property
    def excess_return(self) -> np.ndarray:
        """Excess drift over the short rate, mu - r 1."""
        return self.drift - self.r

    @cached_property
    def market_price_of_risk(self) -> np.ndarray:
        """gamma = sigma^{-1} (mu - r 1)."""
        sig = self.volatility_matrix
        g1 = (self.mu1 - self.r) / self.sigma1
        g2 = (self.mu2 - self.r - sig[1, 0] * g1) / sig[1, 1]
        return np.array([g1, g2])

    def price_of_risk(self, shift: "DualShift") -> np.ndarray:
        """gamma_lambda = gamma + sigma^{-1} lambda for lambda = (0, l2)."""
        sig = self.volatility_matrix
        extra = np.array([0.0, shift.lambda2 / sig[1, 1]])
        return self.market_price_of_risk + extra


@dataclass(frozen=True)
class DualShift:
    """Dual drift shift lambda = (0, lambda2) applied to the constrained asset.

    The support cone of the no-asset-2 constraint only allows shifts of the
    second drift, so a single float fully describes it. ``DualShift(0.0)``
    recovers the basic market.
    """

    lambda2: float = 0.0

    def as_vector(self) -> np.ndarray:
        return np.array([0.0, self.lambda2])


@dataclass(frozen=True)
class ReinsuranceContract:
    """Terms of the guarantee product whose shortfall the reinsurer covers.

    The policyholders' premium ``benchmark_initial`` is (notionally) invested
    in a constant-mix fund holding ``benchmark_fraction`` of wealth in asset 2
    and the rest in the bank account. The reinsurer pays the shortfall of that
    fund below ``guarantee`` at ``maturity``.

    Attributes:
        guarantee: terminal capital guarantee G_T (>= 0)
        maturity: horizon T in years (> 0)
        benchmark_fraction: constant fraction of the fund held in asset 2
        benchmark_initial: initial fund value (> 0)
    """

    guarantee: float
    maturity: float
    benchmark_fraction: float
    benchmark_initial: float

    def __post_init__(self) -> None:
        if self.guarantee < 0.0:
            raise ValueError("guarantee must be non-negative")
        if not self.maturity > 0.0:
            raise ValueError("maturity must be strictly positive")
        if self.benchmark_fraction < 0.0:
            raise ValueError("benchmark_fraction must be non-negative")
        if not self.benchmark_initial > 0.0:
            raise ValueError("benchmark_initial must be strictly positive")

    def benchmark_volatility(self, params: MarketParams) -> float:
        """Effective lognormal volatility of the benchmark fund."""
        return self.benchmark_fraction * params.sigma2

    def benchmark_drift(self, params: MarketParams) -> float:
        """Physical drift rate of the benchmark fund."""
        return params.r + self.benchmark_fraction * (params.mu2 - params.r)


def optimal_dual_shift(params: MarketParams) -> DualShift:
    """Closed-form dual shift that relaxes the no-asset-2 constraint.

    With this shift the auxiliary market's price of risk collapses onto the
    first asset, gamma_lambda = ((mu1 - r)/sigma1, 0), so the unconstrained
    optimum of the auxiliary market automatically holds nothing in asset 2.
    The same shift is optimal for power, logarithmic, and shifted-power
    preferences; no dual search over stochastic processes is needed (or
    implemented) for this constraint set.
    """
    lam2 = (params.sigma2 * params.rho / params.sigma1
            * (params.mu1 - params.r) - params.mu2 + params.r)
    return DualShift(lam2)


def kernel_moment(params: MarketParams, shift: DualShift, k: float,
                  t: float) -> float:
    """E[Z_lambda(t)^k] for the (possibly shifted) pricing kernel.

    Z_lambda(t) is lognormal, so the moment is
    exp(-k r t + k (k - 1) |gamma_lambda|^2 t / 2). ``k = 1`` gives the
    discount factor exp(-r t); ``k = 0`` gives 1 for every t.
    """
    if t < 0.0:
        raise ValueError("t must be non-negative")
    gl = params.price_of_risk(shift)
    norm_sq = float(gl @ gl)
    return float(np.exp(-k * params.r * t + 0.5 * k * (k - 1.0) * norm_sq * t))


def log_kernel_mean(params: MarketParams, shift: DualShift, t: float) -> float:
    """E[ln Z_lambda(t)] = -(r + |gamma_lambda|^2 / 2) t."""
    if t < 0.0:
        raise ValueError("t must be non-negative")
    gl = params.price_of_risk(shift)
    return float(-(params.r + 0.5 * float(gl @ gl)) * t)
