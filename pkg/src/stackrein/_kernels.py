"""Hot numeric kernels with two interchangeable backends.

Everything in this module is low-level array code on plain floats: the
counter-based normal generator that underlies every path ensemble, the
log-Euler wealth-evolution loops for the built-in strategies, and the
discrete put-replication loop. Each kernel exists twice:

* a numba ``@njit`` implementation (default when numba imports), and
* a vectorized pure-numpy implementation.

Setting the environment variable ``STACKREIN_FORCE_NUMPY=1`` before import
selects the numpy backend. The integer streams of the random generator are
bit-identical across backends; transcendental functions may differ in the
last ulps, so cross-backend comparisons should be tolerance-based while
within-backend runs are bit-reproducible.

Random number contract
----------------------
Every uniform is a pure function of (seed, path index, draw index): the seed
and path index are hashed into a per-path key and the draw index into a
64-bit counter, with three chained splitmix64 finalizer rounds. Consequences:

* regenerating with the same seed reproduces identical arrays, in any
  evaluation order and in any chunking of the path range;
* ensembles of different sizes share their common path prefix;
* normal pairs come from Box-Muller on consecutive counters, two per
  (path, time step).
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy.special import ndtr as _ndtr

__all__ = [
    "BACKEND",
    "NUMBA_AVAILABLE",
    "normal_draws",
    "uniform_draws",
    "evolve_constant_mix",
    "evolve_insurer_optimal",
    "evolve_reinsurer_optimal",
    "replicate_put_terminal",
]

_PHI1 = np.uint64(0x9E3779B97F4A7C15)
_PHI2 = np.uint64(0xC2B2AE3D27D4EB4F)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U53 = float(2.0 ** -53)
_TWO_PI = 2.0 * math.pi
_SQRT2 = math.sqrt(2.0)
#: below this value of vol * sqrt(time-to-go) the put is priced as its
#: deterministic forward payoff
_DEGENERATE_WIDTH = 1e-12


def _numpy_forced() -> bool:
    return os.environ.get("STACKREIN_FORCE_NUMPY", "").strip().lower() in (
        "1", "true", "yes", "on",
    )


try:
    import numba
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

BACKEND = "numpy" if (_numpy_forced() or not NUMBA_AVAILABLE) else "numba"


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _mix_np(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    z = z ^ (z >> np.uint64(30))
    z = z * _M1
    z = z ^ (z >> np.uint64(27))
    z = z * _M2
    return z ^ (z >> np.uint64(31))


def uniform_draws_numpy(seed: int, path_start: int, n_paths: int,
                        n_draws: int) -> np.ndarray:
    """(n_paths, n_draws) uniforms in (0, 1], counter-indexed per path."""
    with np.errstate(over="ignore"):
        paths = (np.uint64(path_start)
                 + np.arange(n_paths, dtype=np.uint64) + np.uint64(1))
        per_path = _mix_np(np.uint64(seed) ^ (paths * _PHI1))
        draws = np.arange(n_draws, dtype=np.uint64) + np.uint64(1)
        bits = _mix_np(per_path[:, None] ^ (draws[None, :] * _PHI2))
    return ((bits >> np.uint64(11)).astype(np.float64) + 1.0) * _U53


def normal_draws_numpy(seed: int, path_start: int, n_paths: int,
                       n_steps: int) -> np.ndarray:
    """(n_paths, n_steps, 2) standard normals via Box-Muller."""
    u = uniform_draws_numpy(seed, path_start, n_paths, 2 * n_steps)
    radius = np.sqrt(-2.0 * np.log(u[:, 0::2]))
    angle = _TWO_PI * u[:, 1::2]
    out = np.empty((n_paths, n_steps, 2))
    out[:, :, 0] = radius * np.cos(angle)
    out[:, :, 1] = radius * np.sin(angle)
    return out


def _put_terms_np(vb: np.ndarray, guarantee: float, r: float, s: float,
                  tau: float, q: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized put price on the benchmark and Phi(d_plus) - 1.

    Prices a European put struck at ``guarantee`` on a lognormal benchmark
    with volatility ``s`` and continuous yield ``q`` over time-to-go ``tau``.
    Returns ``(price, cdf_dplus_minus_one)``; the latter drives the hedge
    position in asset 2 and is 0 for a worthless put, -1 for a sure payout.
    """
    vb = np.asarray(vb, dtype=np.float64)
    width = s * np.sqrt(tau) if tau > 0.0 else 0.0
    disc_g = math.exp(-r * tau) * guarantee
    fwd = vb * math.exp(-q * tau)
    if guarantee <= 0.0:
        return np.zeros_like(vb), np.zeros_like(vb)
    if width <= _DEGENERATE_WIDTH:
        price = np.maximum(disc_g - fwd, 0.0)
        return price, np.where(price > 0.0, -1.0, 0.0)
    d1 = (np.log(vb / guarantee) + (r - q - 0.5 * s * s) * tau) / width
    d2 = d1 + width
    price = disc_g * _ndtr(-d1) - fwd * _ndtr(-d2)
    return price, _ndtr(d2) - 1.0


def evolve_constant_mix_numpy(dw1, dw2, dt, v0, r, ex1, ex2,
                              s11, s21, s22, pi1, pi2):
    """Log-Euler wealth paths for fixed proportions (pi1, pi2).

    ``dw1``/``dw2`` are (n_paths, n_steps) Brownian increments. Returns
    (n_paths, n_steps + 1) wealth paths. Exact in distribution because the
    proportions are constant.
    """
    n, m = dw1.shape
    vol1 = s11 * pi1 + s21 * pi2
    vol2 = s22 * pi2
    drift = (r + pi1 * ex1 + pi2 * ex2
             - 0.5 * (vol1 * vol1 + vol2 * vol2)) * dt
    log_incr = drift + vol1 * dw1 + vol2 * dw2
    wealth = np.empty((n, m + 1))
    wealth[:, 0] = v0
    np.cumsum(log_incr, axis=1, out=log_incr)
    wealth[:, 1:] = v0 * np.exp(log_incr)
    return wealth


def evolve_insurer_optimal_numpy(dw1, dw2, vb, times, v0, r, ex1, sigma1,
                                 merton1, xi, floor_a, maturity, guarantee,
                                 s_bench, q_yield):
    """Wealth paths under the insurer's optimal feedback rule.

    The rule holds nothing in asset 2 and places
    ``merton1 * (V + floor_a e^{-r tau} + xi * P_aux(t)) / V`` in asset 1,
    where P_aux is the auxiliary-market put price evaluated at the current
    benchmark level. Returns (wealth, absorbed) where ``absorbed`` flags
    paths whose wealth stopped being finite and positive.
    """
    n, m = dw1.shape
    wealth = np.empty((n, m + 1))
    wealth[:, 0] = v0
    absorbed = np.zeros(n, dtype=np.bool_)
    v = np.full(n, float(v0))
    for k in range(m):
        t = times[k]
        dt = times[k + 1] - times[k]
        tau = maturity - t
        paux, _ = _put_terms_np(vb[:, k], guarantee, r, s_bench, tau, q_yield)
        live = ~absorbed
        pi1 = np.zeros(n)
        pi1[live] = merton1 * (v[live] + floor_a * math.exp(-r * tau)
                               + xi * paux[live]) / v[live]
        vol = pi1 * sigma1
        growth = np.exp((r + pi1 * ex1 - 0.5 * vol * vol) * dt
                        + vol * dw1[:, k])
        v = np.where(live, v * growth, 0.0)
        bad = live & ~(np.isfinite(v) & (v > 0.0))
        if bad.any():
            absorbed |= bad
            v[bad] = 0.0
        wealth[:, k + 1] = v
    return wealth, absorbed


def evolve_reinsurer_optimal_numpy(dw1, dw2, vb, times, v0, r, ex1, ex2,
                                   s11, s21, s22, merton1, merton2, xi,
                                   pi_cm, maturity, guarantee, s_bench):
    """Wealth paths under the reinsurer's optimal feedback rule.

    The rule invests the cushion ``V - xi * P(t)`` in the Merton proportions
    and overlays the short-put replication position in asset 2,
    ``pi_cm * V_B (Phi(d_plus) - 1) xi / V``.
    """
    n, m = dw1.shape
    wealth = np.empty((n, m + 1))
    wealth[:, 0] = v0
    absorbed = np.zeros(n, dtype=np.bool_)
    v = np.full(n, float(v0))
    for k in range(m):
        t = times[k]
        dt = times[k + 1] - times[k]
        tau = maturity - t
        p, dm1 = _put_terms_np(vb[:, k], guarantee, r, s_bench, tau)
        live = ~absorbed
        scale = np.zeros(n)
        scale[live] = (v[live] - xi * p[live]) / v[live]
        pi1 = merton1 * scale
        pi2 = np.zeros(n)
        pi2[live] = (merton2 * scale[live]
                     + pi_cm * vb[live, k] * dm1[live] * xi / v[live])
        vol1 = s11 * pi1 + s21 * pi2
        vol2 = s22 * pi2
        growth = np.exp((r + pi1 * ex1 + pi2 * ex2
                         - 0.5 * (vol1 * vol1 + vol2 * vol2)) * dt
                        + vol1 * dw1[:, k] + vol2 * dw2[:, k])
        v = np.where(live, v * growth, 0.0)
        bad = live & ~(np.isfinite(v) & (v > 0.0))
        if bad.any():
            absorbed |= bad
            v[bad] = 0.0
        wealth[:, k + 1] = v
    return wealth, absorbed


def replicate_put_terminal_numpy(s2, vb, times, r, guarantee, s_bench, pi_cm):
    """Terminal value of the discretely rebalanced put-replication portfolio.

    Starts from the exact initial put price, holds the closed-form number of
    asset-2 shares over each interval with the remainder in the bank account.
    ``s2`` and ``vb`` are (n_paths, n_steps + 1) price/benchmark paths on the
    rebalancing grid. Returns (n_paths,) terminal portfolio values.
    """
    n, mp1 = s2.shape
    m = mp1 - 1
    maturity = times[m]
    p0, _ = _put_terms_np(vb[:, 0], guarantee, r, s_bench, maturity)
    value = p0.copy()
    for k in range(m):
        dt = times[k + 1] - times[k]
        tau = maturity - times[k]
        _, dm1 = _put_terms_np(vb[:, k], guarantee, r, s_bench, tau)
        shares = pi_cm * vb[:, k] * dm1 / s2[:, k]
        bank = value - shares * s2[:, k]
        value = bank * math.exp(r * dt) + shares * s2[:, k + 1]
    return value


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _mix_nb(z):
        z = z ^ (z >> np.uint64(30))
        z = z * _M1
        z = z ^ (z >> np.uint64(27))
        z = z * _M2
        return z ^ (z >> np.uint64(31))

    @njit(cache=True)
    def _uniform_draws_nb(seed, path_start, n_paths, n_draws):
        out = np.empty((n_paths, n_draws))
        for i in range(n_paths):
            p = np.uint64(path_start + i) + np.uint64(1)
            per_path = _mix_nb(np.uint64(seed) ^ (p * _PHI1))
            for d in range(n_draws):
                c = np.uint64(d) + np.uint64(1)
                bits = _mix_nb(per_path ^ (c * _PHI2))
                out[i, d] = (float(bits >> np.uint64(11)) + 1.0) * _U53
        return out

    @njit(cache=True)
    def _normal_draws_nb(seed, path_start, n_paths, n_steps):
        out = np.empty((n_paths, n_steps, 2))
        for i in range(n_paths):
            p = np.uint64(path_start + i) + np.uint64(1)
            per_path = _mix_nb(np.uint64(seed) ^ (p * _PHI1))
            for k in range(n_steps):
                c0 = np.uint64(2 * k) + np.uint64(1)
                c1 = np.uint64(2 * k + 1) + np.uint64(1)
                b0 = _mix_nb(per_path ^ (c0 * _PHI2))
                b1 = _mix_nb(per_path ^ (c1 * _PHI2))
                u0 = (float(b0 >> np.uint64(11)) + 1.0) * _U53
                u1 = (float(b1 >> np.uint64(11)) + 1.0) * _U53
                radius = math.sqrt(-2.0 * math.log(u0))
                angle = _TWO_PI * u1
                out[i, k, 0] = radius * math.cos(angle)
                out[i, k, 1] = radius * math.sin(angle)
        return out

    @njit(cache=True)
    def _norm_cdf_nb(x):
        return 0.5 * math.erfc(-x / _SQRT2)

    @njit(cache=True)
    def _put_terms_nb(vb, guarantee, r, s, tau, q):
        """Scalar put price and Phi(d_plus) - 1; mirrors _put_terms_np."""
        if guarantee <= 0.0:
            return 0.0, 0.0
        width = s * math.sqrt(tau) if tau > 0.0 else 0.0
        disc_g = math.exp(-r * tau) * guarantee
        fwd = vb * math.exp(-q * tau)
        if width <= _DEGENERATE_WIDTH:
            price = disc_g - fwd
            if price > 0.0:
                return price, -1.0
            return 0.0, 0.0
        d1 = (math.log(vb / guarantee) + (r - q - 0.5 * s * s) * tau) / width
        d2 = d1 + width
        price = disc_g * _norm_cdf_nb(-d1) - fwd * _norm_cdf_nb(-d2)
        return price, _norm_cdf_nb(d2) - 1.0

    @njit(cache=True)
    def _evolve_constant_mix_nb(dw1, dw2, dt, v0, r, ex1, ex2,
                                s11, s21, s22, pi1, pi2):
        n, m = dw1.shape
        vol1 = s11 * pi1 + s21 * pi2
        vol2 = s22 * pi2
        drift = (r + pi1 * ex1 + pi2 * ex2
                 - 0.5 * (vol1 * vol1 + vol2 * vol2)) * dt
        wealth = np.empty((n, m + 1))
        for i in range(n):
            acc = 0.0
            wealth[i, 0] = v0
            for k in range(m):
                acc += drift + vol1 * dw1[i, k] + vol2 * dw2[i, k]
                wealth[i, k + 1] = v0 * math.exp(acc)
        return wealth

    @njit(cache=True)
    def _evolve_insurer_nb(dw1, dw2, vb, times, v0, r, ex1, sigma1,
                           merton1, xi, floor_a, maturity, guarantee,
                           s_bench, q_yield):
        n, m = dw1.shape
        wealth = np.empty((n, m + 1))
        absorbed = np.zeros(n, dtype=np.bool_)
        for i in range(n):
            v = v0
            wealth[i, 0] = v
            dead = False
            for k in range(m):
                if dead:
                    wealth[i, k + 1] = 0.0
                    continue
                t = times[k]
                dt = times[k + 1] - times[k]
                tau = maturity - t
                paux, _ = _put_terms_nb(vb[i, k], guarantee, r, s_bench,
                                        tau, q_yield)
                pi1 = merton1 * (v + floor_a * math.exp(-r * tau)
                                 + xi * paux) / v
                vol = pi1 * sigma1
                v = v * math.exp((r + pi1 * ex1 - 0.5 * vol * vol) * dt
                                 + vol * dw1[i, k])
                if not (math.isfinite(v) and v > 0.0):
                    dead = True
                    v = 0.0
                wealth[i, k + 1] = v
            absorbed[i] = dead
        return wealth, absorbed

    @njit(cache=True)
    def _evolve_reinsurer_nb(dw1, dw2, vb, times, v0, r, ex1, ex2,
                             s11, s21, s22, merton1, merton2, xi,
                             pi_cm, maturity, guarantee, s_bench):
        n, m = dw1.shape
        wealth = np.empty((n, m + 1))
        absorbed = np.zeros(n, dtype=np.bool_)
        for i in range(n):
            v = v0
            wealth[i, 0] = v
            dead = False
            for k in range(m):
                if dead:
                    wealth[i, k + 1] = 0.0
                    continue
                t = times[k]
                dt = times[k + 1] - times[k]
                tau = maturity - t
                p, dm1 = _put_terms_nb(vb[i, k], guarantee, r, s_bench,
                                       tau, 0.0)
                scale = (v - xi * p) / v
                pi1 = merton1 * scale
                pi2 = merton2 * scale + pi_cm * vb[i, k] * dm1 * xi / v
                vol1 = s11 * pi1 + s21 * pi2
                vol2 = s22 * pi2
                v = v * math.exp((r + pi1 * ex1 + pi2 * ex2
                                  - 0.5 * (vol1 * vol1 + vol2 * vol2)) * dt
                                 + vol1 * dw1[i, k] + vol2 * dw2[i, k])
                if not (math.isfinite(v) and v > 0.0):
                    dead = True
                    v = 0.0
                wealth[i, k + 1] = v
            absorbed[i] = dead
        return wealth, absorbed

    @njit(cache=True)
    def _replicate_put_nb(s2, vb, times, r, guarantee, s_bench, pi_cm):
        n, mp1 = s2.shape
        m = mp1 - 1
        maturity = times[m]
        out = np.empty(n)
        for i in range(n):
            value, _ = _put_terms_nb(vb[i, 0], guarantee, r, s_bench,
                                     maturity, 0.0)
            for k in range(m):
                dt = times[k + 1] - times[k]
                tau = maturity - times[k]
                _, dm1 = _put_terms_nb(vb[i, k], guarantee, r, s_bench,
                                       tau, 0.0)
                shares = pi_cm * vb[i, k] * dm1 / s2[i, k]
                bank = value - shares * s2[i, k]
                value = bank * math.exp(r * dt) + shares * s2[i, k + 1]
            out[i] = value
        return out

    def uniform_draws_numba(seed, path_start, n_paths, n_draws):
        return _uniform_draws_nb(np.uint64(seed), int(path_start),
                                 int(n_paths), int(n_draws))

    def normal_draws_numba(seed, path_start, n_paths, n_steps):
        return _normal_draws_nb(np.uint64(seed), int(path_start),
                                int(n_paths), int(n_steps))

    def evolve_constant_mix_numba(dw1, dw2, dt, v0, r, ex1, ex2,
                                  s11, s21, s22, pi1, pi2):
        return _evolve_constant_mix_nb(dw1, dw2, dt, v0, r, ex1, ex2,
                                       s11, s21, s22, pi1, pi2)

    def evolve_insurer_optimal_numba(dw1, dw2, vb, times, v0, r, ex1, sigma1,
                                     merton1, xi, floor_a, maturity,
                                     guarantee, s_bench, q_yield):
        return _evolve_insurer_nb(dw1, dw2, vb, times, v0, r, ex1, sigma1,
                                  merton1, xi, floor_a, maturity, guarantee,
                                  s_bench, q_yield)

    def evolve_reinsurer_optimal_numba(dw1, dw2, vb, times, v0, r, ex1, ex2,
                                       s11, s21, s22, merton1, merton2, xi,
                                       pi_cm, maturity, guarantee, s_bench):
        return _evolve_reinsurer_nb(dw1, dw2, vb, times, v0, r, ex1, ex2,
                                    s11, s21, s22, merton1, merton2, xi,
                                    pi_cm, maturity, guarantee, s_bench)

    def replicate_put_terminal_numba(s2, vb, times, r, guarantee, s_bench,
                                     pi_cm):
        return _replicate_put_nb(s2, vb, times, r, guarantee, s_bench, pi_cm)


# ---------------------------------------------------------------------------
# public dispatch
# ---------------------------------------------------------------------------

if BACKEND == "numba":
    uniform_draws = uniform_draws_numba
    normal_draws = normal_draws_numba
    evolve_constant_mix = evolve_constant_mix_numba
    evolve_insurer_optimal = evolve_insurer_optimal_numba
    evolve_reinsurer_optimal = evolve_reinsurer_optimal_numba
    replicate_put_terminal = replicate_put_terminal_numba
else:
    uniform_draws = uniform_draws_numpy
    normal_draws = normal_draws_numpy
    evolve_constant_mix = evolve_constant_mix_numpy
    evolve_insurer_optimal = evolve_insurer_optimal_numpy
    evolve_reinsurer_optimal = evolve_reinsurer_optimal_numpy
    replicate_put_terminal = replicate_put_terminal_numpy
