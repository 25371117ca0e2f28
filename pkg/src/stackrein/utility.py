"""Terminal-wealth preferences of the insurer and the reinsurer.

Three families are supported, all of constant or shifted-constant relative
risk aversion:

* ``PowerUtility``: U(v) = v^b / b with exponent b < 1, b != 0;
* ``LogUtility``: U(v) = ln v, the b -> 0 limit of the power family;
* ``HaraUtility``: U(v) = (v + a)^b / b, a shifted power utility whose
  floor ``-a`` the optimal wealth never breaches.

The classes are intentionally thin: ``value`` evaluates the utility on
scalars or arrays, ``inverse_marginal`` is the building block of the
closed-form optimal terminal wealth I(y Z) = (U')^{-1}(y Z), and
``certainty_equivalent`` inverts an expected-utility level back to a sure
wealth. Domain violations evaluate to -inf so that maximizations remain
well defined without raising inside vectorized code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "PowerUtility",
    "LogUtility",
    "HaraUtility",
    "Utility",
]


def _as_float_or_array(x):
    arr = np.asarray(x, dtype=np.float64)
    return arr if arr.ndim else float(arr)


@dataclass(frozen=True)
class PowerUtility:
    """U(v) = v^b / b on v > 0, with b < 1 and b != 0.

    Relative risk aversion is the constant 1 - b, so b = -9 corresponds to
    RRA 10. Larger b means more risk tolerance.
    """

    exponent: float

    def __post_init__(self) -> None:
        if not self.exponent < 1.0 or self.exponent == 0.0:
            raise ValueError("power exponent must satisfy b < 1, b != 0 "
                             "(use LogUtility for the b = 0 limit)")

    @property
    def relative_risk_aversion(self) -> float:
        return 1.0 - self.exponent

    @property
    def floor(self) -> float:
        """Additive wealth shift; 0 for the plain power family."""
        return 0.0

    def value(self, wealth):
        v = np.asarray(wealth, dtype=np.float64)
        b = self.exponent
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(v > 0.0, np.power(np.maximum(v, 1e-300), b) / b,
                           -np.inf)
        if b > 0.0:
            out = np.where(v == 0.0, 0.0, out)
        return _as_float_or_array(out)

    def marginal(self, wealth):
        v = np.asarray(wealth, dtype=np.float64)
        return _as_float_or_array(np.power(v, self.exponent - 1.0))

    def inverse_marginal(self, y):
        z = np.asarray(y, dtype=np.float64)
        return _as_float_or_array(np.power(z, 1.0 / (self.exponent - 1.0)))

    def certainty_equivalent(self, expected_utility: float) -> float:
        return float(np.power(self.exponent * expected_utility,
                              1.0 / self.exponent))


@dataclass(frozen=True)
class LogUtility:
    """U(v) = ln v on v > 0; relative risk aversion 1."""

    @property
    def relative_risk_aversion(self) -> float:
        return 1.0

    @property
    def floor(self) -> float:
        return 0.0

    def value(self, wealth):
        v = np.asarray(wealth, dtype=np.float64)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(v > 0.0, np.log(np.maximum(v, 1e-300)), -np.inf)
        return _as_float_or_array(out)

    def marginal(self, wealth):
        v = np.asarray(wealth, dtype=np.float64)
        return _as_float_or_array(1.0 / v)

    def inverse_marginal(self, y):
        z = np.asarray(y, dtype=np.float64)
        return _as_float_or_array(1.0 / z)

    def certainty_equivalent(self, expected_utility: float) -> float:
        return math.exp(expected_utility)


@dataclass(frozen=True)
class HaraUtility:
    """U(v) = (v + a)^b / b on v > -a, a shifted power utility.

    ``floor_shift`` is the amount a >= 0 by which the power utility is
    shifted left; the implied consumption floor is -a. Relative risk
    aversion (1 - b) v / (v + a) increases in wealth toward 1 - b.
    """

    floor_shift: float
    exponent: float

    def __post_init__(self) -> None:
        if self.floor_shift < 0.0:
            raise ValueError("floor_shift must be non-negative")
        if not self.exponent < 1.0 or self.exponent == 0.0:
            raise ValueError("exponent must satisfy b < 1, b != 0")

    @property
    def relative_risk_aversion(self) -> float:
        """Asymptotic relative risk aversion 1 - b (reached as v grows)."""
        return 1.0 - self.exponent

    @property
    def floor(self) -> float:
        return self.floor_shift

    def value(self, wealth):
        v = np.asarray(wealth, dtype=np.float64) + self.floor_shift
        b = self.exponent
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(v > 0.0, np.power(np.maximum(v, 1e-300), b) / b,
                           -np.inf)
        if b > 0.0:
            out = np.where(v == 0.0, 0.0, out)
        return _as_float_or_array(out)

    def marginal(self, wealth):
        v = np.asarray(wealth, dtype=np.float64) + self.floor_shift
        return _as_float_or_array(np.power(v, self.exponent - 1.0))

    def inverse_marginal(self, y):
        z = np.asarray(y, dtype=np.float64)
        return _as_float_or_array(np.power(z, 1.0 / (self.exponent - 1.0))
                                  - self.floor_shift)

    def certainty_equivalent(self, expected_utility: float) -> float:
        return float(np.power(self.exponent * expected_utility,
                              1.0 / self.exponent)) - self.floor_shift


Utility = Union[PowerUtility, LogUtility, HaraUtility]
