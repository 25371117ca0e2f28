"""INI configuration for the command-line interface.

The file mirrors the base-case parameter table: a ``[market]`` section with
the two-asset Black-Scholes parameters, a ``[contract]`` section with the
guarantee terms, capital levels and action bounds, a ``[utilities]``
section choosing each party's preferences, and a ``[simulation]`` section
with Monte Carlo settings. Every key has a built-in default, so an empty
(or absent) file reproduces the base case. Values carrying a trailing
``%`` are divided by 100 at parse time; ``benchmark_fraction`` accepts the
literal ``auto`` to use the insurer's Merton fraction in the first asset.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from typing import Optional

from .equilibrium import ContractTerms
from .market import MarketParams, ReinsuranceContract
from .simulation import SimulationConfig
from .utility import HaraUtility, LogUtility, PowerUtility, Utility

__all__ = ["RunConfig", "load_config", "DEFAULT_CONFIG_TEXT"]

DEFAULT_CONFIG_TEXT = """\
[market]
rate = 1.02%
drift1 = 17.52%
drift2 = 12.37%
volatility1 = 23.66%
volatility2 = 21.98%
correlation = 80.12%

[contract]
guarantee = 100
maturity = 10
benchmark_fraction = auto
benchmark_initial = 100
max_loading = 50%
max_contracts = 1.5
insurer_capital = 100
reinsurer_capital = 100

[utilities]
insurer = power
insurer_rra = 10
insurer_floor = 0
reinsurer = power
reinsurer_rra = 10

[simulation]
paths = 1000000
steps = 1
seed = 20240817
antithetic = true
"""

_UTILITY_KINDS = ("power", "log", "hara")


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs: market, terms, preferences, simulation."""

    market: MarketParams
    terms: ContractTerms
    insurer_utility: Utility
    reinsurer_utility: Utility
    simulation: SimulationConfig


def _parse_number(section: str, key: str, raw: str) -> float:
    text = raw.strip()
    scale = 1.0
    if text.endswith("%"):
        text = text[:-1].strip()
        scale = 0.01
    try:
        return float(text) * scale
    except ValueError:
        raise ValueError(f"[{section}] {key} = {raw!r} is not a number") \
            from None


def _parse_int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw.strip())
    except ValueError:
        raise ValueError(f"[{section}] {key} = {raw!r} is not an integer") \
            from None


def _parse_bool(section: str, key: str, raw: str) -> bool:
    states = configparser.ConfigParser.BOOLEAN_STATES
    state = states.get(raw.strip().lower())
    if state is None:
        raise ValueError(f"[{section}] {key} = {raw!r} is not a boolean")
    return state


def _build_utility(section: dict[str, str], party: str) -> Utility:
    kind = section[f"{party}"].strip().lower()
    if kind not in _UTILITY_KINDS:
        raise ValueError(f"[utilities] {party} must be one of "
                         f"{_UTILITY_KINDS}, got {kind!r}")
    rra = _parse_number("utilities", f"{party}_rra",
                        section[f"{party}_rra"])
    if kind == "log":
        return LogUtility()
    if rra <= 0.0:
        raise ValueError(f"[utilities] {party}_rra must be positive")
    if rra == 1.0:
        raise ValueError(f"[utilities] {party}_rra = 1 is the logarithmic "
                         f"case; set {party} = log instead")
    exponent = 1.0 - rra
    if kind == "power":
        return PowerUtility(exponent)
    floor = _parse_number("utilities", f"{party}_floor",
                          section[f"{party}_floor"])
    return HaraUtility(floor, exponent)


def load_config(path: Optional[str] = None) -> RunConfig:
    """Build a RunConfig from an INI file layered over the defaults.

    ``path = None`` yields the built-in base case. Unknown sections or keys
    raise, so typos fail loudly instead of silently keeping a default.
    """
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=(";", "#"))
    parser.read_string(DEFAULT_CONFIG_TEXT)
    defaults = {name: dict(parser.items(name))
                for name in parser.sections()}
    if path is not None:
        override = configparser.ConfigParser(
            interpolation=None, inline_comment_prefixes=(";", "#"))
        try:
            with open(path, "r", encoding="utf-8") as handle:
                override.read_file(handle)
        except (OSError, configparser.Error) as exc:
            raise ValueError(f"cannot read config {path}: {exc}") from None
        for name in override.sections():
            if name not in defaults:
                raise ValueError(f"unknown config section [{name}]")
            for key, value in override.items(name):
                if key not in defaults[name]:
                    raise ValueError(f"unknown config key [{name}] {key}")
                defaults[name][key] = value

    m = defaults["market"]
    market = MarketParams(
        r=_parse_number("market", "rate", m["rate"]),
        mu1=_parse_number("market", "drift1", m["drift1"]),
        mu2=_parse_number("market", "drift2", m["drift2"]),
        sigma1=_parse_number("market", "volatility1", m["volatility1"]),
        sigma2=_parse_number("market", "volatility2", m["volatility2"]),
        rho=_parse_number("market", "correlation", m["correlation"]),
    )

    u = defaults["utilities"]
    insurer_utility = _build_utility(u, "insurer")
    if u["reinsurer"].strip().lower() == "hara":
        raise ValueError("[utilities] reinsurer must be power or log")
    reinsurer_utility = _build_utility(u, "reinsurer")

    c = defaults["contract"]
    fraction_raw = c["benchmark_fraction"].strip().lower()
    if fraction_raw == "auto":
        exponent = (0.0 if isinstance(insurer_utility, LogUtility)
                    else insurer_utility.exponent)
        fraction = ((market.mu1 - market.r)
                    / ((1.0 - exponent) * market.sigma1 ** 2))
    else:
        fraction = _parse_number("contract", "benchmark_fraction",
                                 c["benchmark_fraction"])
    contract = ReinsuranceContract(
        guarantee=_parse_number("contract", "guarantee", c["guarantee"]),
        maturity=_parse_number("contract", "maturity", c["maturity"]),
        benchmark_fraction=fraction,
        benchmark_initial=_parse_number("contract", "benchmark_initial",
                                        c["benchmark_initial"]),
    )
    terms = ContractTerms(
        insurer_capital=_parse_number("contract", "insurer_capital",
                                      c["insurer_capital"]),
        reinsurer_capital=_parse_number("contract", "reinsurer_capital",
                                        c["reinsurer_capital"]),
        max_loading=_parse_number("contract", "max_loading",
                                  c["max_loading"]),
        max_contracts=_parse_number("contract", "max_contracts",
                                    c["max_contracts"]),
        contract=contract,
    )

    s = defaults["simulation"]
    simulation = SimulationConfig(
        n_paths=_parse_int("simulation", "paths", s["paths"]),
        n_steps=_parse_int("simulation", "steps", s["steps"]),
        seed=_parse_int("simulation", "seed", s["seed"]),
        antithetic=_parse_bool("simulation", "antithetic", s["antithetic"]),
    )
    return RunConfig(market=market, terms=terms,
                     insurer_utility=insurer_utility,
                     reinsurer_utility=reinsurer_utility,
                     simulation=simulation)
