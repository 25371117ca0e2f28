"""INI configuration loading: defaults, overrides, and loud failures."""

import pytest

from stackrein import (
    HaraUtility,
    LogUtility,
    PowerUtility,
    load_config,
)


def _write(tmp_path, text):
    path = tmp_path / "run.ini"
    path.write_text(text)
    return str(path)


def test_defaults_reproduce_base_case():
    run = load_config(None)
    m = run.market
    assert (m.r, m.mu1, m.mu2) == pytest.approx((0.0102, 0.1752, 0.1237),
                                                abs=1e-15)
    assert (m.sigma1, m.sigma2, m.rho) == pytest.approx(
        (0.2366, 0.2198, 0.8012), abs=1e-15)
    contract = run.terms.contract
    assert contract.guarantee == 100.0
    assert contract.maturity == 10.0
    assert contract.benchmark_initial == 100.0
    # "auto" ties the fraction to the insurer's Merton weight in asset 1
    assert contract.benchmark_fraction == pytest.approx(
        (m.mu1 - m.r) / (10.0 * m.sigma1 ** 2), abs=1e-15)
    assert run.terms.max_loading == 0.5
    assert run.terms.max_contracts == 1.5
    assert run.terms.insurer_capital == 100.0
    assert run.terms.reinsurer_capital == 100.0
    assert run.insurer_utility == PowerUtility(-9.0)
    assert run.reinsurer_utility == PowerUtility(-9.0)
    sim = run.simulation
    assert (sim.n_paths, sim.n_steps, sim.seed) == (1_000_000, 1, 20240817)
    assert sim.antithetic is True


def test_partial_override_keeps_other_defaults(tmp_path):
    path = _write(tmp_path, """
[market]
rate = 2%

[contract]
maturity = 20  ; inline comments are allowed
benchmark_fraction = 0.25
""")
    run = load_config(path)
    assert run.market.r == pytest.approx(0.02)
    assert run.market.mu1 == 0.1752
    assert run.terms.contract.maturity == 20.0
    assert run.terms.contract.benchmark_fraction == 0.25
    assert run.simulation.n_paths == 1_000_000


def test_auto_fraction_follows_insurer_preferences(tmp_path):
    path = _write(tmp_path, """
[utilities]
insurer = log
insurer_rra = 1
""")
    run = load_config(path)
    assert isinstance(run.insurer_utility, LogUtility)
    m = run.market
    assert run.terms.contract.benchmark_fraction == pytest.approx(
        (m.mu1 - m.r) / m.sigma1 ** 2, abs=1e-15)


def test_hara_insurer_with_floor(tmp_path):
    path = _write(tmp_path, """
[utilities]
insurer = hara
insurer_rra = 10
insurer_floor = 25
""")
    run = load_config(path)
    assert run.insurer_utility == HaraUtility(25.0, -9.0)


def test_unknown_section_and_key_raise(tmp_path):
    bad_section = _write(tmp_path, "[marketplace]\nrate = 1%\n")
    with pytest.raises(ValueError, match=r"unknown config section"):
        load_config(bad_section)
    bad_key = _write(tmp_path, "[market]\nrait = 1%\n")
    with pytest.raises(ValueError, match=r"unknown config key"):
        load_config(bad_key)


def test_malformed_values_raise(tmp_path):
    with pytest.raises(ValueError, match="not a number"):
        load_config(_write(tmp_path, "[market]\nrate = fast\n"))
    with pytest.raises(ValueError, match="not an integer"):
        load_config(_write(tmp_path, "[simulation]\npaths = 1e6\n"))
    with pytest.raises(ValueError, match="not a boolean"):
        load_config(_write(tmp_path, "[simulation]\nantithetic = maybe\n"))
    with pytest.raises(ValueError, match="cannot read config"):
        load_config(str(tmp_path / "missing.ini"))
    with pytest.raises(ValueError, match="cannot read config"):
        load_config(_write(tmp_path, "rate = 1%  ; no section header\n"))


def test_risk_aversion_one_points_to_log(tmp_path):
    path = _write(tmp_path, "[utilities]\ninsurer_rra = 1\n")
    with pytest.raises(ValueError, match="log instead"):
        load_config(path)
    with pytest.raises(ValueError, match="positive"):
        load_config(_write(tmp_path, "[utilities]\ninsurer_rra = -2\n"))


def test_reinsurer_cannot_be_hara(tmp_path):
    path = _write(tmp_path, "[utilities]\nreinsurer = hara\n")
    with pytest.raises(ValueError, match="power or log"):
        load_config(path)
    with pytest.raises(ValueError, match="must be one of"):
        load_config(_write(tmp_path, "[utilities]\ninsurer = quadratic\n"))


def test_invalid_market_values_propagate(tmp_path):
    path = _write(tmp_path, "[market]\ncorrelation = 120%\n")
    with pytest.raises(ValueError):
        load_config(path)
