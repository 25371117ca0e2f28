"""Welfare comparisons, discount selection, sweeps, and the master gate."""

import math
import warnings
from dataclasses import replace

import numpy as np
import pytest

from stackrein import (
    ActionCombination,
    ConstantMixStrategy,
    HaraUtility,
    LossProbIncrease,
    MaxLossProb,
    PowerUtility,
    SimulationConfig,
    WeucCap,
    WeucResult,
    discount_select,
    expected_utility_closed_form,
    reinsurer_incentive,
    sensitivity_sweep,
    solve_equilibrium,
    verify_model,
    weuc,
)

ALPHA_REF = 0.8673


@pytest.fixture(scope="module")
def eq_actions(base_equilibrium):
    return ActionCombination(base_equilibrium.theta_star,
                             base_equilibrium.xi_star)


def test_closed_form_matches_equilibrium_values(eq_actions, base_equilibrium,
                                                insurer_utility,
                                                reinsurer_utility, base_terms,
                                                base_market):
    eu_i = expected_utility_closed_form(eq_actions, "insurer",
                                        insurer_utility, base_terms,
                                        base_market)
    eu_r = expected_utility_closed_form(eq_actions, "reinsurer",
                                        reinsurer_utility, base_terms,
                                        base_market)
    assert eu_i == pytest.approx(base_equilibrium.value_insurer, rel=1e-12)
    assert eu_r == pytest.approx(base_equilibrium.value_reinsurer, rel=1e-12)


def test_reinsurer_weuc_equals_premium_share(eq_actions, base_equilibrium,
                                             reinsurer_utility, base_terms,
                                             base_market):
    # granting the discount costs the reinsurer exactly the forgone premium,
    # so the compensation is xi theta* P0 (1 - alpha) per unit of capital
    eq = base_equilibrium
    discounted = ActionCombination(0.95 * eq.theta_star, eq.xi_star)
    got = weuc(eq_actions, discounted, "reinsurer", reinsurer_utility,
               base_terms, base_market)
    predicted = eq.xi_star * eq.theta_star * eq.p0 * 0.05 / 100.0
    assert got.value == pytest.approx(predicted, rel=1e-9)
    assert got.basis_points == pytest.approx(6.0288605, abs=1e-5)
    assert got.party == "reinsurer"


def test_weuc_is_zero_sum_across_parties(eq_actions, base_equilibrium,
                                         insurer_utility, reinsurer_utility,
                                         base_terms, base_market):
    eq = base_equilibrium
    discounted = ActionCombination(0.95 * eq.theta_star, eq.xi_star)
    w_r = weuc(eq_actions, discounted, "reinsurer", reinsurer_utility,
               base_terms, base_market)
    w_i = weuc(eq_actions, discounted, "insurer", insurer_utility,
               base_terms, base_market)
    assert w_i.value + w_r.value == pytest.approx(0.0, abs=1e-12)
    assert w_i.value < 0.0 < w_r.value


def test_weuc_of_identical_actions_is_zero(eq_actions, insurer_utility,
                                           base_terms, base_market):
    same = weuc(eq_actions, eq_actions, "insurer", insurer_utility,
                base_terms, base_market)
    assert same.value == pytest.approx(0.0, abs=1e-14)


def test_insurer_gains_16bp_over_no_reinsurance(base_equilibrium,
                                                insurer_utility, base_terms,
                                                base_market):
    eq = base_equilibrium
    discounted = ActionCombination(ALPHA_REF * eq.theta_star, eq.xi_star)
    merton = ActionCombination(0.0, 0.0)
    got = weuc(discounted, merton, "insurer", insurer_utility, base_terms,
               base_market)
    assert got.basis_points == pytest.approx(16.0006, abs=1e-3)
    # the certainty-equivalent gap does not depend on the curvature
    for b in (-4.0, -14.0):
        other = weuc(discounted, merton, "insurer", PowerUtility(b),
                     base_terms, base_market)
        assert other.basis_points == pytest.approx(got.basis_points,
                                                   rel=1e-9)


@pytest.mark.parametrize(
    "rra,vs_merton_bp,vs_mix_bp",
    [(5.0, 60.39882482, 7274.998261), (15.0, 10.38897215, 193.8026376)])
def test_weuc_corners_long_horizon(rra, vs_merton_bp, vs_mix_bp,
                                   reinsurer_utility, base_market,
                                   base_terms):
    # twenty-year contract, benchmark fraction tied to the risk aversion;
    # the two corner rows also back the acceptance comparisons
    from stackrein import ContractTerms, ReinsuranceContract

    utility = PowerUtility(1.0 - rra)
    fraction = (base_market.mu1 - base_market.r) / (rra
                                                    * base_market.sigma1 ** 2)
    contract = ReinsuranceContract(guarantee=100.0, maturity=20.0,
                                   benchmark_fraction=fraction,
                                   benchmark_initial=100.0)
    terms = ContractTerms(insurer_capital=100.0, reinsurer_capital=100.0,
                          max_loading=0.5, max_contracts=1.5,
                          contract=contract)
    eq = solve_equilibrium(utility, reinsurer_utility, terms, base_market)
    discounted = ActionCombination(ALPHA_REF * eq.theta_star, eq.xi_star)
    vs_merton = weuc(discounted, ActionCombination(0.0, 0.0), "insurer",
                     utility, terms, base_market)
    assert vs_merton.basis_points == pytest.approx(vs_merton_bp, rel=1e-6)
    mix = ActionCombination(0.0, 0.0, ConstantMixStrategy(0.15, 0.0))
    vs_mix = weuc(discounted, mix, "insurer", utility, terms, base_market)
    assert vs_mix.basis_points == pytest.approx(vs_mix_bp, rel=1e-6)
    assert vs_mix.value > vs_merton.value > 0.0


def test_constant_mix_closed_form(insurer_utility, base_terms, base_market):
    mix = ActionCombination(0.0, 0.0, ConstantMixStrategy(0.15, 0.0))
    got = expected_utility_closed_form(mix, "insurer", insurer_utility,
                                       base_terms, base_market)
    p = base_market
    b = insurer_utility.exponent
    growth = (p.r + 0.15 * (p.mu1 - p.r)
              - 0.5 * (1.0 - b) * (0.15 * p.sigma1) ** 2)
    hand = (100.0 ** b / b) * math.exp(b * growth * 10.0)
    assert got == pytest.approx(hand, rel=1e-12)


def test_discount_selection_under_three_criteria(base_equilibrium,
                                                 reinsurer_utility,
                                                 base_terms, base_market):
    a_cap = discount_select(WeucCap(25e-4), base_equilibrium,
                            reinsurer_utility, base_terms, base_market)
    assert a_cap == pytest.approx(0.7926640, abs=1e-6)
    a_inc = discount_select(LossProbIncrease(0.0001), base_equilibrium,
                            reinsurer_utility, base_terms, base_market)
    assert a_inc == pytest.approx(0.8572390, abs=1e-6)
    a_max = discount_select(MaxLossProb(0.005), base_equilibrium,
                            reinsurer_utility, base_terms, base_market)
    assert a_max == pytest.approx(0.1815440, abs=1e-6)
    # tighter caps admit smaller discounts (alpha closer to one)
    assert discount_select(WeucCap(10e-4), base_equilibrium,
                           reinsurer_utility, base_terms,
                           base_market) > a_cap


@pytest.mark.parametrize("criterion", [WeucCap(1.0), MaxLossProb(0.9),
                                       MaxLossProb(0.001),
                                       LossProbIncrease(0.9)])
def test_unreachable_criteria_raise(criterion, base_equilibrium,
                                    reinsurer_utility, base_terms,
                                    base_market):
    with pytest.raises(ValueError):
        discount_select(criterion, base_equilibrium, reinsurer_utility,
                        base_terms, base_market)


def test_criterion_validation():
    with pytest.raises(ValueError):
        WeucCap(-0.1)
    with pytest.raises(ValueError):
        LossProbIncrease(-0.01)
    with pytest.raises(ValueError):
        MaxLossProb(0.0)
    with pytest.raises(ValueError):
        MaxLossProb(1.0)


def test_reinsurer_incentive_grows_with_discount(base_equilibrium,
                                                 reinsurer_utility,
                                                 base_terms, base_market):
    at_zero = reinsurer_incentive(0.0, base_equilibrium, reinsurer_utility,
                                  base_terms, base_market)
    assert at_zero.gap == pytest.approx(0.0,
                                        abs=1e-12 * abs(at_zero.selling))
    gaps = [reinsurer_incentive(a, base_equilibrium, reinsurer_utility,
                                base_terms, base_market).gap
            for a in np.linspace(0.0, 1.0, 26)]
    assert all(b > a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] > 0.0


def test_sweep_directions(insurer_utility, reinsurer_utility, base_terms,
                          base_market):
    cases = (("r", [-0.02, 0.0, 0.0102, 0.02], 1),
             ("T", [1.0, 5.0, 10.0, 20.0], 1),
             ("G_T", [60.0, 80.0, 100.0, 110.0], -1))
    for parameter, grid, direction in cases:
        points = sensitivity_sweep(parameter, grid, insurer_utility,
                                   reinsurer_utility, base_terms,
                                   base_market)
        thetas = [p.theta_star for p in points]
        assert all(direction * (b - a) > 0
                   for a, b in zip(thetas, thetas[1:])), (parameter, thetas)
        assert all(p.xi_star == base_terms.max_contracts for p in points)
        assert [p.value for p in points] == grid
        assert all(p.parameter == parameter for p in points)


def test_sweep_invariance_in_risk_aversion(insurer_utility,
                                           reinsurer_utility, base_terms,
                                           base_market):
    for parameter in ("RRA_I", "RRA_R"):
        points = sensitivity_sweep(parameter, [2.0, 5.0, 10.0, 15.0],
                                   insurer_utility, reinsurer_utility,
                                   base_terms, base_market)
        thetas = [p.theta_star for p in points]
        for theta in thetas[1:]:
            assert theta == pytest.approx(thetas[0], abs=1e-12)
        assert thetas[0] == pytest.approx(0.20861309, abs=1e-8)
    # logarithmic preferences are the risk-aversion-one point of the grid
    log_point = sensitivity_sweep("RRA_I", [1.0], insurer_utility,
                                  reinsurer_utility, base_terms,
                                  base_market)[0]
    assert log_point.theta_star == pytest.approx(0.20861309, abs=1e-8)


def test_sweep_recompute_benchmark_fraction(insurer_utility,
                                            reinsurer_utility, base_terms,
                                            base_market):
    fixed = sensitivity_sweep("RRA_I", [5.0], insurer_utility,
                              reinsurer_utility, base_terms, base_market)[0]
    retied = sensitivity_sweep("RRA_I", [5.0], insurer_utility,
                               reinsurer_utility, base_terms, base_market,
                               recompute_benchmark_fraction=True)[0]
    assert fixed.theta_star == pytest.approx(0.20861309, abs=1e-8)
    assert retied.theta_star == pytest.approx(0.168598, abs=1e-5)
    assert retied.theta_star < fixed.theta_star


def test_sweep_rejects_unknown_parameter(insurer_utility, reinsurer_utility,
                                         base_terms, base_market):
    with pytest.raises(ValueError):
        sensitivity_sweep("sigma1", [0.1, 0.2], insurer_utility,
                          reinsurer_utility, base_terms, base_market)


def test_monte_carlo_fallback_for_off_menu_strategies(base_equilibrium,
                                                      insurer_utility,
                                                      base_terms,
                                                      base_market):
    eq = base_equilibrium
    eq_combo = ActionCombination(eq.theta_star, eq.xi_star)
    cm_combo = ActionCombination(eq.theta_star, eq.xi_star,
                                 ConstantMixStrategy(0.2948, 0.0))
    config = SimulationConfig(n_paths=100_000, n_steps=1, seed=7,
                              antithetic=True)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        gain = weuc(eq_combo, cm_combo, "insurer", insurer_utility,
                    base_terms, base_market, config=config)
    assert sum(issubclass(c.category, RuntimeWarning) for c in caught) >= 1
    assert gain.value > 0.0      # the optimal rule beats the fixed mix
    # a floor-shifted insurer holding a fixed mix has no closed form either
    shifted = HaraUtility(20.0, -9.0)
    eq_h = solve_equilibrium(shifted, PowerUtility(-9.0), base_terms,
                             base_market)
    with warnings.catch_warnings(record=True) as caught_h:
        warnings.simplefilter("always")
        gain_h = weuc(ActionCombination(eq_h.theta_star, eq_h.xi_star),
                      ActionCombination(0.0, 0.0,
                                        ConstantMixStrategy(0.15, 0.0)),
                      "insurer", shifted, base_terms, base_market,
                      config=config)
    assert len(caught_h) >= 1
    assert math.isfinite(gain_h.value)


def test_verification_gate_passes(insurer_utility, reinsurer_utility,
                                  base_terms, base_market, mc_config):
    report = verify_model(insurer_utility, reinsurer_utility, base_terms,
                          base_market, mc_config)
    assert report.all_passed
    assert report.worst.n_errors < 3.0
    table = report.format_table()
    for name in ("put_price", "put_price_auxiliary",
                 "insurer_expected_utility", "reinsurer_expected_utility",
                 "loss_probability"):
        assert name in table
    assert "PASS" in table and "FAIL" not in table


def test_action_and_result_validation(eq_actions, insurer_utility,
                                      base_terms, base_market):
    with pytest.raises(ValueError):
        ActionCombination(-0.1, 1.0)
    with pytest.raises(ValueError):
        ActionCombination(0.1, -1.0)
    with pytest.raises(ValueError):
        ActionCombination(0.6, 1.5).validate(base_terms)
    with pytest.raises(ValueError):
        weuc(eq_actions, ActionCombination(0.1, 2.0), "insurer",
             insurer_utility, base_terms, base_market)
    with pytest.raises(ValueError):
        weuc(eq_actions, eq_actions, "broker", insurer_utility, base_terms,
             base_market)
    with pytest.raises(ValueError):
        WeucResult(0.01, "broker")
    assert WeucResult(0.0025, "insurer").basis_points == pytest.approx(25.0)
