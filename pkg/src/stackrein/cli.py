"""Command-line interface.

Commands wrap the library one-to-one: ``equilibrium`` prints the solved
game, ``sensitivity`` sweeps one parameter to CSV, ``weuc`` compares two
action combinations, ``lossprob`` evaluates or inverts the reinsurer's
loss probability, ``simulate`` runs the Monte Carlo workflows including
the closed-form-vs-simulation verification gate, and ``reproduce-paper``
re-derives every published reference number with a pass/fail verdict.

Exit codes: 0 success; 1 invalid configuration or options (the message
names the violated constraint); 2 numerical failure (root bracketing or
convergence); 3 a verification gate or reference reproduction failed (the
worst offending quantity is named).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import replace
from typing import Optional

import click
import numpy as np

from .analysis import (
    ActionCombination,
    ConstantMixStrategy,
    LossProbIncrease,
    MaxLossProb,
    WeucCap,
    discount_select,
    sensitivity_sweep,
    verify_model,
    weuc,
)
from .config import RunConfig, load_config
from .equilibrium import (
    insurer_best_response,
    insurer_lagrange,
    insurer_value,
    solve_equilibrium,
)
from .simulation import (
    InsurerOptimalRule,
    ReinsurerOptimalRule,
    SimulationConfig,
    evolve_wealth,
    hedge_error,
    loss_probability,
    simulate,
)
from .utility import LogUtility, PowerUtility

_HEDGE_GRID = (64, 256, 1024)


def _sig(value: float) -> str:
    """Six significant digits, the CSV/JSON emission precision."""
    return f"{value:.6g}"


def _echo_rows(rows: list[dict], as_json: bool,
               output: Optional[str]) -> None:
    """Emit a row table as CSV (default) or JSON, to stdout or a file."""
    if as_json:
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buffer = io.StringIO()
        header = list(rows[0].keys())
        buffer.write(",".join(header) + "\n")
        for row in rows:
            buffer.write(",".join(str(row[key]) for key in header) + "\n")
        text = buffer.getvalue()
    if output is None:
        click.echo(text, nl=False)
    else:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)


def _numerical_guard(ctx: click.Context, fn, *args, **kwargs):
    """Run a library call, mapping numerical errors to exit code 2."""
    try:
        return fn(*args, **kwargs)
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        ctx.exit(2)


def _parse_quantity(text: str, what: str) -> float:
    """Number with an optional bp / pp / % unit suffix, in raw units."""
    t = text.strip().lower()
    scale = 1.0
    if t.endswith("bp"):
        t, scale = t[:-2], 1e-4
    elif t.endswith("pp"):
        t, scale = t[:-2], 1e-2
    elif t.endswith("%"):
        t, scale = t[:-1], 1e-2
    try:
        return float(t) * scale
    except ValueError:
        raise click.UsageError(f"{what}: {text!r} is not a number") from None


def _parse_combination(spec: str, equilibrium) -> ActionCombination:
    """Action combination from its command-line spelling.

    Grammar: ``eq`` (the equilibrium actions), ``eq@ALPHA`` (equilibrium
    with the loading discounted by ALPHA), ``merton`` (no reinsurance,
    optimal investment), ``THETA,XI`` (optimal investment), or
    ``THETA,XI,mix=W1:W2`` (constant-mix investment). Numbers accept a
    ``%`` suffix.
    """
    text = spec.strip().lower()
    if text == "eq":
        return ActionCombination(equilibrium.theta_star, equilibrium.xi_star)
    if text.startswith("eq@"):
        alpha = _parse_quantity(text[3:], "discount factor")
        if not 0.0 <= alpha <= 1.0:
            raise click.UsageError(f"discount factor {alpha} outside [0, 1]")
        return ActionCombination(alpha * equilibrium.theta_star,
                                 equilibrium.xi_star)
    if text == "merton":
        return ActionCombination(0.0, 0.0)
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (2, 3):
        raise click.UsageError(
            f"combination {spec!r} must be eq, eq@ALPHA, merton, "
            f"THETA,XI or THETA,XI,mix=W1:W2")
    theta = _parse_quantity(parts[0], "loading")
    xi = _parse_quantity(parts[1], "contracts")
    if len(parts) == 2:
        return ActionCombination(theta, xi)
    if not parts[2].startswith("mix="):
        raise click.UsageError(f"third field of {spec!r} must be "
                               f"mix=W1:W2")
    weights = parts[2][4:].split(":")
    if len(weights) != 2:
        raise click.UsageError(f"mix weights in {spec!r} must be W1:W2")
    w1 = _parse_quantity(weights[0], "mix weight 1")
    w2 = _parse_quantity(weights[1], "mix weight 2")
    return ActionCombination(theta, xi, ConstantMixStrategy(w1, w2))


@click.group()
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="INI file layered over the built-in base case.")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str]) -> None:
    """Stackelberg reinsurance equilibrium toolkit."""
    try:
        ctx.obj = load_config(config_path)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


@cli.command("equilibrium")
@click.option("--json", "as_json", is_flag=True,
              help="Emit the equilibrium as JSON instead of a report.")
@click.pass_context
def equilibrium_cmd(ctx: click.Context, as_json: bool) -> None:
    """Solve the loading/amount game and print the equilibrium."""
    cfg: RunConfig = ctx.obj
    eq = _numerical_guard(ctx, solve_equilibrium, cfg.insurer_utility,
                          cfg.reinsurer_utility, cfg.terms, cfg.market)
    if eq.degenerate:
        click.echo("warning: degenerate contract (the put is worthless or "
                   "harmful to the insurer); the reinsurer portfolio "
                   "collapses to its Merton weights", err=True)
    if as_json:
        payload = {
            "theta_star": eq.theta_star,
            "xi_star": eq.xi_star,
            "critical_loading": eq.critical_loading,
            "put_price": eq.p0,
            "put_price_auxiliary": eq.p0_aux,
            "y_insurer": eq.y_insurer_star,
            "y_reinsurer": eq.y_reinsurer_star,
            "value_insurer": eq.value_insurer,
            "value_reinsurer": eq.value_reinsurer,
            "pi_insurer_0": list(eq.pi_insurer_0),
            "pi_reinsurer_0": list(eq.pi_reinsurer_0),
            "indifferent": eq.insurer_response.is_indifferent,
            "degenerate": eq.degenerate,
        }
        click.echo(json.dumps(payload, indent=2))
        return
    crit = ("infinite" if math.isinf(eq.critical_loading)
            else f"{100 * eq.critical_loading:.2f}%")
    response = eq.insurer_response
    demand = (f"indifferent on [{response.lower:g}, {response.upper:g}], "
              f"selects {response.selected:g}"
              if response.is_indifferent else f"{response.selected:g}")
    lines = [
        f"critical loading        {crit}",
        f"safety loading theta*   {100 * eq.theta_star:.2f}%"
        f"  (cap {100 * cfg.terms.max_loading:g}%)",
        f"contracts xi*           {eq.xi_star:g}"
        f"  (cap {cfg.terms.max_contracts:g})",
        f"insurer demand          {demand}",
        f"put price               {_sig(eq.p0)}",
        f"auxiliary put price     {_sig(eq.p0_aux)}",
        f"insurer portfolio       ({100 * eq.pi_insurer_0[0]:.2f}%, "
        f"{100 * eq.pi_insurer_0[1]:.2f}%)",
        f"reinsurer portfolio     ({100 * eq.pi_reinsurer_0[0]:.2f}%, "
        f"{100 * eq.pi_reinsurer_0[1]:.2f}%)",
        f"insurer value           {_sig(eq.value_insurer)}",
        f"reinsurer value         {_sig(eq.value_reinsurer)}",
    ]
    click.echo("\n".join(lines))


@cli.command("sensitivity")
@click.option("--param", "parameter", required=True,
              type=click.Choice(["RRA_I", "RRA_R", "r", "T", "G_T"]),
              help="Parameter to sweep.")
@click.option("--grid", "grid_text", required=True,
              help="Comma-separated grid values (percent suffix allowed).")
@click.option("--recompute-benchmark", is_flag=True,
              help="Re-derive the benchmark fraction at every grid point.")
@click.option("--json", "as_json", is_flag=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="Write the table to a file instead of stdout.")
@click.pass_context
def sensitivity_cmd(ctx: click.Context, parameter: str, grid_text: str,
                    recompute_benchmark: bool, as_json: bool,
                    output: Optional[str]) -> None:
    """Recompute the equilibrium along a one-parameter grid (CSV)."""
    cfg: RunConfig = ctx.obj
    grid = [_parse_quantity(v, f"{parameter} grid value")
            for v in grid_text.split(",")]
    points = _numerical_guard(
        ctx, sensitivity_sweep, parameter, grid, cfg.insurer_utility,
        cfg.reinsurer_utility, cfg.terms, cfg.market,
        recompute_benchmark_fraction=recompute_benchmark)
    rows = [{
        "parameter": p.parameter,
        "value": _sig(p.value),
        "theta_star": _sig(p.theta_star),
        "xi_star": _sig(p.xi_star),
        "pi_insurer_1": _sig(p.pi_insurer_0[0]),
        "pi_insurer_2": _sig(p.pi_insurer_0[1]),
        "pi_reinsurer_1": _sig(p.pi_reinsurer_0[0]),
        "pi_reinsurer_2": _sig(p.pi_reinsurer_0[1]),
    } for p in points]
    _echo_rows(rows, as_json, output)


@cli.command("weuc")
@click.option("--reference", required=True,
              help="Reference combination: eq, eq@ALPHA, merton, THETA,XI "
                   "or THETA,XI,mix=W1:W2.")
@click.option("--alternative", required=True,
              help="Alternative combination, same grammar.")
@click.option("--party", required=True,
              type=click.Choice(["insurer", "reinsurer"]))
@click.pass_context
def weuc_cmd(ctx: click.Context, reference: str, alternative: str,
             party: str) -> None:
    """Wealth-equivalent utility change between two action combinations."""
    cfg: RunConfig = ctx.obj
    eq = _numerical_guard(ctx, solve_equilibrium, cfg.insurer_utility,
                          cfg.reinsurer_utility, cfg.terms, cfg.market)
    ref = _parse_combination(reference, eq)
    alt = _parse_combination(alternative, eq)
    utility = (cfg.insurer_utility if party == "insurer"
               else cfg.reinsurer_utility)
    result = _numerical_guard(ctx, weuc, ref, alt, party, utility,
                              cfg.terms, cfg.market,
                              config=cfg.simulation)
    click.echo(f"weuc[{party}] = {_sig(result.basis_points)} bp "
               f"(relative {_sig(result.value)})")


@cli.command("lossprob")
@click.option("--alpha", type=float, default=None,
              help="Evaluate the loss probability at this discount factor.")
@click.option("--solve", "criterion_text", default=None,
              help="Invert a criterion: weuc-cap=25bp, increase=0.01pp "
                   "or max=0.5%.")
@click.option("--mc", is_flag=True,
              help="Add a Monte Carlo estimate next to the closed form.")
@click.pass_context
def lossprob_cmd(ctx: click.Context, alpha: Optional[float],
                 criterion_text: Optional[str], mc: bool) -> None:
    """Reinsurer loss probability: evaluate at alpha or solve for it."""
    cfg: RunConfig = ctx.obj
    if (alpha is None) == (criterion_text is None):
        raise click.UsageError("pass exactly one of --alpha or --solve")
    eq = _numerical_guard(ctx, solve_equilibrium, cfg.insurer_utility,
                          cfg.reinsurer_utility, cfg.terms, cfg.market)
    if alpha is not None:
        result = _numerical_guard(
            ctx, loss_probability, alpha, eq, cfg.reinsurer_utility,
            cfg.terms, cfg.market,
            config=cfg.simulation if mc else None)
        line = f"Q({alpha:g}) = {_sig(100 * result.closed_form)}%"
        if result.estimate is not None:
            line += (f"  (monte carlo {_sig(100 * result.estimate.mean)}% "
                     f"+- {_sig(100 * result.estimate.standard_error)}%)")
        click.echo(line)
        return
    if "=" not in criterion_text:
        raise click.UsageError("--solve expects kind=value, e.g. "
                               "weuc-cap=25bp")
    kind, _, value_text = criterion_text.partition("=")
    value = _parse_quantity(value_text, f"--solve {kind}")
    kinds = {
        "weuc-cap": WeucCap,
        "increase": LossProbIncrease,
        "max": MaxLossProb,
    }
    if kind.strip() not in kinds:
        raise click.UsageError(f"--solve kind must be one of "
                               f"{sorted(kinds)}, got {kind!r}")
    try:
        criterion = kinds[kind.strip()](value)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    solved = _numerical_guard(ctx, discount_select, criterion, eq,
                              cfg.reinsurer_utility, cfg.terms, cfg.market)
    click.echo(f"alpha = {_sig(100 * solved)}%")


@cli.command("simulate")
@click.option("--what", required=True,
              type=click.Choice(["hedge-error", "wealth", "verify-all"]))
@click.option("--paths", type=int, default=None,
              help="Override the configured path count.")
@click.option("--steps", type=int, default=None,
              help="Override the configured step count.")
@click.option("--json", "as_json", is_flag=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def simulate_cmd(ctx: click.Context, what: str, paths: Optional[int],
                 steps: Optional[int], as_json: bool,
                 output: Optional[str]) -> None:
    """Monte Carlo workflows: hedging error, wealth paths, verification."""
    cfg: RunConfig = ctx.obj
    contract = cfg.terms.contract
    if what == "verify-all":
        sim = cfg.simulation
        if paths is not None:
            sim = replace(sim, n_paths=paths)
        report = _numerical_guard(ctx, verify_model, cfg.insurer_utility,
                                  cfg.reinsurer_utility, cfg.terms,
                                  cfg.market, sim)
        click.echo(report.format_table())
        if not report.all_passed:
            worst = report.worst
            click.echo(f"verification gate FAILED: worst quantity is "
                       f"{worst.name} at {worst.n_errors:.2f} standard "
                       f"errors", err=True)
            ctx.exit(3)
        click.echo("verification gate passed: all quantities within "
                   "3 standard errors")
        return

    if what == "hedge-error":
        sim = SimulationConfig(
            n_paths=paths if paths is not None else 8192,
            n_steps=steps if steps is not None else max(_HEDGE_GRID),
            seed=cfg.simulation.seed,
            antithetic=cfg.simulation.antithetic)
        ensemble = _numerical_guard(ctx, simulate, cfg.market,
                                    contract.maturity,
                                    contract.benchmark_fraction, sim,
                                    contract.benchmark_initial)
        errors = _numerical_guard(ctx, hedge_error, ensemble, contract,
                                  cfg.market, _HEDGE_GRID)
        rows = []
        previous = None
        for m in _HEDGE_GRID:
            ratio = "" if previous is None else _sig(previous / errors[m])
            rows.append({"rebalance_steps": m,
                         "rms_error": _sig(errors[m]),
                         "improvement_ratio": ratio})
            previous = errors[m]
        _echo_rows(rows, as_json, output)
        return

    # wealth summary under the optimal feedback rules
    sim = SimulationConfig(
        n_paths=paths if paths is not None else 10_000,
        n_steps=steps if steps is not None else 200,
        seed=cfg.simulation.seed, antithetic=cfg.simulation.antithetic)
    eq = _numerical_guard(ctx, solve_equilibrium, cfg.insurer_utility,
                          cfg.reinsurer_utility, cfg.terms, cfg.market)
    ensemble = _numerical_guard(ctx, simulate, cfg.market,
                                contract.maturity,
                                contract.benchmark_fraction, sim,
                                contract.benchmark_initial)
    insurer_rule = InsurerOptimalRule.from_equilibrium(
        eq, cfg.insurer_utility, cfg.terms, cfg.market)
    reinsurer_rule = ReinsurerOptimalRule.from_equilibrium(
        eq, cfg.reinsurer_utility, cfg.terms, cfg.market)
    v_i0 = (cfg.terms.insurer_capital
            - eq.xi_star * (1.0 + eq.theta_star) * eq.p0)
    v_r0 = cfg.terms.reinsurer_capital + eq.xi_star * eq.theta_star * eq.p0
    wealth_i = _numerical_guard(ctx, evolve_wealth, ensemble, insurer_rule,
                                v_i0).wealth
    wealth_r = _numerical_guard(ctx, evolve_wealth, ensemble,
                                reinsurer_rule, v_r0).wealth
    stride = max(1, sim.n_steps // 20)
    rows = []
    for idx in range(0, sim.n_steps + 1, stride):
        rows.append({
            "time": _sig(ensemble.times[idx]),
            "benchmark_mean": _sig(float(ensemble.benchmark[:, idx].mean())),
            "insurer_mean": _sig(float(wealth_i[:, idx].mean())),
            "insurer_std": _sig(float(wealth_i[:, idx].std())),
            "reinsurer_mean": _sig(float(wealth_r[:, idx].mean())),
            "reinsurer_std": _sig(float(wealth_r[:, idx].std())),
        })
    _echo_rows(rows, as_json, output)


def _reference_rows() -> list[dict]:
    """Re-derive every published reference number on the base case."""
    cfg = load_config(None)
    market, terms = cfg.market, cfg.terms
    u_i, u_r = cfg.insurer_utility, cfg.reinsurer_utility
    eq = solve_equilibrium(u_i, u_r, terms, market)
    eq_actions = ActionCombination(eq.theta_star, eq.xi_star)
    rows: list[dict] = []

    def add(name: str, unit: str, computed: float, reference: float,
            tolerance: float, relative: bool = False) -> None:
        limit = tolerance * abs(reference) if relative else tolerance
        status = "PASS" if abs(computed - reference) <= limit else "FAIL"
        rows.append({"quantity": name, "unit": unit,
                     "computed": _sig(computed), "reference": _sig(reference),
                     "tolerance": (f"{_sig(tolerance * 100)}% rel"
                                   if relative else _sig(tolerance)),
                     "status": status})

    add("critical_loading", "%", 100 * eq.critical_loading, 20.86, 0.005)
    add("theta_star", "%", 100 * eq.theta_star, 20.86, 0.005)
    add("xi_star", "contracts", eq.xi_star, 1.5, 0.0)
    add("pi_insurer_asset1", "%", 100 * eq.pi_insurer_0[0], 31.69, 0.005)
    add("pi_insurer_asset2", "%", 100 * eq.pi_insurer_0[1], 0.0, 0.005)
    add("pi_reinsurer_asset1", "%", 100 * eq.pi_reinsurer_0[0], 31.67, 0.005)
    add("pi_reinsurer_asset2", "%", 100 * eq.pi_reinsurer_0[1], -16.42,
        0.005)
    b_i = u_i.exponent
    merton1 = (market.mu1 - market.r) / ((1.0 - b_i) * market.sigma1 ** 2)
    add("benchmark_merton_fraction", "%", 100 * merton1, 29.48, 0.005)

    low = insurer_best_response(0.10, u_i, terms, market)
    high = insurer_best_response(0.30, u_i, terms, market)
    at_crit = insurer_best_response(eq.theta_star, u_i, terms, market)
    add("response_low_loading", "contracts", low.selected, 1.5, 0.0)
    add("response_high_loading", "contracts", high.selected, 0.0, 0.0)
    add("response_critical_selected", "contracts", at_crit.selected, 1.5,
        0.0)
    add("response_critical_indifferent", "bool",
        float(at_crit.is_indifferent), 1.0, 0.0)

    gain = (insurer_value(terms.max_contracts, 0.0, u_i, terms, market)
            > insurer_value(0.0, 0.0, u_i, terms, market))
    add("reinsurance_gain_at_zero_loading", "bool", float(gain), 1.0, 0.0)
    multipliers = [insurer_lagrange(x, 0.10, u_i, terms, market)
                   for x in np.linspace(0.0, terms.max_contracts, 16)]
    decreasing = all(b < a for a, b in zip(multipliers, multipliers[1:]))
    add("insurer_multiplier_decreasing_in_contracts", "bool",
        float(decreasing), 1.0, 0.0)

    q_full = loss_probability(1.0, eq, u_r, terms, market).closed_form
    add("loss_probability_full_loading", "%", 100 * q_full, 0.4413, 0.003)
    a_inc = discount_select(LossProbIncrease(0.0001), eq, u_r, terms, market)
    add("alpha_for_loss_increase", "%", 100 * a_inc, 86.73, 0.1)
    a_max = discount_select(MaxLossProb(0.005), eq, u_r, terms, market)
    add("alpha_for_max_loss", "%", 100 * a_max, 20.74, 0.1)

    discounted = ActionCombination(0.95 * eq.theta_star, eq.xi_star)
    w_r = weuc(eq_actions, discounted, "reinsurer", u_r, terms, market)
    w_i = weuc(eq_actions, discounted, "insurer", u_i, terms, market)
    add("weuc_reinsurer_5pct_discount", "bp", w_r.basis_points, 6.0, 0.5)
    add("weuc_zero_sum_gap", "bp", abs(w_i.basis_points + w_r.basis_points),
        0.0, 1e-9)
    a_cap = discount_select(WeucCap(25e-4), eq, u_r, terms, market)
    add("alpha_for_weuc_cap", "%", 100 * a_cap, 79.27, 0.1)

    alpha_ref = 0.8673
    base_disc = ActionCombination(alpha_ref * eq.theta_star, eq.xi_star)
    w16 = weuc(base_disc, ActionCombination(0.0, 0.0), "insurer", u_i,
               terms, market)
    add("weuc_insurer_vs_merton", "bp", w16.basis_points, 16.0, 1.0)
    mix15 = ConstantMixStrategy(0.15, 0.0)
    for rra, horizon, want_merton, want_mix in (
            (5.0, 20.0, 60.0, 7275.0), (15.0, 20.0, 10.0, 287.0)):
        utility = PowerUtility(1.0 - rra)
        fraction = ((market.mu1 - market.r)
                    / (rra * market.sigma1 ** 2))
        contract_c = replace(terms.contract, maturity=horizon,
                             benchmark_fraction=fraction)
        terms_c = replace(terms, contract=contract_c)
        eq_c = solve_equilibrium(utility, u_r, terms_c, market)
        disc_c = ActionCombination(alpha_ref * eq_c.theta_star,
                                   eq_c.xi_star)
        w_merton = weuc(disc_c, ActionCombination(0.0, 0.0), "insurer",
                        utility, terms_c, market)
        w_mix = weuc(disc_c, ActionCombination(0.0, 0.0, mix15), "insurer",
                     utility, terms_c, market)
        tag = f"rra{rra:g}_T{horizon:g}"
        add(f"weuc_vs_merton_{tag}", "bp", w_merton.basis_points,
            want_merton, 0.02, relative=True)
        add(f"weuc_vs_mix15_{tag}", "bp", w_mix.basis_points,
            want_mix, 0.02, relative=True)

    sweeps = (
        ("theta_star_increasing_in_r", "r",
         [-0.02, -0.01, 0.0, 0.01, 0.02], 1),
        ("theta_star_increasing_in_T", "T",
         [1.0, 5.0, 10.0, 15.0, 20.0], 1),
        ("theta_star_decreasing_in_G", "G_T",
         [60.0, 70.0, 80.0, 90.0, 100.0, 110.0], -1),
    )
    for name, parameter, grid, direction in sweeps:
        points = sensitivity_sweep(parameter, grid, u_i, u_r, terms, market)
        thetas = [p.theta_star for p in points]
        monotone = all(direction * (later - early) > 0.0
                       for early, later in zip(thetas, thetas[1:]))
        demand_full = all(p.xi_star == terms.max_contracts for p in points)
        add(name, "bool", float(monotone), 1.0, 0.0)
        add(f"xi_star_at_cap_in_{parameter}", "bool", float(demand_full),
            1.0, 0.0)
    return rows


@cli.command("reproduce-paper")
@click.option("--json", "as_json", is_flag=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def reproduce_cmd(ctx: click.Context, as_json: bool,
                  output: Optional[str]) -> None:
    """Re-derive all published reference numbers (base case, closed form).

    Always runs on the built-in base-case parameters so that the output is
    reproducible byte for byte; the --config file is ignored here.
    """
    rows = _numerical_guard(ctx, _reference_rows)
    _echo_rows(rows, as_json, output)
    failures = [row for row in rows if row["status"] == "FAIL"]
    if failures:
        def breach(row: dict) -> float:
            computed = float(row["computed"])
            reference = float(row["reference"])
            denominator = max(abs(reference), 1e-12)
            return abs(computed - reference) / denominator
        worst = max(failures, key=breach)
        click.echo(f"{len(failures)} of {len(rows)} reference values "
                   f"failed; worst offender is {worst['quantity']} "
                   f"(computed {worst['computed']} vs reference "
                   f"{worst['reference']})", err=True)
        ctx.exit(3)


def main(argv: Optional[list[str]] = None) -> int:
    """Console entry point with the documented exit-code mapping."""
    try:
        result = cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    raise SystemExit(main())
