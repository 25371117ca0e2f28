"""Command-line interface: outputs, exit codes, and reproducibility."""

import filecmp
import json

import pytest

from stackrein.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_equilibrium_report(capsys):
    code, out, err = run(capsys, "equilibrium")
    assert code == 0
    assert "critical loading" in out
    assert "20.86%" in out
    assert "indifferent on [0, 1.5], selects 1.5" in out
    assert "3.8533" in out and "4.65714" in out
    assert "(31.69%, 0.00%)" in out
    assert "(31.67%, -16.42%)" in out
    assert err == ""


def test_equilibrium_json(capsys):
    code, out, _ = run(capsys, "equilibrium", "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["theta_star"] == pytest.approx(0.20861309, abs=1e-8)
    assert payload["xi_star"] == 1.5
    assert payload["put_price"] == pytest.approx(3.8532964, abs=1e-6)
    assert payload["indifferent"] is True
    assert payload["degenerate"] is False
    assert payload["pi_reinsurer_0"][1] == pytest.approx(-0.16421, abs=5e-6)


def test_equilibrium_warns_on_degenerate_contract(capsys, tmp_path):
    path = tmp_path / "zero.ini"
    path.write_text("[contract]\nguarantee = 0\n")
    code, out, err = run(capsys, "--config", str(path), "equilibrium")
    assert code == 0
    assert "critical loading        infinite" in out
    assert "(33.48%, -5.38%)" in out
    assert "degenerate" in err


def test_missing_config_fails_loudly(capsys, tmp_path):
    code, _, err = run(capsys, "--config", str(tmp_path / "nope.ini"),
                       "equilibrium")
    assert code == 1
    assert "does not exist" in err
    broken = tmp_path / "broken.ini"
    broken.write_text("rate = 1%  ; no section header\n")
    code, _, err = run(capsys, "--config", str(broken), "equilibrium")
    assert code == 1
    assert "cannot read config" in err


def test_weuc_reinsurer_discount(capsys):
    code, out, _ = run(capsys, "weuc", "--reference", "eq",
                       "--alternative", "eq@0.95", "--party", "reinsurer")
    assert code == 0
    assert out.startswith("weuc[reinsurer] = 6.02886 bp")


def test_weuc_explicit_combination_grammar(capsys):
    code, out, _ = run(capsys, "weuc", "--reference", "eq@0.8673",
                       "--alternative", "0,0", "--party", "insurer")
    assert code == 0
    assert "16.0006 bp" in out
    code, out, _ = run(capsys, "weuc", "--reference", "eq",
                       "--alternative", "0,0,mix=15%:0", "--party",
                       "insurer")
    assert code == 0
    assert "weuc[insurer]" in out


@pytest.mark.parametrize("bad", ["eq@@", "0.1", "merton@0.5", "0,0,mix=1"])
def test_weuc_rejects_malformed_combinations(capsys, bad):
    code, _, err = run(capsys, "weuc", "--reference", bad,
                       "--alternative", "merton", "--party", "insurer")
    assert code == 1
    assert "Error" in err


def test_lossprob_point_evaluation(capsys):
    code, out, _ = run(capsys, "lossprob", "--alpha", "1")
    assert code == 0
    assert out.strip() == "Q(1) = 0.439603%"


def test_lossprob_with_monte_carlo(capsys):
    code, out, _ = run(capsys, "lossprob", "--alpha", "0.5", "--mc")
    assert code == 0
    assert out.startswith("Q(0.5) = 0.475601%")
    assert "monte carlo" in out and "+-" in out


def test_lossprob_solves_criteria(capsys):
    code, out, _ = run(capsys, "lossprob", "--solve", "weuc-cap=25bp")
    assert code == 0
    assert out.strip() == "alpha = 79.2664%"
    code, out, _ = run(capsys, "lossprob", "--solve", "increase=1bp")
    assert code == 0
    assert out.strip() == "alpha = 85.7239%"
    code, out, _ = run(capsys, "lossprob", "--solve", "max=0.5%")
    assert code == 0
    assert out.strip() == "alpha = 18.1544%"


def test_lossprob_numerical_failures_exit_2(capsys):
    code, _, err = run(capsys, "lossprob", "--alpha", "1.5")
    assert code == 2
    assert "numerical failure" in err
    code, _, err = run(capsys, "lossprob", "--solve", "max=90%")
    assert code == 2
    assert "numerical failure" in err


def test_lossprob_usage_errors_exit_1(capsys):
    code, _, err = run(capsys, "lossprob", "--solve", "budget=1")
    assert code == 1
    code, _, err = run(capsys, "lossprob")
    assert code == 1
    code, _, err = run(capsys, "lossprob", "--alpha", "0.5", "--solve",
                       "max=1%")
    assert code == 1


def test_sensitivity_stdout_and_file_agree(capsys, tmp_path):
    args = ("sensitivity", "--param", "r", "--grid", "-1%,0%,1%,2%")
    code, out, _ = run(capsys, *args)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == ("parameter,value,theta_star,xi_star,pi_insurer_1,"
                        "pi_insurer_2,pi_reinsurer_1,pi_reinsurer_2")
    assert len(lines) == 5
    thetas = [float(line.split(",")[2]) for line in lines[1:]]
    assert thetas == sorted(thetas)
    target = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, *args, "--output", str(target))
    assert code == 0
    assert out == ""
    assert target.read_text().strip().splitlines() == lines


def test_sensitivity_rejects_unknown_parameter(capsys):
    code, _, err = run(capsys, "sensitivity", "--param", "sigma1",
                       "--grid", "0.1,0.2")
    assert code == 1


def test_simulate_hedge_error_halves_per_refinement(capsys):
    code, out, _ = run(capsys, "simulate", "--what", "hedge-error",
                       "--paths", "1024")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "rebalance_steps,rms_error,improvement_ratio"
    table = {int(r.split(",")[0]): r.split(",") for r in lines[1:]}
    assert set(table) == {64, 256, 1024}
    for steps in (256, 1024):
        assert 1.6 <= float(table[steps][2]) <= 2.6
    assert float(table[1024][1]) < float(table[64][1])


def test_simulate_wealth_summary(capsys):
    code, out, _ = run(capsys, "simulate", "--what", "wealth", "--paths",
                       "2000", "--steps", "50")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == ("time,benchmark_mean,insurer_mean,insurer_std,"
                        "reinsurer_mean,reinsurer_std")
    first = lines[1].split(",")
    assert float(first[0]) == 0.0
    assert float(first[1]) == 100.0
    # time zero wealth equals capital net of / plus the premium
    assert float(first[2]) == pytest.approx(93.0143, abs=1e-3)
    assert float(first[4]) == pytest.approx(101.206, abs=1e-3)
    last = lines[-1].split(",")
    assert float(last[0]) == 10.0


def test_simulate_verify_all_gate(capsys):
    code, out, _ = run(capsys, "simulate", "--what", "verify-all",
                       "--paths", "200000")
    assert code == 0
    assert "verification gate passed" in out
    assert out.count("PASS") == 5
    assert "FAIL" not in out


def test_reproduce_paper_reports_known_gaps(capsys, tmp_path):
    first = tmp_path / "first.csv"
    code, out, err = run(capsys, "reproduce-paper", "--output", str(first))
    assert code == 3
    assert "4 of 31 reference values failed" in err
    assert "weuc_vs_mix15_rra15_T20" in err
    lines = first.read_text().strip().splitlines()
    assert lines[0] == "quantity,unit,computed,reference,tolerance,status"
    assert len(lines) == 32
    failures = {line.split(",")[0] for line in lines if "FAIL" in line}
    assert failures == {"alpha_for_loss_increase", "alpha_for_max_loss",
                        "weuc_vs_merton_rra15_T20",
                        "weuc_vs_mix15_rra15_T20"}
    second = tmp_path / "second.csv"
    code, _, _ = run(capsys, "reproduce-paper", "--output", str(second))
    assert code == 3
    assert filecmp.cmp(first, second, shallow=False)


def test_unknown_command_exits_1(capsys):
    code, _, _ = run(capsys, "make-money")
    assert code == 1
