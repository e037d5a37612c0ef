import json
import math

import numpy as np
import pytest

from mirrorphase import cli, explore
from mirrorphase.explore import SweepSpec
from mirrorphase.units import ReducedSetup


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_phase_headline(capsys):
    code, out, _ = run(capsys, "phase", "--scenario", "single", "--alpha", "1e-7", "--zeta", "91000",
                       "--theta", "0.785398", "--kappa", "1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["delta_phi_abs"] == pytest.approx(1.1e-5, rel=0.1)
    for key in ("phi_accel", "phi_inertial", "A", "B", "A0", "B0", "gamma_plus", "gamma_minus", "n_used"):
        assert key in doc


def test_phase_text_output(capsys):
    code, out, _ = run(capsys, "phase", "--alpha", "1")
    assert code == 0 and "delta_phi" in out


@pytest.mark.parametrize("argv", [
    ["phase", "--scenario", "free", "--alpha", "0"],
    ["phase", "--scenario", "double", "--alpha", "1e-6", "--zeta", "600", "--lam", "500"],
    ["phase", "--alpha", "1", "--inv-alpha", "1"],
    ["phase", "--alpha", "1", "--omega0-hz", "1e9"],
    ["phase", "--alpha", "1", "--max-n", "10", "--adaptive"],
    ["phase", "--alpha", "1", "--theta", "1", "--theta-deg", "10"],
    ["phase", "--alpha", "1", "--rel-tol", "0.5"],
    ["phase", "--scenario", "triple", "--alpha", "1"],
    ["sweep", "--alpha", "1"],
    ["converge", "--alpha", "1e-5", "--lam", "10", "--zeta", "1.5", "--max-n-grid", "5:1:1"],
])
def test_validation_exit_code(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_convergence_exit_code(capsys):
    code, _, err = run(capsys, "phase", "--scenario", "double", "--alpha", "1e-7", "--zeta", "1.5",
                       "--lam", "10", "--hard-cap", "10000")
    assert code == 3 and "convergence" in err


def test_si_inputs(capsys):
    code, out, _ = run(capsys, "phase", "--omega0-hz", "1e9", "--accel-si", "3e17", "--constants", "paper",
                       "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["alpha"] == 1.0


def test_theta_deg(capsys):
    _, out, _ = run(capsys, "phase", "--alpha", "1", "--theta-deg", "45", "--format", "json")
    assert json.loads(out)["theta"] == pytest.approx(math.pi / 4, rel=1e-15)


def test_sweep_csv_round_trip_and_peak(capsys, tmp_path):
    path = tmp_path / "s.csv"
    code, _, err = run(capsys, "sweep", "--scenario", "single", "--alpha", "1e-7", "--axis", "zeta",
                       "--from", "6e4", "--to", "1.2e5", "--points", "128", "--log", "--out", str(path))
    assert code == 0
    rows = cli.read_csv_table(path.read_text())
    assert len(rows) == 128
    assert list(rows[0]) == list(cli.SWEEP_COLUMNS)
    grid = np.geomspace(6e4, 1.2e5, 128)
    table = explore.sweep(SweepSpec("zeta", grid, ReducedSetup(1e-7, "single", zeta=6e4)))
    for r, ref in zip(rows, table.rows):
        assert float(r["axis_value"]) == ref.axis_value
        assert float(r["delta_phi"]) == ref.delta_phi
        assert float(r["B0"]) == ref.B0
        assert r["converged"] == "true" and r["axis"] == "zeta"
    x, v = explore.find_peak(table)
    assert f"{x!r}" in err and f"{v!r}" in err


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "--inv-alpha", "1", "--axis", "invAlpha", "--from", "0.5", "--to", "2",
                       "--points", "3", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 3 and doc["failures"] == 0


def test_sweep_failures_flagged(capsys):
    code, out, err = run(capsys, "sweep", "--scenario", "double", "--alpha", "1e-7", "--zeta", "1.5", "--lam", "10",
                         "--axis", "zeta", "--from", "1", "--to", "2", "--points", "2", "--hard-cap", "10000")
    assert code == 0 and "2 row(s)" in err
    assert cli.read_csv_table(out)[0]["converged"] == "false"


def test_converge(capsys):
    code, out, err = run(capsys, "converge", "--alpha", "1e-5", "--lam", "10", "--zeta", "1.5",
                         "--max-n-grid", "1e5:1e6:1e5")
    rows = cli.read_csv_table(out)
    assert code == 0 and len(rows) == 10
    assert [int(r["max_n"]) for r in rows] == list(range(10**5, 10**6 + 1, 10**5))
    assert "plateau_n 100000" in err


def test_evolve_zero_time(capsys):
    code, out, _ = run(capsys, "evolve", "--scenario", "single", "--alpha", "1", "--zeta", "2", "--tau-max", "0",
                       "--theta", "1.2")
    rows = cli.read_csv_table(out)
    assert code == 0 and len(rows) == 1
    r = rows[0]
    assert float(r["tau"]) == 0.0
    assert float(r["rho11"]) == pytest.approx(math.cos(0.6) ** 2, rel=1e-15)
    assert float(r["re_rho12"]) == pytest.approx(0.5 * math.sin(1.2), rel=1e-15)
    assert float(r["im_rho12"]) == 0.0
    assert float(r["coherence"]) == pytest.approx(0.5 * math.sin(1.2), rel=1e-15)


def test_evolve_trajectory(capsys):
    code, out, _ = run(capsys, "evolve", "--alpha", "1", "--tau-max", "50", "--tau-points", "11")
    rows = cli.read_csv_table(out)
    assert code == 0 and len(rows) == 11
    coh = [float(r["coherence"]) for r in rows]
    assert all(b < a for a, b in zip(coh, coh[1:]))


def test_oracle_command(capsys):
    code, out, _ = run(capsys, "oracle")
    assert code == 0 and "FAIL" not in out and out.count("PASS") == 17


def test_oracle_failure_exit(capsys, monkeypatch):
    from mirrorphase import oracle
    real = oracle.run_oracle_suite
    monkeypatch.setattr(oracle, "run_oracle_suite",
                        lambda: real()[:1] + [oracle.OracleCheck("broken", 1.0, 2.0, 0.5, 1e-3)])
    code, out, _ = run(capsys, "oracle")
    assert code == 1 and "FAIL" in out


def test_search_command(capsys):
    code, out, _ = run(capsys, "search", "--scenario", "single", "--zeta-max", "1.5e5", "--alpha-min", "1e-9",
                       "--alpha-max", "1e-5", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["feasible"] and doc["alpha_star"] <= 1e-7


def test_search_infeasible_exit(capsys):
    code, _, _ = run(capsys, "search", "--scenario", "single", "--zeta-max", "10", "--floor", "1",
                     "--alpha-min", "1e-6", "--alpha-max", "1e-3")
    assert code == 3


def test_units_command(capsys):
    code, out, _ = run(capsys, "units", "--omega0-hz", "1e9", "--accel-si", "3e17", "--z0-m", "0.3",
                       "--scenario", "single", "--constants", "paper", "--delta-t", "1", "--delta-x", "1e-5",
                       "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["alpha"] == 1.0 and doc["zeta"] == pytest.approx(1.0)
    assert doc["gradient_accel_si"] == pytest.approx(8.25e8, rel=2e-3)
    assert doc["de_broglie_m"] == pytest.approx(3.96e-10, rel=2e-3)


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"alpha": 1.0, "kappa": 2.0, "theta": 0.5}))
    # default layer: kappa 1 and theta pi/4
    _, out, _ = run(capsys, "phase", "--alpha", "1", "--format", "json")
    d0 = json.loads(out)
    assert d0["kappa"] == 1.0 and d0["theta"] == pytest.approx(math.pi / 4)
    # config layer overrides defaults
    _, out, _ = run(capsys, "phase", "--config", str(cfg), "--format", "json")
    d1 = json.loads(out)
    assert d1["kappa"] == 2.0 and d1["theta"] == 0.5 and d1["alpha"] == 1.0
    # flags override the config
    _, out, _ = run(capsys, "phase", "--config", str(cfg), "--kappa", "3", "--format", "json")
    d2 = json.loads(out)
    assert d2["kappa"] == 3.0 and d2["theta"] == 0.5
    assert d2["delta_phi"] == pytest.approx(1.5 * d1["delta_phi"], rel=1e-15)


def test_config_errors(capsys, tmp_path):
    bad = tmp_path / "b.json"
    bad.write_text(json.dumps({"no_such_option": 1}))
    assert run(capsys, "phase", "--alpha", "1", "--config", str(bad))[0] == 2
    bad.write_text(json.dumps({"kappa": "lots"}))
    assert run(capsys, "phase", "--alpha", "1", "--config", str(bad))[0] == 2
    assert run(capsys, "phase", "--alpha", "1", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_parse_int_grid():
    assert cli.parse_int_grid("1e5:1e6:1e5") == list(range(10**5, 10**6 + 1, 10**5))
    assert cli.parse_int_grid("10,20") == [10, 20]


def test_float_rendering_round_trips():
    for v in (0.1, 1e-300, -2.0 / 3.0, 5e-324):
        assert float(cli._fmt(v)) == v
