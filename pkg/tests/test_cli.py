import numpy as np
import pytest

from qfeedback.cli import run_command
from qfeedback.tables import read_table


def _run_to_file(argv, path):
    code = run_command(argv + ["--out", str(path)])
    return code, (read_table(path) if code == 0 else None)


def test_steady_known_value(tmp_path):
    code, table = _run_to_file(
        ["steady", "--feedback", "xy", "--lambda", "1", "--beta",
         "3.141592653589793", "--eta", "0.5"], tmp_path / "s.csv")
    assert code == 0
    row = dict(zip(table.columns, table.rows[0]))
    assert row["rho11"] == pytest.approx(2.0 / 3.0, abs=1e-9)
    assert row["qfi_steady"] == pytest.approx(8.0 / 9.0, abs=1e-8)
    assert table.meta["command"].startswith("qfb steady ")


def test_domain_errors_exit_3(capsys, tmp_path):
    assert run_command(["steady", "--eta", "1.5"]) == 3
    assert "--eta" in capsys.readouterr().err
    assert run_command(["evolve", "--dt", "-1"]) == 3
    assert run_command(["trajectories", "--eta", "0.5"]) == 3  # unravelings need eta=1
    assert run_command(["sweep", "--quantity", "qfi_steady"]) == 3  # no axis
    assert run_command(["sweep", "--sweep-axis", "bad"]) == 3
    assert run_command(["steady", "--feedback", "general", "--eps2", "1",
                        "--axis", "1,1,0"]) == 3  # non-unit axis
    # no partial output was written on failure
    assert list(tmp_path.iterdir()) == []


def test_usage_errors_exit_2():
    assert run_command(["steady", "--no-such-flag"]) == 2
    assert run_command([]) == 2
    assert run_command(["nonsense"]) == 2


def test_accuracy_error_exit_4(capsys):
    # coarse step trips the integrator's step-halving guard
    assert run_command(["evolve", "--eta", "0.5", "--dt", "0.05", "--t-max", "2",
                        "--grid-n", "5"]) == 4
    assert "accuracy" in capsys.readouterr().err


def test_evolve_output(tmp_path):
    code, table = _run_to_file(
        ["evolve", "--eta", "0.5", "--t-max", "2", "--grid-n", "9"], tmp_path / "e.csv")
    assert code == 0
    assert table.columns == ["t", "rho11", "re_rho12", "im_rho12", "rx", "ry", "rz"]
    assert table.rows.shape == (9, 7)
    assert table.rows[0, 1] == pytest.approx(1.0)  # excited initial state
    # Bloch and matrix entries stay consistent
    assert np.allclose(table.rows[:, 6], 2.0 * table.rows[:, 1] - 1.0, atol=1e-8)


def test_qfi_curve_output(tmp_path):
    code, table = _run_to_file(
        ["qfi-curve", "--eta", "0.5", "--t-max", "2", "--grid-n", "5"], tmp_path / "q.csv")
    assert code == 0
    assert table.columns == ["t", "qfi"]
    assert table.rows[0, 1] == 0.0
    assert np.all(table.rows[1:, 1] > 0.0)


def test_sweep_output(tmp_path):
    code, table = _run_to_file(
        ["sweep", "--sweep-axis", "eta=0.3:0.9:4", "--sweep-axis", "beta=0:3.2:2",
         "--quantity", "qfi_steady"], tmp_path / "sw.csv")
    assert code == 0
    assert table.columns == ["eta", "beta", "qfi_steady"]
    assert table.rows.shape == (8, 3)
    assert table.meta["missing"] == "0"


def test_optimize_output(tmp_path):
    code, table = _run_to_file(
        ["optimize", "--feedback", "xy", "--eta", "0.5", "--quantity",
         "qfi_steady", "--grid-n", "21"], tmp_path / "o.csv")
    assert code == 0
    assert float(table.meta["best_lambda"]) == pytest.approx(1.0, abs=0.1)
    assert float(table.meta["best_beta"]) == pytest.approx(np.pi, abs=0.2)
    assert float(table.meta["best_value"]) == pytest.approx(8.0 / 9.0, rel=1e-3)


def test_trajectories_single_and_ensemble(tmp_path):
    argv = ["trajectories", "--eta", "1", "--t-max", "1", "--dt", "0.01",
            "--seed", "9"]
    code, single = _run_to_file(argv, tmp_path / "t1.csv")
    assert code == 0
    assert single.columns == ["t", "rx", "ry", "rz", "photocurrent"]
    assert single.meta["seed"] == "9"
    assert np.isnan(single.rows[-1, 4])  # no current sample beyond the last step
    code, ens = _run_to_file(argv + ["--ntraj", "20"], tmp_path / "t2.csv")
    assert code == 0
    assert ens.columns == ["t", "rx", "ry", "rz", "se_rx", "se_ry", "se_rz"]
    assert ens.meta["ntraj"] == "20"
    code, jump = _run_to_file(argv + ["--unraveling", "jump"], tmp_path / "t3.csv")
    assert code == 0
    assert run_command(argv + ["--unraveling", "jump", "--ntraj", "5"]) == 3


def test_reproduce_writes_tables_manifest_and_figure(tmp_path):
    outdir = tmp_path / "rep"
    assert run_command(["reproduce", "--fig", "fig6", "--outdir", str(outdir),
                        "--grid-n", "9", "--t-max", "4"]) == 0
    assert (outdir / "fig6_panel1.csv").exists()
    assert (outdir / "manifest.csv").exists()
    png = outdir / "fig6.png"
    assert png.exists() and png.stat().st_size > 1000
    table = read_table(outdir / "fig6_panel1.csv")
    assert table.columns[0] == "t"
    assert len(table.columns) == 5  # one curve per panel efficiency
    manifest = (outdir / "manifest.csv").read_text()
    assert "fig6,fig6_panel1.csv" in manifest


def test_reproduce_no_plot_skips_figures(tmp_path):
    outdir = tmp_path / "rep"
    assert run_command(["reproduce", "--fig", "fig6", "--outdir", str(outdir),
                        "--grid-n", "5", "--t-max", "2", "--no-plot"]) == 0
    assert (outdir / "fig6_panel1.csv").exists()
    assert not (outdir / "fig6.png").exists()


def test_selftest_passes(capsys):
    assert run_command(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and "[FAIL]" not in out
