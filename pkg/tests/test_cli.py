import json
import math
import subprocess

import numpy as np
import pytest
from click.testing import CliRunner

from windowbands.cli import main
from windowbands.eigendata import dump_eigendata, load_eigendata


@pytest.fixture
def runner():
    return CliRunner()


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


CELL_CFG = {
    "height": 1.0,
    "nx": 32,
    "ny": 32,
    "potential": {"kind": "tilted", "params": {}},
    "num_modes": 3,
    "index": 0,
}


def test_cell_solve_and_bands_pipeline(runner, tmp_path):
    cfg = _write(tmp_path / "cell.json", CELL_CFG)
    eig = tmp_path / "eig.json"
    r = runner.invoke(main, ["cell-solve", "--config", cfg, "--out", str(eig)])
    assert r.exit_code == 0, r.output
    obj = json.loads(eig.read_text())
    assert set(obj) >= {"lambda0", "k", "traces", "diagnostics"}
    assert obj["k"] == 1
    assert max(obj["diagnostics"]["residuals"]) < 1e-6

    csv = tmp_path / "bands.csv"
    r = runner.invoke(
        main,
        ["bands", "--eigendata", str(eig), "--out", str(csv), "--samples", "64"],
    )
    assert r.exit_code == 0, r.output
    lines = csv.read_text().splitlines()
    assert lines[0] == "theta,lambda01,lambda10"
    assert len(lines) == 65
    # k = 1: lambda10 column is empty
    assert lines[1].endswith(",")
    summary = json.loads((tmp_path / "bands.summary.json").read_text())
    assert summary["k"] == 1
    assert {iv["order"] for iv in summary["intervals"]} == {"log_band"}


def test_cell_solve_bad_config_exits_2(runner, tmp_path):
    cfg = _write(tmp_path / "cell.json", {"nx": 4})
    r = runner.invoke(main, ["cell-solve", "--config", cfg, "--out", str(tmp_path / "o")])
    assert r.exit_code == 2
    err = json.loads(r.stderr.strip().splitlines()[-1])
    assert err["error"] == "GridError"


def test_cell_solve_missing_config_exits_2(runner, tmp_path):
    r = runner.invoke(
        main, ["cell-solve", "--config", str(tmp_path / "no.json"), "--out", str(tmp_path / "o")]
    )
    assert r.exit_code == 2


def test_bands_rejects_degenerate_eigendata(runner, tmp_path):
    eig = tmp_path / "deg.json"
    eig.write_text(
        json.dumps(
            {
                "lambda0": 0.0,
                "k": 1,
                "traces": [
                    {
                        "value_plus": [-1.0, 0.0],
                        "value_minus": [1.0, 0.0],
                        "deriv_plus": [0.0, 0.0],
                        "deriv_minus": [0.0, 0.0],
                    }
                ],
            }
        )
    )
    r = runner.invoke(main, ["bands", "--eigendata", str(eig), "--out", str(tmp_path / "b.csv")])
    assert r.exit_code == 2
    err = json.loads(r.stderr.strip().splitlines()[-1])
    assert err["error"] == "NondegeneracyViolated"


def test_figures_cases(runner, tmp_path):
    for case in (1, 2):
        csv = tmp_path / f"fig{case}.csv"
        r = runner.invoke(
            main, ["figures", "--case", str(case), "--out", str(csv), "--samples", "256"]
        )
        assert r.exit_code == 0, r.output
        lines = csv.read_text().splitlines()
        assert lines[0] == "theta,lambda10"
        body = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        assert body.shape == (256, 2)
        arg = body[np.argmax(body[:, 1]), 0]
        if case == 1:
            assert min(abs(arg - s) for s in (0.0, math.pi, 2 * math.pi)) < 0.05
        else:
            assert 0.1 < arg < math.pi - 0.1 or math.pi + 0.1 < arg < 2 * math.pi - 0.1


def test_figures_plot_renders_png(runner, tmp_path):
    csv = tmp_path / "fig.csv"
    r = runner.invoke(
        main, ["figures", "--case", "1", "--out", str(csv), "--samples", "64", "--plot"]
    )
    assert r.exit_code == 0, r.output
    png = (tmp_path / "fig.png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_verify_inner_report(runner):
    r = runner.invoke(main, ["verify-inner"])
    assert r.exit_code == 0, r.output
    assert "harmonicity" in r.output
    assert "far-field" in r.output
    assert "sin-argument" in r.output


def test_validate_trend_failure_exits_3(runner, tmp_path):
    cfg = _write(
        tmp_path / "val.json",
        {
            "k": 1,
            "epsilons": [0.08, 0.04, 0.02],
            "thetas": [math.pi / 2],
            "nwin": 6,
            "hmax": 1.0 / 32,
            "ratio_tol1": 1e-6,
        },
    )
    out = tmp_path / "rates.csv"
    r = runner.invoke(main, ["validate", "--config", cfg, "--out", str(out)])
    assert r.exit_code == 3
    err = json.loads(r.stderr.strip().splitlines()[-1])
    assert err["error"] == "TrendViolation"
    # artifacts are still written before the failure propagates
    lines = out.read_text().splitlines()
    assert lines[0] == "epsilon,theta,j,lambda,r_diagnostic"
    assert len(lines) == 4
    assert "FAIL" in (tmp_path / "rates.summary.txt").read_text()


def test_validate_passes_at_documented_tolerance(runner, tmp_path):
    cfg = _write(
        tmp_path / "val.json",
        {
            "k": 1,
            "epsilons": [0.08, 0.04, 0.02],
            "thetas": [math.pi / 2],
            "nwin": 6,
            "hmax": 1.0 / 32,
        },
    )
    out = tmp_path / "rates.csv"
    r = runner.invoke(main, ["validate", "--config", cfg, "--out", str(out)])
    assert r.exit_code == 0, r.output
    assert "PASS" in r.output
    rows = out.read_text().splitlines()[1:]
    eps_col = [float(ln.split(",")[0]) for ln in rows]
    assert sorted(set(eps_col), reverse=True) == [0.08, 0.04, 0.02]


def test_validate_bad_window_exits_2(runner, tmp_path):
    cfg = _write(tmp_path / "val.json", {"k": 1, "epsilons": [0.6, 0.5, 0.4]})
    r = runner.invoke(main, ["validate", "--config", cfg, "--out", str(tmp_path / "o.csv")])
    assert r.exit_code == 2


def test_eigendata_round_trip_through_cli_files(runner, tmp_path):
    cfg = _write(tmp_path / "cell.json", CELL_CFG)
    eig = tmp_path / "eig.json"
    r = runner.invoke(main, ["cell-solve", "--config", cfg, "--out", str(eig)])
    assert r.exit_code == 0
    data = load_eigendata(eig)
    again = tmp_path / "eig2.json"
    dump_eigendata(data, again)
    assert load_eigendata(again) == data
    dump_eigendata(load_eigendata(again), tmp_path / "eig3.json")
    assert (tmp_path / "eig3.json").read_bytes() == again.read_bytes()


def test_console_script_entry_point():
    proc = subprocess.run(
        ["windowbands", "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "windowbands" in proc.stdout
