import csv
import json
import shutil
import subprocess
import sys

import pytest

from ineqforge import __version__, cli
from ineqforge.errors import ParameterError


def run_json(capsys, argv):
    code = cli.run(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_constants(capsys):
    code, d = run_json(capsys, ["constants", "--N", "5", "--m", "1"])
    assert code == cli.EXIT_PASS
    assert d["constants"]["c1"] == 1.5625
    assert d["version"] == __version__
    assert d["config"]["subcommand"] == "constants"


def test_verify_pass(capsys):
    code, d = run_json(capsys, ["verify", "--theorem", "radial-even", "--N", "5", "--m", "1",
                                "--theta", "0.2", "--family", "gaussians"])
    assert code == 0
    assert d["passed"] is True


def test_verify_domain_error(capsys):
    code = cli.run(["verify", "--theorem", "radial-even", "--N", "4", "--m", "1", "--theta", "0.2"])
    err = capsys.readouterr().err
    assert code == cli.EXIT_USAGE
    assert "requires N > 4m" in err


def test_verify_failure_exit_code(capsys):
    code, d = run_json(capsys, ["verify", "--theorem", "radial-even", "--N", "5", "--m", "1",
                                "--theta", "0.2", "--family", "gaussians", "--ratio-floor", "1e6",
                                "--no-refine"])
    assert code == cli.EXIT_FAIL
    assert d["passed"] is False


def test_lorentz_needs_parameters(capsys):
    code = cli.run(["verify", "--theorem", "lorentz", "--N", "5", "--theta", "0.2"])
    assert code == cli.EXIT_USAGE
    assert "--p" in capsys.readouterr().err


def test_lorentz_gate_message(capsys):
    code = cli.run(["verify", "--theorem", "lorentz", "--N", "5", "--p", "3", "--q", "2",
                    "--r", "5", "--theta", "0.4"])
    assert code == cli.EXIT_USAGE
    assert "r <= min{Np/(N-p)^2, Np/(N-p)}" in capsys.readouterr().err


def test_unknown_flag(capsys):
    assert cli.run(["constants", "--N", "5", "--bogus", "1"]) == cli.EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_no_subcommand(capsys):
    assert cli.run([]) == cli.EXIT_USAGE


def test_deficit_subcommand(capsys):
    code, d = run_json(capsys, ["deficit", "--case", "even", "--N", "5", "--m", "1",
                                "--theta", "0.2", "--profile", "gaussian"])
    assert code == 0
    assert d["deficit"] == pytest.approx(d["A"] - d["B"])
    assert d["interpolation_value"] > 0


def test_profile_from_file(tmp_path, capsys):
    import numpy as np
    r = np.geomspace(1e-4, 1e4, 4096)
    path = tmp_path / "u.txt"
    np.savetxt(path, np.column_stack([r, np.exp(-r ** 2)]))
    c1, a = run_json(capsys, ["deficit", "--N", "5", "--m", "1", "--profile", str(path)])
    c2, b = run_json(capsys, ["deficit", "--N", "5", "--m", "1", "--profile", "gaussian"])
    assert c1 == c2 == 0
    assert a["A"] == pytest.approx(b["A"], rel=1e-5)


def test_transform_csv(tmp_path):
    out = tmp_path / "t.csv"
    code = cli.run(["transform", "--N", "3", "--profile", "gaussian:dilation=1.7724538509055159",
                    "--rho", "0,0.5,1", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# ")
    rows = list(csv.DictReader(lines[1:]))
    assert [float(r["rho"]) for r in rows] == [0.0, 0.5, 1.0]
    import math
    for r in rows:
        assert float(r["value"]) == pytest.approx(math.exp(-math.pi * float(r["rho"]) ** 2), abs=1e-8)


@pytest.mark.parametrize("kind,params", [("lorentz", "p_star=4,r=2"), ("morrey", "p=2,alpha=2"),
                                         ("sobolev", "m=1")])
def test_norm_subcommand(capsys, kind, params):
    code, d = run_json(capsys, ["norm", "--kind", kind, "--params", params, "--N", "5",
                                "--profile", "gaussian"])
    assert code == 0
    assert d["value"] > 0


def test_talenti_plot(tmp_path, capsys):
    plot = tmp_path / "talenti.csv"
    code, d = run_json(capsys, ["talenti", "--domain", "lshape", "--forcing", "bump", "--k", "2",
                                "--n", "32", "--plot", str(plot)])
    assert code == 0 and d["passed"]
    rows = list(csv.reader(plot.read_text().splitlines()))
    assert rows[0] == ["x", "y", "u_star", "v"]
    assert len(rows) - 1 == len(d["fields"]["rho"])
    for x, y, us, v in rows[1:]:
        float(x), float(y), float(us), float(v)


def test_scan_theta_plots(tmp_path, capsys):
    p1, p2 = tmp_path / "scan.csv", tmp_path / "eps.csv"
    code, d = run_json(capsys, ["scan-theta", "--N", "5", "--m", "1", "--thetas", "0.1,0.2,1",
                                "--plot", str(p1), "--plot-epsilon", str(p2), "--plot-theta", "0.2"])
    assert code == 0
    rows = list(csv.reader(p1.read_text().splitlines()))
    assert rows[0] == ["theta", "inf_ratio"]
    assert [float(r[0]) for r in rows[1:]] == [0.1, 0.2, 1.0]
    rows = list(csv.reader(p2.read_text().splitlines()))
    assert rows[0] == ["epsilon", "ratio"]
    assert len(rows) > 3


def test_profile_rejects_unknown_keys(capsys):
    code = cli.run(["deficit", "--N", "5", "--m", "1", "--profile", "gaussian:width=2"])
    assert code == cli.EXIT_USAGE
    assert "width" in capsys.readouterr().err


def test_plot_missing_series(tmp_path):
    with pytest.raises(ParameterError):
        cli.emit_plot_data({"rows": []}, "theta-scan", str(tmp_path / "x.csv"))
    with pytest.raises(ParameterError):
        cli.emit_plot_data({}, "talenti", str(tmp_path / "x.csv"))
    with pytest.raises(ParameterError):
        cli.emit_plot_data({}, "histogram", str(tmp_path / "x.csv"))


def test_estimate_subcommand(capsys):
    code, d = run_json(capsys, ["estimate", "--N", "5", "--m", "1", "--theta", "0.2",
                                "--family", "gaussians", "--budget", "100", "--starts", "2"])
    assert code == 0
    assert d["label"] == "family-relative"
    assert d["min_ratio"] > 0


def test_chain_check_hardy_rellich(capsys):
    code, d = run_json(capsys, ["chain-check", "--kind", "hardy-rellich", "--N", "9", "--m", "2",
                                "--profile", "gaussian"])
    assert code == 0


REPLAY_CASES = [
    (["constants", "--N", "9", "--m", "2"], ".json"),
    (["verify", "--theorem", "radial-even", "--N", "5", "--m", "1", "--theta", "0.3",
      "--family", "rational", "--no-refine"], ".json"),
    (["verify", "--theorem", "radial-even", "--N", "5", "--m", "1", "--theta", "0.3",
      "--family", "rational", "--no-refine"], ".csv"),
    (["scan-theta", "--N", "5", "--m", "1", "--thetas", "0.1,0.2"], ".json"),
    (["scan-theta", "--N", "5", "--m", "1", "--thetas", "0.1,0.2"], ".csv"),
]


@pytest.mark.parametrize("argv,ext", REPLAY_CASES)
def test_config_replay_bit_identical(tmp_path, argv, ext):
    out = tmp_path / ("report" + ext)
    assert cli.run(argv + ["--out", str(out)]) in (0, 1)
    saved = tmp_path / ("saved" + ext)
    shutil.copy(out, saved)
    out.unlink()
    assert cli.run(["--config", str(saved)]) in (0, 1)
    assert out.read_bytes() == saved.read_bytes()


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"subcommand": "constants", "params": {"N": 5}, "colour": "red"}))
    assert cli.run(["--config", str(cfg)]) == cli.EXIT_USAGE


def test_threads_env_same_result(monkeypatch, capsys):
    argv = ["verify", "--theorem", "radial-even", "--N", "5", "--m", "1", "--theta", "0.2",
            "--family", "all", "--no-refine"]
    _, a = run_json(capsys, argv)
    monkeypatch.setenv("INEQ_FORGE_THREADS", "4")
    _, b = run_json(capsys, argv)
    assert a == b


def test_console_script():
    exe = shutil.which("ineqforge")
    cmd = [exe] if exe else [sys.executable, "-m", "ineqforge.cli"]
    res = subprocess.run(cmd + ["constants", "--N", "5", "--m", "1"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["constants"]["c1"] == 1.5625
