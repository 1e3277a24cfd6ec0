import json
import subprocess
import sys

import numpy as np
import pytest

from sadsdirac.cli import load_config, main, resolve_config


def run_cli(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def strip_timestamp(text):
    doc = json.loads(text)
    doc["header"].pop("timestamp")
    return doc


def test_horizon_json(tmp_path, capsys):
    out = tmp_path / "h.json"
    code, _, _ = run_cli(["horizon", "--M", "1", "--l", "1", "--output", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert abs(doc["r_sads"] - 1.0) < 1e-12
    assert abs(doc["kappa"] - 2.0) < 1e-12
    assert doc["header"]["program"] == "sadsdirac"
    assert doc["header"]["config"]["M"] == 1.0


def test_stdout_when_no_output(capsys):
    code, out, _ = run_cli(["horizon", "--M", "1", "--l", "10"], capsys)
    assert code == 0
    assert abs(json.loads(out)["r_sads"] - 1.9282993096291294) < 1e-12


@pytest.mark.parametrize(
    "args",
    [
        ["horizon", "--l", "0"],
        ["horizon", "--M", "-1"],
        ["jost", "--lambda-im", "-5"],
        ["jost", "--kind", "Phi9"],
        ["resonances", "--im-min", "-5"],
        ["resolvent", "--seed-p", "1", "--seed-q", "1", "--lambda-im", "1"],
        ["horizon", "--bogus", "1"],
        ["nonsense"],
        ["potentials", "--M", "abc"],
    ],
)
def test_invalid_input_exit_1_without_file(tmp_path, capsys, args):
    out = tmp_path / "o.json"
    code, _, err = run_cli(args + ["--output", str(out)] if args != ["nonsense"] else args, capsys)
    assert code == 1
    assert json.loads(err.strip().splitlines()[-1])["exit"] == 1
    assert not out.exists()


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nM = 2\nl = 3\n")
    assert load_config(str(cfg)) == {"M": 2.0, "l": 3.0}
    c = resolve_config("horizon", load_config(str(cfg)), {"l": 1.0})
    assert c["M"] == 2.0 and c["l"] == 1.0 and c["s"] == 0.0
    out = tmp_path / "h.json"
    code, _, _ = run_cli(["horizon", "--config", str(cfg), "--l", "1", "--output", str(out)], capsys)
    assert code == 0
    assert json.loads(out.read_text())["header"]["config"]["l"] == 1.0


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("M 2\n")
    code, _, _ = run_cli(["horizon", "--config", str(cfg)], capsys)
    assert code == 1
    cfg.write_text("colour = red\n")
    code, _, _ = run_cli(["horizon", "--config", str(cfg)], capsys)
    assert code == 1


def test_reproducible_bytes_apart_from_timestamp(tmp_path, capsys):
    out = tmp_path / "a.json"
    args = ["jost", "--lambda-re", "1", "--lambda-im", "0.2", "--n-grid", "41", "--format", "json", "--output", str(out)]
    texts = []
    for _ in range(2):
        assert run_cli(args, capsys)[0] == 0
        texts.append([ln for ln in out.read_text().splitlines() if '"timestamp"' not in ln])
    assert texts[0] == texts[1]
    assert strip_timestamp(out.read_text())["kind"] == "Phi3"


def test_csv_output(tmp_path, capsys):
    out = tmp_path / "p.csv"
    code, _, _ = run_cli(["potentials", "--n-grid", "11", "--format", "csv", "--output", str(out)], capsys)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# ") and lines[1].startswith("# ")
    assert json.loads(lines[1][2:])["regime"] == "sub"
    assert lines[2] == "x,A,B,norm_Vm"
    data = np.loadtxt(out, delimiter=",", comments="#", skiprows=3)
    assert data.shape == (11, 4)
    assert data[0, 0] == -8.0 and data[-1, 0] == -0.2


def test_boundary_command_reports_condition(tmp_path, capsys):
    out = tmp_path / "b.json"
    code, _, _ = run_cli(["boundary", "--lambda-im", "1", "--n-grid", "21", "--x-hi=-1e-6",
                          "--format", "json", "--output", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["report"]["satisfied"]
    assert doc["columns"][0] == "x" and len(doc["data"]) == 21


def test_resolvent_command(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run_cli(["resolvent", "--lambda-re", "0", "--lambda-im", "1", "--n-grid", "801",
                          "--format", "json", "--output", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["weighted"] is False
    assert doc["residual"] < 1e-3


def test_resolvent_input_file(tmp_path, capsys):
    x = np.linspace(-6.0, -0.5, 301)
    f = np.exp(-((x + 3.0) ** 2))
    src = tmp_path / "f.csv"
    np.savetxt(src, np.column_stack([x, f, 0 * x, 0 * x, 0 * x, 0 * x, f, 0 * x, 0 * x]), delimiter=",",
               header="x,f1_re,f1_im,f2_re,f2_im,f3_re,f3_im,f4_re,f4_im", comments="")
    out = tmp_path / "r.csv"
    code, _, err = run_cli(["resolvent", "--lambda-im", "1", "--input", str(src), "--format", "csv", "--output", str(out)], capsys)
    assert code == 0, err
    data = np.loadtxt(out, delimiter=",", comments="#", skiprows=3)
    assert data.shape[0] == 301


def test_at_resonance_exit_3(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, err = run_cli(["resolvent", "--lambda-re", "0.6043131372935", "--lambda-im", "-0.2514932564023",
                            "--output", str(out)], capsys)
    assert code == 3
    assert json.loads(err)["exit"] == 3
    assert not out.exists()


def test_resonances_upper_half_plane_empty(tmp_path, capsys):
    out = tmp_path / "res.json"
    field = tmp_path / "field.csv"
    code, _, err = run_cli(["resonances", "--re-min", "0.1", "--re-max", "5", "--im-min", "0.1", "--im-max", "2",
                            "--nx", "5", "--ny", "4", "--threads", "1", "--output", str(out)], capsys)
    assert code == 0, err
    assert json.loads(out.read_text())["resonances"] == []
    # a pole-free rectangle just below the axis also gives an empty list
    code, _, err = run_cli(["resonances", "--re-min", "2", "--re-max", "2.6", "--im-min", "-0.05",
                            "--im-max=-1e-3", "--nx", "4", "--ny", "4", "--threads", "1",
                            "--output", str(out), "--field", str(field)], capsys)
    assert code == 0, err
    doc = json.loads(out.read_text())
    assert doc["resonances"] == []
    assert np.loadtxt(field, delimiter=",", comments="#", skiprows=2).shape == (16, 6)


def test_help_and_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "sadsdirac.cli", "resonances", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "--im-min" in r.stdout and "--threads" in r.stdout
