import csv
import io
import json
import math

import pytest

from tbplankton import cli
from tbplankton.boubaker import eval as beval, generate
from tbplankton.config import OUTPUT_ENV, RunConfig, load_config
from tbplankton.integrate import integrate as real_integrate

BASE = ["--mu", "0", "--alpha", "1.9", "--lambda", "0.057", "--beta", "1.3", "--gamma", "0.5",
        "--x0", "0.9", "--y0", "0.5"]


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_baseline(tmp_path, capsys):
    code, out, _ = run(["simulate", *BASE, "--out", str(tmp_path)], capsys)
    assert code == 0
    assert "regime: StableFocus" in out
    assert "Interior: x = 0.04506245" in out
    for name in ("trajectory.csv", "timeseries.csv", "orbit.csv", "run.json", "result.json"):
        assert (tmp_path / name).exists()
    header = (tmp_path / "timeseries.csv").read_text().splitlines()[0]
    assert header == "t,x,y"
    assert json.loads((tmp_path / "result.json").read_text())["label"] == "StableFocus"


def test_simulate_is_byte_identical(tmp_path, capsys):
    run(["simulate", *BASE, "--t-end", "100", "--out", str(tmp_path)], capsys)
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    run(["simulate", *BASE, "--t-end", "100", "--out", str(tmp_path)], capsys)
    assert first == {p.name: p.read_bytes() for p in tmp_path.iterdir()}


def test_run_json_round_trips(tmp_path, capsys):
    run(["simulate", *BASE, "--beta", "0.7", "--t-end", "200", "--out", str(tmp_path)], capsys)
    cfg = load_config(tmp_path / "run.json")
    assert cfg.model.beta == 0.7 and cfg.t_end == 200
    assert RunConfig.from_dict(json.loads((tmp_path / "run.json").read_text())) == cfg
    code, out, _ = run(["simulate", "--config", str(tmp_path / "run.json"),
                        "--out", str(tmp_path / "again")], capsys)
    assert code == 0 and "StableLimitCycle" in out


def test_output_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    run(["simulate", "--t-end", "30"], capsys)
    assert (tmp_path / "env" / "orbit.csv").exists()


@pytest.mark.parametrize("flags", [["--gamma", "-1"], ["--lambda", "0"], ["--x0", "nan"]])
def test_simulate_validation_exit(tmp_path, capsys, flags):
    code, _, err = run(["simulate", *flags, "--out", str(tmp_path)], capsys)
    assert code == 2 and "error" in err


def test_unknown_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["simulate", "--delta", "1"])
    assert exc.value.code == 2


def test_terminal_failure_exit_3(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "integrate", lambda *a, **k: real_integrate(*a, **k, max_steps=5))
    code, out, _ = run(["simulate", "--out", str(tmp_path)], capsys)
    assert code == 3
    assert "IntegrationError" in out
    assert (tmp_path / "timeseries.csv").exists()


def test_simulate_bpes(tmp_path, capsys):
    code, out, _ = run(["simulate", *BASE, "--method", "bpes", "--n0", "20",
                        "--out", str(tmp_path)], capsys)
    assert code == 0
    assert "bpes vs reference" in out
    for name in ("bpes_timeseries.csv", "reference_tm.csv", "bpes_coefficients.json"):
        assert (tmp_path / name).exists()
    result = json.loads((tmp_path / "result.json").read_text())
    assert math.isfinite(result["bpes"]["max_abs_error"])
    assert result["bpes"]["t_m"] == pytest.approx(6.44641, abs=1e-5)


def test_simulate_bpes_t_m_override(tmp_path, capsys):
    run(["simulate", "--method", "bpes", "--n0", "6", "--t-m", "6.66", "--t-end", "30",
         "--out", str(tmp_path)], capsys)
    assert json.loads((tmp_path / "result.json").read_text())["bpes"]["t_m"] == 6.66
    assert load_config(tmp_path / "run.json").bpes.t_m == 6.66


def test_stability_baseline(capsys):
    code, out, _ = run(["stability", *BASE], capsys)
    report = json.loads(out)
    assert code == 0
    kinds = {e["kind"]: e for e in report["equilibria"]}
    assert kinds["Origin"]["verdict"] == "Saddle"
    assert kinds["PhytoOnly"]["verdict"] == "Saddle"
    assert kinds["Interior"]["x"] == pytest.approx(0.0450625, abs=1e-7)


def test_stability_fractional_mu(capsys):
    code, out, _ = run(["stability", "--mu", "0.5"], capsys)
    report = json.loads(out)
    assert code == 0
    interior = [e for e in report["equilibria"] if e["kind"] == "Interior"]
    assert interior and interior[0]["verdict"]
    assert "unsupported (non-integer mu)" in out


def test_stability_report_round_trips(tmp_path, capsys):
    run(["stability", "--out", str(tmp_path / "s.json")], capsys)
    assert load_config(tmp_path / "s.json").model == RunConfig().model


def test_stability_lambda_zero(capsys):
    code, _, err = run(["stability", "--lambda", "0"], capsys)
    assert code == 2 and "lambda" in err.lower()


def test_sweep_summary(tmp_path, capsys):
    code, out, _ = run(["sweep", *BASE, "--vary", "gamma", "--values", "0.1,0.5,0.8,1.0,2.0",
                        "--out", str(tmp_path)], capsys)
    assert code == 0
    lines = [ln.split() for ln in out.splitlines()[1:]]
    assert [ln[0] for ln in lines] == ["StableFocus", "StableLimitCycle", "Extinction"]
    assert lines[-1][1] == "2"
    rows = list(csv.DictReader(io.StringIO((tmp_path / "sweep.csv").read_text())))
    assert len(rows) == 5
    # runs are disjoint and cover the grid
    counts = [int(ln[-2].strip("(")) for ln in lines]
    assert sum(counts) == len(rows)


def test_sweep_single_point(tmp_path, capsys):
    code, out, _ = run(["sweep", "--vary", "beta", "--from", "1.3", "--to", "1.3", "--points", "1",
                        "--out", str(tmp_path)], capsys)
    assert code == 0
    assert len((tmp_path / "sweep.csv").read_text().splitlines()) == 2


def test_sweep_from_saved_config(tmp_path, capsys):
    run(["sweep", "--vary", "beta", "--values", "0.7,1.3", "--out", str(tmp_path / "a")], capsys)
    first = (tmp_path / "a" / "sweep.csv").read_bytes()
    run(["sweep", "--config", str(tmp_path / "a" / "sweep.json"), "--out", str(tmp_path / "b")],
        capsys)
    assert (tmp_path / "b" / "sweep.csv").read_bytes() == first


def test_sweep_requires_grid(capsys):
    assert run(["sweep", "--vary", "beta"], capsys)[0] == 2
    assert run(["sweep"], capsys)[0] == 2


def test_roots(tmp_path, capsys):
    code, out, _ = run(["roots", "--q-max", "5", "--out", str(tmp_path / "r.csv")], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "q,v_q" and len(lines) == 6
    assert float(lines[1].split(",")[1]) == pytest.approx(2 ** 0.25, abs=1e-12)
    for line in lines[1:]:
        q, v = line.split(",")
        assert abs(beval(generate(4 * int(q)), float(v))) < 1e-9
    assert (tmp_path / "r.csv").read_text() == out


def test_roots_rejects_zero(capsys):
    assert run(["roots", "--q-max", "0"], capsys)[0] == 2
