import csv
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from cvsteering import __version__


def run(*args, env=None):
    cmd = [sys.executable, "-m", "cvsteering", *args]
    return subprocess.run(cmd, capture_output=True, text=True, env=env)


@pytest.fixture(scope="module")
def schema():
    text = resources.files("cvsteering").joinpath("schemas/report.schema.json").read_text()
    return json.loads(text)


def test_help_lists_subcommands():
    cp = run("--help")
    assert cp.returncode == 0, cp.stderr
    for sub in ("analyze", "table", "figure", "bell-opt", "version"):
        assert sub in cp.stdout


def test_version():
    cp = run("version")
    assert cp.returncode == 0
    assert cp.stdout.strip() == __version__


def test_analyze_tmsv(schema):
    cp = run("analyze", "tmsv:r=1", "--criteria", "reid,entropic")
    assert cp.returncode == 0, cp.stderr
    out = json.loads(cp.stdout)
    jsonschema.validate(out, schema)
    assert out["reid"]["product"] == pytest.approx(0.01766, abs=1e-5)
    assert out["entropic"]["ratio"] == pytest.approx(2.616, abs=1e-3)
    assert "bell" not in out


def test_analyze_vacuum_all_criteria(schema):
    cp = run("analyze", "lg:n=0,m=0", "--threads", "1")
    assert cp.returncode == 0, cp.stderr
    out = json.loads(cp.stdout)
    jsonschema.validate(out, schema)
    assert out["entropic"]["ratio"] == pytest.approx(1.0, abs=1e-3)
    assert out["reid"]["four_product"] == pytest.approx(1.0)
    assert out["bell"]["ratio"] == pytest.approx(1.0, abs=1e-9)
    assert out["bell"]["violation"] is False


def test_analyze_noon_entropic(tmp_path, schema):
    path = tmp_path / "noon.json"
    cp = run("analyze", "noon:N=1", "--criteria", "entropic", "--out", str(path))
    assert cp.returncode == 0, cp.stderr
    out = json.loads(path.read_text())
    jsonschema.validate(out, schema)
    assert out["entropic"]["lhs"] == pytest.approx(2.05, abs=0.02)
    assert out["entropic"]["steerable"] is True


def test_analyze_csv_format():
    cp = run("analyze", "lg:n=1,m=0", "--criteria", "reid", "--format", "csv")
    assert cp.returncode == 0, cp.stderr
    rows = dict(csv.reader(cp.stdout.splitlines()))
    assert rows["key"] == "value"
    assert float(rows["reid.four_product"]) == pytest.approx(2.25)


@pytest.mark.parametrize(
    "args",
    [
        ("analyze", "lg:n=1"),
        ("analyze", "bogus:x=1"),
        ("analyze", "tmsv:r=1", "--criteria", "reid,magic"),
        ("analyze", "tmsv:r=1", "--grid-nodes", "0"),
        ("table", "nope"),
        ("figure", "fig9"),
        ("bell-opt", "lg:n=1,m=0", "--free-r"),
    ],
)
def test_parse_errors_exit_2(args):
    cp = run(*args)
    assert cp.returncode == 2
    assert cp.stderr


def test_numeric_failure_exits_3():
    cp = run("analyze", "sub:r=0,order=1,k=1", "--criteria", "reid")
    assert cp.returncode == 3
    assert "DegenerateStateError" in cp.stderr


def test_bell_opt_deterministic(tmp_path, schema):
    outs = []
    for name in ("a", "b"):
        path = tmp_path / f"{name}.json"
        cp = run("bell-opt", "noon:N=1", "--starts", "4", "--seed", "7", "--threads", "1",
                 "--out", str(path), "--trace", str(tmp_path / f"{name}.csv"))
        assert cp.returncode == 0, cp.stderr
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    out = json.loads(outs[0])
    jsonschema.validate(out, schema)
    assert out["abs_bi"] == pytest.approx(2.2387, abs=1e-3)


def test_thread_env_override(tmp_path):
    import os

    env = dict(os.environ, CVSTEERING_THREADS="2")
    cp = run("bell-opt", "lg:n=1,m=0", "--starts", "2", env=env)
    assert cp.returncode == 0, cp.stderr
    bad = dict(os.environ, CVSTEERING_THREADS="many")
    assert run("bell-opt", "lg:n=1,m=0", "--starts", "2", env=bad).returncode != 0


def test_figure_fig1_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("figure", "fig1", "--out", str(a)).returncode == 0
    assert run("figure", "fig1", "--out", str(b)).returncode == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.DictReader(open(a)))
    assert rows[0].keys() == {"n", "reid_product", "bound"}
    assert float(rows[1]["reid_product"]) == pytest.approx(0.5625)
    assert all(float(r["reid_product"]) >= 0.25 for r in rows)


def test_figure_fig3a():
    cp = run("figure", "fig3a")
    assert cp.returncode == 0, cp.stderr
    rows = list(csv.DictReader(cp.stdout.splitlines()))
    assert all(float(r["tmsv"]) < 0.25 for r in rows)
    above = [float(r["r"]) for r in rows if float(r["sub1"]) > 0.25]
    below = [float(r["r"]) for r in rows if float(r["sub1"]) < 0.25]
    assert max(above) < 0.5366 < min(below)


def test_figure_fig4(tmp_path):
    path = tmp_path / "fig4.csv"
    assert run("figure", "fig4", "--out", str(path)).returncode == 0
    rows = list(csv.DictReader(open(path)))
    assert max(float(r["p_n1"]) for r in rows) > max(float(r["p_n4"]) for r in rows)
