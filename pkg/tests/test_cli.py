import csv
import io
import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from ramanujan_bigraphs.bigraph import Bigraph
from ramanujan_bigraphs.cli import dumps, eigen_csv, main
from ramanujan_bigraphs.spectral import SpectrumReport, gram_spectrum, with_exact_kernel

Y27 = ["--p", "2", "--q", "7", "--schreier", "projective-plane"]
ISO25 = ["--p", "2", "--q", "5", "--schreier", "isotropic"]


def run(*args):
    res = CliRunner().invoke(main, list(args))
    return res.exit_code, res.output


def test_construct_x52():
    code, out = run("construct", "--lattice", "eisenstein", "--p", "5", "--q", "2")
    assert code == 0
    assert json.loads(out)["schema_version"] == 1
    g = Bigraph.from_json(out)
    assert (g.n_left, g.K + 1, g.k + 1) == (72, 126, 6)


def test_pipeline_isotropic():
    code, out = run("pipeline", "--lattice", "eisenstein", *ISO25)
    assert code == 0
    payload = json.loads(out)
    assert payload["verdict"]["label"] == "fully Ramanujan"
    assert payload["schema_version"] == 1


@pytest.mark.parametrize("args", [
    ["construct", "--lattice", "eisenstein", "--p", "3", "--q", "5"],
    ["construct", "--p", "2", "--q", "2"],
    ["construct", "--p", "2", "--q", "9"],
    ["complex", "--p", "5", "--q", "2"],
    ["walk", "--t-max", "5", *Y27],
])
def test_config_errors_exit_2(args):
    code, _ = run(*args)
    assert code == 2


def test_budget_exit_3():
    code, _ = run("spectrum", "--gram-budget", "10", *Y27)
    assert code == 3


def test_spectrum_roundtrip(tmp_path):
    out = tmp_path / "s.json"
    code, _ = run("spectrum", *Y27, "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    rep = SpectrumReport.from_json(json.dumps(payload["spectrum"]))
    assert rep.to_dict() == payload["spectrum"]
    assert rep.E_exact == rep.E_numeric == 0


def test_spectrum_csv_sorted(tmp_path):
    path = tmp_path / "b.csv"
    assert run("spectrum", *Y27, "--csv", str(path))[0] == 0
    rows = list(csv.DictReader(io.StringIO(path.read_text())))
    keys = [(-round(float(r["abs"]), 12), round(float(r["arg"]), 12)) for r in rows]
    assert keys == sorted(keys)
    assert len(rows) == 2 * 57 * 9  # B acts on the 2N directed edges, N = 57 (K + 1)


def test_eigen_csv_order():
    text = eigen_csv(np.array([1j, -2, 1, 2, -1j]))
    vals = [complex(float(r.split(",")[0]), float(r.split(",")[1])) for r in text.splitlines()[1:]]
    assert vals == [2, -2, -1j, 1, 1j]


@pytest.mark.parametrize("t_max", [0, 6, 12])
def test_walk_csv_rows(tmp_path, t_max):
    path = tmp_path / "w.csv"
    assert run("walk", *Y27, "--t-max", str(t_max), "--csv", str(path))[0] == 0
    assert len(path.read_text().splitlines()) == 1 + t_max // 2 + 1


@pytest.mark.parametrize("args", [
    ["pipeline", *Y27],
    ["clash", *Y27, "--trials", "20", "--seed", "5"],
    ["zeta", *Y27, "--m-max", "8"],
    ["walk", "--kind", "srw", *Y27, "--t-max", "10"],
])
def test_byte_identical_reruns(args):
    first, second = run(*args), run(*args)
    assert first[0] == 0 and first == second


def test_nonfinite_serialization():
    text = dumps({"a": -math.inf, "b": math.inf, "c": math.nan, "d": np.float64(2.5)})
    d = json.loads(text)
    assert (d["a"], d["b"], d["c"], d["d"]) == ("-inf", "inf", "nan", 2.5)


def test_input_reload(tmp_path):
    g = tmp_path / "g.json"
    assert run("construct", *Y27, "--out", str(g))[0] == 0
    code, out = run("classify", "--input", str(g))
    assert code == 0 and json.loads(out)["verdict"]["label"] == "fully Ramanujan"


def test_clash_records_seed():
    code, out = run("clash", *Y27, "--trials", "10", "--seed", "9")
    d = json.loads(out)
    assert code == 0 and d["seed"] == 9
