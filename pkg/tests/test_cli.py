import csv
import io
import json
import subprocess
import sys

import pytest

from lattice_approx.cbc import cbc_construct
from lattice_approx.cli import main
from lattice_approx.criterion import s_d, t_ds
from lattice_approx.korobov import CriterionContext
from lattice_approx.lattice import GeneratingVector
from lattice_approx.vectorfile import format_vector, read_vector, write_vector
from lattice_approx.weights import WeightModel

ONES2 = json.dumps({"kind": "product", "d": 2, "gammas": [1, 1]})
DECAY4 = WeightModel.product([1 / j**3 for j in range(1, 5)]).to_json()


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_vector_file_round_trip(tmp_path):
    z = GeneratingVector(7, (1, 3))
    path = tmp_path / "z.txt"
    write_vector(path, z, {"alpha": 2.0, "note": "x"})
    back, meta = read_vector(path)
    assert back == z and meta == {"alpha": "2", "note": "x"}
    bad = tmp_path / "bad.txt"
    bad.write_text("3 7\n1 2\n")
    with pytest.raises(ValueError):
        read_vector(bad)


def test_construct_one_dimensional(tmp_path, capsys):
    out = tmp_path / "z.txt"
    code, _, _ = run(capsys, "construct", "--n", "5", "--d", "1", "--weights", ONES2, "--out", str(out))
    assert code == 0
    z, meta = read_vector(out)
    assert z.z == (1,)


def test_construct_matches_library(tmp_path, capsys):
    out = tmp_path / "z.txt"
    assert run(capsys, "construct", "--n", "7", "--weights", ONES2, "--out", str(out))[0] == 0
    ctx = CriterionContext.make(2.0, WeightModel.from_json(ONES2), 7)
    res = cbc_construct(ctx)
    z, meta = read_vector(out)
    assert z == res.z
    assert float(meta["S_d"]) == s_d(ctx, res.z)
    assert out.read_text().splitlines()[:2] == format_vector(res.z).splitlines()
    again = tmp_path / "z2.txt"
    run(capsys, "construct", "--n", "7", "--weights", ONES2, "--out", str(again))
    assert again.read_bytes() == out.read_bytes()


def test_construct_errors(capsys, tmp_path):
    assert run(capsys, "construct", "--n", "8", "--weights", ONES2)[0] == 2
    assert run(capsys, "construct", "--n", "7", "--weights", "{not json")[0] == 3
    assert run(capsys, "construct", "--n", "7", "--weights", '{"kind": "bogus", "d": 1}')[0] == 3
    assert run(capsys, "construct", "--n", "7", "--weights", str(tmp_path / "missing.json"))[0] == 4


def test_weights_from_file(tmp_path, capsys):
    path = tmp_path / "w.json"
    path.write_text(ONES2)
    code, out, _ = run(capsys, "construct", "--n", "7", "--weights", str(path))
    expected = cbc_construct(CriterionContext.make(2.0, WeightModel.from_json(ONES2), 7)).z
    assert code == 0 and out.splitlines()[1] == " ".join(map(str, expected.z))


def test_criterion_values_are_library_values(tmp_path, capsys):
    vec = tmp_path / "z.txt"
    write_vector(vec, GeneratingVector(7, (1, 3)))
    code, out, _ = run(capsys, "criterion", "--vector", str(vec), "--weights", ONES2, "--oracle", "100")
    assert code == 0
    rep = json.loads(out)
    ctx = CriterionContext.make(2.0, WeightModel.from_json(ONES2), 7)
    z = GeneratingVector(7, (1, 3))
    assert rep["S_d"] == s_d(ctx, z)
    assert rep["T_ds"] == [t_ds(ctx, z.head(1)), t_ds(ctx, z)]
    assert rep["oracle_abs_diff"] <= rep["oracle_tail_bound"] + 1e-8


def test_criterion_zero_weights(tmp_path, capsys):
    vec = tmp_path / "z.txt"
    write_vector(vec, GeneratingVector(7, (1, 3)))
    zero = json.dumps({"kind": "general", "d": 2, "table": {}})
    rep = json.loads(run(capsys, "criterion", "--vector", str(vec), "--weights", zero)[1])
    assert rep["S_d"] == 0.0


def test_criterion_missing_vector(tmp_path, capsys):
    assert run(capsys, "criterion", "--vector", str(tmp_path / "nope"), "--weights", ONES2)[0] == 4


def test_indexset_lines(capsys):
    w = json.dumps({"kind": "product", "d": 1, "gammas": [1]})
    code, out, _ = run(capsys, "indexset", "--M", "10", "--weights", w)
    rows = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert code == 0 and len(rows) == 7


def test_indexset_budget(capsys):
    w = json.dumps({"kind": "product", "d": 3, "gammas": [1, 1, 1]})
    assert run(capsys, "indexset", "--M", "1e6", "--budget", "100", "--weights", w)[0] == 5


def test_approx_exact_function(tmp_path, capsys):
    vec = tmp_path / "z.txt"
    write_vector(vec, GeneratingVector(101, (1, 40)))
    func = json.dumps({"kind": "polynomial", "real": True, "terms": [[1, 0, 0.5, 0], [-1, 0, 0.5, 0], [0, 0, 1, 0]]})
    coeffs = tmp_path / "c.csv"
    code, out, _ = run(capsys, "approx", "--function", func, "--vector", str(vec), "--M", "10",
                       "--weights", ONES2, "--coefficients", str(coeffs))
    rep = json.loads(out)
    assert code == 0 and rep["l2_error"] <= 1e-12
    assert rep["coefficients_path"] == str(coeffs)
    table = list(csv.DictReader(coeffs.open()))
    assert table[0].keys() == {"h1", "h2", "re", "im"}
    got = {(int(r["h1"]), int(r["h2"])): float(r["re"]) for r in table}
    assert got[(1, 0)] == pytest.approx(0.5, abs=1e-12) and got[(0, 0)] == pytest.approx(1.0, abs=1e-12)


def test_approx_kernel_product(tmp_path, capsys):
    vec = tmp_path / "z.txt"
    write_vector(vec, GeneratingVector(31, (1, 12)))
    func = json.dumps({"kind": "kernel_product", "c": [0.5, 0.25]})
    rep = json.loads(run(capsys, "approx", "--function", func, "--vector", str(vec), "--M", "6", "--weights", ONES2)[1])
    assert 0 < rep["l2_error"] <= rep["bound"]


def test_approx_random_is_seeded(tmp_path, capsys):
    vec = tmp_path / "z.txt"
    write_vector(vec, GeneratingVector(31, (1, 12)))
    func = json.dumps({"kind": "random", "terms": 5, "radius": 6})
    args = ["approx", "--function", func, "--vector", str(vec), "--M", "6", "--weights", ONES2, "--seed", "3"]
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_bound_report(capsys):
    code, out, _ = run(capsys, "bound", "--n", "31", "--weights", ONES2, "--lambda-grid", "1,0.75")
    rep = json.loads(out)
    assert code == 0 and [r["lambda"] for r in rep["records"]] == [1.0, 0.75]
    assert rep["best"]["bound"] == min(r["bound"] for r in rep["records"])
    code, out, _ = run(capsys, "bound", "--n", "31", "--weights", ONES2)
    assert len(json.loads(out)["records"]) == 10


def test_sweep_bound_decreases(capsys, monkeypatch):
    monkeypatch.setenv("LATTICE_APPROX_THREADS", "2")
    code, out, _ = run(capsys, "sweep", "--n-list", "31,61,127,251", "--weights", DECAY4)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["n"]) for r in rows] == [31, 61, 127, 251]
    bounds = [float(r["bound"]) for r in rows]
    assert all(b > a for a, b in zip(bounds[1:], bounds))
    assert any(k.startswith("l2_error_") for k in rows[0])


def test_sweep_rejects_composite(capsys):
    assert run(capsys, "sweep", "--n-list", "31,33", "--weights", DECAY4)[0] == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "lattice_approx", "construct", "--n", "5", "--d", "1", "--weights", ONES2],
        capture_output=True, text=True, check=True,
    )
    assert proc.stdout.splitlines()[:2] == ["1 5", "1"]
