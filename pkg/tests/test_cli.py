import csv
import io
import json

import pytest

from lolab.cli import main


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


@pytest.fixture
def files(tmp_path):
    return {
        "ones": write(tmp_path, "ones.json", {"k": 1, "vectors": [[1]] * 4}),
        "line": write(tmp_path, "line.json", {"k": 2, "vectors": [[1, 2], [1, 4], [1, 8], [1, 16]]}),
        "basis": write(tmp_path, "basis.json", {"k": 2, "vectors": [[1, 0], [0, 1]] * 4}),
        "zero": write(tmp_path, "zero.json", {"type": "finite", "points": [[0]]}),
        "x1": write(tmp_path, "x1.json", {"type": "variety", "k": 2, "dim": 1, "degree": 1,
                                          "polynomials": [{"nvars": 2, "terms": [{"exps": [1, 0], "coef": "1"}]}]}),
        "parabola": write(tmp_path, "parabola.json", {"k": 2, "dim": 1, "degree": 2, "polynomials": [
            {"nvars": 2, "terms": [{"exps": [1, 0], "coef": "1"}, {"exps": [0, 2], "coef": "-1"}]}]}),
        "circle1": write(tmp_path, "circle1.json", {"k": 2, "dim": 1, "degree": 1, "polynomials": [
            {"nvars": 2, "terms": [{"exps": [2, 0], "coef": 1}, {"exps": [0, 2], "coef": 1},
                                   {"exps": [0, 0], "coef": -25}]}]}),
        "gap": write(tmp_path, "gap.json", {"generators": [[1], [2]], "radii": [1, 1]}),
        "chow": write(tmp_path, "chow.json", {"n": 4, "products": [[{"coeffs": [1, 1, 1, 1]}] * 2]}),
    }


def run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr().out


def test_rho_and_prob(files, capsys):
    code, out = run(capsys, ["rho", files["ones"]])
    assert code == 0 and json.loads(out)["rho"] == "3/8"
    code, out = run(capsys, ["prob", files["line"], files["x1"]])
    assert json.loads(out)["probability"] == "3/8"
    code, out = run(capsys, ["rho", files["ones"], "--set", files["zero"]])
    assert json.loads(out)["rho"] == "3/8"
    code, out = run(capsys, ["--seed", "5", "prob", files["ones"], files["zero"], "--mc", "2000"])
    first = json.loads(out)
    _, again = run(capsys, ["prob", files["ones"], files["zero"], "--mc", "2000", "--seed", "5"])
    assert first == json.loads(again) and first["seed"] == 5


def test_distribution_csv(files, capsys):
    code, out = run(capsys, ["--format", "csv", "rho", files["ones"], "--distribution"])
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and len(rows) == 6


def test_pack_gap_poly(files, capsys):
    code, out = run(capsys, ["pack", files["basis"]])
    assert code == 0 and json.loads(out)["b"] == 4
    code, out = run(capsys, ["gap", files["gap"], "--contains", "3"])
    res = json.loads(out)
    assert res["proper"] is False and res["coefficients"] == [1, 1]
    code, out = run(capsys, ["poly", files["chow"], "--robust", "2"])
    res = json.loads(out)
    assert code == 0 and res["robust"] is True and res["vectors"]["k"] == 2


def test_count_and_checks(files, capsys):
    code, out = run(capsys, ["count", files["parabola"], "--B", "10", "100", "--schwartz-zippel"])
    res = json.loads(out)
    assert code == 0 and [r["count"] for r in res["rows"]] == [7, 21]
    code, _ = run(capsys, ["count", files["circle1"], "--B", "5", "--schwartz-zippel"])
    assert code == 2
    code, out = run(capsys, ["hull", "--B", "10", "20", "50", "--format", "csv"])
    assert code == 0 and out.splitlines()[0] == "B,count"


def test_decouple_halasz_scan(files, capsys):
    code, out = run(capsys, ["decouple", files["ones"], files["zero"], "--I0", "0,1"])
    assert code == 0 and json.loads(out)["lhs"] == "9/64"
    code, out = run(capsys, ["halasz", files["basis"], "--blocks", "0,1;2,3;4,5;6,7"])
    assert code == 0 and json.loads(out)["rho"] == "9/64"
    code, out = run(capsys, ["experiment", "line_example", "--param", "n=6"])
    assert code == 0 and json.loads(out)["rows"][0]["exact"] == "5/16"
    code, out = run(capsys, ["scan", "varieties-(k-ell)/2", "--grid", "2,3,4,5", "--format", "csv"])
    assert code == 0 and out.startswith("b,packing")


def test_exit_codes(files, capsys):
    assert main(["--budget", "0.000001", "rho", files["line"]]) == 3
    assert main(["rho", "/nonexistent.json"]) == 1
    with pytest.raises(SystemExit):
        main(["nosuch"])
    capsys.readouterr()
