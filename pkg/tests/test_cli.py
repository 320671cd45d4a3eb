import json

import pytest

from artifact import __version__
from artifact.cli_frontend import main

ELLIPTIC = "dim 2\n2 -1\n-1 2\n-1 -1\n"


@pytest.fixture
def poly(tmp_path):
    p = tmp_path / "ell.txt"
    p.write_text(ELLIPTIC)
    return str(p)


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate(capsys, poly):
    code, out, _ = run(capsys, "validate", "--poly", poly)
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["index"] == 1 and rep["result"]["faces"] == 8
    assert rep["version"] == __version__ and rep["seed"] == 0 and rep["mode"] == "modular"


def test_validate_quintic_preset(capsys):
    code, out, _ = run(capsys, "validate", "--poly", "preset:quintic")
    assert code == 0 and json.loads(out)["result"]["faces"] == 32


def test_non_reflexive_and_garbage(capsys, tmp_path):
    sq = tmp_path / "sq.txt"
    sq.write_text("dim 2\n0 0\n3 0\n0 3\n3 3\n")
    assert run(capsys, "validate", "--poly", str(sq))[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("dim 2\n1 0\nfoo bar\n")
    code, _, err = run(capsys, "validate", "--poly", str(bad))
    assert code == 2 and "line 3" in err
    assert run(capsys, "validate", "--poly", str(tmp_path / "missing.txt"))[0] == 2


def test_chiral_reports_seed_and_total(capsys, poly):
    code, out, _ = run(capsys, "chiral", "--poly", poly, "--seed", "4")
    rep = json.loads(out)
    assert code == 0 and rep["result"]["total"] == 4
    assert rep["result"]["coefficients"] == {"f": "seed:4", "g": "seed:5"}


def test_reports_are_byte_identical_and_cached(capsys, poly, tmp_path):
    cache = str(tmp_path / "cache")
    first = run(capsys, "r1", "--poly", poly, "--seed", "2", "--cache-dir", cache)[1]
    warm = run(capsys, "r1", "--poly", poly, "--seed", "2", "--cache-dir", cache)[1]
    cold = run(capsys, "r1", "--poly", poly, "--seed", "2")[1]
    assert first == warm == cold
    assert len(list((tmp_path / "cache").iterdir())) == 1


def test_jobs_do_not_change_output(capsys, poly):
    a = run(capsys, "chiral", "--poly", poly, "--jobs", "1")[1]
    b = run(capsys, "chiral", "--poly", poly, "--jobs", "4")[1]
    assert a == b


def test_degenerate_coefficients_exit_3(capsys, poly, tmp_path):
    cf = tmp_path / "f.txt"
    lines = [f"{x} {y} : {int((x, y) == (0, 0))}" for x, y in
             [(-1, -1), (-1, 0), (-1, 1), (-1, 2), (0, -1), (0, 0), (0, 1), (1, -1), (1, 0), (2, -1)]]
    cf.write_text("\n".join(lines) + "\n")
    assert run(capsys, "chiral", "--poly", poly, "--coeff-f", str(cf))[0] == 3


def test_budget_exit_4(capsys, poly):
    assert run(capsys, "snd-probe", "--poly", poly, "--n0", "1,2,0")[0] == 4


def test_bring_with_sigma(capsys, poly, tmp_path):
    h = tmp_path / "h.txt"
    h.write_text("-1 -1 : 0\n0 0 : 1\n0 1 : 0\n1 0 : 0\n")
    code, out, _ = run(capsys, "bring", "--poly", poly, "--sigma", str(h), "--out", str(tmp_path / "o.json"))
    assert code == 0 and out == ""
    rep = json.loads((tmp_path / "o.json").read_text())
    assert rep["stabilized"] is True
    assert rep["result"]["comparison"]["verdict"] == "PASS"
    assert rep["result"]["sigma_variant"]["equal_to_plain"]


def test_dual_and_faces(capsys, poly):
    dual = json.loads(run(capsys, "dual", "--poly", poly)[1])["result"]
    assert sorted(map(tuple, dual["vertices"])) == [(-1, -1), (0, 1), (1, 0)]
    faces = json.loads(run(capsys, "faces", "--poly", poly)[1])["result"]
    assert all(f["dim"] + f["dual_dim"] == 3 for f in faces["faces"])


def test_elliptic_demo(capsys):
    rep = json.loads(run(capsys, "elliptic-demo", "--seed", "1")[1])
    assert rep["result"]["chiral"]["total"] == 4
    assert rep["result"]["bring"]["comparison"]["verdict"] == "PASS"


def test_missing_poly(capsys):
    assert run(capsys, "chiral")[0] == 2
