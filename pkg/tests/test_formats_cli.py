import json
import subprocess
import sys

import numpy as np
import pytest

from openup import ComplexPolynomial, RationalMap, ValidationError
from openup import formats
from openup.cli import main, verify_document


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run_cli(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


# --- formats ----------------------------------------------------------------

def test_pairs_round_trip():
    zs = [1 + 2j, -0.5, 3j]
    assert formats.from_pairs(formats.to_pairs(zs)) == zs


@pytest.mark.parametrize("bad", [[1, 2, 3], "1,2", [1, "x"], [True, 0], 5])
def test_from_pair_rejects(bad):
    with pytest.raises(ValidationError):
        formats.from_pair(bad)


def test_map_round_trip():
    F = RationalMap(ComplexPolynomial([0.5j, 0, 1]), ComplexPolynomial([-1, 1]), 1)
    G = formats.map_from_json(json.loads(json.dumps(formats.map_to_json(F))))
    assert G.P == F.P and G.Q == F.Q


def test_map_from_json_rejects_unnormalized():
    with pytest.raises(ValidationError):
        formats.map_from_json({"P": [[1, 0], [1, 0], [1, 0]], "Q": [[0, 0], [1, 0]]})
    with pytest.raises(ValidationError):
        formats.map_from_json({"P": [[1, 0]]})


def test_parse_checks_n_and_schema():
    assert formats.parse_critpts({"n": 1, "eta": [[1, 0], [-1, 0]]}) == [1, -1]
    with pytest.raises(ValidationError):
        formats.parse_critpts({"n": 2, "eta": [[1, 0], [-1, 0]]})
    with pytest.raises(ValidationError):
        formats.parse_critvals({"schema": 2, "zeta": [[1, 0], [-1, 0]]})
    with pytest.raises(ValidationError):
        formats.parse_arcs({"arcs": []})


def test_dumps_has_schema_and_no_nan():
    doc = json.loads(formats.dumps({"x": float("inf"), "z": 1j, "a": np.arange(2)}))
    assert doc == {"schema": 1, "x": None, "z": [0.0, 1.0], "a": [0, 1]}


def test_curves_csv_and_svg():
    c = np.exp(2j * np.pi * np.arange(4) / 4)
    text = formats.curves_csv([c])
    rows = text.strip().splitlines()
    assert rows[0] == "curve,index,re,im" and len(rows) == 5
    svg = formats.curves_svg([[-2, 2]], [c], [1, -1])
    assert svg.startswith("<svg") and 'class="boundary"' in svg
    assert 'class="arc"' in svg and svg.count('class="critical"') == 2


# --- cli --------------------------------------------------------------------

def test_cli_critpts_joukowski(tmp_path, capsys):
    inp = write(tmp_path, "in.json", {"n": 1, "eta": [[1, 0], [-1, 0]]})
    code, out, err = run_cli(["critpts", "--input", inp], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1 and doc["command"] == "critpts"
    sol = doc["solutions"][0]
    assert sol["P"] == [[1, 0], [0, 0], [1, 0]]
    assert sol["Q"] == [[0, 0], [1, 0]]
    assert sol["verified"] is True
    assert "solution 0" in err


def test_cli_critvals_duplicate_exit_1(tmp_path, capsys):
    inp = write(tmp_path, "in.json", {"n": 1, "zeta": [[2, 0], [2, 0]]})
    code, out, err = run_cli(["critvals", "--input", inp], capsys)
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "DegenerateSpec"


def test_cli_bad_json_exit_1(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run_cli(["critpts", "--input", str(p)], capsys)
    assert code == 1 and json.loads(err)["error"] == "ValidationError"
    code, _, _ = run_cli(["critpts", "--input", str(tmp_path / "missing.json")], capsys)
    assert code == 1


def test_cli_no_solution_exit_2(tmp_path, capsys, monkeypatch):
    import openup.critpoints as cp

    monkeypatch.setattr(cp, "_track_one", lambda args: None)
    inp = write(tmp_path, "in.json", {"eta": [[1, 0], [-1, 0], [2, 0], [3, 1]]})
    code, _, err = run_cli(["critpts", "--input", inp], capsys)
    assert code == 2 and json.loads(err)["error"] == "NoSolutionFound"


def test_cli_numerical_failure_exit_3(tmp_path, capsys, monkeypatch):
    import openup.cli as cli
    from openup import NoConvergence

    def boom(*a, **k):
        raise NoConvergence("stuck", residual=1.0)

    monkeypatch.setattr(cli, "solve_critical_points", boom)
    inp = write(tmp_path, "in.json", {"eta": [[1, 0], [-1, 0]]})
    code, _, err = run_cli(["critpts", "--input", inp], capsys)
    assert code == 3
    assert json.loads(err)["diagnostic"] == {"residual": 1.0}


def test_cli_openup_emits_all_formats(tmp_path, capsys):
    inp = write(tmp_path, "arcs.json", {"arcs": [[[-2, 0], [0, 0], [2, 0]]]})
    out = tmp_path / "res.json"
    code, stdout, _ = run_cli(["openup", "--input", inp, "--output", str(out),
                               "--emit", "json,csv,svg"], capsys)
    assert code == 0 and "open-up map" in stdout
    doc = json.loads(out.read_text())
    assert doc["report"]["passed"] is True
    curve = np.array(formats.from_pairs(doc["boundary_curves"][0]))
    assert np.max(np.abs(np.abs(curve) - 1)) < 1e-6
    assert (tmp_path / "res.csv").read_text().startswith("curve,index,re,im")
    svg = (tmp_path / "res.svg").read_text()
    assert 'class="boundary"' in svg and 'class="arc"' in svg

    code, stdout, _ = run_cli(["verify", "--input", str(out)], capsys)
    assert code == 0 and json.loads(stdout)["passed"] is True


def test_cli_emit_requires_output(tmp_path, capsys):
    inp = write(tmp_path, "arcs.json", {"arcs": [[[-2, 0], [2, 0]]]})
    code, _, _ = run_cli(["openup", "--input", inp, "--emit", "svg"], capsys)
    assert code == 1
    code, _, _ = run_cli(["openup", "--input", inp, "--output", str(tmp_path / "o.json"),
                          "--emit", "png"], capsys)
    assert code == 1


@pytest.mark.parametrize("cmd,doc", [
    ("critpts", {"n": 2, "eta": [[1, 0], [-1, 0], [0, 2], [0.5, -1]]}),
    ("critvals", {"n": 1, "zeta": [[2, 0], [-2, 0]]}),
])
def test_emitted_solutions_reverify(tmp_path, capsys, cmd, doc):
    inp = write(tmp_path, "in.json", doc)
    out = tmp_path / "out.json"
    assert run_cli([cmd, "--input", inp, "--output", str(out)], capsys)[0] == 0
    code, stdout, _ = run_cli(["verify", "--input", str(out)], capsys)
    res = json.loads(stdout)
    assert code == 0 and res["passed"] and res["target"] == cmd


def test_verify_hand_written_pairs():
    good = {"P": [[1, 0], [0, 0], [1, 0]], "Q": [[0, 0], [1, 0]]}
    assert verify_document({**good, "zeta": [[2, 0], [-2, 0]]})["passed"]
    assert verify_document({**good, "eta": [[1, 0], [-1, 0]]})["passed"]
    assert verify_document({**good, "arcs": [[[-2, 0], [2, 0]]]})["passed"]
    bad = {"P": [[-1, 0], [0, 0], [1, 0]], "Q": [[0, 0], [1, 0]]}
    assert not verify_document({**bad, "zeta": [[2, 0], [-2, 0]]})["passed"]
    with pytest.raises(ValidationError):
        verify_document({"P": good["P"], "Q": good["Q"]})


def test_verify_failure_exit_2(tmp_path, capsys):
    inp = write(tmp_path, "in.json", {"P": [[-1, 0], [0, 0], [1, 0]], "Q": [[0, 0], [1, 0]],
                                      "eta": [[1, 0], [-1, 0]]})
    code, out, _ = run_cli(["verify", "--input", inp], capsys)
    assert code == 2 and json.loads(out)["passed"] is False


def test_json_identical_across_workers(tmp_path, capsys):
    inp = write(tmp_path, "in.json", {"n": 2, "zeta": [[1, 0], [-1, 0], [0, 2], [0.5, -1]]})
    texts = []
    for w in ("1", "4"):
        out = tmp_path / f"out{w}.json"
        assert run_cli(["critvals", "--input", inp, "--output", str(out), "--workers", w,
                        "--starts", "8"], capsys)[0] == 0
        texts.append(out.read_bytes())
    assert texts[0] == texts[1]


def test_module_entry_point(tmp_path):
    inp = write(tmp_path, "in.json", {"eta": [[0, 1], [0, -1]]})
    proc = subprocess.run([sys.executable, "-m", "openup", "critpts", "--input", inp],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["solutions"][0]["P"] == [[-1, 0], [0, 0], [1, 0]]
