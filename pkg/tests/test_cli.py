import json

import numpy as np
import pytest

from teichkit import __version__
from teichkit.cli import SCHEMA, dumps, main
from teichkit.ptolemy import flippable_word
from teichkit.surface import cycle_basis, standard_graph


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def _run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def torus_files(tmp_path):
    g = standard_graph(1, 1)
    a, _ = cycle_basis(g)
    return {"graph": _write(tmp_path, "torus1.json", g.to_json()),
            "z": _write(tmp_path, "z.json", [0.0, 0.0, 0.0]),
            "a": _write(tmp_path, "a.json", {"path": list(a.steps)}),
            "l": _write(tmp_path, "l.json", {"l": [0.0, float(np.log(2.0)), 0.0]}),
            "moves": _write(tmp_path, "m.json",
                            [m.to_json() for m in flippable_word(g, 0)])}


def test_report_header(capsys, torus_files):
    code, out, _ = _run(capsys, ["validate", "--graph", torus_files["graph"]])
    rep = json.loads(out)
    assert code == 0
    assert rep["schema"] == SCHEMA and rep["version"] == __version__
    assert rep["config"]["graph"] == torus_files["graph"]
    assert rep["result"]["valid"]


def test_validate_non_trivalent(capsys, tmp_path):
    bad = _write(tmp_path, "bad.json",
                 {"vertices": [{"id": 0, "marked": 0, "cyclic": [0, 1, 2, 3]},
                               {"id": 1, "marked": 4, "cyclic": [4, 5]}],
                  "edges": [[0, 4], [1, 5], [2, 3]]})
    code, out, err = _run(capsys, ["validate", "--graph", bad])
    assert code == 1
    assert "non-trivalent vertex" in out and "non-trivalent vertex" in err


def test_malformed_input_exit_2(capsys, tmp_path):
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    code, _, err = _run(capsys, ["validate", "--graph", str(junk)])
    assert code == 2 and "invalid JSON" in err
    code, _, err = _run(capsys, ["validate", "--graph", str(tmp_path / "missing.json")])
    assert code == 2


def test_lengths(capsys, torus_files):
    code, out, _ = _run(capsys, ["lengths", "--graph", torus_files["graph"],
                                 "--fock", torus_files["z"], "--curve", torus_files["a"]])
    assert code == 0
    res = json.loads(out)["result"]["curve"]
    assert res["trace"] == pytest.approx(3.0)
    assert res["class"] == "hyperbolic"
    assert res["length"] == pytest.approx(2 * np.arccosh(1.5))


def test_lengths_wrong_vector_size(capsys, torus_files, tmp_path):
    z = _write(tmp_path, "z4.json", [0.0] * 4)
    code, _, err = _run(capsys, ["lengths", "--graph", torus_files["graph"], "--fock", z,
                                 "--curve", torus_files["a"]])
    assert code == 2 and "expected 3 entries" in err


def test_coords(capsys, torus_files):
    code, out, _ = _run(capsys, ["coords", "--graph", torus_files["graph"],
                                 "--penner", torus_files["l"]])
    res = json.loads(out)["result"]
    assert code == 0
    assert res["fock"]["0"] == pytest.approx(2 * np.log(2.0))
    assert res["lambda"]["1"] == pytest.approx(2 * np.sqrt(2.0))
    assert set(res["kashaev"]["q"]) == {"0", "1"}
    assert res["puncture_constraints"] == [pytest.approx(0.0, abs=1e-12)]


def test_transport(capsys, torus_files):
    code, out, _ = _run(capsys, ["transport", "--graph", torus_files["graph"],
                                 "--moves", torus_files["moves"], "--penner", torus_files["l"]])
    res = json.loads(out)["result"]
    assert code == 0
    assert res["moves"][-1]["op"] == "flip"
    assert set(res) >= {"graph", "penner", "fock", "kashaev"}


def test_transport_illegal_flip(capsys, torus_files, tmp_path):
    m = _write(tmp_path, "bad_moves.json", [{"op": "flip", "v": 0, "w": 1}])
    code, out, _ = _run(capsys, ["transport", "--graph", torus_files["graph"], "--moves", m])
    assert code == 1 and "error" in json.loads(out)["result"]


def test_modular_pentagon(capsys):
    code, out, _ = _run(capsys, ["modular", "--surface", "g0s5", "--relations", "pentagon"])
    assert code == 0
    v, = json.loads(out)["result"]["verdicts"]
    assert v["relation"] == "pentagon" and v["ok"]


def test_modular_unknown_relation(capsys):
    code, _, err = _run(capsys, ["modular", "--surface", "g0s4", "--relations", "heptagon"])
    assert code == 2 and "unknown relations" in err


def test_qdilog_table(capsys):
    code, out, _ = _run(capsys, ["qdilog", "--b", "0.8", "--tabulate=-1:1:5"])
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0].startswith("x_re,x_im,eb_re")
    assert len(lines) == 6


def test_qdilog_bad_b(capsys):
    code, _, err = _run(capsys, ["qdilog", "--b", "1.5", "--check"])
    assert code == 2 and "b must lie" in err


def test_qcheck_pentagon(capsys):
    code, out, _ = _run(capsys, ["qcheck", "--check", "pentagon"])
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["checks"][0]["N"] == 512
    assert rep["config"]["grid_n"] is None


def test_qcheck_overrides_and_bad_grid(capsys):
    code, out, _ = _run(capsys, ["qcheck", "--check", "pentagon", "--grid-n", "256",
                                 "--half-width", "18"])
    c = json.loads(out)["result"]["checks"][0]
    assert (c["N"], c["L"]) == (256, 18.0)
    code, _, err = _run(capsys, ["qcheck", "--grid-n", "100"])
    assert code == 2


def test_out_file(capsys, torus_files, tmp_path):
    dest = tmp_path / "rep.json"
    code, out, _ = _run(capsys, ["validate", "--graph", torus_files["graph"],
                                 "--out", str(dest)])
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["passed"]


def test_dumps_sanitises_non_finite():
    text = dumps({"a": float("inf"), "b": [float("nan"), 1.0], "c": np.float64(2.5),
                  "d": 1j})
    d = json.loads(text)
    assert d["a"] == "inf" and d["b"][0] == "nan" and d["c"] == 2.5
    assert d["d"] == {"re": 0.0, "im": 1.0}
    assert "Infinity" not in text and "NaN" not in text
