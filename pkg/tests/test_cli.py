import json
import subprocess
import sys

import pytest

from tightload.cli import run

IDENTITY = "rfs-matrix 1\nrows 2 cols 2\n1 1 1\n2 2 1\n"
ONES = "rfs-matrix 1\nrows 2 cols 2\n1 1 1\n1 2 1\n2 1 1\n2 2 1\n"
SWAPPED = "rfs-matrix 1\nrows 2 cols 2\n1 2 1\n2 1 1\n2 2 1\n"
TWO_ON_ONE = "rfs-matrix 1\nrows 1 cols 2\n1 1 1\n1 2 1\n"
CHAIN = "rfs-matrix 1\nrows lazy:impediment-chain cols lazy\n"
DONJUAN = "rfs-matrix 1\nrows lazy:donjuan cols lazy\n"


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in [("id", IDENTITY), ("ones", ONES), ("swapped", SWAPPED), ("two", TWO_ON_ONE), ("chain", CHAIN), ("dj", DONJUAN)]:
        p = tmp_path / f"{name}.rfs"
        p.write_text(text)
        out[name] = str(p)
    out["dir"] = tmp_path
    return out


def call(capsys, *argv):
    code = run(list(argv))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_check_tight(files, capsys):
    assert call(capsys, "check-tight", files["id"]) == (0, "tight\n", "")
    code, out, _ = call(capsys, "check-tight", files["ones"], "--json")
    assert code == 1 and json.loads(out)["kind"] == "kernel-witness"


def test_check_tight_lazy(files, capsys):
    code, out, _ = call(capsys, "check-tight", "--lazy", "--cols", "3", "--budget", "20", files["chain"], "--json")
    assert code == 0 and json.loads(out)["kind"] == "stubborn-columns"
    code, out, _ = call(capsys, "check-tight", "--lazy", "--cols", "1", "--budget", "20", files["dj"], "--json")
    assert code == 2 and json.loads(out) == {"kind": "exhausted", "v": 1, "step": 1, "rows_consumed": 20, "complete": False}
    code, out, _ = call(capsys, "check-tight", "--lazy", "--cols", "2", files["ones"], "--json")
    assert code == 1 and json.loads(out)["kind"] == "kernel-witness"


def test_inject_examples(files, capsys):
    code, out, _ = call(capsys, "inject", "--lazy", "--cols", "4", files["chain"], "--json")
    assert code == 0
    assert json.loads(out) == {"kind": "injection", "v": 1, "pairs": [[1, 1], [2, 2], [3, 3], [4, 4]]}
    code, out, _ = call(capsys, "inject", "--lazy", "--cols", "1", "--budget", "100", files["dj"])
    assert code == 2 and out.startswith("undecided")
    assert call(capsys, "inject", files["swapped"]) == (0, "injection: 1->2 2->1\n", "")
    assert call(capsys, "inject", files["ones"])[0] == 1


def test_budget_from_environment(files, capsys, monkeypatch):
    monkeypatch.setenv("TL_BUDGET_DEFAULT", "37")
    code, out, _ = call(capsys, "inject", "--lazy", "--cols", "1", files["dj"], "--json")
    assert code == 2 and json.loads(out)["rows_consumed"] == 37
    monkeypatch.setenv("TL_BUDGET_DEFAULT", "lots")
    assert call(capsys, "inject", "--lazy", "--cols", "1", files["dj"])[0] == 64


def test_usage_errors(files, capsys):
    assert call(capsys, "inject", files["dj"])[0] == 64
    assert call(capsys, "left-inverse", "--lazy", files["id"])[0] == 64
    assert call(capsys, "inject", "--lazy", files["chain"])[0] == 64
    assert call(capsys, "check-tight", str(files["dir"] / "missing.rfs"))[0] == 64
    assert call(capsys, "diagonalize", "--steps", "9", files["id"])[0] == 64
    assert call(capsys, "family", "nosuch")[0] == 64
    (files["dir"] / "zero.rfs").write_text("rfs-matrix 1\nrows 1 cols 1\n1 1 0\n")
    code, _, err = call(capsys, "check-tight", str(files["dir"] / "zero.rfs"))
    assert code == 64 and "line 3" in err
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate"])
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        run(["check-tight"])
    assert exc.value.code == 64


def test_left_inverse_and_diagonalize(files, capsys):
    code, out, _ = call(capsys, "left-inverse", files["swapped"], "--json")
    assert code == 0 and json.loads(out)["kind"] == "left-inverse"
    assert call(capsys, "left-inverse", files["ones"])[0] == 1
    code, out, _ = call(capsys, "diagonalize", files["swapped"])
    assert code == 0 and "proudly diagonal" in out
    assert call(capsys, "diagonalize", files["ones"])[0] == 1


def test_graph(files, capsys):
    code, out, _ = call(capsys, "graph", files["two"])
    assert code == 1 and out.startswith("graph G_A {")
    dot = files["dir"] / "g.dot"
    code, out, _ = call(capsys, "graph", files["id"], "--dot", str(dot))
    assert code == 0 and "c1 -- r1 [style=bold];" in dot.read_text()
    code, out, _ = call(capsys, "graph", files["two"], "--json")
    assert json.loads(out) == {"kind": "hall-violator", "v": 1, "subset": [1, 2], "neighbors": [1]}


def test_obstruct_and_espouse(files, capsys):
    code, out, _ = call(capsys, "obstruct", files["two"], "--json")
    assert code == 1 and json.loads(out)["kind"] == "ps-obstruction"
    assert call(capsys, "obstruct", files["id"]) == (0, "unobstructed\n", "")
    code, out, _ = call(capsys, "obstruct", "--lazy", "--budget", "20", files["chain"], "--json")
    assert code == 2 and json.loads(out)["partial"] is True
    assert call(capsys, "espouse", files["id"])[0] == 0
    assert call(capsys, "espouse", files["two"])[0] == 1
    code, out, _ = call(capsys, "espouse", "--lazy", "--cols", "6", "--budget", "30", files["chain"], "--json")
    assert code == 0 and len(json.loads(out)["pairs"]) == 6
    code, out, _ = call(capsys, "espouse", "--lazy", "--cols", "3", "--budget", "10", files["dj"], "--json")
    assert code == 2 and json.loads(out)["reason"] == "collision"
    code, out, _ = call(capsys, "espouse", "--lazy", "--cols", "2", "--budget", "5", files["two"], "--json")
    assert code == 1 and json.loads(out)["reason"] == "obstruction"


def test_family(files, capsys):
    code, out, _ = call(capsys, "family", "donjuan", "--rows", "2")
    assert code == 0 and out == "rfs-matrix 1\nrows 2 cols 3\n1 1 1\n1 2 -1\n2 1 1\n2 3 -1\n"
    code, out, _ = call(capsys, "family", "impediment-chain")
    assert out == CHAIN
    code, first, _ = call(capsys, "family", "random-tight", "--param", "n=4", "--param", "extra=2", "--seed", "5")
    _, second, _ = call(capsys, "family", "random-tight", "--param", "n=4", "--param", "extra=2", "--seed", "5")
    assert code == 0 and first == second and "rows 6 cols 4" in first


@pytest.mark.parametrize(
    "verb, name, extra",
    [
        ("check-tight", "id", []),
        ("check-tight", "ones", []),
        ("check-tight", "chain", ["--lazy", "--cols", "5", "--budget", "20"]),
        ("inject", "swapped", []),
        ("inject", "chain", ["--lazy", "--cols", "6", "--budget", "20"]),
        ("left-inverse", "swapped", []),
        ("diagonalize", "swapped", []),
        ("graph", "two", []),
        ("graph", "id", []),
        ("obstruct", "two", []),
        ("espouse", "id", []),
        ("espouse", "two", []),
    ],
)
def test_emitted_certificates_reverify(files, capsys, verb, name, extra):
    code, out, _ = call(capsys, verb, files[name], "--json", *extra)
    cert = files["dir"] / f"{verb}-{name}.json"
    cert.write_text(out)
    assert call(capsys, "verify", files[name], str(cert)) == (0, "valid\n", "")


def test_verify_rejects_wrong_matrix(files, capsys):
    _, out, _ = call(capsys, "inject", files["swapped"], "--json")
    cert = files["dir"] / "inj.json"
    cert.write_text(out)
    assert call(capsys, "verify", files["id"], str(cert)) == (1, "invalid\n", "")
    (files["dir"] / "junk.json").write_text("{")
    assert call(capsys, "verify", files["id"], str(files["dir"] / "junk.json"))[0] == 64


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "tightload", "check-tight", files["id"]], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "tight\n"


def test_verify_refuses_undecided_certificates(files, capsys):
    for argv in (["obstruct", "--lazy", "--budget", "10"], ["inject", "--lazy", "--cols", "1", "--budget", "10"]):
        name = "chain" if argv[0] == "obstruct" else "dj"
        _, out, _ = call(capsys, *argv, files[name], "--json")
        cert = files["dir"] / "undecided.json"
        cert.write_text(out)
        assert call(capsys, "verify", files[name], str(cert))[0] == 64
