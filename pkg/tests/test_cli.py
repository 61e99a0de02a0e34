import json

import pytest

from rzmoduli.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    assert code == 0
    payload = json.loads(out)
    assert payload["schema"] == 1
    return payload


def test_dim(capsys):
    code, out, _ = run(capsys, "dim", "2:3")
    assert code == 0 and out.splitlines()[0] == "1"
    assert run_json(capsys, "dim", "2:3^2")["dim"] == 8


def test_betti(capsys):
    code, out, _ = run(capsys, "betti", "3:4")
    assert code == 0 and "d = [1, 1, 2, 1]" in out and "Euler 5" in out
    assert run_json(capsys, "betti", "2:3")["profile"]["d"] == [1, 1]


def test_semimodules(capsys):
    payload = run_json(capsys, "semimodules", "2:3")
    assert payload["count"] == 2
    assert [r["cycle"] for r in payload["semimodules"]] == [[4, 1, 3, 0, 2], [5, 2, -1, 1, 3]]


def test_smooth_and_pi0(capsys):
    code, out, _ = run(capsys, "smooth", "2:3")
    assert code == 0 and out.startswith("SmoothP1")
    assert run_json(capsys, "smooth", "3:4")["smoothness"] == {
        "verdict": "NotSmooth", "reason": "PoincareDualityFails", "duality_asymmetry_confirmed": True}
    payload = run_json(capsys, "pi0", "2:3")
    assert payload["pi0"]["has_bi"] and payload["height_reachability"] == [{"m": 2, "n": 3, "a": 1, "b": -2}]


def test_lattice_closure(capsys):
    payload = run_json(capsys, "lattice", "closure", "--shape", "2:3", "e_0")
    assert payload["lattice"]["vol"] == 1 and payload["a_invariant"] == 1
    code, out, _ = run(capsys, "lattice", "closure", "--shape", "2:3", "e_0")
    assert "vol 1" in out and "a invariant: 1" in out


def test_lattice_pclosure(capsys):
    payload = run_json(capsys, "lattice", "pclosure", "--shape", "2:3", "e_0+[x]e_1+e_3", "--field-degree", "5")
    assert payload["equals_M0"] is True


def test_lattice_from_cycle(capsys):
    payload = run_json(capsys, "lattice", "from-cycle", "--shape", "2:3", "--semimodule", "-1,1",
                       "--coords", "a=x", "--field-degree", "3")
    assert payload["round_trip"] is True and payload["semimodule"] == [-1, 1, 2, 3, 5]


def test_lattice_small_commands(capsys):
    assert run_json(capsys, "lattice", "vol", "--shape", "2:3", "e_0", "e_1")["vol"] == 0
    assert run_json(capsys, "lattice", "ainv", "--shape", "2:3", "e_0", "e_1")["a_invariant"] == 2
    payload = run_json(capsys, "lattice", "semimodule", "--shape", "2:3", "e_0")
    assert payload["semimodule"]["fringe"] == [0, 2, 3, 4, 6]


def test_json_is_deterministic(capsys):
    args = ("lattice", "closure", "--shape", "3:2", "e_0+[x]e_2", "--p", "3", "--json")
    first = run(capsys, *args)[1]
    assert first == run(capsys, *args)[1]


@pytest.mark.parametrize("argv", [
    ["dim", "2:4"],
    ["betti", "banana"],
    ["dim", "2:3,"],
    ["lattice", "vol", "--shape", "2:3", "e_0+["],
    ["lattice", "vol", "--shape", "2:3", "e_0", "--p", "4"],
    ["lattice", "from-cycle", "--shape", "2:3", "--semimodule", "-1,1", "--coords", "b=1"],
    ["nonsense"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


def test_precision_exhausted_reports_depth(capsys):
    code, _, err = run(capsys, "lattice", "vol", "--shape", "2:3", "e_0", "e_1", "--span")
    assert code == 2 and "depth reached" in err and "--precision" in err


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "counts")
    assert code == 0 and "FAIL" not in out
    payload = run_json(capsys, "verify", "witt", "--trials", "100")
    assert payload["passed"]
