import json

import numpy as np
import pytest

from toposqm import linalg
from toposqm.cli import main
from toposqm.contexts import ContextUniverse


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    seeds = write(tmp_path / "seeds.json", {"seeds": [linalg.operator_to_json(np.diag([1.0, 2.0, 3.0]))]})
    op = write(tmp_path / "b.json", linalg.operator_to_json(np.diag([1.0, 2.0, 3.0])))
    return tmp_path, seeds, op


def test_universe_command(files, capsys):
    tmp, seeds, _ = files
    assert main(["universe", seeds, "-o", str(tmp / "u.json"), "--dot", str(tmp / "u.dot")]) == 0
    assert capsys.readouterr().out.strip() == "4 contexts"
    u = ContextUniverse.from_json(json.loads((tmp / "u.json").read_text()))
    assert len(u) == 4 and (tmp / "u.dot").read_text().startswith("digraph")
    empty = write(tmp / "empty.json", {"seeds": [], "dim": 2})
    assert main(["universe", empty, "--include-trivial"]) == 0
    assert capsys.readouterr().out.strip() == "1 context"


def test_universe_round_trip_is_stable(files):
    tmp, seeds, _ = files
    main(["universe", seeds, "-o", str(tmp / "u1.json")])
    u = ContextUniverse.from_json(json.loads((tmp / "u1.json").read_text()))
    (tmp / "u2.json").write_text(json.dumps(u.to_json(), indent=2, sort_keys=True) + "\n")
    assert (tmp / "u1.json").read_text() == (tmp / "u2.json").read_text()


def test_parse_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"seeds": [\n  {"entries": [[1, 0], [0, 1]]},\n  oops]}')
    assert main(["universe", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "line 3, column 3" in err
    clash = write(tmp_path / "clash.json", {"seeds": [[{"entries": [[1, 0], [0, -1]]}, {"entries": [[0, 1], [1, 0]]}]]})
    assert main(["universe", clash]) == 2
    assert "seed 0" in capsys.readouterr().err
    assert main(["universe", str(tmp_path / "missing.json")]) == 2


def test_arrow_command(files, capsys):
    tmp, seeds, op = files
    assert main(["arrow", op, "--seeds", seeds, "--mode", "outer"]) == 0
    out = capsys.readouterr().out
    assert "{1|2|3},1,{13|2},1.0,3.0" in out
    assert "# naturality outer: ok=True" in out
    const = write(tmp / "c.json", linalg.operator_to_json(2 * np.eye(3)))
    assert main(["arrow", const, "--seeds", seeds, "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)["rows"]
    assert {r["outer"] for r in rows} == {2.0} and {r["inner"] for r in rows} == {2.0}


def test_corrupted_universe_file(files, capsys):
    tmp, seeds, op = files
    main(["universe", seeds, "-o", str(tmp / "u.json")])
    data = json.loads((tmp / "u.json").read_text())
    data["contexts"][1]["blocks"][0]["entries"][0][0] = [0.5, 0.0]
    bad = write(tmp / "bad_u.json", data)
    assert main(["arrow", op, "--universe", bad]) == 2
    assert "IntegrityError" in capsys.readouterr().err


def test_daseinise_truth_twist_kvalue(files, capsys):
    tmp, seeds, op = files
    assert main(["daseinise", op, "--seeds", seeds, "--direction", "inner"]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 4
    p = write(tmp / "p.json", linalg.operator_to_json(np.diag([1.0, 0.0, 0.0])))
    psi = write(tmp / "psi.json", {"amplitudes": [0, 1, 0]})
    assert main(["truth", p, psi, "--seeds", seeds, "--context", "{1|2|3}"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["member_labels"] == ["{12|3}"]
    u = write(tmp / "u.json", linalg.operator_to_json(np.eye(3)[[1, 2, 0]]))
    assert main(["twist", u, "--seeds", seeds, "--operator", p, "--state", psi]) == 0
    assert json.loads(capsys.readouterr().out)["covariance"]["ok"] is True
    assert main(["kvalue", op, "--seeds", seeds, "--stage", "{12|3}"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["character"] for r in rows] == ["3", "12"]
    assert all(set(r["dispersion"].values()) <= {0.0, 1.0} for r in rows)


def test_export_dot(files, capsys):
    _, seeds, op = files
    assert main(["export-dot", "--seeds", seeds, "--operator", op]) == 0
    out = capsys.readouterr().out
    assert out.count("->") == 3 and "red" not in out


def test_check_filter_and_negative_control(capsys):
    assert main(["check", "--only", "global_elements", "-q"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert [c["name"] for c in report["checks"]] == ["global_elements"]
    zero = ["--" + n for n in ("eig-cluster-tol", "proj-tol", "hermitian-tol", "unitary-tol",
                               "zero-overlap-tol", "order-cmp-tol")]
    args = ["check", "--only", "sandwich,filter_functions", "-q"]
    for flag in zero:
        args += [flag, "0"]
    assert main(args) == 1
    report = json.loads(capsys.readouterr().out)
    assert not report["all_passed"]
    assert main(["check", "--only", "bogus"]) == 2


def test_tolerance_file(tmp_path, capsys):
    tol = write(tmp_path / "tol.json", {"order_cmp_tol": 1e-7})
    assert main(["check", "--only", "global_elements", "--tolerances", tol, "-q"]) == 0
    assert json.loads(capsys.readouterr().out)["tolerances"]["order_cmp_tol"] == 1e-7
