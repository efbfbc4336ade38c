import json

import pytest

from solvflow import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_algebra_query(capsys):
    code, out, _ = run(capsys, "algebra", "--model", "s3ll:l1=1,l2=-1", "unimodular")
    assert code == 0 and json.loads(out) is True


def test_algebra_document(capsys):
    code, out, _ = run(capsys, "algebra", "--model", "g4")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == 1 and doc["command"] == "algebra" and doc["dim"] == 4


def test_subgroups_search(capsys):
    code, out, _ = run(capsys, "subgroups", "--model", "sl2", "--search", "--trials", "2000")
    assert code == 0 and json.loads(out)["schema"] == 1


def test_curvature_family(capsys):
    code, out, _ = run(capsys, "curvature", "--model", "s3ll:l1=1,l2=2", "--family", "K1b", "--params", "b=1")
    assert code == 0
    assert "schema" in json.loads(out)


def test_curvature_csv(capsys):
    code, out, _ = run(capsys, "curvature", "--draws", "1", "--format", "csv")
    assert code == 0 and out.startswith("regime,")


def test_killing_literal_fails(capsys):
    code, _, _ = run(capsys, "killing", "--model", "s3ll:l1=1.5,l2=0")
    assert code == 0
    code, _, _ = run(capsys, "killing", "--model", "s3ll:l1=1.5,l2=0", "--literal")
    assert code == 1


def test_soliton(capsys):
    code, out, _ = run(capsys, "soliton", "--model", "s3l:lambda=1", "--family", "K0")
    assert code == 0 and "translator" in out


def test_flow_verify_infers_model(capsys):
    code, out, _ = run(capsys, "flow", "verify", "--family", "K1b", "--params", "l1=1,l2=2,b=1", "--grid", "11,11")
    doc = json.loads(out)
    assert code == 0 and doc["pass"] is True and doc["command"] == "flow"
    code, _, _ = run(capsys, "flow-verify", "--family", "K1b", "--params", "l1=1,l2=2,b=1",
                     "--grid", "11,11", "--variant", "literal")
    assert code == 1


def test_flow_integrate_short(capsys):
    code, out, _ = run(capsys, "flow", "integrate", "--model", "s3ll:l1=1,l2=2", "--family", "K1b",
                       "--params", "b=1", "--grid", "11,11", "--steps", "20")
    assert code == 0 and json.loads(out)["pass"] is True


@pytest.mark.parametrize("argv", [
    ("flow", "verify", "--family", "K1b", "--params", "b=1"),
    ("curvature", "--model", "s3ll:l1=1,l2=2", "--family", "K1b"),
    ("curvature", "--model", "s3ll:l1=1,l2=2", "--family", "Kzz", "--params", "b=1"),
    ("algebra", "--model", "s9"),
    ("soliton", "--model", "s3l:lambda=1", "--family", "K0", "--params", "oops"),
])
def test_bad_input_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:") and out == ""


def test_out_file(tmp_path, capsys):
    target = tmp_path / "rep.json"
    code, out, _ = run(capsys, "algebra", "--model", "h3", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["algebra"]


def test_reproduce_without_integration(capsys):
    code, out, _ = run(capsys, "reproduce-paper", "--skip-integration", "--format", "text")
    assert code == 0
    assert "FAIL (info)" in out and "\nFAIL  " not in out
