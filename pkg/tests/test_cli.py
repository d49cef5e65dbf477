import csv
import io
import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest
from importlib import resources

from xaskey.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_POLE, atomic_write, main
from xaskey.deformation import DeformedSystem, eval_xi
from xaskey.families import ParamSet

HERE = Path(__file__).parent
GOLDEN = HERE / "golden" / "reports"


@pytest.fixture(scope="module")
def schema():
    return json.loads(resources.files("xaskey").joinpath("data/report_schema.json").read_text())


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_constant_column(capsys):
    code, out, _ = _run(capsys, "eval", "--family", "W", "--params", "1,1,1,1", "--n", "0", "--grid", "0:4:5")
    assert code == EXIT_OK
    assert out.endswith("\n") and "\r" not in out
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["x", "eta", "value_re", "value_im"]
    assert [float(r["value_re"]) for r in rows] == [1.0] * 5
    assert [float(r["eta"]) for r in rows] == [0.0, 1.0, 4.0, 9.0, 16.0]


def test_eval_deformed_lowest_member_is_xi(capsys):
    code, out, _ = _run(
        capsys, "eval", "--family", "AW", "--params", "0.7,0.6,0.2,0.1", "--q", "0.5",
        "--deformed", "--ell", "1", "--n", "0", "--grid", "0.1:3:7", "--format", "json",
    )
    assert code == EXIT_OK
    rows = json.loads(out)
    d = DeformedSystem(ParamSet("AW", (0.7, 0.6, 0.2, 0.1), 0.5), 1)
    xi = eval_xi(d, np.array([r["x"] for r in rows], dtype=complex), 1)
    got = np.array([r["value_re"] + 1j * r["value_im"] for r in rows])
    assert np.max(np.abs(got - xi)) <= 1e-12 * np.max(np.abs(xi))


def test_eval_json_roundtrip_bit_exact(capsys, tmp_path):
    f = tmp_path / "p.json"
    args = ["eval", "--family", "cH", "--params", "0.7,1.2+0.3j", "--n", "5", "--grid=-2:2:9", "--format", "json"]
    assert main(args + ["--output", str(f)]) == EXIT_OK
    rows = json.loads(f.read_text())
    from xaskey.families import eval_Pn

    vals = eval_Pn(ParamSet("cH", (0.7, 1.2 + 0.3j)), 5, np.linspace(-2, 2, 9).astype(complex))
    assert [r["value_re"] for r in rows] == [float(v.real) for v in vals]
    assert json.loads(json.dumps(rows)) == rows


def test_eval_is_deterministic(capsys):
    args = ("eval", "--family", "W", "--params", "0.3,0.5,1.1,1.7", "--n", "4", "--grid", "0:3:11")
    assert _run(capsys, *args)[1] == _run(capsys, *args)[1]


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--family", "cH", "--params=-1,1"],
        ["eval", "--family", "W", "--params", "1,1,1"],
        ["eval", "--family", "AW", "--params", "0.1,0.2,0.3,0.4"],
        ["eval", "--family", "cH", "--params", "1,x"],
        ["eval", "--family", "cH", "--params", "1,1", "--grid", "0:1"],
        ["eval", "--family", "W", "--params", "0.3,0.5,1.1,1.7", "--deformed"],
        ["eval", "--family", "cH", "--params", "1,1", "--deformed", "--ell", "1"],
    ],
)
def test_invalid_instances_exit_2(capsys, argv):
    assert _run(capsys, *argv)[0] == EXIT_CONFIG


def test_pole_exit_3(capsys, monkeypatch):
    from xaskey import cli

    def pole(*a, **k):
        raise cli.PoleError("pole")

    monkeypatch.setattr(cli, "eval_Pn", pole)
    assert _run(capsys, "eval", "--family", "W", "--params", "1,1,1,1", "--n", "1")[0] == EXIT_POLE


def test_eval_certified_xi(capsys):
    code, out, _ = _run(
        capsys, "eval", "--family", "W", "--params", "0.3,0.5,1.1,1.7", "--deformed", "--ell", "1",
        "--n", "2", "--xi", "--grid", "0:1:3", "--certify",
    )
    assert code == EXIT_OK and len(out.splitlines()) == 4


def test_orthogonality_cH_unit(capsys):
    code, out, _ = _run(capsys, "orthogonality", "--family", "cH", "--params", "1,1", "--N", "3", "--format", "json")
    assert code == EXIT_OK
    rows = json.loads(out)
    first = rows[0]
    assert (first["n"], first["m"]) == (0, 0)
    assert first["closed_form"] == pytest.approx(math.pi / 3, rel=1e-14)
    assert first["rel_diff"] < 1e-6
    assert all(r["flag"] == "" for r in rows)


def test_orthogonality_deformed_W(capsys):
    code, out, _ = _run(
        capsys, "orthogonality", "--family", "W", "--params", "0.3,0.5,1.1,1.7", "--deformed", "--ell", "2", "--N", "6"
    )
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 36
    assert max(float(r["rel_diff"]) for r in rows if r["n"] == r["m"]) < 1e-6


def test_orthogonality_nonconvergence_exit_3(capsys, monkeypatch):
    from xaskey import cli
    from xaskey.quadrature import NonConvergence

    def fail(*a, **k):
        raise NonConvergence("no")

    monkeypatch.setattr(cli, "gram_matrix", fail)
    assert _run(capsys, "orthogonality", "--family", "cH", "--params", "1,1")[0] == EXIT_POLE


def test_verify_default_exit_0(suite_run, schema):
    code, out = suite_run
    assert code == EXIT_OK
    files = sorted(out.glob("*.json"))
    assert len(files) == len(list(GOLDEN.glob("*.json")))
    for f in files:
        doc = json.loads(f.read_text())
        jsonschema.validate(doc, schema)
        assert doc["id"] == f.stem and all(r["pass"] for r in doc["reports"])
    assert not list(out.glob(".tmp-*"))


def _close(a, b, tol):
    if a is None or b is None:
        return a is b
    # residuals are rounding noise; allow a tenth of the tolerance, never less than 1e-12
    return abs(a - b) <= max(1e-12, 0.1 * tol)


def test_verify_matches_golden(suite_run):
    _, out = suite_run
    for g in sorted(GOLDEN.glob("*.json")):
        gold = json.loads(g.read_text())
        new = json.loads((out / g.name).read_text())
        assert gold["schema_version"] == new["schema_version"]
        assert len(gold["reports"]) == len(new["reports"]), g.name
        for a, b in zip(gold["reports"], new["reports"]):
            for key in ("id", "instance", "samples", "tolerance", "pass", "name"):
                assert a.get(key) == b.get(key), (g.name, key)
            assert _close(a["max_scaled_residual"], b["max_scaled_residual"], a["tolerance"]), (g.name, a, b)


def test_verify_only_single_report(capsys, tmp_path, schema):
    code, out, _ = _run(capsys, "verify", "--only", "hyp_3F2propB", "--out-dir", str(tmp_path))
    assert code == EXIT_OK
    assert [p.name for p in tmp_path.iterdir()] == ["hyp_3F2propB.json"]
    doc = json.loads((tmp_path / "hyp_3F2propB.json").read_text())
    jsonschema.validate(doc, schema)
    assert len(doc["reports"]) == 1 and doc["reports"][0]["samples"] == 50
    assert "1/1 passed" in out


def test_verify_fault_fixture_exit_1(capsys, tmp_path, schema):
    code, out, _ = _run(capsys, "verify", "--config", str(HERE / "data" / "faulty_suite.ini"), "--out-dir", str(tmp_path))
    assert code == EXIT_FAIL
    failing = set()
    for f in tmp_path.glob("*.json"):
        doc = json.loads(f.read_text())
        jsonschema.validate(doc, schema)
        failing |= {r["id"] for r in doc["reports"] if not r["pass"]}
    assert "FlhF" in failing and "FlhF" in out


def test_verify_env_var(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "s.ini"
    cfg.write_text('[suite]\nids = ["difeqP"]\nsamples = 4\n\n[instance.u]\nfamily = "cH"\nparams = [1, 1]\n')
    monkeypatch.setenv("XASKEY_CONFIG", str(cfg))
    code, out, _ = _run(capsys, "verify", "--out-dir", str(tmp_path / "r"))
    assert code == EXIT_OK and "1/1 passed" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--config", "/nonexistent.ini"],
        ["verify", "--only", "not_an_id"],
    ],
)
def test_verify_config_errors(capsys, tmp_path, argv):
    assert _run(capsys, *argv, "--out-dir", str(tmp_path))[0] == EXIT_CONFIG


def test_verify_bad_config_text(capsys, tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[suite]\nseed = nope\n")
    assert _run(capsys, "verify", "--config", str(bad), "--out-dir", str(tmp_path))[0] == EXIT_CONFIG


def test_ids_lists_registry(capsys):
    code, out, _ = _run(capsys, "ids")
    assert code == EXIT_OK and "hyp_4phi3propB" in out and len(out.splitlines()) == 39


def test_atomic_write_replaces(tmp_path):
    f = tmp_path / "a" / "x.json"
    atomic_write(str(f), "1")
    atomic_write(str(f), "2")
    assert f.read_text() == "2" and sorted(p.name for p in f.parent.iterdir()) == ["x.json"]
