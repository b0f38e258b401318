import json
import os

import pytest

from normadd.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


@pytest.fixture
def opfile(tmp_path, capsys):
    path = tmp_path / "op.json"
    assert main(["gen", "--space", "discrete:4", "--seed", "7", "--out", str(path)]) == 0
    capsys.readouterr()
    return path


def test_gen_shape_and_determinism(tmp_path, capsys, opfile):
    d = json.loads(opfile.read_text())
    assert d["tau"]["kind"] == "permutation" and len(d["tau"]["map"]) == 4
    assert len(d["h"]["values"]) == 4
    other = tmp_path / "again.json"
    main(["gen", "--space", "discrete:4", "--seed", "7", "--out", str(other)])
    assert other.read_bytes() == opfile.read_bytes()
    code, d = run(capsys, "gen", "--space", "discrete:3", "--h-range", "1:1")
    assert code == 0 and d["h"]["values"] == ["1", "1", "1"]


def test_check_generated_operator(capsys, opfile, tmp_path):
    code, d = run(capsys, "check", "--op", str(opfile), "--figures", str(tmp_path / "fig"))
    assert code == 0 and d["verdict"] == "pass"
    assert {p["property"] for p in d["properties"]} == {
        "norm_additive", "zero", "order_iso", "biseparating", "bound", "lipschitz"}
    assert all(os.path.exists(f) for f in d["figures"])


def test_check_square_and_replay(capsys, tmp_path):
    report = tmp_path / "sq.json"
    code = main(["check", "--fixture", "square", "--space", "discrete:2", "--out", str(report)])
    assert code == 1
    d = json.loads(report.read_text())
    assert "norm_additive" in d["failed"]
    na = next(p for p in d["properties"] if p["property"] == "norm_additive")
    assert na["witness"] is not None
    code, r = run(capsys, "check", "--fixture", "square", "--space", "discrete:2",
                  "--replay", str(report))
    assert code == 1 and r["reproduced"] and r["identical_discrepancy"]


def test_malformed_json_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["check", "--op", str(bad)]) == 2
    assert main(["recover", "--op", str(bad)]) == 2


def test_recover_round_trip(capsys, opfile, tmp_path):
    code, d = run(capsys, "recover", "--op", str(opfile), "--with-inverse")
    op = json.loads(opfile.read_text())
    assert code == 0 and d["verdict"] == "certified"
    assert d["tau"] == op["tau"] and d["h"] == op["h"]
    assert d["duality"]["ok"]
    assert main(["recover", "--op", str(opfile), "--budget", "0"]) == 2


def test_recover_fixtures(capsys):
    assert main(["recover", "--fixture", "order-swap", "--space", "discrete:3"]) in (1, 3)
    capsys.readouterr()
    code, d = run(capsys, "recover", "--fixture", "zero-map", "--space", "discrete:3")
    assert code == 3 and d["reason"] == "zero"


def test_certify_stored_result(capsys, opfile, tmp_path):
    res = tmp_path / "res.json"
    assert main(["recover", "--op", str(opfile), "--out", str(res)]) == 0
    code, d = run(capsys, "certify", "--op", str(opfile), "--result", str(res))
    assert code == 0 and d["verdict"] == "certified"


def test_line_recover_with_figures(capsys, tmp_path):
    op = tmp_path / "pl.json"
    main(["gen", "--space", "pl", "--seed", "3", "--h-range", "0.5:4", "--out", str(op)])
    code, d = run(capsys, "recover", "--op", str(op), "--grid=-2:2:5", "--trials", "20",
                  "--figures", str(tmp_path / "f"))
    assert code == 0 and d["verdict"] == "certified" and len(d["samples"]) == 5
    assert os.path.getsize(d["figures"][0]) > 0


def test_fuzz_catches_controls(capsys):
    code, d = run(capsys, "fuzz", "--space", "discrete:3")
    assert code == 0 and d["missed"] == []
    assert {r["fixture"] for r in d["fixtures"]} == {"square", "shift", "order-swap", "averaging"}


def test_enumerate(capsys, tmp_path):
    code, d = run(capsys, "enumerate", "--points", "1", "--max", "1")
    assert code == 0 and d["passing_count"] == 1
    code, d = run(capsys, "enumerate", "--points", "2", "--max", "2",
                  "--figures", str(tmp_path / "e"))
    assert code == 0 and {tuple(m["tau"]) for m in d["monomial_maps"]} >= {(0, 1), (1, 0)}
    assert os.path.exists(d["figures"][0])
    assert main(["enumerate", "--points", "3", "--max", "3"]) == 2


def test_usage_errors(capsys):
    assert main([]) == 2
    assert main(["gen", "--space", "bogus"]) == 2
    assert main(["check", "--op", "/nonexistent/op.json"]) == 2
