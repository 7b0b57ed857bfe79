import json

import pytest

from driftfk.cli import build_parser, load_domain, main
from driftfk.geometry import Disk


def test_parser_lists_all_commands():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    assert set(sub.choices) == {"eig", "optimal", "radial", "rearrange", "verify-fk",
                                "verify-shift", "verify-divfree", "sweep-tau", "slab-bound"}


def test_load_domain_forms(tmp_path):
    assert load_domain("disk") == Disk(1.0)
    assert load_domain('{"type": "disk", "radius": 2}') == Disk(2.0)
    path = tmp_path / "d.json"
    path.write_text(json.dumps({"type": "disk", "radius": 0.5, "center": [1, 0]}))
    assert load_domain(str(path)) == Disk(0.5, (1.0, 0.0))


def test_radial_command(capsys):
    assert main(["radial", "--tau", "1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "n,radius,tau,sign,lambda,pass"
    assert float(out[1].split(",")[4]) == pytest.approx(4.2027, rel=1e-4)


def test_eig_command_json(tmp_path):
    out = tmp_path / "eig.json"
    code = main(["eig", "--domain", "square", "--h", "0.03125", "--tau", "1",
                 "--format", "json", "--out", str(out), "--save-operator",
                 str(tmp_path / "A.bin")])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["rows"][0]["lambda"] > 0
    assert (tmp_path / "A.bin").stat().st_size > 0


def test_optimal_command_fields(tmp_path):
    fields = tmp_path / "f.csv"
    assert main(["optimal", "--h", "0.03125", "--fields", str(fields)]) == 0
    lines = fields.read_text().splitlines()
    assert lines[0] == "mode,x,y,phi,vx,vy"
    assert {ln.split(",")[0] for ln in lines[1:]} == {"min", "max"}


def test_rearrange_command(tmp_path, capsys):
    profile = tmp_path / "p.csv"
    assert main(["rearrange", "--domain", "square", "--h", "0.015625",
                 "--levels", "64", "--profile", str(profile)]) == 0
    assert profile.exists()


def test_campaign_output_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["verify-fk", "--trials", "2", "--h", "0.03125", "--seed", "5",
                     "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_failing_report_exit_code(monkeypatch, capsys):
    from driftfk import cli
    from driftfk.harness import Report

    def failing(spec, tau, h):
        return Report("verify-divfree", ["margin", "pass"], rows=[{"margin": -1.0, "pass": False}])

    monkeypatch.setattr(cli.harness, "verify_divfree", failing)
    assert main(["verify-divfree"]) == 1
    assert "0/1 passed" in capsys.readouterr().err


def test_passing_report_exit_code():
    assert main(["verify-divfree", "--domain", "disk", "--h", "0.03125", "--tau", "0"]) == 0


def test_bad_domain_exit_code(capsys):
    assert main(["eig", "--domain", '{"type": "torus"}']) == 2
    assert "error" in capsys.readouterr().err
