import json
import os
import subprocess
import sys

import pytest

from shapelab.cli import main


def run(args, **kw):
    return main(args)


def test_enumerate_equidist_pipeline(tmp_path, capsys):
    forms = tmp_path / "forms.csv"
    report = tmp_path / "report.json"
    assert run(["enumerate", "--xmax", "3000", "--i", "both", "--out", str(forms)]) == 0
    assert run([
        "equidist", "--in", str(forms), "--cells", "2x3",
        "--region", "0,0.5,1,2", "--region", "0,0.5,1,inf",
        "--out", str(report),
    ]) == 0
    data = json.loads(report.read_text())
    assert list(data.keys()) == ["X", "i", "filters", "cells", "chisq", "dof", "ks_x", "ks_ytail", "ratios"]
    assert len(data["cells"]) == 6
    assert {r["region"] for r in data["ratios"]} == {"0,0.5,1,2", "0,0.5,1,inf"}


def test_equidist_figures(tmp_path):
    forms = tmp_path / "forms.csv"
    report = tmp_path / "rep.json"
    figdir = tmp_path / "figs"
    assert run(["enumerate", "--xmax", "2000", "--out", str(forms)]) == 0
    assert run([
        "equidist", "--in", str(forms), "--cells", "2x2",
        "--out", str(report), "--figures", str(figdir),
    ]) == 0
    made = sorted(os.listdir(figdir))
    assert made == ["rep_cells.png", "rep_domain.png", "rep_xmarginal.png", "rep_ytail.png"]


def test_determinism_across_threads(tmp_path):
    outs = []
    for threads in ("1", "2"):
        f = tmp_path / f"forms{threads}.csv"
        assert run(["enumerate", "--xmax", "4000", "--threads", threads, "--seed", "5", "--out", str(f)]) == 0
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]


def test_threads_env_override(tmp_path, monkeypatch):
    f1 = tmp_path / "a.csv"
    f2 = tmp_path / "b.csv"
    assert run(["enumerate", "--xmax", "1500", "--threads", "1", "--out", str(f1)]) == 0
    monkeypatch.setenv("SHAPELAB_THREADS", "2")
    assert run(["enumerate", "--xmax", "1500", "--threads", "1", "--out", str(f2)]) == 0
    monkeypatch.delenv("SHAPELAB_THREADS")
    assert f1.read_bytes() == f2.read_bytes()


def test_local_density_cli(capsys):
    assert run(["local-density", "--p", "2", "--what", "maximal"]) == 0
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert out["density"] == "21/32"


def test_local_density_pred_file(tmp_path, capsys):
    pred = tmp_path / "pred.txt"
    rows = ["2"] + [f"0,{b},{c},{d}" for b in range(2) for c in range(2) for d in range(2)]
    pred.write_text("\n".join(rows) + "\n")
    assert run(["local-density", "--p", "2", "--what", f"file:{pred}"]) == 0
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert out["density"] == "1/2"


def test_mc_cli(capsys):
    assert run(["mc-jacobian", "--i", "0", "--testfn", "A", "--samples", "1000000", "--seed", "3"]) == 0
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert set(out.keys()) == {"estimate", "stderr", "N", "seed", "config"}
    assert run([
        "mc-ratio", "--i", "1", "--ymax", "2.0", "--region", "0,0.5,1,1.5",
        "--samples", "200000", "--seed", "4",
    ]) == 0
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert abs(out["estimate"] - out["config"]["mu_ratio"]) < 6 * out["stderr"]


def test_ingest_cli(tmp_path, capsys):
    fields = tmp_path / "fields.csv"
    shapes = tmp_path / "shapes.json"
    fields.write_text(
        "label,degree,i,disc,poly,basis\n"
        "x3-x-1,3,1,-23,-1 -1 0 1,1;0;0;0;1;0;0;0;1\n"
        "x4-2,4,1,-2048,-2 0 0 0 1,1;0;0;0;0;1;0;0;0;0;1;0;0;0;0;1\n"
    )
    assert run(["ingest", "--in", str(fields), "--out", str(shapes), "--d4-test"]) == 0
    data = json.loads(shapes.read_text())
    assert len(data) == 2
    assert data[0]["x"] is not None
    assert data[1]["d4_symmetric"] is True


def test_brute_cli(tmp_path):
    out = tmp_path / "oracle.csv"
    assert run(["brute", "--xmax", "100", "--out", str(out)]) == 0
    assert out.read_text().startswith("a,b,c,d,disc,i,s3,maximal,x,y\n")


def test_exit_codes(tmp_path):
    assert run(["enumerate", "--xmax", "-3", "--out", str(tmp_path / "x.csv")]) == 1
    assert run(["brute", "--xmax", "99999", "--out", str(tmp_path / "x.csv")]) == 1
    assert run(["equidist", "--in", str(tmp_path / "missing.csv"), "--cells", "2x2",
                "--out", str(tmp_path / "r.json")]) == 2
    bad = tmp_path / "bad_fields.csv"
    bad.write_text("label,degree,i,disc,poly,basis\nz,3,1,-23,-1 -1 0 1,0;1;0;1;0;0;0;0;1\n")
    assert run(["ingest", "--in", str(bad), "--out", str(tmp_path / "s.json")]) == 2
    # unknown subcommand is a usage error
    assert run(["frobnicate"]) == 1


def test_console_script_entrypoint():
    proc = subprocess.run(
        [sys.executable, "-m", "shapelab.cli", "local-density", "--p", "3", "--what", "maximal"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["density"] == "208/243"
