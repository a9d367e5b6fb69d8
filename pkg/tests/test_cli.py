from __future__ import annotations

import json

import pytest

from rainbow_sts.cli import EXIT_INVARIANT, EXIT_OK, EXIT_TIMEOUT, EXIT_UNSAT, main
from rainbow_sts.fractional import loads_w3
from rainbow_sts.hypercore import PairGraph, TripleSystem, read_h3, write_g2, write_h3


def run(argv, capsys=None):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out if capsys else ""
    return code, out


def report(prefix) -> dict:
    return json.loads(open(str(prefix) + ".json").read())


def test_constant_prints_json(capsys):
    code, out = run(["constant"], capsys)
    assert code == EXIT_OK
    body = json.loads(out)
    assert body["kind"] == "constant"
    assert "0.8792" in out
    assert body["provenance"]["package"] == "artifact"


def test_sts_build_then_verify(tmp_path):
    pre = tmp_path / "s15"
    assert run(["sts", "build", "--n", 15, "--out", pre]) == (EXIT_OK, "")
    assert report(pre)["report"]["verified"] is True
    assert (tmp_path / "s15.json.txt").exists()
    H = read_h3(str(pre) + ".h3")
    assert H.size == 35
    assert run(["sts", "verify", "--file", str(pre) + ".h3"])[0] == EXIT_OK


def test_sts_verify_rejects_broken_file(tmp_path):
    path = tmp_path / "bad.h3"
    write_h3(path, TripleSystem(7, [(0, 1, 2), (0, 1, 3)]))
    assert run(["sts", "verify", "--file", path])[0] == EXIT_INVARIANT


def test_sts_count_and_timeout(tmp_path):
    assert run(["sts", "count", "--n", 7, "--out", tmp_path / "c"])[0] == EXIT_OK
    assert report(tmp_path / "c")["report"]["count"] == 30
    assert run(["sts", "count", "--n", 9, "--budget-nodes", 50, "--out", tmp_path / "t"])[0] == EXIT_TIMEOUT


def test_sts_inadmissible_n_exits_2(capsys):
    assert run(["sts", "build", "--n", 8], capsys)[0] == EXIT_UNSAT


def test_cover_unsat_and_found(tmp_path):
    g = tmp_path / "c4.g2"
    write_g2(g, PairGraph(4, [(0, 1), (1, 2), (2, 3), (0, 3)]))
    assert run(["cover", "--graph", g, "--out", tmp_path / "a"])[0] == EXIT_UNSAT
    assert run(["cover", "--n", 9, "--out", tmp_path / "b"])[0] == EXIT_OK
    assert read_h3(str(tmp_path / "b") + ".h3").size == 12


def test_rainbow_cover(tmp_path):
    code, _ = run(["rainbow-cover", "--n", 7, "--model", "minus-k", "--k", 3, "--seed", 1, "--out", tmp_path / "r"])
    assert code == EXIT_OK
    assert report(tmp_path / "r")["report"]["checked"] is True


def test_extremal_actions(tmp_path):
    assert run(["extremal", "certify", "--n", 9, "--sizes", "0,3,3,3", "--out", tmp_path / "x"])[0] == EXIT_UNSAT
    assert report(tmp_path / "x")["report"]["parity_odd"] is True
    assert run(["extremal", "audit", "--n", 33, "--out", tmp_path / "y"])[0] == EXIT_OK
    assert run(["extremal", "build", "--n", 9, "--sizes", "1,1,1", "--out", tmp_path / "z"])[0] == EXIT_INVARIANT


def test_frac_flow_then_check(tmp_path):
    h = tmp_path / "k7.h3"
    write_h3(h, TripleSystem.complete(7))
    assert run(["frac", "flow-decompose", "--h3", h, "--out", tmp_path / "f"])[0] == EXIT_OK
    psi = loads_w3(open(str(tmp_path / "f") + ".w3").read())
    assert psi.min_weight() >= 0
    assert run(["frac", "check", "--weights", str(tmp_path / "f") + ".w3", "--h3", h,
                "--out", tmp_path / "g"])[0] == EXIT_OK


def test_frac_uniform_check_fails_on_non_design(tmp_path):
    h = tmp_path / "one.h3"
    write_h3(h, TripleSystem(4, [(0, 1, 2), (0, 1, 3)]))
    assert run(["frac", "uniform", "--h3", h, "--out", tmp_path / "u"])[0] == EXIT_OK
    code = run(["frac", "check", "--weights", str(tmp_path / "u") + ".w3", "--h3", h,
                "--out", tmp_path / "v"])[0]
    assert code == EXIT_INVARIANT


def test_gadget_absorber_files(tmp_path):
    g = tmp_path / "tri.g2"
    write_g2(g, PairGraph(3, [(0, 1), (1, 2), (0, 2)]))
    assert run(["gadget", "absorber", "--graph", g, "--out", tmp_path / "a"])[0] == EXIT_OK
    rep = report(tmp_path / "a")["report"]
    assert rep["verified"] and rep["degeneracy"] <= 4
    cert = json.loads(open(str(tmp_path / "a") + ".cert.json").read())
    assert len(cert["decompositions"]) == 2
    k5 = tmp_path / "k5.h3"
    write_h3(k5, TripleSystem.complete(5))
    code = run(["gadget", "degeneracy", "--h3", k5, "--roots", "0,1", "--out", tmp_path / "d"])[0]
    assert code == EXIT_OK
    d = report(tmp_path / "d")["report"]
    assert d["degeneracy"] == d["bruteforce"]


def test_vortex_sample_then_verify(tmp_path):
    args = ["--n", 31, "--eps", "1/2", "--m-prime", 3, "--alpha", "0", "--seed", 2]
    assert run(["vortex", "sample", *args, "--out", tmp_path / "v"])[0] == EXIT_OK
    chain = str(tmp_path / "v") + ".chain.json"
    assert run(["vortex", "verify", *args, "--chain", chain, "--out", tmp_path / "w"])[0] == EXIT_OK
    assert report(tmp_path / "w")["report"]["passed"] is True


def test_pipeline_cli(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 9, "model": "minus-p", "params": {"p": 0.05}, "seed": 1}))
    assert run(["pipeline", "--config", cfg, "--out", tmp_path / "p"])[0] == EXIT_OK
    rep = report(tmp_path / "p")["report"]
    assert rep["status"] == "Found"
    col = json.loads(open(str(tmp_path / "p") + ".colors.json").read())
    assert len(set(col["colors"])) == len(col["triples"]) == 12
    assert run(["pipeline", "--n", 8, "--out", tmp_path / "q"])[0] == EXIT_UNSAT


def test_pipeline_yaml_config(tmp_path):
    pytest.importorskip("yaml")
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("n: 7\nmodel: complete\nseed: 3\n")
    assert run(["pipeline", "--config", cfg, "--out", tmp_path / "y"])[0] == EXIT_OK


def test_coverdown_cli(tmp_path):
    cfg = tmp_path / "cd.json"
    cfg.write_text(json.dumps({"seed": 2}))
    assert run(["coverdown", "run", "--config", cfg, "--out", tmp_path / "c"])[0] == EXIT_OK
    rep = report(tmp_path / "c")["report"]
    assert rep["diagnostics"]["conclusions"]["5"]["passed"]
