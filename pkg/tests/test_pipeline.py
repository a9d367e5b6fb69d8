from __future__ import annotations

import json
import math
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from rainbow_sts.designs import Decomposition, verify_rainbow
from rainbow_sts.errors import DivisibilityViolation, StageFailure
from rainbow_sts.hypercore import Family, PairGraph, TripleSystem, k3_divisible
from rainbow_sts.pipeline import (PipelineConfig, color_blocks, divisible_graphs, emit_report, generate_family,
                                  load_report, run_pipeline)

CASES = [(7, "complete", {}), (9, "complete", {}), (7, "minus-p", {"p": 0.05}), (9, "minus-p", {"p": 0.05})]


@pytest.fixture(scope="module", params=CASES, ids=lambda c: f"{c[1]}-{c[0]}")
def found(request):
    n, model, params = request.param
    fam, _ = generate_family(n, model, params, seed=1)
    rep = run_pipeline(PipelineConfig(n=n, model=model, params=params, seed=1), fam=fam)
    return n, fam, rep


def test_found_and_independently_verified(found):
    n, fam, rep = found
    assert rep["status"] == "Found"
    res = rep["result"]
    triples = [tuple(t) for t in res["triples"]]
    # independent pair-coverage check
    cover = {}
    for t in triples:
        for p in combinations(t, 2):
            cover[p] = cover.get(p, 0) + 1
    assert set(cover) == set(combinations(range(n), 2))
    assert set(cover.values()) == {1}
    assert len(set(res["colors"])) == len(res["colors"])
    assert all(t in fam[c].mult for t, c in zip(triples, res["colors"]))
    assert verify_rainbow(Decomposition(triples, res["colors"]), PairGraph.complete(n), fam)


def test_every_invariant_clean(found):
    _, _, rep = found
    assert rep["trace"], "no levels were traced"
    for lvl in rep["trace"]:
        for name in "abcdefg":
            assert lvl["invariants"][name]["passed"], (lvl["level"], name)


def test_color_count_identity(found):
    _, fam, rep = found
    sizes = rep["levels"]["sizes"]
    D = rep["levels"]["D_sizes"]
    ell = len(sizes) - 1
    for i in range(ell - 1):
        assert 3 * D[i] == math.comb(sizes[i], 2) - math.comb(sizes[i + 1], 2)
    assert 3 * D[-1] == math.comb(sizes[ell - 1], 2)
    assert sum(D) == fam.N


def test_fallback_agrees(found):
    _, _, rep = found
    fb = rep["fallback"]
    assert fb["status"] == "Found"
    assert fb["agrees"] in (True, None)


def test_levels_found_it_at_n9():
    rep = run_pipeline(PipelineConfig(n=9, seed=0, fallback=False))
    assert rep["status"] == "Found" and rep["found_by"] == "levels"


def test_inadmissible_n():
    with pytest.raises(DivisibilityViolation):
        run_pipeline(PipelineConfig(n=8))


def test_failure_report_names_stage():
    # every member is empty, so nothing can be placed at level 0
    n = 9
    fam = Family(n, [TripleSystem(n)] * 12)
    rep = run_pipeline(PipelineConfig(n=n, fallback=False), fam=fam)
    assert rep["status"] == "Failed"
    assert rep["failure"]["stage"] and rep["failure"]["reason"]


def test_color_blocks():
    assert [len(r) for r in color_blocks([9, 4, 2])] == [10, 2]
    assert [len(r) for r in color_blocks([7, 3, 1])] == [6, 1]
    with pytest.raises(StageFailure):
        color_blocks([8, 4, 2])


def test_divisible_graphs_counts():
    # on 3 vertices: empty and the triangle; on 4 vertices: empty and four triangles
    assert len(divisible_graphs(range(3))) == 2
    assert len(divisible_graphs(range(4))) == 5
    assert all(k3_divisible(G) for G in divisible_graphs(range(5)))
    with pytest.raises(StageFailure):
        divisible_graphs(range(7))


@given(st.integers(min_value=0, max_value=6))
def test_divisible_graphs_brute(k):
    vs = list(range(k))
    pairs = list(combinations(vs, 2))
    want = 0
    for mask in range(1 << len(pairs)):
        es = [p for j, p in enumerate(pairs) if mask >> j & 1]
        deg = [0] * k
        for a, b in es:
            deg[a] += 1
            deg[b] += 1
        want += len(es) % 3 == 0 and all(d % 2 == 0 for d in deg)
    assert len(divisible_graphs(vs)) == want


def test_generate_family_reports():
    fam, reps = generate_family(9, "minus-k", {"k": 3, "pool": 2}, seed=4)
    assert fam.N == 12
    assert sum(r["colors"] for r in reps) == 12
    assert all(r["size"] == 84 - 3 for r in reps)
    with pytest.raises(ValueError):
        generate_family(9, "nope")


def test_config_round_trip():
    cfg = PipelineConfig(n=9, model="minus-p", params={"p": 0.1}, seed=3)
    assert PipelineConfig.from_dict(json.loads(json.dumps(cfg.as_dict()))) == cfg


def test_emit_report_round_trip(tmp_path):
    rep = run_pipeline(PipelineConfig(n=7, seed=2))
    path = tmp_path / "run.json"
    text_json, text = emit_report(rep, path, seed=2, kind="pipeline")
    back = load_report(path)
    assert back == json.loads(text_json)
    assert back["provenance"]["package"] == "artifact"
    assert back["provenance"]["seed"] == 2
    assert back["report"]["status"] == "Found"
    assert (tmp_path / "run.json.txt").read_text() == text
    assert "report.status: \"Found\"" in text
