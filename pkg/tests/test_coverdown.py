from __future__ import annotations

from dataclasses import replace
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from rainbow_sts import coverdown as cd
from rainbow_sts.errors import StageFailure
from rainbow_sts.hypercore import Family, PairGraph, TripleSystem

SEEDS = range(20)


@pytest.fixture(scope="module")
def desk():
    return cd.desk_instance(seed=0)


@pytest.fixture(scope="module")
def runs():
    out = {}
    for s in SEEDS:
        out[s] = cd.run_coverdown(cd.desk_instance(seed=s), rng=s)
    return out


def test_desk_instance_shape(desk):
    assert desk.n == 60
    assert len(desk.U) == 30 and len(desk.U2) == 15
    assert set(desk.U2) <= set(desk.U)
    margins = desk.validate()
    assert all("level" in m for m in margins)


def test_conclusions_2_and_5_exact(runs):
    for s, out in runs.items():
        c = out.diagnostics["conclusions"]
        assert c["1"]["X1_inside_W"], s
        assert c["2"]["passed"], s
        assert c["5"]["passed"], s
        assert c["codegree_at_most_1"], s
        for key in ("3", "4"):
            assert c[key]["level"] in ("pass", "warn")


def test_outside_pairs_covered_once(runs):
    out = runs[0]
    inp = cd.desk_instance(seed=0)
    Us = set(inp.U)
    cover = {}
    for t in out.T.mult:
        for p in combinations(t, 2):
            cover[p] = cover.get(p, 0) + 1
    assert max(cover.values()) == 1
    for e in inp.G.edges:
        if not (e[0] in Us and e[1] in Us):
            assert cover.get(e) == 1, e
    # everything T covers is an edge of G
    assert set(cover) <= set(inp.G.edges)


def test_rainbow_colors_independently(runs):
    inp = cd.desk_instance(seed=3)
    out = runs[3]
    colors = list(out.phi.values())
    assert len(set(colors)) == len(colors) == len(out.T.mult)
    for t, c in out.phi.items():
        assert t in inp.fam[c].mult
    assert set(inp.X[0]) <= set(out.W)


def test_nibble_leftover_mean_within_ten_percent(runs):
    per_quota = {}
    for out in runs.values():
        for name, frac in out.diagnostics["nibble"]["leftover"].items():
            per_quota.setdefault(name, []).append(frac)
    worst = max(np.mean(v) for v in per_quota.values())
    assert worst <= 0.10, worst


def test_draw_bookkeeping(runs):
    for out in runs.values():
        d = out.diagnostics["draws"]
        assert 1 <= d["used"] <= 4
        assert len(d["failures"]) == d["used"] - 1
        assert all(f["stage"] in cd.REDRAW_STAGES for f in d["failures"])


def test_deterministic_for_fixed_seed(runs):
    again = cd.run_coverdown(cd.desk_instance(seed=0), rng=0)
    assert again.phi == runs[0].phi


def test_cleaner_sets_condition_g(desk):
    L = cd.build_popular_L(desk.fam, desk.X[8][:150], 100, desk.G)
    A, rep = cd.sample_cleaner_sets(desk, L, rng=7)
    Us, U2 = set(desk.U), set(desk.U2)
    outside_edges = sum(1 for e in desk.G.edges if not (e[0] in Us and e[1] in Us))
    assert (outside_edges - sum(len(a) for a in A.values())) % 3 == 0
    assert rep["g"]
    for v, a in A.items():
        assert v not in Us
        assert a <= Us - U2
        assert all((min(u, v), max(u, v)) in desk.G.edges for u in a)


def test_popular_L_matches_brute_force():
    n = 6
    rng = np.random.default_rng(5)
    tris = list(combinations(range(n), 3))
    members = [TripleSystem(n, [t for t in tris if rng.random() < 0.6]) for _ in range(5)]
    fam = Family(n, members)
    Y = [0, 1, 2, 3, 4]
    for thr in (1, 2, 3, 5):
        L = cd.build_popular_L(fam, Y, thr)
        want = {t for t in tris if sum(t in m.mult for m in members) >= thr}
        assert set(L.mult) == want
    assert not cd.build_popular_L(fam, Y, 6).mult


def test_assemble_T2_simple():
    # one outside edge 0-1, U = {2, 3}; only apex 3 has both edges free
    L = TripleSystem(4, [(0, 1, 2), (0, 1, 3)])
    free = {(0, 1), (0, 3), (1, 3), (0, 2)}
    T2, rep = cd.assemble_T2([(0, 1)], {0: {2, 3}, 1: {3}}, L, free, [2, 3])
    assert T2 == [(0, 1, 3)]
    assert free == {(0, 2)}
    assert rep["fallback_apexes"] == 0


def test_assemble_T2_stuck():
    from rainbow_sts.errors import Stuck
    L = TripleSystem(4, [(0, 1, 2)])
    with pytest.raises(Stuck):
        cd.assemble_T2([(0, 1)], {0: {2}, 1: {2}}, L, {(0, 1), (0, 2)}, [2, 3])


def test_input_validation(desk):
    with pytest.raises(StageFailure, match="U'"):
        replace(desk, U2=(0,)).validate()
    with pytest.raises(StageFailure, match="partition"):
        replace(desk, X=desk.X[:8] + [desk.X[8][1:]]).validate()
    with pytest.raises(StageFailure, match="nine"):
        replace(desk, X=desk.X[:8]).validate()
    bad = desk.G.minus([(desk.U[0], desk.U[1])])
    with pytest.raises(StageFailure):
        replace(desk, G=bad).validate()


def test_trivial_instance_has_empty_output():
    n = 7
    G = PairGraph.complete(n)
    fam = Family(n, [TripleSystem(n, list(combinations(range(n), 3)))] * 9)
    X = [[c] for c in range(9)]
    inp = cd.CoverDownInput(fam, G, tuple(range(n)), (), X, Fraction(1, 2), mu=Fraction(1, 3))
    out = cd.run_coverdown(inp, rng=0)
    assert not out.T.mult and out.diagnostics["trivial"]
