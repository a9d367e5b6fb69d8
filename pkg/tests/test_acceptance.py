"""Acceptance criteria 1-12, each at its stated tolerance.

Every test records one PASS/FAIL line (see conftest).  Criteria 4 and 10
cannot be met as stated at this scale; they run faithfully and are marked
as strict expected failures, each paired with a supplementary run showing
the machinery works once the unreachable requirement is relaxed.
"""

from __future__ import annotations

import math
import subprocess
import sys
import time
from fractions import Fraction as Q
from itertools import combinations

import numpy as np
import pytest

from rainbow_sts import coverdown as cd
from rainbow_sts.designs import (FOUND, TIMED_OUT, UNSAT, construct_sts, count_decompositions,
                                 exact_cover_k3, rainbow_exact_cover, verify_sts)
from rainbow_sts.errors import RetriesExhausted
from rainbow_sts.extremal import (ExtremalSpec, audit_extremal, build_extremal, codegree_bound, default_spec,
                                  exact_min_codegree, parity_certificate)
from rainbow_sts.fractional import (build_flow_net, check_flow, check_pseudorandom, discretize, flow_to_fstss,
                                    is_perfect_matching, max_flow, PseudoParams, regularize, threshold_constant,
                                    uniform_weight)
from rainbow_sts.gadgets import (build_absorber, build_cycle_transformer, build_subdivision_transformer,
                                 c4_absorber, divisible_corpus, edge_degeneracy, edge_degeneracy_bruteforce,
                                 fan_edges, gadget_degeneracy, verify_absorber)
from rainbow_sts.hypercore import (ComplementTripleSystem, Family, PairGraph, TripleSystem, build_aux,
                                   degree_report, shadow)
from rainbow_sts.pipeline import PipelineConfig, generate_family, run_pipeline
from rainbow_sts.vortex import levels, sample_transversal_vortex, verify_vortex


def covers_once(triples, pairs) -> bool:
    seen = {}
    for t in triples:
        for p in combinations(sorted(t), 2):
            seen[p] = seen.get(p, 0) + 1
    return set(seen) == set(pairs) and set(seen.values()) <= {1}


# 1 ------------------------------------------------------------------------

def test_criterion_01_threshold_constant(record):
    t0 = time.perf_counter()
    out = threshold_constant()
    dt = time.perf_counter() - t0
    root = out["root"]
    ok = (out["quadratic"] == [6, -3, -2]
          and abs(root - (3 + math.sqrt(57)) / 12) < 1e-12
          and root < 0.88
          and out["decimal"].startswith("0.879")
          and out["rounded_4"] == "0.8792"
          and dt < 1.0)
    # 0.8792 is the 4-place rounding; the digits themselves read 0.87915...
    record(1, ok, f"root={root:.15f} rounded={out['rounded_4']} t={dt:.3f}s")
    assert ok


# 2 ------------------------------------------------------------------------

def test_criterion_02_sts_and_counts(record):
    t0 = time.perf_counter()
    admissible = [n for n in range(3, 101) if n % 6 in (1, 3)]
    built = all(verify_sts(construct_sts(n), n) for n in admissible)
    t_build = time.perf_counter() - t0
    t0 = time.perf_counter()
    c7 = count_decompositions(PairGraph.complete(7))
    t7 = time.perf_counter() - t0
    t0 = time.perf_counter()
    c9 = count_decompositions(PairGraph.complete(9))
    t9 = time.perf_counter() - t0
    ok = built and t_build < 5 and c7 == 30 and t7 < 1 and c9 == 840 and t9 < 30
    record(2, ok, f"{len(admissible)} orders built in {t_build:.2f}s; K7={c7} ({t7:.2f}s) K9={c9} ({t9:.2f}s)")
    assert ok


# 3 ------------------------------------------------------------------------

def test_criterion_03_extremal_no_sts(record):
    s9 = ExtremalSpec(9, (0, 3, 3, 3))
    s15 = ExtremalSpec(15, (4, 3, 3, 5))
    p9, p15 = parity_certificate(s9), parity_certificate(s15)
    t0 = time.perf_counter()
    o9 = exact_cover_k3(PairGraph.complete(9), build_extremal(s9))
    t9 = time.perf_counter() - t0
    o15 = exact_cover_k3(PairGraph.complete(15), build_extremal(s15))
    ok9 = p9 % 2 == 1 and o9.status == UNSAT and t9 < 10
    # at n = 15 a TimedOut search is acceptable and the odd certificate gates alone
    ok15 = p15 % 2 == 1 and (o15.status == UNSAT or (o15.status == TIMED_OUT and o15.elapsed <= 300 + 5))
    spec33 = default_spec(33)
    audit = audit_extremal(spec33)
    bound = math.ceil(3 * 33 / 4 - 10)
    ok33 = codegree_bound(33) == bound and audit.min_codegree == exact_min_codegree(spec33) >= bound
    ok = ok9 and ok15 and ok33 and o15.status != FOUND
    record(3, ok, f"n9 P={p9} {o9.status} ({t9:.2f}s); n15 P={p15} {o15.status} ({o15.elapsed:.0f}s, "
                  f"{o15.nodes_explored} nodes); n33 {spec33.sizes} min codegree {audit.min_codegree} >= {bound}")
    assert ok


# 4 ------------------------------------------------------------------------

def _dense_until(n, p, seed, min_ess, max_draws):
    rng = np.random.default_rng(seed)
    all_t = list(combinations(range(n), 3))
    best = None
    for draw in range(1, max_draws + 1):
        keep = rng.random(len(all_t)) < p
        H = TripleSystem(n, [t for t, k in zip(all_t, keep) if k])
        ess = degree_report(H).essential_min_codegree
        best = ess if best is None else max(best, ess)
        if ess >= min_ess:
            return H, draw, best
    return None, max_draws, best


def _flow_check(H):
    psi0 = uniform_weight(H)
    net = build_flow_net(H, psi0)
    res = max_flow(net)
    psi = flow_to_fstss(H, psi0, net, res)
    loads = {p: psi.pair_load(p) for p in shadow(H).edges}
    return net, res, psi, loads


@pytest.mark.xfail(strict=True, reason="δ_ess >= 0.9n at n=24 forces every triple present; "
                                       "a p=0.97 draw has that with probability about 0.97^2024")
def test_criterion_04_fractional_pipeline(record):
    n = 24
    t0 = time.perf_counter()
    H, draws, best = _dense_until(n, 0.97, 0, 0.9 * n, max_draws=200)
    if H is None:
        record(4, False, f"no draw reached δ_ess >= {0.9 * n} in {draws} draws (best {best})")
        pytest.fail("regeneration never met the codegree requirement")
    net, res, psi, loads = _flow_check(H)
    ok = (res.value == net.demand and check_flow(net, res) and psi.min_weight() >= 0
          and all(v == 1 for v in loads.values()) and time.perf_counter() - t0 < 120)
    record(4, ok, f"flow {res.value} of {net.demand}")
    assert ok


def test_criterion_04_supplementary_first_draw():
    # same generator without the unreachable codegree gate
    n = 24
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    H = TripleSystem(n, [t for t in combinations(range(n), 3) if rng.random() < 0.97])
    net, res, psi, loads = _flow_check(H)
    assert res.value == net.demand and check_flow(net, res)
    assert psi.min_weight() >= 0
    assert all(isinstance(v, Q) and v == 1 for v in loads.values())
    assert time.perf_counter() - t0 < 120


# 5, 6 ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def regularized():
    A = build_aux(TripleSystem.complete(9)).hypergraph
    t0 = time.perf_counter()
    psi = regularize(A, 16, Q(1, 4))
    return A, psi, time.perf_counter() - t0


def test_criterion_05_regularization(record, regularized):
    A, psi, dt = regularized
    degs = psi.degrees()
    growth = psi.meta["growth"]
    ok = (all(d == 1 for d in degs) and is_perfect_matching(psi, A)
          and psi.norm() <= Q(1, 4) + Q(1, 2 ** 4)
          and growth and all(g <= 4 for _, g in growth) and dt < 60)
    record(5, ok, f"max weight {psi.norm()} <= {Q(1, 4) + Q(1, 16)}; rounds {len(growth)}, "
                  f"max growth {max(g for _, g in growth)}; t={dt:.1f}s")
    assert ok


def test_criterion_06_discretization(record, regularized):
    A, psi, _ = regularized
    D = 10 ** 4
    F, rep = discretize(A, psi, D)
    tau = rep["tau_source"]
    own = check_pseudorandom(F, PseudoParams(D, 2 * tau, rep["delta"]))
    lo, hi = (1 - 2 * tau) * D, (1 + 2 * tau) * D
    degs = F.degrees()
    ok = (rep["passed"] and own["passed"] and all(isinstance(d, (int, np.integer)) for d in degs)
          and all(lo <= d <= hi for d in degs) and rep["subhypergraph"] and rep["rounding_ok"])
    record(6, ok, f"τ={tau} degrees in [{min(degs)}, {max(degs)}] within [{float(lo)}, {float(hi)}]")
    assert ok


# 7 ------------------------------------------------------------------------

def _fresh(g):
    rootV = {v for e in g.root.edges for v in e} if g.kind == "absorber" else \
        {v for e in list(g.S.edges) + list(g.S2.edges) for v in e}
    return rootV, {v for t in g.gadget.mult for v in t} - rootV


def test_criterion_07_gadget_suite(record):
    t0 = time.perf_counter()
    corpus = divisible_corpus(9)
    gadgets, bad = {}, []
    for name, G in corpus.items():
        A = build_absorber(G)
        gadgets[f"absorber:{name}"] = A
        d = gadget_degeneracy(A)[0]
        if not verify_absorber(A, G) or d > 4:
            bad.append((name, d))
        gadgets[f"subdivision:{name}"] = build_subdivision_transformer(G)
    gadgets["cycle:3"] = build_cycle_transformer([0, 1, 2], [(3, 4), (4, 5), (3, 5)])
    gadgets["c4-fan"] = c4_absorber()
    # (system, root vertices) pairs; the pieces F_G, F_{G*} and the S-rooted
    # transformer are what actually gets embedded vertex by vertex
    small = [(g.gadget, _fresh(g)[0], name) for name, g in gadgets.items()]
    for name, G in corpus.items():
        T = gadgets[f"subdivision:{name}"]
        FG = [t for t in T.gadget.mult if sum(v < G.n for v in t) == 2]
        FGs = [t for t in T.gadget.mult if t not in FG]
        VG = {v for e in G.edges for v in e}
        VGs = {v for e in T.meta["G_star"].edges for v in e}
        small += [(TripleSystem(T.n, FG), VG, f"F_G:{name}"),
                  (TripleSystem(T.n, FGs), VGs, f"F_G*:{name}"),
                  (T.gadget, VG, f"S-rooted:{name}")]
    compared, nontrivial, mismatch = 0, 0, []
    for H, rootV, name in small:
        fresh = {v for t in H.mult for v in t} - set(rootV)
        if len(fresh) <= 9:
            compared += 1
            nontrivial += bool(fresh)
            greedy = edge_degeneracy(H, rootV)[0]
            brute = edge_degeneracy_bruteforce(H, rootV)
            if greedy != brute:
                mismatch.append((name, greedy, brute))
    dt = time.perf_counter() - t0
    ok = not bad and not mismatch and nontrivial > 0 and dt < 300
    record(7, ok, f"{len(corpus)} corpus graphs absorbed; greedy = brute force on {compared} gadgets "
                  f"with <= 9 fresh vertices ({nontrivial} with any); "
                  f"t={dt:.1f}s")
    assert ok, (bad, mismatch)


# 8 ------------------------------------------------------------------------

_C4_SCRIPT = ("from rainbow_sts.gadgets import c4_absorber; from rainbow_sts.hypercore import dumps_h3; "
              "print(dumps_h3(c4_absorber().gadget))")


def test_criterion_08_c4_absorber(record):
    A = c4_absorber()
    fan = PairGraph(A.n, fan_edges())
    sh = shadow(A.gadget)
    full, minus = A.certified_decomps
    replay = (all(t in A.gadget.mult for t in list(full.triples) + list(minus.triples))
              and covers_once(full.triples, sh.edges)
              and covers_once(minus.triples, sh.minus(fan.edges).edges))
    runs = {subprocess.run([sys.executable, "-c", _C4_SCRIPT], capture_output=True, text=True,
                           check=True).stdout for _ in range(2)}
    ok = bool(verify_absorber(A, fan)) and replay and len(runs) == 1
    record(8, ok, f"{A.gadget.size} triples, both certificates replay, identical across two processes")
    assert ok


# 9 ------------------------------------------------------------------------

def test_criterion_09_transversal_search(record):
    n = 7
    fam, reports = generate_family(n, "minus-k", {"k": 3}, seed=1, N=7)
    audit = [degree_report(fam[c]).min_codegree for c in range(7)]
    t0 = time.perf_counter()
    out = rainbow_exact_cover(PairGraph.complete(n), fam)
    dt = time.perf_counter() - t0
    ok = out.status == FOUND
    if ok:
        tr, cols = out.witness.triples, out.witness.colors
        ok = (covers_once(tr, combinations(range(n), 2))
              and len(set(cols)) == len(cols)
              and all(tuple(sorted(t)) in fam[c].mult for t, c in zip(tr, cols)))
    ok = ok and dt < 60 and all(r["size"] == 35 - 3 for r in reports)
    record(9, ok, f"{out.status} in {dt:.2f}s; member min codegrees {audit}")
    assert ok


# 10 -----------------------------------------------------------------------

def _vortex_family(n, p, seed, pool=3):
    rng = np.random.default_rng(seed)
    all_t = np.array(list(combinations(range(n), 3)), dtype=np.int64)
    members = [ComplementTripleSystem(n, all_t[rng.random(len(all_t)) < p]) for _ in range(pool)]
    return Family(n, [members[c % pool] for c in range(n * (n - 1) // 6)])


def _vortex_runs(alpha, seeds):
    n, eps, m = 300, Q(3, 10), 20
    wins, notes = 0, []
    for s in seeds:
        fam = _vortex_family(n, 0.05, s)
        try:
            chain = sample_transversal_vortex(fam, eps, m, alpha, seed=s, retries=100)
        except RetriesExhausted as exc:
            notes.append(f"seed {s}: level {exc.detail['level']} {exc.detail['value']} < {exc.detail['needed']}")
            continue
        wins += verify_vortex(chain, fam)["passed"]
    return wins, notes


@pytest.mark.xfail(strict=True, reason="|U_3| = 8, so a pair inside U_3 has at most 6 < 0.85*8 candidates")
def test_criterion_10_vortex(record):
    assert levels(300, 20, Q(3, 10)) == (3, [300, 90, 27, 8])
    wins, notes = _vortex_runs(Q(17, 20), range(20))
    ok = wins >= 19
    record(10, ok, f"{wins}/20 seeds; first failure {notes[0] if notes else '-'}")
    assert ok


def test_criterion_10_supplementary_half():
    wins, notes = _vortex_runs(Q(1, 2), range(20))
    assert wins >= 19, notes


# 11 -----------------------------------------------------------------------

def test_criterion_11_coverdown(record):
    means, hard = {}, []
    margins_ok = True
    for s in range(20):
        out = cd.run_coverdown(cd.desk_instance(seed=s), rng=s)
        c = out.diagnostics["conclusions"]
        if not (c["2"]["passed"] and c["5"]["passed"] and c["codegree_at_most_1"]):
            hard.append(s)
        margins_ok &= all("level" in b for b in c["1"]["bounds"]) and "level" in c["3"] and "level" in c["4"]
        for q, frac in out.diagnostics["nibble"]["leftover"].items():
            means.setdefault(q, []).append(frac)
    worst = max(float(np.mean(v)) for v in means.values())
    ok = not hard and margins_ok and worst <= 0.10
    record(11, ok, f"(2),(5), Δ2<=1 on 20/20 seeds minus {hard}; worst mean quota leftover {worst:.3f}")
    assert ok


# 12 -----------------------------------------------------------------------

def test_criterion_12_toy_pipeline(record):
    notes, ok = [], True
    for n in (7, 9):
        for model, params in (("complete", {}), ("minus-p", {"p": 0.05})):
            rep = run_pipeline(PipelineConfig(n=n, model=model, params=params, seed=1))
            good = rep["status"] == "Found" and all(rep["result"]["check"].values())
            good &= all(lvl["invariants"][k]["passed"] for lvl in rep["trace"] for k in "abcdefg")
            sizes, D = rep["levels"]["sizes"], rep["levels"]["D_sizes"]
            ell = len(sizes) - 1
            good &= all(3 * D[i] == math.comb(sizes[i], 2) - math.comb(sizes[i + 1], 2) for i in range(ell - 1))
            good &= 3 * D[-1] == math.comb(sizes[ell - 1], 2)
            res = rep["result"]
            good &= covers_once(res["triples"], combinations(range(n), 2))
            notes.append(f"{model}-{n}:{rep['found_by'] if good else 'FAIL'}")
            ok &= bool(good)
    record(12, ok, " ".join(notes))
    assert ok
