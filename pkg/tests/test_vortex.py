from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rainbow_sts.errors import RetriesExhausted
from rainbow_sts.hypercore import ComplementTripleSystem, Family, TripleSystem, restricted_codegree
from rainbow_sts.vortex import (VortexChain, as_fraction, color_vortex_ok, levels,
                                sample_transversal_vortex, verify_vortex)


def minus_p_family(n, p, seed, pool=3, N=None, complement=True):
    rng = np.random.default_rng(seed)
    all_t = np.array(list(combinations(range(n), 3)))
    members = []
    for _ in range(pool):
        miss = all_t[rng.random(len(all_t)) < p]
        members.append(ComplementTripleSystem(n, miss) if complement
                       else TripleSystem(n, [tuple(t) for t in all_t if tuple(t) not in set(map(tuple, miss))]))
    N = N or n * (n - 1) // 6
    return Family(n, [members[c % pool] for c in range(N)])


def test_levels_examples():
    assert levels(100, 10, Fraction(1, 2)) == (4, [100, 50, 25, 12, 6])
    assert levels(300, 20, 0.3) == (3, [300, 90, 27, 8])
    assert levels(5, 10, Fraction(1, 2)) == (0, [5])


def test_as_fraction_uses_decimal_repr():
    assert as_fraction(0.3) == Fraction(3, 10)


def test_color_vortex():
    assert color_vortex_ok([range(10), range(5)], 10, Fraction(1, 2))
    assert not color_vortex_ok([range(5), range(6)], 10, Fraction(1, 2))
    assert not color_vortex_ok([range(11)], 10, Fraction(1, 2))


def brute_check(chain, fam):
    """Independent re-check through the scalar restricted codegree."""
    U = [set(u) for u in chain.vertex_sets]
    for i in range(len(U) - 1):
        need = chain.alpha * len(U[i + 1])
        for rep, cols in fam.distinct_members().items():
            if not set(cols) & set(chain.color_sets[i]):
                continue
            for a, b in combinations(sorted(U[i]), 2):
                if restricted_codegree(fam[rep], (a, b), U[i + 1]) < need:
                    return False
    return True


def test_sampler_and_independent_checker_agree():
    fam = minus_p_family(40, 0.05, 1)
    chain = sample_transversal_vortex(fam, Fraction(1, 2), 5, Fraction(3, 10), seed=2)
    assert chain.report["verification"]["passed"]
    assert verify_vortex(chain, fam)["passed"]
    assert brute_check(chain, fam)


def test_tampered_chain_fails():
    fam = minus_p_family(40, 0.05, 1)
    chain = sample_transversal_vortex(fam, Fraction(1, 2), 5, Fraction(1, 4), seed=2)
    bad = VortexChain([chain.vertex_sets[0], chain.vertex_sets[1][:-1]] + chain.vertex_sets[2:],
                      chain.color_sets, chain.alpha, chain.eps, chain.m)
    assert not verify_vortex(bad, fam)["passed"]
    outside = sorted(set(range(40)) - set(chain.vertex_sets[1]))[0]
    gone = chain.vertex_sets[2][0]
    U1 = tuple(sorted([v for v in chain.vertex_sets[1] if v != gone] + [outside]))
    moved = [chain.vertex_sets[0], U1] + chain.vertex_sets[2:]
    bad2 = VortexChain(moved, chain.color_sets, chain.alpha, chain.eps, chain.m)
    assert not verify_vortex(bad2, fam)["passed"]  # U_2 no longer sits inside U_1


def test_impossible_alpha_exhausts_retries():
    fam = minus_p_family(30, 0.05, 0)
    with pytest.raises(RetriesExhausted) as ei:
        sample_transversal_vortex(fam, Fraction(1, 2), 5, Fraction(1), seed=0, retries=5)
    assert ei.value.detail["level"] == 1 and ei.value.detail["value"] < ei.value.detail["needed"]


def test_chain_json_round_trip():
    fam = minus_p_family(30, 0.05, 0)
    chain = sample_transversal_vortex(fam, Fraction(1, 2), 5, Fraction(1, 4), seed=0)
    again = VortexChain.loads(chain.dumps())
    assert again.as_dict() == chain.as_dict()
    assert verify_vortex(again, fam)["passed"]


def test_complement_and_explicit_members_agree():
    a = minus_p_family(24, 0.05, 5, complement=True)
    b = minus_p_family(24, 0.05, 5, complement=False)
    ca = sample_transversal_vortex(a, Fraction(1, 2), 4, Fraction(1, 4), seed=9)
    cb = sample_transversal_vortex(b, Fraction(1, 2), 4, Fraction(1, 4), seed=9)
    assert ca.vertex_sets == cb.vertex_sets
    assert ca.report["min_codegree_per_level"] == cb.report["min_codegree_per_level"]


@given(st.integers(0, 10**6), st.sampled_from([Fraction(1, 2), Fraction(1, 3)]))
def test_sampled_chains_always_verify(seed, eps):
    fam = minus_p_family(30, 0.05, seed % 7)
    try:
        chain = sample_transversal_vortex(fam, eps, 4, Fraction(1, 5), seed=seed, retries=30)
    except RetriesExhausted:
        return
    assert verify_vortex(chain, fam)["passed"] and brute_check(chain, fam)
    sizes = [len(u) for u in chain.vertex_sets]
    assert sizes == levels(30, 4, eps)[1]


@given(st.integers(3, 400), st.integers(1, 30), st.sampled_from([Fraction(1, 2), Fraction(3, 10), Fraction(2, 3)]))
def test_levels_properties(n, m, eps):
    ell, sizes = levels(n, m, eps)
    assert sizes[-1] <= m and all(s > m for s in sizes[:-1])
    assert all(sizes[i + 1] == (eps * sizes[i]).__floor__() for i in range(ell))
