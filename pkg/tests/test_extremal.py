from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from rainbow_sts.designs import UNSAT, Budget, exact_cover_k3
from rainbow_sts.errors import SpecViolation
from rainbow_sts.extremal import (ExtremalSpec, audit_extremal, build_extremal, codegree_bound,
                                  default_spec, exact_min_codegree, is_valid, kind_counts,
                                  parity_certificate, triple_kind, valid_specs)
from rainbow_sts.hypercore import PairGraph, degree_report


def test_n9_counts():
    spec = ExtremalSpec(9, (0, 3, 3, 3))
    H = build_extremal(spec)
    assert len(H) == 57
    assert kind_counts(spec) == {"E0": 0, "E1": 0, "E2": 3, "E3": 54}


@pytest.mark.parametrize("n,sizes,P", [(9, (0, 3, 3, 3), 27), (15, (4, 3, 3, 5), 23), (9, (2, 3, 3, 1), 9)])
def test_parity_certificate_values(n, sizes, P):
    spec = ExtremalSpec(n, sizes)
    assert parity_certificate(spec) == P and P % 2 == 1


def test_invalid_sizes_rejected():
    with pytest.raises(SpecViolation):
        ExtremalSpec(9, (1, 3, 3, 2))
    with pytest.raises(SpecViolation):
        ExtremalSpec(9, (0, 3, 3, 4))


def test_n33_audit_meets_bound():
    spec = ExtremalSpec(33, (8, 9, 9, 7))
    rep = audit_extremal(spec)
    assert rep.min_codegree == exact_min_codegree(spec)
    assert rep.min_codegree >= codegree_bound(33) == 15


def test_n63_balanced():
    spec = default_spec(63)
    assert exact_min_codegree(spec) >= 38


def test_triple_kind_table():
    assert triple_kind((0, 0, 1)) == "E0"
    assert triple_kind((0, 1, 2)) == "E1"
    assert triple_kind((0, 1, 1)) is None
    assert triple_kind((1, 1, 1)) == "E2"
    assert triple_kind((1, 1, 2)) == "E3"
    assert triple_kind((1, 2, 3)) is None


def test_parity_predicts_unsat_n9():
    spec = ExtremalSpec(9, (0, 3, 3, 3))
    out = exact_cover_k3(PairGraph.complete(9), build_extremal(spec), Budget(10**7, 30.0))
    assert out.status == UNSAT


@given(st.sampled_from([9, 13, 15, 19, 21, 25, 27, 33]))
def test_valid_specs_are_valid_and_audit_matches_enumeration(n):
    for spec in list(valid_specs(n))[:3]:
        assert is_valid(n, spec.sizes)
        H = build_extremal(spec)
        assert degree_report(H).min_codegree == exact_min_codegree(spec)


@given(st.sampled_from([9, 13, 15]), st.integers(0, 50))
def test_every_pair_kind_partition(n, k):
    specs = list(valid_specs(n))
    spec = specs[k % len(specs)]
    counts = kind_counts(spec)
    H = build_extremal(spec)
    assert sum(counts.values()) == len(H)
    lab = spec.block_of()
    for t in combinations(range(n), 3):
        assert (t in H) == (triple_kind(tuple(lab[v] for v in t)) is not None)
