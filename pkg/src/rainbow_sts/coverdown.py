"""Cover-down: cover every edge of G outside U with a rainbow linear 3-graph.

Stages, in order:

* L, the triples that lie in many members indexed by a reserved color set Y;
* cleaner sets A_i ⊆ U for every vertex v_i outside U (their edges to v_i
  are held back and absorbed at the end);
* the color-augmented 4-graph on E(G') ⊎ Z, where G' is what remains;
* M_a, a matching that uses every color of X_1, then M_b, a randomized
  greedy packing standing in for the nibble (its leftovers are measured);
* T_2, one triple per uncovered edge outside U through an apex in U;
* T_3, edge-disjoint perfect matchings J_i inside the leftover neighbourhoods;
* colors from Y for T_2 ∪ T_3.

All five conclusions are then checked from scratch.  Asymptotic
hypotheses are reported as margins (pass/warn) rather than enforced.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from . import kernels
from .errors import RetriesExhausted, SizeMismatch, StageFailure, Stuck
from .fractional import WeightFn, build_aux, perfect_fractional_matching, Infeasible
from .hypercore import (ComplementTripleSystem, Family, MultiHypergraph, PairGraph, TripleSystem,
                        canon_pair, k3_divisible)
from .vortex import as_fraction

# (3 + sqrt 57)/12, the fractional threshold bound used in place of the unknown δ_f
DELTA_STANDIN = Fraction(8791528696, 10**10)


def _margin(name: str, value, required, kind: str = ">=") -> dict:
    ok = value >= required if kind == ">=" else value <= required
    return {"name": name, "value": float(value), "required": float(required),
            "level": "pass" if ok else "warn"}


def _tri_pairs(t):
    a, b, c = t
    return ((a, b), (a, c), (b, c))


def _has(member, t) -> bool:
    return t in member if isinstance(member, ComplementTripleSystem) else t in member.mult


# ---------------------------------------------------------------------------
# input

@dataclass
class CoverDownInput:
    fam: Family
    G: PairGraph
    U: tuple
    U2: tuple
    X: list
    eps: Fraction
    mu: Fraction | None = None
    delta: Fraction = DELTA_STANDIN
    y_size: int | None = None
    popular_threshold: int | None = None
    quota_pad: int | None = None
    compute_psi: bool = False

    def __post_init__(self):
        self.eps = as_fraction(self.eps)
        self.U = tuple(sorted(self.U))
        self.U2 = tuple(sorted(self.U2))
        self.X = [tuple(sorted(x)) for x in self.X]
        if self.mu is None:
            self.mu = self.eps ** 10
        self.mu = as_fraction(self.mu)

    @property
    def n(self) -> int:
        return self.fam.n

    @property
    def outside(self) -> list[int]:
        Us = set(self.U)
        return [v for v in range(self.n) if v not in Us]

    def validate(self) -> list[dict]:
        """Hard requirements raise StageFailure('input', ...); scale-dependent bounds become margins."""
        n, G, eps = self.n, self.G, self.eps
        U, U2 = set(self.U), set(self.U2)
        if G.n != n:
            raise StageFailure("input", "G and the family disagree on n")
        if not U2 <= U:
            raise StageFailure("input", "U' is not inside U")
        if not k3_divisible(G):
            raise StageFailure("input", "G is not K_3-divisible")
        if any((a, b) not in G.edges for a, b in combinations(self.U, 2)):
            raise StageFailure("input", "G[U] is not complete")
        if len(self.X) != 9:
            raise StageFailure("input", "need nine color classes X_1..X_9")
        allc = [c for x in self.X for c in x]
        if sorted(allc) != list(range(self.fam.N)):
            raise StageFailure("input", "X_1..X_9 is not a partition of the colors")
        margins = [
            _margin("|U| vs eps*n", len(U), math.floor(eps * n)),
            _margin("|U'| <= eps|U|", len(U2), eps * len(U), "<="),
            _margin("min degree of G", min(G.degrees()), (1 - eps) * n),
            _margin("min d_G(v; U)", min(sum(1 for u in U if u != v and (min(u, v), max(u, v)) in G.edges)
                                         for v in range(n)), (1 - 2 * eps) * len(U)),
        ]
        for i in range(8):
            margins.append(_margin(f"|X_{i + 1}| <= eps n^({i + 1}/4)", len(self.X[i]),
                                   float(eps) * n ** ((i + 1) / 4), "<="))
        outside_edges = sum(1 for e in G.edges if not (e[0] in U and e[1] in U))
        slack = self.fam.N - Fraction(outside_edges, 3)
        margins.append(_margin("N - |E(G - G[U])|/3 >= eps^4 n^2", slack, eps ** 4 * n * n))
        margins.append(_margin("N - |E(G - G[U])|/3 <= eps^3 n^2 / 2", slack, eps ** 3 * n * n / 2, "<="))
        return margins


@dataclass
class CoverDownOutput:
    T: TripleSystem
    W: list
    phi: dict
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "triples": [list(t) for t in sorted(self.T.mult)],
            "W": sorted(int(c) for c in self.W),
            "phi": [[list(t), int(c)] for t, c in sorted(self.phi.items())],
            "diagnostics": self.diagnostics,
        }


# ---------------------------------------------------------------------------
# popular triples

def build_popular_L(fam: Family, Y: Iterable[int], threshold: int, G: PairGraph | None = None) -> TripleSystem:
    """Triples lying in at least ``threshold`` of the members indexed by Y."""
    Y = list(Y)
    n = fam.n
    if threshold > len(Y) or not Y:
        return TripleSystem(n)
    weight = Counter()
    rep_of = {}
    for rep, cols in fam.distinct_members().items():
        for c in cols:
            rep_of[c] = rep
    for c in Y:
        weight[rep_of[c]] += 1
    if G is not None:
        candidates = G.triangles()
    else:
        cand = set()
        for rep in weight:
            m = fam[rep]
            if isinstance(m, ComplementTripleSystem):
                cand.update(combinations(range(n), 3))
            else:
                cand.update(m.mult)
        candidates = sorted(cand)
    keep = []
    for t in candidates:
        s = 0
        for rep, w in weight.items():
            if _has(fam[rep], t):
                s += w
        if s >= threshold:
            keep.append(t)
    return TripleSystem(n, keep)


def _neighbours_in(H: TripleSystem, pair, U) -> set:
    a, b = pair
    return {w for w in U if w != a and w != b and tuple(sorted((a, b, w))) in H.mult}


def popular_margin(L: TripleSystem, G: PairGraph, U, delta, eps) -> dict:
    U = list(U)
    worst = None
    for e in G.sorted_edges():
        d = len(_neighbours_in(L, e, U))
        if worst is None or d < worst[0]:
            worst = (d, e)
    value = worst[0] if worst else len(U)
    out = _margin("min d_L(e; U) >= (delta + 8 eps)|U|", value, (delta + 8 * eps) * len(U))
    out["pair"] = worst[1] if worst else None
    out["shadow_equals_G"] = set(L.shadow().edges) == set(G.edges)
    return out


# ---------------------------------------------------------------------------
# cleaner sets

def sample_cleaner_sets(inp: CoverDownInput, L: TripleSystem, rng, retries: int = 100):
    """μ-random subsets A_i of N_G(v_i) ∩ (U - U'), one per vertex v_i outside U.

    (a) holds by construction, (b) is enforced by resampling each A_i up to
    ``retries`` times, (g) by dropping at most two elements of A_1.  The
    concentration conditions (c)-(f) are reported as margins.
    """
    rng = np.random.default_rng(rng)
    G, mu = inp.G, inp.mu
    U, U2 = list(inp.U), set(inp.U2)
    pool_base = [u for u in U if u not in U2]
    outside = inp.outside
    need_b = mu * len(U) / 2
    outside_edges = sum(1 for e in G.edges if not (e[0] in set(U) and e[1] in set(U)))
    A = {}
    for idx, v in enumerate(outside):
        pool = [u for u in pool_base if canon_pair(u, v) in G.edges]
        extra = 2 if idx == 0 else 0  # room for the (g) adjustment
        for attempt in range(retries):
            pick = [u for u in pool if rng.random() < float(mu)]
            if len(pick) >= need_b + extra and len(pick) >= 1:
                A[v] = set(pick)
                break
        else:
            raise RetriesExhausted(f"(b) fails for v={v}: cannot reach |A_i| >= {float(need_b)}",
                                   condition="b", vertex=v, pool=len(pool))
    removed = []
    if outside:
        r = (outside_edges - sum(len(a) for a in A.values())) % 3
        first = outside[0]
        # dropping k elements raises the difference by k
        k = (-r) % 3
        for u in sorted(A[first], reverse=True)[:k]:
            A[first].discard(u)
            removed.append(u)
    report = cleaner_report(inp, L, A)
    report["removed_from_A1"] = removed
    if not report["g"]:
        raise RetriesExhausted("(g) divisibility could not be forced", condition="g")
    return A, report


def cleaner_report(inp: CoverDownInput, L: TripleSystem, A: dict) -> dict:
    n, G, mu = inp.n, inp.G, inp.mu
    U = list(inp.U)
    Us = set(U)
    outside = inp.outside
    a_ok = all(u in Us and u not in set(inp.U2) and canon_pair(u, v) in G.edges
               for v, a in A.items() for u in a)
    sizes = [len(A[v]) for v in outside] or [0]
    inter = [len(A[v] & A[w]) for v, w in combinations(outside, 2)] or [0]
    d_ratio = 1.0
    for v in outside:
        if not A[v]:
            continue
        for u in U:
            if u == v or canon_pair(u, v) not in G.edges:
                continue
            got = len(_neighbours_in(L, (u, v), A[v]))
            d_ratio = min(d_ratio, got / len(A[v]))
    e_min = None
    for v, w in combinations(outside, 2):
        if canon_pair(v, w) not in G.edges:
            continue
        got = len(_neighbours_in(L, (v, w), A[v] & A[w]))
        e_min = got if e_min is None else min(e_min, got)
    load = Counter(u for a in A.values() for u in a)
    outside_edges = sum(1 for e in G.edges if not (e[0] in Us and e[1] in Us))
    g_ok = (outside_edges - sum(len(a) for a in A.values())) % 3 == 0
    return {
        "a": a_ok,
        "b": _margin("min |A_i| >= mu|U|/2", min(sizes), mu * len(U) / 2),
        "c": _margin("max |A_i ∩ A_j| <= 2 mu^2 |U|", max(inter), 2 * mu * mu * len(U), "<="),
        "d": _margin("min |N_L(u v_i) ∩ A_i| / |A_i| >= 2/3", d_ratio, Fraction(2, 3)),
        "e": _margin("min |N_L(v_i v_j) ∩ A_i ∩ A_j| >= mu^2 |U| / 8", e_min if e_min is not None else 0,
                     mu * mu * len(U) / 8),
        "f": _margin("max #{i: u in A_i} <= 2 mu n", max(load.values(), default=0), 2 * mu * n, "<="),
        "g": g_ok,
        "sizes": sizes,
    }


# ---------------------------------------------------------------------------
# the color-augmented 4-graph

class ColorAux:
    """Vertices: the edges of G' (indices 0..m-1) and the colors of Z (indices m..m+|Z|-1).

    A quadruple {i} ∪ {xy, yz, zx} is present when xyz is a triangle of G'
    lying in member i.  Quadruples are enumerated lazily; ``to_hypergraph``
    materializes them for small instances.
    """

    def __init__(self, fam: Family, Z: Sequence[int], Gp: PairGraph):
        self.fam = fam
        self.Z = list(Z)
        self.Gp = Gp
        self.pairs = Gp.sorted_edges()
        self.pair_index = {p: i for i, p in enumerate(self.pairs)}
        self.color_index = {c: len(self.pairs) + k for k, c in enumerate(self.Z)}
        self.triangles = Gp.triangles()
        rep_of = {}
        for rep, cols in fam.distinct_members().items():
            for c in cols:
                rep_of[c] = rep
        self.rep_of = rep_of
        self.groups = sorted({rep_of[c] for c in self.Z})
        # membership[g][k] = triangle k lies in member g
        self.membership = {g: np.array([_has(fam[g], t) for t in self.triangles], dtype=bool)
                           for g in self.groups}
        self.psi = None

    @property
    def n_vertices(self) -> int:
        return len(self.pairs) + len(self.Z)

    def has(self, color: int, k: int) -> bool:
        return bool(self.membership[self.rep_of[color]][k])

    def quadruple(self, color: int, k: int) -> tuple:
        t = self.triangles[k]
        return tuple(sorted([self.color_index[color]] + [self.pair_index[p] for p in _tri_pairs(t)]))

    def degree_stats(self) -> dict:
        tri_count = {g: int(m.sum()) for g, m in self.membership.items()}
        color_deg = [tri_count[self.rep_of[c]] for c in self.Z]
        per_pair = Counter()
        for k, t in enumerate(self.triangles):
            w = sum(1 for c in self.Z if self.membership[self.rep_of[c]][k])
            for p in _tri_pairs(t):
                per_pair[p] += w
        # two pair vertices share at most one triangle, so their codegree is at most |Z|;
        # a pair vertex and a color share at most the triangles through that pair
        through = Counter(p for t in self.triangles for p in _tri_pairs(t))
        return {
            "min_color_degree": min(color_deg, default=0),
            "min_pair_degree": min((per_pair[p] for p in self.pairs), default=0),
            "max_codegree": max(len(self.Z), max(through.values(), default=0)),
        }

    def to_hypergraph(self) -> MultiHypergraph:
        edges = [self.quadruple(c, k) for c in self.Z for k in range(len(self.triangles)) if self.has(c, k)]
        return MultiHypergraph(self.n_vertices, 4, edges)


def _member_fstss(member, Gp: PairGraph) -> WeightFn | None:
    tris = [t for t in Gp.triangles() if _has(member, t)]
    H = TripleSystem(Gp.n, tris)
    if set(H.shadow().edges) != set(Gp.edges):
        return None
    aux = build_aux(H)
    res = perfect_fractional_matching(aux.hypergraph)
    if isinstance(res, Infeasible):
        return None
    return WeightFn(Gp.n, {aux.source_triple(e): w for e, w in res.weights.items()})


def build_color_aux(fam: Family, Z: Sequence[int], Gp: PairGraph, compute_psi: bool = False) -> ColorAux:
    """Color-augmented 4-graph and, optionally, the averaged fractional matching ψ̃.

    ψ̃ puts weight ψ_i(t)/|Z| on {i} ∪ t, where ψ_i is a perfect fractional
    STS of member i restricted to the triangles of G'.
    """
    if 3 * len(Z) != len(Gp.edges):
        raise SizeMismatch(f"|Z| = {len(Z)} but |E(G')|/3 = {Fraction(len(Gp.edges), 3)}")
    aux = ColorAux(fam, Z, Gp)
    if compute_psi:
        per_group = {}
        for g in aux.groups:
            psi_g = _member_fstss(fam[g], Gp)
            if psi_g is None:
                raise StageFailure("color_aux", f"member {g} has no perfect fractional STS on G'")
            per_group[g] = psi_g
        scale = Fraction(1, len(Z))
        weights = {}
        for c in aux.Z:
            for t, w in per_group[aux.rep_of[c]].weights.items():
                q = tuple(sorted([aux.color_index[c]] + [aux.pair_index[p] for p in _tri_pairs(t)]))
                weights[q] = w * scale
        aux.psi = WeightFn(aux.n_vertices, weights, k=4)
    return aux


# ---------------------------------------------------------------------------
# matchings

def greedy_predesignated_matching(aux: ColorAux, must_cover: Iterable[int], used_pairs: set | None = None):
    """One triangle per predesignated color, pairwise edge-disjoint; canonical order."""
    used = set() if used_pairs is None else set(used_pairs)
    out = []
    for c in sorted(must_cover):
        for k, t in enumerate(aux.triangles):
            if aux.has(c, k) and not any(p in used for p in _tri_pairs(t)):
                out.append((c, t))
                used.update(_tri_pairs(t))
                break
        else:
            raise Stuck(f"color {c} has no triangle left", vertex=c)
    return out


def _mrv_packing(triangles: list, usable: np.ndarray, blocked: set, rng) -> list:
    """Edge-disjoint triangles, repeatedly covering the edge with the fewest live triangles."""
    by_edge = {}
    for k, t in enumerate(triangles):
        if not usable[k] or any(p in blocked for p in _tri_pairs(t)):
            continue
        for p in _tri_pairs(t):
            by_edge.setdefault(p, []).append(k)
    alive = {k for ks in by_edge.values() for k in ks}
    cnt = {p: len(ks) for p, ks in by_edge.items()}
    chosen = []
    while True:
        live = [p for p, c in cnt.items() if c > 0]
        if not live:
            break
        m = min(cnt[p] for p in live)
        cands = sorted(p for p in live if cnt[p] == m)
        e = cands[int(rng.integers(len(cands)))]
        opts = [k for k in by_edge[e] if k in alive]

        def score(k):
            return min(cnt[p] for p in _tri_pairs(triangles[k]) if p != e)

        best = max(score(k) for k in opts)
        opts = [k for k in opts if score(k) == best]
        k = opts[int(rng.integers(len(opts)))]
        chosen.append(triangles[k])
        for p in _tri_pairs(triangles[k]):
            for k2 in by_edge[p]:
                if k2 in alive:
                    alive.discard(k2)
                    for q in _tri_pairs(triangles[k2]):
                        cnt[q] -= 1
            cnt[p] = 0
    return chosen


def _assign_colors(items: list, colors: list, ok) -> dict:
    """Maximum matching items <-> colors; returns item index -> color."""
    B = nx.Graph()
    left = [("t", j) for j in range(len(items))]
    B.add_nodes_from(left)
    B.add_nodes_from(("c", c) for c in colors)
    B.add_edges_from((("t", j), ("c", c)) for c in colors for j in range(len(items)) if ok(c, items[j]))
    M = nx.bipartite.hopcroft_karp_matching(B, top_nodes=left)
    return {j: M[("t", j)][1] for _, j in left if ("t", j) in M}


def nibble_matching(aux: ColorAux, quota_sets: dict, rng, colors: Sequence[int] | None = None,
                    blocked_pairs: set | None = None, priority: Sequence[int] = ()):
    """Randomized greedy stand-in for the pseudorandom nibble matching.

    Packs triangles of G' (MRV order, random ties), then gives them colors
    by a maximum matching that serves ``priority`` colors first.  Returns
    the (color, triangle) list and the leftover fraction of each quota set,
    where a quota set is a set of pair vertices or of colors.
    """
    rng = np.random.default_rng(rng)
    blocked = set(blocked_pairs or ())
    cols = list(aux.Z if colors is None else colors)
    pri = [c for c in priority if c in set(cols)]
    order = pri + [c for c in cols if c not in set(pri)]
    usable = np.zeros(len(aux.triangles), dtype=bool)
    for g in {aux.rep_of[c] for c in cols}:
        usable |= aux.membership[g]
    tris = _mrv_packing(aux.triangles, usable, blocked, rng)
    kidx = {t: k for k, t in enumerate(aux.triangles)}
    assign = _assign_colors(tris, order, lambda c, t: aux.has(c, kidx[t]))
    matching = sorted((assign[j], tris[j]) for j in assign)
    covered_pairs = {p for _, t in matching for p in _tri_pairs(t)}
    used_colors = {c for c, _ in matching}
    leftover = {}
    for name, F in quota_sets.items():
        F = list(F)
        if not F:
            leftover[name] = 0.0
            continue
        if isinstance(F[0], tuple):
            miss = sum(1 for p in F if p not in covered_pairs)
        else:
            miss = sum(1 for c in F if c not in used_colors)
        leftover[name] = miss / len(F)
    return matching, {"leftover": leftover, "packed": len(tris), "colored": len(matching)}


# ---------------------------------------------------------------------------
# T_2 and T_3

def assemble_T2(outside_edges: Sequence, A: dict, L: TripleSystem, free: set, U: Sequence[int], U2=()):
    """One triple e ∪ {u_e} ∈ L per uncovered edge e = v_i v_j outside U.

    u_e is taken from A_i ∩ A_j when possible (both v_i u_e and v_j u_e must
    still be uncovered, which also makes apexes distinct on intersecting
    edges); otherwise from any vertex of U with both edges uncovered.
    ``free`` is updated in place.
    """
    triples, apex, fallback = [], {}, 0
    margins = []
    todo = sorted(outside_edges, key=lambda e: (len(A.get(e[0], set()) & A.get(e[1], set())), e))
    for e in todo:
        a, b = e
        common = A.get(a, set()) & A.get(b, set())
        margins.append(len(_neighbours_in(L, e, common)))

        def ok(u):
            return canon_pair(a, u) in free and canon_pair(b, u) in free and tuple(sorted((a, b, u))) in L.mult

        pick = next((u for u in sorted(common) if ok(u)), None)
        if pick is None:
            pick = next((u for u in U if ok(u)), None)
            if pick is None:
                raise Stuck(f"no apex for edge {e}", edge=e)
            fallback += 1
        for p in (canon_pair(a, pick), canon_pair(b, pick)):
            free.discard(p)
        free.discard(e)
        t = tuple(sorted((a, b, pick)))
        triples.append(t)
        apex[e] = pick
    return triples, {"apex": apex, "fallback_apexes": fallback,
                     "min_common_L_neighbours": min(margins, default=None)}


def assemble_T3(A_prime: dict, L: TripleSystem, U2: Iterable[int], used: set | None = None,
                rng=None, attempts: int = 3):
    """Pairwise edge-disjoint perfect matchings J_i of F_i[A'_i]; T_3 = {e ∪ {v_i}}.

    F_i has the pairs of A'_i not inside U' whose union with v_i is in L.
    Matchings are extracted one vertex at a time (largest A'_i first), with
    weights steering away from vertices that many later sets still need;
    on failure the order is reshuffled up to ``attempts`` times, and then
    all matchings are searched for jointly as one exact cover.
    """
    U2 = set(U2)
    rng = np.random.default_rng(rng)
    for v, a in A_prime.items():
        if len(a) % 2:
            raise Stuck(f"|A'_{v}| = {len(a)} is odd", vertex=v)
    base_used = set(used or ())
    verts = sorted(v for v, a in A_prime.items() if a)
    last = None
    for attempt in range(attempts):
        order = sorted(verts, key=lambda v: (-len(A_prime[v]), v))
        if attempt:
            order = list(rng.permutation(order))
        taken = set(base_used)
        demand = Counter(u for v in verts for u in A_prime[v])
        J, ok = {}, True
        for v in order:
            S = sorted(A_prime[v])
            Fg = nx.Graph()
            Fg.add_nodes_from(S)
            for x, y in combinations(S, 2):
                if x in U2 and y in U2:
                    continue
                p = canon_pair(x, y)
                if p in taken or tuple(sorted((x, y, v))) not in L.mult:
                    continue
                Fg.add_edge(x, y, weight=1000 - demand[x] - demand[y])
            M = nx.max_weight_matching(Fg, maxcardinality=True)
            if 2 * len(M) != len(S):
                ok = False
                last = v
                break
            J[v] = sorted(canon_pair(x, y) for x, y in M)
            taken.update(J[v])
            for u in S:
                demand[u] -= 1
        if ok:
            triples = [tuple(sorted((x, y, v))) for v in J for x, y in J[v]]
            return triples, {"matchings": {int(v): [list(p) for p in J[v]] for v in J}, "attempts": attempt + 1}
    J = _joint_matchings(A_prime, L, U2, base_used)
    if J is None:
        raise Stuck(f"F_{last}[A'_{last}] has no perfect matching avoiding earlier ones", vertex=last)
    triples = [tuple(sorted((x, y, v))) for v in J for x, y in J[v]]
    return triples, {"matchings": {int(v): [list(p) for p in J[v]] for v in J}, "attempts": attempts,
                     "joint_search": True}


def _joint_matchings(A_prime: dict, L: TripleSystem, U2: set, used: set,
                     max_nodes: int = 2 * 10**6):
    """All J_i at once as an exact cover: (v, a) columns are primary, U-pairs secondary."""
    cols, rows, labels = {}, [], []
    for v, a in sorted(A_prime.items()):
        for u in sorted(a):
            cols[(v, u)] = len(cols)
    n_primary = len(cols)
    for v, a in sorted(A_prime.items()):
        for x, y in combinations(sorted(a), 2):
            if (x in U2 and y in U2) or canon_pair(x, y) in used:
                continue
            if tuple(sorted((x, y, v))) not in L.mult:
                continue
            p = canon_pair(x, y)
            if p not in cols:
                cols[p] = len(cols)
            rows.append([cols[(v, x)], cols[(v, y)], cols[p]])
            labels.append((v, p))
    primary = [i < n_primary for i in range(len(cols))]
    status, sols, _, _ = kernels.exact_cover(len(cols), rows, primary, max_nodes=max_nodes)
    if not sols:
        return None
    J = {}
    for r in sols[0]:
        v, p = labels[r]
        J.setdefault(v, []).append(p)
    return {v: sorted(ps) for v, ps in J.items()}


# ---------------------------------------------------------------------------
# orchestration

def max_codegree(triples: Iterable) -> int:
    c = Counter(p for t in triples for p in combinations(sorted(t), 2))
    return max(c.values(), default=0)


def check_conclusions(inp: CoverDownInput, T: TripleSystem, phi: dict) -> dict:
    """The five conclusions, recomputed from T and φ alone."""
    n, G, eps = inp.n, inp.G, inp.eps
    U, U2 = set(inp.U), set(inp.U2)
    W = set(phi.values())
    Tsh = set(T.shadow().edges)
    out = {}
    c1 = {"X1_inside_W": set(inp.X[0]) <= W, "bounds": []}
    for i in range(1, 9):
        left = len(set(inp.X[i]) - W)
        c1["bounds"].append(_margin(f"|X_{i + 1} - W| <= eps (eps n)^({i}/4)", left,
                                    float(eps) * (float(eps) * n) ** (i / 4), "<="))
    out["1"] = c1
    outside = {e for e in G.edges if not (e[0] in U and e[1] in U)}
    inner2 = {e for e in G.edges if e[0] in U2 and e[1] in U2}
    out["2"] = {"lower": outside <= Tsh, "upper": Tsh <= (set(G.edges) - inner2),
                "passed": outside <= Tsh and Tsh <= (set(G.edges) - inner2)}
    rest = [e for e in G.edges if e[0] in U and e[1] in U and e not in Tsh]
    deg = Counter()
    degU2 = Counter()
    for a, b in rest:
        deg[a] += 1
        deg[b] += 1
        if b in U2:
            degU2[a] += 1
        if a in U2:
            degU2[b] += 1
    out["3"] = _margin("min degree of (G - T^(2))[U] >= (1 - eps)|U|",
                       min((deg[u] for u in U), default=0), (1 - eps) * len(U))
    out["4"] = _margin("min d(u; U') in (G - T^(2))[U] >= (1 - 2 eps)|U'|",
                       min((degU2[u] for u in U), default=0), (1 - 2 * eps) * len(U2))
    inj = len(W) == len(phi)
    member = all(_has(inp.fam[c], t) for t, c in phi.items())
    out["5"] = {"injective": inj, "membership": member, "passed": inj and member and set(phi) == set(T.mult)}
    out["codegree_at_most_1"] = max_codegree(T.mult) <= 1 and all(m == 1 for m in T.mult.values())
    out["size_matches"] = len(T.mult) == len(W)
    return out


def _choose_Z(inp: CoverDownInput, Y: list, size: int) -> list:
    non9 = [c for x in inp.X[:8] for c in x]
    if len(non9) > size:
        raise StageFailure("colors", f"X_1..X_8 hold {len(non9)} colors but |Z| = {size}")
    Ys = set(Y)
    spare = [c for c in inp.X[8] if c not in Ys]
    if len(non9) + len(spare) < size:
        raise StageFailure("colors", f"only {len(non9) + len(spare)} colors outside Y for |Z| = {size}")
    return sorted(non9 + spare[:size - len(non9)])


REDRAW_STAGES = ("T_2", "T_3")


def run_coverdown(inp: CoverDownInput, rng=0, redraws: int = 4) -> CoverDownOutput:
    """Run the cover-down with up to `redraws` independent draws of the cleaner sets.

    Only failures in T_2 or T_3 trigger a fresh draw, since those are the
    stages whose success depends on the random sets A_i.  Everything else is
    deterministic given the draw and is raised at once.
    """
    seed = rng
    gen = np.random.default_rng(rng)
    failures = []
    for attempt in range(max(1, redraws)):
        try:
            out = _coverdown_once(inp, gen, seed)
        except StageFailure as exc:
            if exc.stage not in REDRAW_STAGES:
                raise
            failures.append({"stage": exc.stage, "reason": exc.reason})
            continue
        out.diagnostics["draws"] = {"used": attempt + 1, "failures": failures}
        return out
    last = failures[-1]
    raise StageFailure(last["stage"], f"{last['reason']} (after {len(failures)} draws of the cleaner sets)")


def _coverdown_once(inp: CoverDownInput, rng, seed) -> CoverDownOutput:
    n, G, eps = inp.n, inp.G, inp.eps
    U, U2 = list(inp.U), set(inp.U2)
    Us = set(U)
    diag = {"seed": seed if isinstance(seed, int) else None}
    diag["input_margins"] = inp.validate()
    outside_edges = sorted(e for e in G.edges if not (e[0] in Us and e[1] in Us))
    if not outside_edges:
        T = TripleSystem(n)
        diag["conclusions"] = check_conclusions(inp, T, {})
        diag["trivial"] = True
        return CoverDownOutput(T, [], {}, diag)

    # Y and L
    y_size = inp.y_size or math.ceil(eps ** 4 * n * n)
    X9 = sorted(inp.X[8])
    if len(X9) < y_size:
        raise StageFailure("Y", f"X_9 has {len(X9)} colors, need {y_size}")
    Y = X9[:y_size]
    thr = inp.popular_threshold or math.ceil(eps ** 5 * n * n)
    thr = min(thr, len(Y))
    L = build_popular_L(inp.fam, Y, thr, G)
    diag["L"] = {"threshold": thr, "size": len(L.mult), "margin": popular_margin(L, G, U, inp.delta, eps)}

    # cleaner sets
    try:
        A, crep = sample_cleaner_sets(inp, L, rng)
    except RetriesExhausted as exc:
        raise StageFailure("cleaner_sets", str(exc)) from exc
    diag["cleaner_sets"] = crep
    R = {canon_pair(v, u) for v, a in A.items() for u in a}
    Gp = G.minus(R).minus([e for e in G.edges if e[0] in Us and e[1] in Us])
    if len(Gp.edges) % 3:
        raise StageFailure("cleaner_sets", "|E(G')| is not divisible by 3")
    Z = _choose_Z(inp, Y, len(Gp.edges) // 3)

    # color-aux and matchings
    try:
        aux = build_color_aux(inp.fam, Z, Gp, compute_psi=inp.compute_psi)
    except SizeMismatch as exc:
        raise StageFailure("color_aux", str(exc)) from exc
    diag["color_aux"] = {"pairs": len(aux.pairs), "colors": len(Z), "triangles": len(aux.triangles)}
    if aux.psi is not None:
        diag["color_aux"]["psi_max_codegree"] = float(max(aux.psi.codegrees().values(), default=0))
    try:
        Ma = greedy_predesignated_matching(aux, inp.X[0])
    except Stuck as exc:
        raise StageFailure("M_a", str(exc)) from exc
    Ma_pairs = {p for _, t in Ma for p in _tri_pairs(t)}
    pad = inp.quota_pad if inp.quota_pad is not None else math.ceil(10 * math.sqrt(n))
    pad_scaled = 14 * pad > len(Z)
    if inp.quota_pad is None and pad_scaled:
        pad = len(Z) // 14  # seven quota sets never ask for more than half of Z
    Zs = set(Z)
    spare = [c for c in Z if c in set(inp.X[8])]
    quotas = {}
    priority = []
    for j in range(1, 8):
        Xj = [c for c in inp.X[j] if c in Zs]
        want = max(pad, len(Xj)) - len(Xj)
        extra, spare = spare[:want], spare[want:]
        quotas[f"X'_{j + 1}"] = Xj + extra
        priority.extend(Xj + extra)
    for v in range(n):
        Ev = [p for p in aux.pairs if v in p and p not in Ma_pairs]
        if Ev:
            quotas[f"E_{v}"] = Ev
    rest_colors = [c for c in Z if c not in set(inp.X[0])]
    Mb, nrep = nibble_matching(aux, quotas, rng, colors=rest_colors, blocked_pairs=Ma_pairs, priority=priority)
    diag["M_a"] = len(Ma)
    diag["quota_pad"] = {"pad": pad, "scaled_down": bool(pad_scaled and inp.quota_pad is None)}
    diag["nibble"] = {"packed": nrep["packed"], "colored": nrep["colored"],
                      "max_leftover": max(nrep["leftover"].values(), default=0.0),
                      "mean_leftover": float(np.mean(list(nrep["leftover"].values()))) if nrep["leftover"] else 0.0,
                      "leftover": nrep["leftover"]}
    T1 = Ma + Mb
    phi = {tuple(sorted(t)): c for c, t in T1}

    # T_2 over the uncovered edges outside U
    covered = {p for t in phi for p in _tri_pairs(t)}
    free = (set(Gp.edges) | R) - covered
    G2_out = sorted(e for e in free if e[0] not in Us and e[1] not in Us)
    try:
        T2, t2rep = assemble_T2(G2_out, A, L, free, U, U2)
    except Stuck as exc:
        raise StageFailure("T_2", str(exc)) from exc
    diag["T_2"] = {"size": len(T2), "fallback_apexes": t2rep["fallback_apexes"],
                   "min_common_L_neighbours": t2rep["min_common_L_neighbours"],
                   "required": 2 * len(U) ** 0.75}

    # T_3 over the leftover edges v_i - U
    stray = [e for e in free if not ((e[0] in Us) ^ (e[1] in Us))]
    if stray:
        raise StageFailure("T_3", f"uncovered edges not between U and the rest: {stray[:3]}")
    A_prime = {v: set() for v in inp.outside}
    for a, b in free:
        v, u = (a, b) if b in Us else (b, a)
        A_prime[v].add(u)
    try:
        T3, t3rep = assemble_T3(A_prime, L, U2, rng=rng)
    except Stuck as exc:
        raise StageFailure("T_3", str(exc)) from exc
    diag["T_3"] = {"size": len(T3), "attempts": t3rep["attempts"],
                   "max_A_prime": max((len(a) for a in A_prime.values()), default=0)}

    # colors from Y for T_2 ∪ T_3
    late = T2 + T3
    assign = _assign_colors(late, list(Y), lambda c, t: _has(inp.fam[c], t))
    if len(assign) < len(late):
        missing = [late[j] for j in range(len(late)) if j not in assign]
        raise StageFailure("colors_Y", f"{len(missing)} triples of T_2 ∪ T_3 got no color from Y, e.g. {missing[0]}")
    for j, c in assign.items():
        phi[tuple(sorted(late[j]))] = c
    T = TripleSystem(n, list(phi))
    W = sorted(phi.values())
    diag["sizes"] = {"T_1": len(T1), "T_2": len(T2), "T_3": len(T3), "W": len(W), "Z": len(Z), "Y": len(Y)}
    diag["conclusions"] = check_conclusions(inp, T, phi)
    return CoverDownOutput(T, W, phi, diag)


# ---------------------------------------------------------------------------
# the seed-fixed desk instance

def desk_instance(n: int = 60, eps=Fraction(1, 2), seed: int = 0, p: float = 0.05, pool: int = 6,
                  mu=Fraction(1, 3), y_size: int = 150, x_sizes=(2, 2, 5, 10, 10, 10, 10, 10)) -> CoverDownInput:
    """K_n minus a perfect matching (U matched to the outside), dense pooled members.

    Members are the triangles of G minus a p-fraction, ``pool`` distinct
    ones shared round-robin among the colors.
    """
    eps = as_fraction(eps)
    u = math.floor(eps * n)
    U = list(range(n - u, n))
    U2 = U[len(U) - math.floor(eps * u):]
    rng = np.random.default_rng(seed)
    out = [int(v) for v in rng.permutation(n - u)]
    if len(out) < len(U) or (len(out) - len(U)) % 2:
        raise ValueError("cannot pair U with outside vertices by a perfect matching")
    M = [canon_pair(out.pop(), x) for x in U]
    while out:
        M.append(canon_pair(out.pop(), out.pop()))
    G = PairGraph.complete(n).minus(M)
    tris = np.array(G.triangles(), dtype=np.int64)
    members = []
    for _ in range(pool):
        keep = rng.random(len(tris)) >= p
        members.append(TripleSystem(n, [tuple(t) for t in tris[keep]]))
    outside_edges = sum(1 for e in G.edges if not (e[0] >= n - u and e[1] >= n - u))
    N = outside_edges // 3 + y_size
    fam = Family(n, [members[c % pool] for c in range(N)])
    X, start = [], 0
    for s in x_sizes:
        X.append(list(range(start, start + s)))
        start += s
    X.append(list(range(start, N)))
    return CoverDownInput(fam, G, tuple(U), tuple(U2), X, eps, mu=mu, y_size=y_size)
