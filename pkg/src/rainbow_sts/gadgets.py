"""Rooted gadgets: transformers, absorbers and their edge-degeneracy.

A transformer of (S, S') is a 3-graph T whose shadow minus S and whose
shadow minus S' both split into triples of T.  An absorber for G is a
3-graph A whose shadow, with or without G, splits into triples of A.
Every gadget built here carries both decompositions as certificates, and
the verifiers replay them (or search from scratch when none is attached).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .designs import Budget, Decomposition, covers_exactly, exact_cover_k3
from .errors import (HomomorphismViolation, NotDivisible, NotEdgeBijective, OddDegree,
                     RootMismatch, SearchExhausted)
from .hypercore import PairGraph, TripleSystem, canon_pair, k3_disjoint, k3_divisible, shadow


class VertexPool:
    """Monotone counter handing out fresh vertex indices."""

    def __init__(self, start: int):
        self.next = start

    def take(self, k: int = 1) -> list[int]:
        out = list(range(self.next, self.next + k))
        self.next += k
        return out

    def one(self) -> int:
        return self.take(1)[0]


@dataclass
class RootedGadget:
    """A 3-graph with its rooted graph(s) and two certified decompositions.

    For a transformer ``certified_decomps`` is (decomposition of T^(2) - S,
    decomposition of T^(2) - S'); for an absorber it is (decomposition of
    A^(2), decomposition of A^(2) - G).
    """

    gadget: TripleSystem
    root: PairGraph
    fresh_vertices: tuple
    certified_decomps: tuple | None
    kind: str = "transformer"
    S: PairGraph | None = None
    S2: PairGraph | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.gadget.n


def _grow(G: PairGraph, n: int) -> PairGraph:
    return G if G.n == n else PairGraph(n, G.edges)


def _vertex_set(G: PairGraph) -> set[int]:
    return {v for e in G.edges for v in e}


# ---------------------------------------------------------------------------
# edge-degeneracy

def _links(H: TripleSystem) -> dict[int, list[tuple[int, int]]]:
    link: dict[int, list] = {}
    for t in H.mult:
        a, b, c = t
        link.setdefault(a, []).append((b, c))
        link.setdefault(b, []).append((a, c))
        link.setdefault(c, []).append((a, b))
    return link


def back_count(link, v: int, placed: set) -> int:
    return sum(1 for u, w in link.get(v, ()) if u in placed and w in placed)


def ordering_width(H: TripleSystem, rootV: Iterable[int], order: Sequence[int]) -> int:
    """Largest back-count along a given ordering of the non-root vertices."""
    link = _links(H)
    placed = set(rootV)
    worst = 0
    for v in order:
        worst = max(worst, back_count(link, v, placed))
        placed.add(v)
    return worst


def edge_degeneracy(H: TripleSystem, rootV: Iterable[int]) -> tuple[int, list[int]]:
    """Rooted edge-degeneracy and a witnessing ordering.

    Reverse greedy: repeatedly drop the non-root vertex with the fewest
    triples into the remaining set and put it last.  Back-counts only
    shrink when vertices are removed, so this is optimal.
    """
    rootV = set(rootV)
    link = _links(H)
    verts = {v for t in H.mult for v in t}
    remaining = sorted(verts - rootV)
    current = set(verts | rootV)
    rev = []
    d = 0
    while remaining:
        best, best_c = None, None
        for v in remaining:
            current.discard(v)
            c = back_count(link, v, current)
            current.add(v)
            if best_c is None or c < best_c:
                best, best_c = v, c
        remaining.remove(best)
        current.discard(best)
        rev.append(best)
        d = max(d, best_c)
    return d, rev[::-1]


def edge_degeneracy_bruteforce(H: TripleSystem, rootV: Iterable[int], limit: int = 20) -> int:
    """Exact minimum over all orderings by dynamic programming over subsets."""
    rootV = set(rootV)
    link = _links(H)
    fresh = sorted({v for t in H.mult for v in t} - rootV)
    k = len(fresh)
    if k > limit:
        raise ValueError(f"{k} non-root vertices is too many for subset enumeration")
    best = [0] * (1 << k)
    for mask in range(1, 1 << k):
        placed_all = rootV | {fresh[i] for i in range(k) if mask >> i & 1}
        val = None
        for i in range(k):
            if mask >> i & 1:
                v = fresh[i]
                c = back_count(link, v, placed_all - {v})
                cand = max(best[mask ^ (1 << i)], c)
                if val is None or cand < val:
                    val = cand
        best[mask] = val
    return best[(1 << k) - 1]


# ---------------------------------------------------------------------------
# cycles

def cycle_decompose(S: PairGraph) -> list[list[int]]:
    """Edge-disjoint cycles covering E(S), peeled deterministically."""
    if any(d % 2 for d in S.degrees()):
        raise OddDegree("every vertex needs even degree for a cycle decomposition")
    adj = {v: set(S.neighbors(v)) for v in range(S.n) if S.neighbors(v)}
    cycles = []
    while adj:
        start = min(adj)
        path = [start]
        pos = {start: 0}
        while True:
            u = path[-1]
            w = min(adj[u])
            adj[u].discard(w)
            adj[w].discard(u)
            for x in (u, w):
                if not adj[x]:
                    del adj[x]
            if w in pos:
                i = pos[w]
                cyc = path[i:]
                cycles.append(cyc)
                for x in cyc[1:]:
                    del pos[x]
                path = path[:i + 1]
                if w not in adj:
                    break
                if len(path) == 1 and w not in adj:
                    break
                continue
            pos[w] = len(path)
            path.append(w)
        # leftover path vertices all have even residual degree, loop restarts from min
    return cycles


def _cycle_edges(cyc: Sequence[int]) -> list:
    k = len(cyc)
    return [canon_pair(cyc[i], cyc[(i + 1) % k]) for i in range(k)]


# ---------------------------------------------------------------------------
# transformers

def _decomp_ok(triples: Iterable, target: PairGraph, H: TripleSystem) -> bool:
    use = Counter(tuple(sorted(t)) for t in triples)
    if any(H.mult.get(t, 0) < c for t, c in use.items()):
        return False
    return covers_exactly(list(use.elements()), target)


def build_cycle_transformer(cycle: Sequence[int], images: Sequence[Sequence[int]],
                            pool: VertexPool | None = None) -> RootedGadget:
    """Transformer of (C, φ(C)) for a cycle v_1..v_ℓ with e_i = φ(v_i v_{i+1}).

    Fresh vertices x_i, y_i, z_i; the triples are the eight families
    E_1..E_8, and T_1 = E_1∪E_3∪E_5∪E_7, T_2 = E_2∪E_4∪E_6∪E_8 are the two
    certified decompositions.
    """
    l = len(cycle)
    if l < 3 or len(images) != l:
        raise ValueError("need a cycle of length >= 3 and one image edge per cycle edge")
    imgs = [tuple(sorted(e)) for e in images]
    if len(set(imgs)) != l:
        raise NotEdgeBijective("two cycle edges share an image")
    a = [None] * l  # a[i] = φ(v_i)
    for i in range(l):
        common = set(imgs[i - 1]) & set(imgs[i])
        if len(common) != 1:
            raise HomomorphismViolation(f"image edges {imgs[i - 1]} and {imgs[i]} do not meet in one vertex")
        a[i] = common.pop()
    for i in range(l):
        if canon_pair(a[i], a[(i + 1) % l]) != imgs[i]:
            raise HomomorphismViolation(f"image {imgs[i]} is not φ(v_{i}) φ(v_{i + 1})")
    if set(cycle) & {v for e in imgs for v in e}:
        raise ValueError("cycle and image must be vertex-disjoint")
    pool = pool or VertexPool(max(max(cycle), max(a)) + 1)
    x, y, z = [], [], []
    for _ in range(l):
        xi, yi, zi = pool.take(3)
        x.append(xi)
        y.append(yi)
        z.append(zi)
    v = list(cycle)
    nx = lambda i: (i + 1) % l
    E = {
        1: [(*imgs[i], x[nx(i)]) for i in range(l)],
        2: [(x[i], y[i], a[i]) for i in range(l)],
        3: [(y[i], z[i], a[i]) for i in range(l)],
        4: [(z[i], x[nx(i)], a[i]) for i in range(l)],
        5: [(v[i], x[i], y[i]) for i in range(l)],
        6: [(v[i], y[i], z[i]) for i in range(l)],
        7: [(v[i], z[i], x[nx(i)]) for i in range(l)],
        8: [(v[i], v[nx(i)], x[nx(i)]) for i in range(l)],
    }
    n = pool.next
    T = TripleSystem(n, [t for k in range(1, 9) for t in E[k]])
    T1 = Decomposition(E[1] + E[3] + E[5] + E[7])
    T2 = Decomposition(E[2] + E[4] + E[6] + E[8])
    S = PairGraph(n, _cycle_edges(v))
    S2 = PairGraph(n, imgs)
    fresh = tuple(w for i in range(l) for w in (x[i], y[i], z[i]))
    return RootedGadget(T, S.union(S2), fresh, (T1, T2), "transformer", S, S2,
                        {"families": {k: [tuple(sorted(t)) for t in E[k]] for k in E}})


def union_gadgets(parts: Sequence[RootedGadget], S: PairGraph, S2: PairGraph,
                  kind: str = "transformer", extra_fresh: Sequence[int] = ()) -> RootedGadget:
    n = max([p.n for p in parts] + [S.n, S2.n])
    mult: Counter = Counter()
    for p in parts:
        mult.update(p.gadget.mult)
    T = TripleSystem(n, dict(mult))
    c1 = Decomposition([t for p in parts for t in p.certified_decomps[0].triples])
    c2 = Decomposition([t for p in parts for t in p.certified_decomps[1].triples])
    fresh = []
    seen = set()
    for w in list(extra_fresh) + [w for p in parts for w in p.fresh_vertices]:
        if w not in seen:
            seen.add(w)
            fresh.append(w)
    S, S2 = _grow(S, n), _grow(S2, n)
    return RootedGadget(T, S.union(S2), tuple(fresh), (c1, c2), kind, S, S2)


def _check_edge_bijective(S: PairGraph, S2: PairGraph, phi: dict) -> dict:
    img = {}
    for u, v in S.sorted_edges():
        if u not in phi or v not in phi:
            raise NotEdgeBijective(f"φ is undefined on edge {(u, v)}")
        a, b = phi[u], phi[v]
        if a == b:
            raise NotEdgeBijective(f"edge {(u, v)} collapses to a loop")
        e = canon_pair(a, b)
        if e in img.values():
            raise NotEdgeBijective(f"two edges map onto {e}")
        img[(u, v)] = e
    if set(img.values()) != set(S2.edges):
        raise NotEdgeBijective("φ(E(S)) differs from E(S')")
    return img


def build_transformer(S: PairGraph, S2: PairGraph, phi: dict,
                      pool: VertexPool | None = None) -> RootedGadget:
    """Transformer of (S, S') from an edge-bijective homomorphism φ: S -> S'."""
    if not k3_divisible(S) or not k3_divisible(S2):
        raise NotDivisible("both rooted graphs must be K_3-divisible")
    if _vertex_set(S) & _vertex_set(S2):
        raise ValueError("S and S' must be vertex-disjoint")
    img = _check_edge_bijective(S, S2, phi)
    pool = pool or VertexPool(max(S.n, S2.n))
    parts = []
    for cyc in cycle_decompose(S):
        images = [img[e] for e in _cycle_edges(cyc)]
        parts.append(build_cycle_transformer(cyc, images, pool))
    n = pool.next
    return union_gadgets(parts, _grow(S, n), _grow(S2, n))


def build_subdivision_transformer(G: PairGraph, pool: VertexPool | None = None) -> RootedGadget:
    """(G, G**)-transformer F_G ∪ F_{G*}; G** is the 3-subdivision of G.

    F_G adds a vertex v_e and the triple e ∪ {v_e} for every edge e; G* is
    the rest of its shadow (the 1-subdivision).  Repeating on G* gives
    G**.  F_{G*} decomposes F^(2) - G and F_G decomposes F^(2) - G**.
    """
    if not k3_divisible(G):
        raise NotDivisible("G must be K_3-divisible")
    pool = pool or VertexPool(G.n)
    FG, Gstar, mid = [], [], {}
    for u, w in G.sorted_edges():
        ve = pool.one()
        FG.append((u, w, ve))
        mid[(u, w)] = ve
        Gstar.extend([(u, ve), (ve, w)])
    FGs, Gss, sub = [], [], {}
    for f in Gstar:
        vf = pool.one()
        FGs.append((*f, vf))
        sub[f] = vf
        Gss.extend([(f[0], vf), (vf, f[1])])
    n = pool.next
    paths = {}
    for (u, w), ve in mid.items():
        paths[(u, w)] = [u, sub[(u, ve)], ve, sub[(ve, w)], w]
    T = TripleSystem(n, FG + FGs)
    S = PairGraph(n, G.edges)
    S2 = PairGraph(n, Gss)
    fresh = tuple(mid.values()) + tuple(sub.values())
    g = RootedGadget(T, S.union(S2), fresh, (Decomposition(FGs), Decomposition(FG)),
                     "transformer", S, S2, {"paths": paths, "G_star": PairGraph(n, Gstar)})
    return g


def compose_transformers(T1: RootedGadget, T2: RootedGadget) -> RootedGadget:
    """(A, B)- and (B, C)-transformers glued along B give an (A, C)-transformer."""
    n = max(T1.n, T2.n)
    if _grow(T1.S2, n) != _grow(T2.S, n):
        raise RootMismatch("the target of the first transformer is not the source of the second")
    if set(T1.fresh_vertices) & set(T2.fresh_vertices):
        raise ValueError("fresh vertex sets overlap")
    mult: Counter = Counter(T1.gadget.mult)
    mult.update(T2.gadget.mult)
    T = TripleSystem(n, dict(mult))
    c1 = Decomposition(T1.certified_decomps[0].triples + T2.certified_decomps[0].triples)
    c2 = Decomposition(T1.certified_decomps[1].triples + T2.certified_decomps[1].triples)
    A, C = _grow(T1.S, n), _grow(T2.S2, n)
    outer = _vertex_set(A) | _vertex_set(C)
    fresh, seen = [], set()
    for w in list(T1.fresh_vertices) + sorted(_vertex_set(T1.S2)) + list(T2.fresh_vertices):
        if w not in outer and w not in seen:
            seen.add(w)
            fresh.append(w)
    meta = {"parts": [T1.meta, T2.meta]}
    return RootedGadget(T, A.union(C), tuple(fresh), (c1, c2), "transformer", A, C, meta)


def build_s3m(m: int, pool: VertexPool | None = None, n: int | None = None):
    """3m four-cycles through one apex, otherwise disjoint.

    Returns (graph, apex, cycles) with each cycle listed as [apex, b, c, d].
    """
    if m < 1:
        raise ValueError("m must be positive")
    pool = pool or VertexPool(0)
    apex = pool.one()
    cycles = []
    for _ in range(3 * m):
        b, c, d = pool.take(3)
        cycles.append([apex, b, c, d])
    nn = pool.next if n is None else n
    G = PairGraph(nn, [e for cyc in cycles for e in _cycle_edges(cyc)])
    return G, apex, cycles


# ---------------------------------------------------------------------------
# the three-C4 fan absorber

def _fan_homomorphisms(max_labels: int):
    """Edge-bijective maps of the 3-C4 fan S_3, apex -> label 0, in canonical label order."""
    order = [1 + 3 * j + k for j in range(3) for k in range(3)]  # b1 c1 d1 b2 ...
    edges = []
    for j in range(3):
        q, b, c, d = 0, 1 + 3 * j, 2 + 3 * j, 3 + 3 * j
        edges += [(q, b), (b, c), (c, d), (d, q)]
    phi = {0: 0}

    def ok_edges():
        used = set()
        for u, v in edges:
            if u in phi and v in phi:
                a, b = phi[u], phi[v]
                if a == b:
                    return False
                e = canon_pair(a, b)
                if e in used:
                    return False
                used.add(e)
        return True

    def rec(i, used_labels):
        if i == len(order):
            yield dict(phi)
            return
        v = order[i]
        for lab in range(0, min(used_labels + 1, max_labels)):
            phi[v] = lab
            if ok_edges():
                yield from rec(i + 1, max(used_labels, lab + 1))
            del phi[v]

    yield from rec(0, 1)


def fan_edges() -> list:
    out = []
    for j in range(3):
        out += _cycle_edges([0, 1 + 3 * j, 2 + 3 * j, 3 + 3 * j])
    return out


def find_fan_target(max_fresh: int = 8):
    """Smallest triangle-decomposable edge-bijective image of S_3 (bounded search).

    Returns (phi, triangles) with labels 0..k; label 0 is the image of the apex.
    """
    for labels in range(2, max_fresh + 2):
        for phi in _fan_homomorphisms(labels):
            if max(phi.values()) != labels - 1:
                continue
            img = PairGraph(labels, [canon_pair(phi[u], phi[v]) for u, v in fan_edges()])
            if len(img.edges) != 12 or not k3_divisible(img):
                continue
            out = exact_cover_k3(img, None, Budget(10**5, 10.0))
            if out.found:
                return phi, out.witness.triples
    raise SearchExhausted(f"no triangle-decomposable image of the 3-C4 fan within {max_fresh} fresh vertices")


@lru_cache(maxsize=1)
def _fan_template():
    phi, tris = find_fan_target()
    root_n = 10
    lab2v = {lab: root_n + lab for lab in set(phi.values())}
    pool = VertexPool(root_n + len(lab2v))
    S = PairGraph(pool.next, fan_edges())
    S2 = PairGraph(pool.next, [canon_pair(lab2v[phi[u]], lab2v[phi[v]]) for u, v in fan_edges()])
    vphi = {v: lab2v[phi[v]] for v in range(root_n)}
    T = build_transformer(S, S2, vphi, pool)
    M = [tuple(sorted(lab2v[x] for x in t)) for t in tris]
    n = pool.next
    mult = Counter(T.gadget.mult)
    mult.update(M)
    A = TripleSystem(n, dict(mult))
    full = Decomposition(T.certified_decomps[1].triples + tuple(M))  # T^(2) - M' plus M
    minus_root = T.certified_decomps[0]  # T^(2) - S_3
    fresh = tuple(sorted(lab2v.values())) + tuple(T.fresh_vertices)
    root = _grow(S, n)
    return RootedGadget(A, root, fresh, (full, minus_root), "absorber", root, None,
                        {"target_phi": phi, "target_triangles": [tuple(t) for t in tris],
                         "target_vertices": tuple(sorted(lab2v.values()))})


def c4_absorber() -> RootedGadget:
    """Absorber rooted on the fan of three 4-cycles through one apex.

    A single 4-cycle cannot be absorbed: it has 4 edges, so the shadow of
    an absorber and that shadow minus the cycle cannot both have an edge
    count divisible by 3.  Three 4-cycles sharing an apex (12 edges) can:
    a bounded search finds a triangle-decomposable graph M' with an
    edge-bijective homomorphism from the fan, and the gadget is the fan's
    transformer to M' plus the triangles of M'.  Cached, hence identical
    across calls.
    """
    g = _fan_template()
    ok = verify_absorber(g, g.root)
    if not ok:
        raise AssertionError(f"fan absorber failed verification: {ok.reasons}")
    return g


def relabel_gadget(g: RootedGadget, mapping: dict) -> tuple[TripleSystem, tuple, tuple]:
    """Triples and certificates of ``g`` under a vertex map (used to place copies)."""
    f = lambda t: tuple(sorted(mapping[v] for v in t))
    n = max(mapping.values()) + 1
    T = TripleSystem(n, {f(t): m for t, m in g.gadget.mult.items()})
    c = tuple(Decomposition([f(t) for t in d.triples]) for d in g.certified_decomps)
    fresh = tuple(mapping[v] for v in g.fresh_vertices)
    return T, c, fresh


# ---------------------------------------------------------------------------
# absorbers

def build_absorber(G: PairGraph) -> RootedGadget:
    """K_3-absorber for a K_3-divisible graph G with G-rooted edge-degeneracy at most 4.

    Subdivision transformer (G -> G**), then the transformer G** -> S_{3m}
    that collapses V(G) to the apex of S_{3m}, then one fan absorber per
    group of three 4-cycles of S_{3m}.
    """
    if not k3_divisible(G):
        raise NotDivisible("G must be K_3-divisible")
    if not G.edges:
        return RootedGadget(TripleSystem(G.n), G, (), (Decomposition(()), Decomposition(())), "absorber", G)
    pool = VertexPool(G.n)
    F = build_subdivision_transformer(G, pool)
    paths = F.meta["paths"]
    apex = pool.one()
    phi = {v: apex for v in _vertex_set(G)}
    cycles = []
    for e in sorted(paths):
        u, f1, ve, f2, w = paths[e]
        b, c, d = pool.take(3)
        phi.update({f1: b, ve: c, f2: d})
        cycles.append([apex, b, c, d])
    S = PairGraph(pool.next, [p for cyc in cycles for p in _cycle_edges(cyc)])
    Gss = _grow(F.S2, pool.next)
    Tc = build_transformer(Gss, S, phi, pool)
    Ta = compose_transformers(F, Tc)
    template = _fan_template()
    tmpl_root = sorted(_vertex_set(template.root))
    pieces, full, minus = [], [], []
    fresh = list(Ta.fresh_vertices) + [apex] + [v for cyc in cycles for v in cyc[1:]]
    for j in range(0, len(cycles), 3):
        group = cycles[j:j + 3]
        mapping = {0: apex}
        for k, cyc in enumerate(group):
            mapping.update({1 + 3 * k: cyc[1], 2 + 3 * k: cyc[2], 3 + 3 * k: cyc[3]})
        for v in template.fresh_vertices:
            mapping[v] = pool.one()
        assert set(mapping) >= set(tmpl_root)
        T, certs, fr = relabel_gadget(template, mapping)
        pieces.append(T)
        full.extend(certs[0].triples)
        minus.extend(certs[1].triples)
        fresh.extend(fr)
    n = pool.next
    mult: Counter = Counter(Ta.gadget.mult)
    for T in pieces:
        mult.update(T.mult)
    A = TripleSystem(n, dict(mult))
    c_full = Decomposition(Ta.certified_decomps[1].triples + tuple(full))
    c_minus = Decomposition(Ta.certified_decomps[0].triples + tuple(minus))
    root = _grow(G, n)
    return RootedGadget(A, root, tuple(fresh), (c_full, c_minus), "absorber", root, None,
                        {"m": len(G.edges) // 3, "apex": apex, "cycles": cycles})


# ---------------------------------------------------------------------------
# verification

@dataclass
class VerifyReport:
    ok: bool
    reasons: list

    def __bool__(self) -> bool:
        return self.ok


def _induced_ok(shadow_g: PairGraph, R: PairGraph) -> bool:
    vs = _vertex_set(R)
    inside = {e for e in shadow_g.edges if e[0] in vs and e[1] in vs}
    return inside == set(R.edges)


def _decomp_or_search(H: TripleSystem, target: PairGraph, cert, budget: Budget):
    if cert is not None:
        return _decomp_ok(cert.triples, target, H)
    return exact_cover_k3(target, H, budget).found


def verify_transformer(T, S: PairGraph, S2: PairGraph, budget: Budget = Budget(10**6, 60.0),
                       use_certificates: bool = True) -> VerifyReport:
    g = T if isinstance(T, RootedGadget) else None
    H = g.gadget if g else T
    n = max(H.n, S.n, S2.n)
    S, S2 = _grow(S, n), _grow(S2, n)
    sh = _grow(shadow(H), n)
    reasons = []
    if not k3_disjoint(H, S.union(S2)):
        reasons.append("a triple of T spans a triangle of S ∪ S'")
    if not _induced_ok(sh, S):
        reasons.append("S is not an induced subgraph of the shadow")
    if not (_vertex_set(S) & _vertex_set(S2)):
        if not _induced_ok(sh, S.union(S2)):
            reasons.append("S ∪ S' is not induced in the shadow")
    elif not set(S2.edges) <= set(sh.edges):
        reasons.append("S' is not contained in the shadow")
    if not set(S.edges) <= set(sh.edges):
        reasons.append("S is not contained in the shadow")
    certs = g.certified_decomps if (g and use_certificates and g.certified_decomps) else (None, None)
    if not _decomp_or_search(H, sh.minus(S), certs[0], budget):
        reasons.append("no K_3-decomposition of T^(2) - S")
    if not _decomp_or_search(H, sh.minus(S2), certs[1], budget):
        reasons.append("no K_3-decomposition of T^(2) - S'")
    return VerifyReport(not reasons, reasons)


def verify_absorber(A, G: PairGraph, budget: Budget = Budget(10**6, 60.0),
                    use_certificates: bool = True) -> VerifyReport:
    g = A if isinstance(A, RootedGadget) else None
    H = g.gadget if g else A
    n = max(H.n, G.n)
    G = _grow(G, n)
    sh = _grow(shadow(H), n)
    reasons = []
    if not k3_disjoint(H, G):
        reasons.append("a triple of A spans a triangle of G")
    if not _induced_ok(sh, G):
        reasons.append("G is not an induced subgraph of the shadow")
    certs = g.certified_decomps if (g and use_certificates and g.certified_decomps) else (None, None)
    if not _decomp_or_search(H, sh, certs[0], budget):
        reasons.append("no K_3-decomposition of A^(2)")
    if not _decomp_or_search(H, sh.minus(G), certs[1], budget):
        reasons.append("no K_3-decomposition of A^(2) - G")
    return VerifyReport(not reasons, reasons)


def gadget_degeneracy(g: RootedGadget) -> tuple[int, list[int]]:
    rootV = _vertex_set(g.root) if g.kind == "absorber" else _vertex_set(g.S) | _vertex_set(g.S2)
    return edge_degeneracy(g.gadget, rootV)


def divisible_corpus(max_edges: int = 9) -> dict[str, PairGraph]:
    """Named K_3-divisible test graphs with at most ``max_edges`` edges."""
    def disjoint(*parts):
        edges, off = [], 0
        for k, es in parts:
            edges += [(u + off, v + off) for u, v in es]
            off += k
        return PairGraph(off, edges)

    tri = (3, [(0, 1), (1, 2), (0, 2)])
    c6 = (6, _cycle_edges(range(6)))
    c9 = (9, _cycle_edges(range(9)))
    bowtie = (5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
    graphs = {
        "triangle": disjoint(tri),
        "two_triangles": disjoint(tri, tri),
        "bowtie": disjoint(bowtie),
        "C6": disjoint(c6),
        "C3+C6": disjoint(tri, c6),
        "C9": disjoint(c9),
        "three_triangles": disjoint(tri, tri, tri),
    }
    return {k: G for k, G in graphs.items() if len(G.edges) <= max_edges and k3_divisible(G)}
