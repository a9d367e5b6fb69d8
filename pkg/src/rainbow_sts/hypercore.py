"""Graphs, uniform (multi-)hypergraphs and the degree machinery around them.

Vertices are always the dense range ``0..n-1``.  Pairs and triples are
stored as sorted tuples so that every container has a canonical form.
"""

from __future__ import annotations

import io
import os
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import kernels

Pair = tuple[int, int]
Triple = tuple[int, int, int]

#: largest vertex count accepted by the bitmask helpers
MAX_VERTICES = 512


def canon_pair(u: int, v: int) -> Pair:
    if u == v:
        raise ValueError(f"self-loop at {u}")
    return (u, v) if u < v else (v, u)


def canon_edge(vs: Iterable[int]) -> tuple[int, ...]:
    e = tuple(sorted(vs))
    for a, b in zip(e, e[1:]):
        if a == b:
            raise ValueError(f"repeated vertex in {e}")
    return e


def pairs_of(e: Sequence[int]) -> list[Pair]:
    return [(a, b) for a, b in combinations(e, 2)]


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def members_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class PairGraph:
    """Simple graph on ``0..n-1``; immutable once built."""

    __slots__ = ("n", "edges", "_adj")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        canon = set()
        for e in edges:
            u, v = e
            p = canon_pair(int(u), int(v))
            if not (0 <= p[0] and p[1] < n):
                raise ValueError(f"edge {p} outside 0..{n - 1}")
            canon.add(p)
        self.n = n
        self.edges: frozenset[Pair] = frozenset(canon)
        self._adj = None

    @classmethod
    def complete(cls, n: int, vertices: Iterable[int] | None = None) -> "PairGraph":
        vs = range(n) if vertices is None else sorted(vertices)
        return cls(n, combinations(vs, 2))

    @classmethod
    def cycle(cls, n: int, order: Sequence[int]) -> "PairGraph":
        k = len(order)
        return cls(n, [(order[i], order[(i + 1) % k]) for i in range(k)])

    def __repr__(self) -> str:
        return f"PairGraph(n={self.n}, m={len(self.edges)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PairGraph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, e) -> bool:
        u, v = e
        return canon_pair(u, v) in self.edges

    @property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        if self._adj is None:
            adj: list[set[int]] = [set() for _ in range(self.n)]
            for u, v in self.edges:
                adj[u].add(v)
                adj[v].add(u)
            self._adj = tuple(frozenset(a) for a in adj)
        return self._adj

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def vertices(self) -> list[int]:
        """Non-isolated vertices, sorted."""
        return sorted({v for e in self.edges for v in e})

    def sorted_edges(self) -> list[Pair]:
        return sorted(self.edges)

    def edge_index(self) -> dict[Pair, int]:
        return {e: i for i, e in enumerate(sorted(self.edges))}

    def min_degree(self, vertices: Iterable[int] | None = None) -> int:
        vs = range(self.n) if vertices is None else vertices
        return min((self.degree(v) for v in vs), default=0)

    def union(self, other: "PairGraph") -> "PairGraph":
        return PairGraph(max(self.n, other.n), self.edges | other.edges)

    def minus(self, other: "PairGraph | Iterable[Pair]") -> "PairGraph":
        drop = other.edges if isinstance(other, PairGraph) else {canon_pair(*e) for e in other}
        return PairGraph(self.n, self.edges - drop)

    def induced(self, vertices: Iterable[int]) -> "PairGraph":
        vs = set(vertices)
        return PairGraph(self.n, [e for e in self.edges if e[0] in vs and e[1] in vs])

    def with_n(self, n: int) -> "PairGraph":
        return PairGraph(n, self.edges)

    def triangles(self) -> list[Triple]:
        adj = self.adjacency
        out = []
        for u, v in sorted(self.edges):
            for w in sorted(adj[u] & adj[v]):
                if w > v:
                    out.append((u, v, w))
        return out


class MultiHypergraph:
    """k-uniform hypergraph with integer edge multiplicities.

    ``mult`` maps each canonical edge to its multiplicity (always >= 1).
    """

    __slots__ = ("n", "k", "mult", "_edges", "_codeg")

    def __init__(self, n: int, k: int, edges: Iterable[Sequence[int]] | Mapping = ()):
        counts: Counter = Counter()
        items = edges.items() if isinstance(edges, Mapping) else ((e, 1) for e in edges)
        for e, m in items:
            ce = canon_edge(int(x) for x in e)
            if len(ce) != k:
                raise ValueError(f"edge {ce} is not {k}-uniform")
            if ce[0] < 0 or ce[-1] >= n:
                raise ValueError(f"edge {ce} outside 0..{n - 1}")
            if m < 0:
                raise ValueError("negative multiplicity")
            if m:
                counts[ce] += int(m)
        self.n = n
        self.k = k
        self.mult: Mapping[tuple[int, ...], int] = MappingProxyType(dict(counts))
        self._edges = None
        self._codeg = None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, edges={len(self.mult)}, size={self.size})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, MultiHypergraph) and self.n == other.n
                and self.k == other.k and dict(self.mult) == dict(other.mult))

    def __hash__(self) -> int:
        return hash((self.n, self.k, frozenset(self.mult.items())))

    def __contains__(self, e) -> bool:
        return tuple(sorted(e)) in self.mult

    def __len__(self) -> int:
        return len(self.mult)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.edges)

    @property
    def edges(self) -> tuple[tuple[int, ...], ...]:
        """Distinct edges in canonical (lexicographic) order."""
        if self._edges is None:
            self._edges = tuple(sorted(self.mult))
        return self._edges

    @property
    def size(self) -> int:
        """Number of edges counted with multiplicity."""
        return sum(self.mult.values())

    def multiplicity(self, e: Sequence[int]) -> int:
        return self.mult.get(tuple(sorted(e)), 0)

    @property
    def is_simple(self) -> bool:
        return all(m == 1 for m in self.mult.values())

    def simplify(self):
        return type(self)._rebuild(self, {e: 1 for e in self.mult})

    @classmethod
    def _rebuild(cls, like, mult):
        if cls is MultiHypergraph:
            return MultiHypergraph(like.n, like.k, mult)
        return cls(like.n, mult)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for e, m in self.mult.items():
            for v in e:
                deg[v] += m
        return deg

    def degree(self, v: int) -> int:
        return sum(m for e, m in self.mult.items() if v in e)

    def pair_codegrees(self) -> Counter:
        """Codegree (with multiplicity) of every pair lying in some edge."""
        if self._codeg is None:
            c: Counter = Counter()
            for e, m in self.mult.items():
                for p in combinations(e, 2):
                    c[p] += m
            self._codeg = c
        return self._codeg

    def codegree(self, u: int, v: int) -> int:
        return self.pair_codegrees().get(canon_pair(u, v), 0)

    def max_codegree(self) -> int:
        return max(self.pair_codegrees().values(), default=0)

    def union(self, other):
        merged = Counter(dict(self.mult))
        for e, m in other.mult.items():
            merged[e] += m
        out = type(self)._rebuild(self, dict(merged))
        if out.n < other.n:
            out = type(self)._rebuild(other, dict(merged))
        return out

    def minus(self, other: Iterable[Sequence[int]]):
        drop = set(other.mult) if isinstance(other, MultiHypergraph) else {tuple(sorted(e)) for e in other}
        return type(self)._rebuild(self, {e: m for e, m in self.mult.items() if e not in drop})

    def restrict(self, keep):
        """Sub-hypergraph of edges accepted by the predicate ``keep``."""
        return type(self)._rebuild(self, {e: m for e, m in self.mult.items() if keep(e)})

    def induced(self, vertices: Iterable[int]):
        vs = set(vertices)
        return self.restrict(lambda e: all(v in vs for v in e))

    def vertices(self) -> list[int]:
        return sorted({v for e in self.mult for v in e})


class TripleSystem(MultiHypergraph):
    """3-uniform (multi-)hypergraph: the carrier for H, STSs, absorbers and transformers."""

    __slots__ = ()

    def __init__(self, n: int, triples: Iterable[Sequence[int]] | Mapping = ()):
        super().__init__(n, 3, triples)

    @classmethod
    def complete(cls, n: int, vertices: Iterable[int] | None = None) -> "TripleSystem":
        vs = range(n) if vertices is None else sorted(vertices)
        return cls(n, combinations(vs, 3))

    def with_n(self, n: int) -> "TripleSystem":
        return TripleSystem(n, dict(self.mult))

    def shadow(self) -> PairGraph:
        return shadow(self)


class ComplementTripleSystem:
    """Complete 3-graph on ``n`` vertices minus an explicit set of missing triples.

    Dense members at n in the hundreds do not fit in a triple dictionary;
    this keeps only the complement as an ``(m, 3)`` integer array.
    """

    __slots__ = ("n", "missing", "_missing_set")

    def __init__(self, n: int, missing: np.ndarray | Iterable[Sequence[int]] = ()):
        arr = np.asarray(list(missing) if not isinstance(missing, np.ndarray) else missing, dtype=np.int64)
        arr = arr.reshape(-1, 3)
        arr = np.sort(arr, axis=1)
        if arr.size:
            arr = np.unique(arr, axis=0)
        self.n = n
        self.missing = arr
        self._missing_set = None

    def __repr__(self) -> str:
        return f"ComplementTripleSystem(n={self.n}, missing={len(self.missing)})"

    def __contains__(self, e) -> bool:
        if self._missing_set is None:
            self._missing_set = {tuple(int(x) for x in row) for row in self.missing}
        t = tuple(sorted(e))
        return len(set(t)) == 3 and t not in self._missing_set

    @property
    def size(self) -> int:
        n = self.n
        return n * (n - 1) * (n - 2) // 6 - len(self.missing)

    def codegree_matrix(self) -> np.ndarray:
        return self.restricted_codegree_matrix(np.ones(self.n, dtype=bool))

    def restricted_codegree_matrix(self, in_u: np.ndarray) -> np.ndarray:
        """``out[a, b] = d(ab; U)`` where ``U`` is the boolean vertex mask ``in_u``."""
        in_u = np.asarray(in_u, dtype=bool)
        size_u = int(in_u.sum())
        iu = in_u.astype(np.int64)
        base = size_u - iu[:, None] - iu[None, :]
        deficit = np.zeros((self.n, self.n), dtype=np.int64)
        if len(self.missing):
            a, b, c = self.missing[:, 0], self.missing[:, 1], self.missing[:, 2]
            np.add.at(deficit, (a, b), iu[c])
            np.add.at(deficit, (a, c), iu[b])
            np.add.at(deficit, (b, c), iu[a])
            deficit = deficit + deficit.T
        out = base - deficit
        np.fill_diagonal(out, 0)
        return out

    def to_triple_system(self) -> TripleSystem:
        miss = {tuple(int(x) for x in row) for row in self.missing}
        return TripleSystem(self.n, [t for t in combinations(range(self.n), 3) if t not in miss])


@dataclass(frozen=True)
class Family:
    """Colored collection of 3-graphs on a common vertex set; color ``i`` is ``members[i]``."""

    n: int
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        for h in self.members:
            if h.n != self.n:
                raise ValueError("family members must share the vertex count")

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i):
        return self.members[i]

    @property
    def N(self) -> int:
        return len(self.members)

    def distinct_members(self) -> dict[int, list[int]]:
        """Group colors by identical member object (members are immutable, so shared objects coincide)."""
        groups: dict[int, list[int]] = {}
        first: dict[int, int] = {}
        for c, h in enumerate(self.members):
            key = id(h)
            if key not in first:
                first[key] = c
                groups[c] = []
            groups[first[key]].append(c)
        return groups


@dataclass(frozen=True)
class DegreeReport:
    min_codegree: int
    essential_min_codegree: int
    min_shadow_degree: int
    max_codegree: int

    def as_dict(self) -> dict:
        return {
            "min_codegree": self.min_codegree,
            "essential_min_codegree": self.essential_min_codegree,
            "min_shadow_degree": self.min_shadow_degree,
            "max_codegree": self.max_codegree,
        }


def shadow(H: MultiHypergraph) -> PairGraph:
    return PairGraph(H.n, (p for e in H.mult for p in combinations(e, 2)))


def codegree_matrix(H) -> np.ndarray:
    if isinstance(H, ComplementTripleSystem):
        return H.codegree_matrix()
    edges = np.array(list(H.mult.keys()), dtype=np.int64).reshape(-1, 3)
    mult = np.array(list(H.mult.values()), dtype=np.int64)
    return kernels.codegree_matrix(H.n, edges, mult)


def degree_report(H) -> DegreeReport:
    n = H.n
    if n < 3:
        raise ValueError("degree report needs n >= 3")
    C = codegree_matrix(H)
    iu = np.triu_indices(n, 1)
    vals = C[iu]
    in_shadow = vals > 0
    ess = int(vals[in_shadow].min()) if in_shadow.any() else 0
    shadow_deg = (C > 0).sum(axis=1)
    return DegreeReport(
        min_codegree=int(vals.min()),
        essential_min_codegree=ess,
        min_shadow_degree=int(shadow_deg.min()),
        max_codegree=int(vals.max()),
    )


def restricted_codegree(H, pair: Sequence[int], U: Iterable[int]) -> int:
    """Number of ``v`` in ``U`` with ``pair + {v}`` an edge of ``H`` (multiplicity counted)."""
    u, v = pair
    total = 0
    for w in set(U):
        if w == u or w == v:
            continue
        t = tuple(sorted((u, v, w)))
        if isinstance(H, ComplementTripleSystem):
            total += t in H
        else:
            total += H.mult.get(t, 0)
    return total


def k3_divisible(G: PairGraph) -> bool:
    return len(G.edges) % 3 == 0 and all(d % 2 == 0 for d in G.degrees())


def k3_disjoint(H: MultiHypergraph, G: PairGraph) -> bool:
    E = G.edges
    return not any(all(p in E for p in combinations(t, 2)) for t in H.mult)


@dataclass(frozen=True)
class AuxSystem:
    """Linear 3-graph on the shadow edges of ``H``; one aux triple per triple of ``H``."""

    hypergraph: TripleSystem
    pairs: tuple[Pair, ...]
    source: TripleSystem

    @property
    def pair_index(self) -> dict[Pair, int]:
        return {p: i for i, p in enumerate(self.pairs)}

    def aux_edge(self, t: Triple) -> Triple:
        idx = self.pair_index
        return tuple(sorted(idx[p] for p in combinations(t, 2)))

    def source_triple(self, e: Sequence[int]) -> Triple:
        verts = set()
        for i in e:
            verts.update(self.pairs[i])
        return tuple(sorted(verts))


def build_aux(H: TripleSystem) -> AuxSystem:
    if not H.is_simple:
        raise ValueError("build_aux needs a simple hypergraph")
    pairs = tuple(shadow(H).sorted_edges())
    idx = {p: i for i, p in enumerate(pairs)}
    aux = TripleSystem(len(pairs), [[idx[p] for p in combinations(t, 2)] for t in H.mult])
    return AuxSystem(aux, pairs, H)


# ---------------------------------------------------------------------------
# text formats

def _content_lines(text: str) -> Iterator[list[str]]:
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line.split()


def dumps_h3(H: MultiHypergraph) -> str:
    multi = not H.is_simple
    out = io.StringIO()
    out.write(f"h3 {H.n} {len(H.mult)}{' multi' if multi else ''}\n")
    for e in H.edges:
        m = H.mult[e]
        out.write(" ".join(map(str, e)) + (f" {m}" if multi else "") + "\n")
    return out.getvalue()


def loads_h3(text: str) -> TripleSystem:
    lines = _content_lines(text)
    header = next(lines)
    if header[0].lower() != "h3":
        raise ValueError(f"not an h3 file: {header}")
    n, m = int(header[1]), int(header[2])
    mult: Counter = Counter()
    for tok in lines:
        t = tuple(sorted(int(x) for x in tok[:3]))
        mult[t] += int(tok[3]) if len(tok) > 3 else 1
    if len(mult) != m:
        raise ValueError(f"h3 header announces {m} triples, found {len(mult)}")
    return TripleSystem(n, dict(mult))


def dumps_g2(G: PairGraph) -> str:
    lines = [f"g2 {G.n} {len(G.edges)}"] + [f"{u} {v}" for u, v in G.sorted_edges()]
    return "\n".join(lines) + "\n"


def loads_g2(text: str) -> PairGraph:
    lines = _content_lines(text)
    header = next(lines)
    if header[0].lower() != "g2":
        raise ValueError(f"not a g2 file: {header}")
    n, m = int(header[1]), int(header[2])
    G = PairGraph(n, ((int(a), int(b)) for a, b, *_ in lines))
    if len(G.edges) != m:
        raise ValueError(f"g2 header announces {m} edges, found {len(G.edges)}")
    return G


def read_h3(path: str | os.PathLike) -> TripleSystem:
    with open(path) as fh:
        return loads_h3(fh.read())


def write_h3(path: str | os.PathLike, H: MultiHypergraph) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_h3(H))


def read_g2(path: str | os.PathLike) -> PairGraph:
    with open(path) as fh:
        return loads_g2(fh.read())


def write_g2(path: str | os.PathLike, G: PairGraph) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_g2(G))
