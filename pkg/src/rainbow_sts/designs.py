"""Steiner triple systems, K_3-decomposition search and its rainbow variant."""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from . import kernels
from .errors import DivisibilityViolation, InfeasibleColorCount, SearchTimeout
from .hypercore import Family, PairGraph, TripleSystem, canon_pair

FOUND = "Found"
UNSAT = "Unsat"
TIMED_OUT = "TimedOut"


@dataclass(frozen=True)
class Budget:
    max_nodes: int = 10**8
    max_seconds: float = 300.0


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class Decomposition:
    triples: tuple
    colors: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "triples", tuple(tuple(sorted(t)) for t in self.triples))
        if self.colors is not None:
            object.__setattr__(self, "colors", tuple(int(c) for c in self.colors))
            if len(self.colors) != len(self.triples):
                raise ValueError("colors and triples differ in length")

    def __len__(self) -> int:
        return len(self.triples)

    def pairs(self) -> list:
        return [p for t in self.triples for p in combinations(t, 2)]

    def as_system(self, n: int) -> TripleSystem:
        return TripleSystem(n, self.triples)

    def as_dict(self) -> dict:
        d = {"triples": [list(t) for t in self.triples]}
        if self.colors is not None:
            d["colors"] = list(self.colors)
        return d


@dataclass
class SearchOutcome:
    status: str
    witness: Decomposition | None = None
    nodes_explored: int = 0
    elapsed: float = 0.0
    filtered: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.witness is not None) != (self.status == FOUND):
            raise ValueError("witness must be present exactly when the status is Found")

    @property
    def found(self) -> bool:
        return self.status == FOUND

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "witness": self.witness.as_dict() if self.witness is not None else None,
            "nodes_explored": self.nodes_explored,
            "elapsed": round(self.elapsed, 6),
            "filtered": self.filtered,
            **self.extra,
        }


# ---------------------------------------------------------------------------
# checkers

def covers_exactly(triples: Iterable[Sequence[int]], G: PairGraph) -> bool:
    """True iff the triples' pairs partition E(G)."""
    seen = set()
    for t in triples:
        if len(set(t)) != 3:
            return False
        for a, b in combinations(sorted(t), 2):
            p = (a, b)
            if p in seen or p not in G.edges:
                return False
            seen.add(p)
    return len(seen) == len(G.edges)


def verify_sts(S: Decomposition | Iterable[Sequence[int]], n: int) -> bool:
    triples = S.triples if isinstance(S, Decomposition) else [tuple(sorted(t)) for t in S]
    if n < 3 or len(triples) != n * (n - 1) // 6:
        return False
    if any(not (0 <= t[0] and t[-1] < n) for t in triples):
        return False
    return covers_exactly(triples, PairGraph.complete(n))


def verify_rainbow(S: Decomposition, G: PairGraph, fam: Family, colors: Iterable[int] | None = None) -> bool:
    """Pair coverage, color injectivity and membership ``t in fam[color(t)]``."""
    if S.colors is None or not covers_exactly(S.triples, G):
        return False
    if len(set(S.colors)) != len(S.colors):
        return False
    allowed = None if colors is None else set(colors)
    for t, c in zip(S.triples, S.colors):
        if not (0 <= c < fam.N) or (allowed is not None and c not in allowed):
            return False
        if t not in fam[c]:
            return False
    return True


# ---------------------------------------------------------------------------
# direct constructions

def _bose(n: int) -> list:
    m = n // 3  # odd order of the idempotent commutative quasigroup
    half = (m + 1) // 2
    pt = lambda x, i: x + m * (i % 3)
    out = [(pt(x, 0), pt(x, 1), pt(x, 2)) for x in range(m)]
    for i in range(3):
        for x, y in combinations(range(m), 2):
            out.append((pt(x, i), pt(y, i), pt((x + y) * half % m, i + 1)))
    return out


def _skolem(n: int) -> list:
    t = (n - 1) // 6
    m = 2 * t  # half-idempotent commutative quasigroup of order 2t
    inf = 3 * m
    pt = lambda x, i: x + m * (i % 3)

    def op(x, y):
        s = (x + y) % m
        return s // 2 if s % 2 == 0 else t + s // 2

    out = [(pt(x, 0), pt(x, 1), pt(x, 2)) for x in range(t)]
    for i in range(3):
        for x in range(t):
            out.append((inf, pt(x + t, i), pt(x, i + 1)))
        for x, y in combinations(range(m), 2):
            out.append((pt(x, i), pt(y, i), pt(op(x, y), i + 1)))
    return out


def construct_sts(n: int) -> Decomposition:
    """Bose construction for n = 3 mod 6, Skolem construction for n = 1 mod 6."""
    if n < 3 or n % 6 not in (1, 3):
        raise DivisibilityViolation(f"no STS on {n} points (need n = 1 or 3 mod 6, n >= 3)")
    triples = _bose(n) if n % 6 == 3 else _skolem(n)
    return Decomposition(sorted(tuple(sorted(t)) for t in triples))


# ---------------------------------------------------------------------------
# exact cover

def _k3_rows(G: PairGraph, allowed) -> tuple[list, list, list, int]:
    idx = G.edge_index()
    if isinstance(allowed, TripleSystem):
        cand = allowed.edges
    else:
        cand = sorted({tuple(sorted(t)) for t in allowed})
    triples, rows, filtered = [], [], 0
    for t in cand:
        ps = [canon_pair(a, b) for a, b in combinations(t, 2)]
        if all(p in idx for p in ps):
            triples.append(t)
            rows.append(tuple(idx[p] for p in ps))
        else:
            filtered += 1
    return triples, rows, sorted(idx), filtered


def _status_of(code: int, count: int) -> str:
    if code == kernels.NODE_LIMIT or code == kernels.TIME_LIMIT:
        return TIMED_OUT
    return FOUND if count else UNSAT


def exact_cover_k3(G: PairGraph, allowed=None, budget: Budget = DEFAULT_BUDGET) -> SearchOutcome:
    """Find a K_3-decomposition of G using only triples of ``allowed``.

    ``allowed=None`` means every triangle of G.  Triples that are not
    triangles of G are dropped and counted in ``filtered``.
    """
    if allowed is None:
        allowed = G.triangles()
    triples, rows, _, filtered = _k3_rows(G, allowed)
    t0 = time.monotonic()
    if not G.edges:
        return SearchOutcome(FOUND, Decomposition(()), 1, 0.0, filtered)
    code, sols, count, nodes = kernels.exact_cover(
        len(G.edges), rows, None, max_nodes=budget.max_nodes,
        max_seconds=budget.max_seconds, max_solutions=1, collect=True)
    status = _status_of(code, count)
    witness = Decomposition(sorted(triples[r] for r in sols[0])) if status == FOUND else None
    return SearchOutcome(status, witness, nodes, time.monotonic() - t0, filtered)


def count_decompositions(G: PairGraph, allowed=None, cap: int = 10**12,
                         budget: Budget = DEFAULT_BUDGET) -> int:
    if allowed is None:
        allowed = G.triangles()
    if not G.edges:
        return 1
    _, rows, _, _ = _k3_rows(G, allowed)
    code, _, count, _ = kernels.exact_cover(
        len(G.edges), rows, None, max_nodes=budget.max_nodes,
        max_seconds=budget.max_seconds, max_solutions=cap, collect=False)
    if code in (kernels.NODE_LIMIT, kernels.TIME_LIMIT):
        raise SearchTimeout(f"enumeration stopped after {count} decompositions")
    return count


# ---------------------------------------------------------------------------
# rainbow search

class _Matcher:
    """Incremental bipartite matching between chosen triples and colors."""

    def __init__(self, options: list[list[int]]):
        self.options = options
        self.color_of: dict[int, int] = {}
        self.row_of: dict[int, int] = {}

    def _augment(self, r: int, seen: set) -> bool:
        for c in self.options[r]:
            if c in seen:
                continue
            seen.add(c)
            owner = self.row_of.get(c)
            if owner is None or self._augment(owner, seen):
                self.color_of[r] = c
                self.row_of[c] = r
                return True
        return False

    def add(self, r: int) -> bool:
        return self._augment(r, set())

    def remove(self, r: int) -> None:
        c = self.color_of.pop(r)
        del self.row_of[c]


def _max_matching_size(left: list[int], options: list[list[int]], seed: dict[int, int]) -> int:
    """Max matching over ``left`` rows, warm-started from a partial matching."""
    color_of = dict(seed)
    row_of = {c: r for r, c in color_of.items()}

    def augment(r, seen):
        for c in options[r]:
            if c in seen:
                continue
            seen.add(c)
            owner = row_of.get(c)
            if owner is None or augment(owner, seen):
                color_of[r] = c
                row_of[c] = r
                return True
        return False

    size = len(color_of)
    for r in left:
        if r not in color_of and augment(r, set()):
            size += 1
    return size


def rainbow_exact_cover(G: PairGraph, fam: Family, colors: Iterable[int] | None = None,
                        budget: Budget = DEFAULT_BUDGET, hall_every: int = 64) -> SearchOutcome:
    """K_3-decomposition of G with an injective coloring, triple t colored c only if t in fam[c].

    Triple choice follows Algorithm X (fewest live rows first); each chosen
    triple is matched to a color by an augmenting path, and every
    ``hall_every`` nodes a look-ahead matching over all live triples checks
    that enough colors remain for the uncovered edges.
    """
    colors = sorted(set(range(fam.N) if colors is None else colors))
    m = len(G.edges)
    if 3 * len(colors) < m:
        raise InfeasibleColorCount(f"{len(colors)} colors cannot cover {m} edges")
    t0 = time.monotonic()
    if m == 0:
        return SearchOutcome(FOUND, Decomposition((), ()), 1, 0.0)

    triples, rows, _, filtered = _k3_rows(G, G.triangles())
    options = [[c for c in colors if t in fam[c]] for t in triples]
    keep = [i for i, o in enumerate(options) if o]
    triples = [triples[i] for i in keep]
    rows = [rows[i] for i in keep]
    options = [options[i] for i in keep]

    n_rows = len(rows)
    col_rows: list[list[int]] = [[] for _ in range(m)]
    for r, cols in enumerate(rows):
        for c in cols:
            col_rows[c].append(r)
    col_size = [len(x) for x in col_rows]
    dead = [0] * n_rows
    covered = [False] * m
    matcher = _Matcher(options)
    chosen: list[int] = []
    state = {"nodes": 0, "status": UNSAT, "uncovered": m}

    def cover_row(r):
        for c in rows[r]:
            covered[c] = True
        for c in rows[r]:
            for r2 in col_rows[c]:
                dead[r2] += 1
                if dead[r2] == 1:
                    for c2 in rows[r2]:
                        col_size[c2] -= 1
        state["uncovered"] -= 3

    def uncover_row(r):
        for c in reversed(rows[r]):
            for r2 in reversed(col_rows[c]):
                dead[r2] -= 1
                if dead[r2] == 0:
                    for c2 in rows[r2]:
                        col_size[c2] += 1
        for c in rows[r]:
            covered[c] = False
        state["uncovered"] += 3

    def hall_ok():
        need = len(chosen) + state["uncovered"] // 3
        live = [r for r in range(n_rows) if dead[r] == 0]
        return _max_matching_size(live, options, matcher.color_of) >= need

    def search():
        state["nodes"] += 1
        nodes = state["nodes"]
        if nodes > budget.max_nodes:
            state["status"] = TIMED_OUT
            return True
        if budget.max_seconds > 0 and nodes % 1024 == 0 and time.monotonic() - t0 > budget.max_seconds:
            state["status"] = TIMED_OUT
            return True
        best, best_size = -1, n_rows + 1
        for c in range(m):
            if not covered[c] and col_size[c] < best_size:
                best, best_size = c, col_size[c]
                if best_size <= 1:
                    break
        if best < 0:
            state["status"] = FOUND
            return True
        if best_size == 0:
            return False
        if hall_every and nodes % hall_every == 0 and not hall_ok():
            return False
        for r in [r for r in col_rows[best] if dead[r] == 0]:
            if not matcher.add(r):
                continue
            chosen.append(r)
            cover_row(r)
            stop = search()
            if stop:
                return True
            uncover_row(r)
            chosen.pop()
            matcher.remove(r)
        return False

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * m + 1000))
    try:
        search()
    finally:
        sys.setrecursionlimit(limit)
    elapsed = time.monotonic() - t0
    if state["status"] == FOUND:
        pairs = sorted((triples[r], matcher.color_of[r]) for r in chosen)
        witness = Decomposition([t for t, _ in pairs], [c for _, c in pairs])
        return SearchOutcome(FOUND, witness, state["nodes"], elapsed, filtered)
    return SearchOutcome(state["status"], None, state["nodes"], elapsed, filtered)
