"""Fractional Steiner triple systems and fractional matchings, in exact rationals.

A fractional STS of ``H`` puts a weight on every triple so that each
shadow pair carries total load 1.  The flow approach starts from a
constant weight, routes the excess load of heavy pairs to light pairs
through rooted copies of K_4^(3), and applies one weight shift per unit
of flow.  Perfect fractional matchings of the auxiliary 3-graph are the
same objects seen from the pair side; the regularization routine
averages many of them to push every weight below a small cap.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from .errors import EmptyHypergraph, NegativeWeight, OracleInfeasible
from .hypercore import (MultiHypergraph, TripleSystem, build_aux, canon_pair,
                        degree_report, shadow)

Q = Fraction


# ---------------------------------------------------------------------------
# weight functions

class WeightFn:
    """Exact rational weight per edge of a fixed k-uniform hypergraph."""

    __slots__ = ("n", "k", "weights", "meta")

    def __init__(self, n: int, weights: Mapping, k: int = 3, meta: dict | None = None):
        self.n = n
        self.k = k
        self.weights: dict = {tuple(sorted(e)): Q(w) for e, w in weights.items()}
        self.meta = dict(meta or {})

    def __repr__(self) -> str:
        return f"WeightFn(n={self.n}, k={self.k}, support={len(self.support())})"

    def __getitem__(self, e) -> Fraction:
        return self.weights.get(tuple(sorted(e)), Q(0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightFn):
            return NotImplemented
        keys = set(self.weights) | set(other.weights)
        return self.n == other.n and all(self[e] == other[e] for e in keys)

    def copy(self) -> "WeightFn":
        return WeightFn(self.n, dict(self.weights), self.k, self.meta)

    def support(self) -> list:
        return sorted(e for e, w in self.weights.items() if w != 0)

    def norm(self) -> Fraction:
        return max(self.weights.values(), default=Q(0))

    def min_weight(self) -> Fraction:
        return min(self.weights.values(), default=Q(0))

    def degrees(self) -> list[Fraction]:
        deg = [Q(0)] * self.n
        for e, w in self.weights.items():
            for v in e:
                deg[v] += w
        return deg

    def codegrees(self) -> dict:
        """Weighted codegree of every pair met by the support."""
        out: dict = defaultdict(Q)
        for e, w in self.weights.items():
            if w:
                for p in combinations(e, 2):
                    out[p] += w
        return dict(out)

    def pair_load(self, e: Sequence[int]) -> Fraction:
        u, v = e
        p = canon_pair(u, v)
        return sum((w for t, w in self.weights.items() if p[0] in t and p[1] in t), Q(0))

    def pair_loads(self) -> dict:
        out: dict = defaultdict(Q)
        for t, w in self.weights.items():
            for p in combinations(t, 2):
                out[p] += w
        return dict(out)

    def scaled(self, c) -> "WeightFn":
        c = Q(c)
        return WeightFn(self.n, {e: w * c for e, w in self.weights.items()}, self.k)

    def as_floats(self) -> dict:
        return {e: float(w) for e, w in self.weights.items()}


def dumps_w3(psi: WeightFn) -> str:
    """Text format: header ``w3 <n> <m>``, then ``u v w p/q`` per supported triple."""
    rows = sorted((e, w) for e, w in psi.weights.items() if w)
    lines = [f"w3 {psi.n} {len(rows)}"]
    lines += [" ".join(map(str, e)) + f" {w.numerator}/{w.denominator}" for e, w in rows]
    return "\n".join(lines) + "\n"


def loads_w3(text: str) -> WeightFn:
    lines = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0][0] != "w3" or len(lines[0]) != 3:
        raise ValueError("missing 'w3 <n> <m>' header")
    n, m = int(lines[0][1]), int(lines[0][2])
    weights = {}
    for ln in lines[1:]:
        if len(ln) != 4:
            raise ValueError(f"bad W3 line: {' '.join(ln)}")
        e = tuple(sorted(int(x) for x in ln[:3]))
        if len(set(e)) != 3 or not (0 <= e[0] and e[2] < n):
            raise ValueError(f"bad triple {e}")
        weights[e] = Q(ln[3])
    if len(weights) != m:
        raise ValueError(f"header says {m} triples, found {len(weights)}")
    return WeightFn(n, weights)


def mean_weights(fns: Sequence[WeightFn]) -> WeightFn:
    """Average of weight functions; missing edges count as weight 0."""
    if not fns:
        raise ValueError("nothing to average")
    acc: dict = defaultdict(Q)
    for f in fns:
        for e, w in f.weights.items():
            acc[e] += w
    m = len(fns)
    return WeightFn(fns[0].n, {e: w / m for e, w in acc.items()}, fns[0].k)


def is_perfect_fstss(psi: WeightFn, H: TripleSystem) -> bool:
    if any(w < 0 for w in psi.weights.values()):
        return False
    if any(e not in H.mult for e, w in psi.weights.items() if w):
        return False
    loads = psi.pair_loads()
    return all(loads.get(p, 0) == 1 for p in shadow(H).edges)


def is_perfect_matching(psi: WeightFn, H: MultiHypergraph, vertices: Iterable[int] | None = None) -> bool:
    if any(w < 0 for w in psi.weights.values()):
        return False
    if any(e not in H.mult for e, w in psi.weights.items() if w):
        return False
    deg = psi.degrees()
    vs = range(H.n) if vertices is None else vertices
    return all(deg[v] == 1 for v in vs)


def uniform_weight(H: TripleSystem) -> WeightFn:
    """Constant weight |E(H^(2))| / (3|E(H)|): the average pair load is exactly 1."""
    if not H.mult:
        raise EmptyHypergraph("uniform weight of an empty hypergraph")
    omega = Q(len(shadow(H).edges), 3 * len(H.mult))
    return WeightFn(H.n, {t: omega for t in H.edges}, meta={"omega": omega})


def pair_load(psi: WeightFn, e: Sequence[int]) -> Fraction:
    return psi.pair_load(e)


# ---------------------------------------------------------------------------
# rooted K4 and the flow operation

@dataclass(frozen=True)
class RootedK4:
    """K_4^(3) on {u1, v1, u2, v2} rooted on the disjoint pairs u1v1 and u2v2."""

    u1: int
    v1: int
    u2: int
    v2: int

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted((self.u1, self.v1, self.u2, self.v2)))

    @property
    def roots(self) -> tuple:
        return canon_pair(self.u1, self.v1), canon_pair(self.u2, self.v2)

    def raised(self) -> list:
        return [tuple(sorted((self.u1, self.v1, self.u2))), tuple(sorted((self.u1, self.v1, self.v2)))]

    def lowered(self) -> list:
        return [tuple(sorted((self.u1, self.u2, self.v2))), tuple(sorted((self.v1, self.u2, self.v2)))]


def k4_sets(H: TripleSystem) -> list[tuple[int, int, int, int]]:
    """Vertex sets spanning all four triples of a K_4^(3) in H."""
    E = H.mult
    link: dict = defaultdict(set)
    for a, b, c in E:
        link[(a, b)].add(c)
    out = []
    for (a, b), cs in sorted(link.items()):
        for c, d in combinations(sorted(x for x in cs if x > b), 2):
            if (a, c, d) in E and (b, c, d) in E:
                out.append((a, b, c, d))
    return out


def enumerate_rooted_k4(H: TripleSystem) -> list[RootedK4]:
    out = []
    for a, b, c, d in k4_sets(H):
        out.append(RootedK4(a, b, c, d))
        out.append(RootedK4(a, c, b, d))
        out.append(RootedK4(a, d, b, c))
    return out


def eta_flow_op(psi: WeightFn, K: RootedK4, eta) -> WeightFn:
    """Move load ``eta`` from root u2v2 to root u1v1; every other pair load is unchanged."""
    eta = Q(eta)
    half = eta / 2
    out = dict(psi.weights)
    for t in K.raised():
        out[t] = out.get(t, Q(0)) + half
    for t in K.lowered():
        val = out.get(t, Q(0)) - half
        if val < 0:
            raise NegativeWeight(t, val)
        out[t] = val
    return WeightFn(psi.n, out, psi.k, psi.meta)


# ---------------------------------------------------------------------------
# flow network

SOURCE = "s"
SINK = "t"


@dataclass
class FlowNet:
    pairs: list
    degree: dict
    omega: Fraction
    delta: Fraction
    n: int
    e1: dict  # pair -> capacity of s->pair
    e2: dict  # pair -> capacity of pair->t
    e3: list  # undirected pair-pair links, each (e, e') with e < e'
    e3_capacity: Fraction
    demand: Fraction

    def arcs(self) -> list:
        """Directed arcs (tail, head, capacity); E_3 links appear in both directions."""
        out = [(SOURCE, e, c) for e, c in sorted(self.e1.items())]
        out += [(e, SINK, c) for e, c in sorted(self.e2.items())]
        for e, f in self.e3:
            out.append((e, f, self.e3_capacity))
            out.append((f, e, self.e3_capacity))
        return out


def build_flow_net(H: TripleSystem, psi: WeightFn | None = None, delta=None) -> FlowNet:
    """Network on E(H^(2)) plus source and sink; ``delta`` defaults to δ_ess(H)/n."""
    if psi is None:
        psi = uniform_weight(H)
    ws = set(psi.weights[t] for t in H.edges)
    if len(ws) != 1:
        raise ValueError("flow network needs a constant weight function")
    w = ws.pop()
    G = shadow(H)
    deg = H.pair_codegrees()
    if delta is None:
        delta = Q(degree_report(H).essential_min_codegree, H.n)
    delta = Q(delta)
    pairs = G.sorted_edges()
    e1, e2 = {}, {}
    for e in pairs:
        load = deg[e] * w
        if load > 1:
            e1[e] = load - 1
        else:
            e2[e] = 1 - load
    links = set()
    for a, b, c, d in k4_sets(H):
        for x, y in (((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c))):
            links.add((x, y) if x < y else (y, x))
    cap = 2 * w / (3 * delta * H.n)
    return FlowNet(pairs, dict(deg), w, delta, H.n, e1, e2, sorted(links), cap,
                   sum(e1.values(), Q(0)))


@dataclass
class FlowResult:
    value: Fraction
    flows: dict  # (tail, head) -> flow, only positive entries

    def net(self, e, f) -> Fraction:
        return self.flows.get((e, f), Q(0)) - self.flows.get((f, e), Q(0))


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def max_flow(net: FlowNet) -> FlowResult:
    """Exact maximum s-t flow: capacities are scaled to integers by the lcm of their denominators."""
    arcs = net.arcs()
    if not arcs:
        return FlowResult(Q(0), {})
    scale = reduce(_lcm, (Q(c).denominator for _, _, c in arcs), 1)
    D = nx.DiGraph()
    for u, v, c in arcs:
        ic = Q(c) * scale
        assert ic.denominator == 1
        prev = D.get_edge_data(u, v, {"capacity": 0})["capacity"]
        D.add_edge(u, v, capacity=prev + int(ic))
    D.add_nodes_from([SOURCE, SINK])
    # integer capacities keep networkx's preflow-push exact
    value, fd = nx.maximum_flow(D, SOURCE, SINK)
    flows = {}
    for u, nbrs in fd.items():
        for v, f in nbrs.items():
            if f:
                flows[(u, v)] = Q(f, scale)
    return FlowResult(Q(value, scale), flows)


def check_flow(net: FlowNet, res: FlowResult) -> bool:
    """Capacity and conservation constraints, exactly."""
    caps: dict = defaultdict(Q)
    for u, v, c in net.arcs():
        caps[(u, v)] += Q(c)
    bal: dict = defaultdict(Q)
    for (u, v), f in res.flows.items():
        if f < 0 or f > caps.get((u, v), Q(0)):
            return False
        bal[u] -= f
        bal[v] += f
    if any(bal[x] != 0 for x in net.pairs):
        return False
    return bal[SINK] == res.value and -bal[SOURCE] == res.value


def flow_to_fstss(H: TripleSystem, psi0: WeightFn, net: FlowNet, res: FlowResult) -> WeightFn:
    """Apply one flow operation per E_3 link carrying net flow.

    For net flow f from pair e to pair e', the rooted K_4 on e' (raised)
    and e (lowered) gets an f-flow-operation.  The four triples of that
    K_4 are the only ones touched, and e ∪ e' spans exactly one K_4, so no
    splitting is needed.  Weight changes are accumulated and checked for
    nonnegativity once, since the operations commute.
    """
    if res.value != net.demand:
        raise ValueError(f"flow value {res.value} does not meet the demand {net.demand}")
    delta: dict = defaultdict(Q)
    for e, f in net.e3:
        amount = res.net(e, f)
        if amount == 0:
            continue
        src, dst = (e, f) if amount > 0 else (f, e)
        K = RootedK4(dst[0], dst[1], src[0], src[1])
        half = abs(amount) / 2
        for t in K.raised():
            delta[t] += half
        for t in K.lowered():
            delta[t] -= half
    out = dict(psi0.weights)
    for t, d in delta.items():
        out[t] = out.get(t, Q(0)) + d
    for t in sorted(out):
        if out[t] < 0:
            raise NegativeWeight(t, out[t])
    return WeightFn(H.n, out, meta={"omega": psi0.meta.get("omega"), "operations": len(delta)})


def flow_fstss(H: TripleSystem, delta=None) -> tuple[WeightFn, FlowNet, FlowResult]:
    psi0 = uniform_weight(H)
    net = build_flow_net(H, psi0, delta)
    res = max_flow(net)
    return flow_to_fstss(H, psi0, net, res), net, res


# ---------------------------------------------------------------------------
# perfect fractional matchings (LP feasibility)

@dataclass
class Infeasible:
    """Farkas certificate: y.A_e >= 0 for every edge e and sum(y) < 0."""

    y: dict
    reason: str = ""

    def check(self, H: MultiHypergraph, edges: Iterable | None = None) -> bool:
        es = H.edges if edges is None else edges
        if sum(self.y.values(), Q(0)) >= 0:
            return False
        return all(sum((self.y.get(v, Q(0)) for v in e), Q(0)) >= 0 for e in es)


def _exact_phase1(n_rows: int, cols: list[list[int]]) -> tuple[list | None, list | None]:
    """Phase-1 simplex for {A x = 1, x >= 0} with 0/1 columns given by row lists.

    Bland's rule; dense Fraction tableau.  Returns (x, None) or (None, y)
    with y a Farkas certificate.
    """
    m, nv = n_rows, len(cols)
    width = nv + m + 1  # structural, artificial, rhs
    T = [[Q(0)] * width for _ in range(m)]
    for j, rows in enumerate(cols):
        for i in rows:
            T[i][j] += 1
    for i in range(m):
        T[i][nv + i] = Q(1)
        T[i][-1] = Q(1)
    basis = [nv + i for i in range(m)]
    # reduced costs of the phase-1 objective (sum of artificials)
    z = [Q(0)] * width
    for j in range(nv):
        z[j] = -sum((T[i][j] for i in range(m)), Q(0))
    z[-1] = -Q(m)
    while True:
        enter = next((j for j in range(nv + m) if z[j] < 0), None)
        if enter is None:
            break
        best, leave = None, None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # unbounded cannot happen in phase 1
            raise RuntimeError("phase-1 simplex reported an unbounded ray")
        piv = T[leave][enter]
        row = [x / piv for x in T[leave]] if piv != 1 else T[leave]
        T[leave] = row
        nz = [(j, b) for j, b in enumerate(row) if b]
        for i in range(m):
            Ti = T[i]
            f = Ti[enter]
            if i != leave and f:
                for j, b in nz:
                    Ti[j] -= f * b
        f = z[enter]
        if f:
            for j, b in nz:
                z[j] -= f * b
        basis[leave] = enter
    if z[-1] != 0:
        # duals of the phase-1 optimum: y_i = 1 - (reduced cost of artificial i)
        y = [Q(1) - z[nv + i] for i in range(m)]
        return None, [-v for v in y]
    x = [Q(0)] * nv
    for i, b in enumerate(basis):
        if b < nv:
            x[b] = T[i][-1]
    return x, None


def _exact_solve_support(n_rows: int, cols: list[list[int]], support: list[int]) -> list | None:
    """Solve A_S x_S = 1 exactly by Gaussian elimination; None if inconsistent."""
    k = len(support)
    M = [[Q(0)] * (k + 1) for _ in range(n_rows)]
    for jj, j in enumerate(support):
        for i in cols[j]:
            M[i][jj] += 1
    for i in range(n_rows):
        M[i][k] = Q(1)
    r = 0
    pivots = []
    for c in range(k):
        p = next((i for i in range(r, n_rows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(n_rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    if any(M[i][k] != 0 for i in range(r, n_rows)):
        return None
    x = [Q(0)] * k
    for i, c in enumerate(pivots):
        x[c] = M[i][k]
    return x


def _highs_guided(n_rows: int, cols: list[list[int]]) -> list | None:
    """Float LP by HiGHS, then an exact basic solution on its support."""
    from scipy.optimize import linprog
    from scipy.sparse import csc_matrix

    data, ri, ci = [], [], []
    for j, rows in enumerate(cols):
        for i in rows:
            data.append(1.0)
            ri.append(i)
            ci.append(j)
    A = csc_matrix((data, (ri, ci)), shape=(n_rows, len(cols)))
    res = linprog(np.zeros(len(cols)), A_eq=A, b_eq=np.ones(n_rows), bounds=(0, None), method="highs-ds")
    if res.status != 0:
        return None
    xf = res.x
    # rationalize first; cheap and usually exact for 0/1 systems
    guess = [Q(float(v)).limit_denominator(10**6) if v > 1e-12 else Q(0) for v in xf]
    if _feasible(n_rows, cols, guess):
        return guess
    support = [j for j, v in enumerate(xf) if v > 1e-9]
    xs = _exact_solve_support(n_rows, cols, support)
    if xs is None or any(v < 0 for v in xs):
        return None
    x = [Q(0)] * len(cols)
    for j, v in zip(support, xs):
        x[j] = v
    return x if _feasible(n_rows, cols, x) else None


def _feasible(n_rows: int, cols: list[list[int]], x: list) -> bool:
    if any(v < 0 for v in x):
        return False
    deg = [Q(0)] * n_rows
    for j, rows in enumerate(cols):
        if x[j]:
            for i in rows:
                deg[i] += x[j]
    return all(d == 1 for d in deg)


EXACT_LIMIT = 40_000


def perfect_fractional_matching(H3: MultiHypergraph, forbidden: Iterable | None = None,
                                method: str = "auto") -> WeightFn | Infeasible:
    """Weights on E(H3) minus ``forbidden`` with weighted degree exactly 1 everywhere.

    ``method`` is ``exact`` (phase-1 simplex in rationals), ``highs``
    (floating LP followed by an exact reconstruction and check) or
    ``auto`` (exact on small instances).  Edge multiplicities are ignored.
    """
    banned = {tuple(sorted(e)) for e in (forbidden or ())}
    edges = [e for e in H3.edges if e not in banned]
    n = H3.n
    isolated = sorted(set(range(n)) - {v for e in edges for v in e})
    if isolated:
        v = isolated[0]
        return Infeasible({v: Q(-1)}, f"vertex {v} has no available edge")
    cols = [list(e) for e in edges]
    use_exact = method == "exact" or (method == "auto" and n * (len(cols) + n) <= EXACT_LIMIT)
    x = None
    if not use_exact:
        x = _highs_guided(n, cols)
    if x is None:
        x, y = _exact_phase1(n, cols)
        if x is None:
            return Infeasible({i: v for i, v in enumerate(y) if v}, "phase-1 optimum is positive")
    return WeightFn(n, {e: v for e, v in zip(edges, x) if v}, k=H3.k)


# ---------------------------------------------------------------------------
# regularization

@dataclass
class RegularizeTrace:
    oracle_calls: int = 0
    growth: list = field(default_factory=list)  # (level, max per-vertex growth of F)
    early_returns: int = 0
    max_forbidden_degree: int = 0


def regularize(H3: MultiHypergraph, C: int, gamma, oracle: Callable | None = None,
               eta=None) -> WeightFn:
    """Perfect fractional matching with every weight at most γ + 2^-⌊γC⌋.

    Level ``i`` (``i = 0..t``, ``t = ⌊γC⌋``) returns a perfect fractional
    matching of ``H3 - F`` with norm at most ``γ + (1 - γ)/2^i`` for any
    forbidden set F of max degree at most ``C - i/γ``.  Level 0 is one
    oracle call.  Level i takes a level-(i-1) matching ψ0, forbids the
    edges with ψ0(e) > γ (at most ⌊1/γ⌋ new forbidden edges per vertex),
    takes a second level-(i-1) matching ψ1 of what is left and returns
    (ψ0 + ψ1)/2.  If ψ0 already meets the level bound it is returned as is.
    """
    gamma = Q(gamma)
    if not (0 < gamma < 1):
        raise ValueError("gamma must lie in (0, 1)")
    oracle = oracle or perfect_fractional_matching
    t = math.floor(gamma * C)
    step = math.floor(1 / gamma)
    trace = RegularizeTrace()

    def level_bound(i):
        return gamma + (1 - gamma) / Q(2) ** i

    def fdeg(F):
        deg = [0] * H3.n
        for e in F:
            for v in e:
                deg[v] += 1
        return deg

    def solve(i: int, F: frozenset) -> WeightFn:
        if i == 0:
            trace.oracle_calls += 1
            res = oracle(H3, F)
            if isinstance(res, Infeasible):
                raise OracleInfeasible(trace.oracle_calls - 1, res)
            return res
        psi0 = solve(i - 1, F)
        if psi0.norm() <= level_bound(i):
            trace.early_returns += 1
            return psi0
        heavy = {e for e, w in psi0.weights.items() if w > gamma}
        F1 = F | heavy
        before, after = fdeg(F), fdeg(F1)
        grow = max((a - b for a, b in zip(after, before)), default=0)
        trace.growth.append((i, grow))
        if grow > step:
            raise AssertionError(f"forbidden degree grew by {grow} > floor(1/gamma) = {step}")
        trace.max_forbidden_degree = max(trace.max_forbidden_degree, max(after, default=0))
        if trace.max_forbidden_degree > C:
            raise AssertionError("forbidden set exceeded max degree C")
        psi1 = solve(i - 1, frozenset(F1))
        return mean_weights([psi0, psi1])

    psi = solve(t, frozenset())
    psi = WeightFn(psi.n, {e: w for e, w in psi.weights.items() if w}, psi.k)
    bound = gamma + Q(1, 2 ** t)
    codeg = psi.codegrees()
    max_codeg = max(codeg.values(), default=Q(0))
    psi.meta.update({
        "gamma": gamma, "C": C, "rounds": t, "bound": bound,
        "oracle_calls": trace.oracle_calls, "early_returns": trace.early_returns,
        "growth": trace.growth, "max_forbidden_degree": trace.max_forbidden_degree,
        "max_weighted_codegree": max_codeg,
    })
    if eta is not None:
        psi.meta["eta"] = Q(eta)
        psi.meta["codegree_ok"] = max_codeg <= Q(eta)
    if not is_perfect_matching(psi, H3):
        raise AssertionError("averaged matching lost perfection")
    if psi.norm() > bound:
        raise AssertionError(f"norm {psi.norm()} exceeds {bound}")
    return psi


def lemma_parameters_ok(D, delta, gamma, C, eta) -> bool:
    """δD(γ + 2^(-γC)) < η/2, evaluated in floating point for the exponent."""
    return float(delta) * float(D) * (float(gamma) + 2.0 ** (-float(gamma) * C)) < float(eta) / 2


def pseudorandom_fstss(H: TripleSystem, eps, gamma=None, C: int | None = None,
                       oracle: Callable | None = None) -> WeightFn:
    """Regularized perfect fractional STS of H via its auxiliary 3-graph.

    Defaults follow the lemma's instantiation: C = ⌊εn/2⌋ and γ = log²n / (3n)
    with the natural logarithm, rationalized.
    """
    n = H.n
    eps = Q(eps)
    if C is None:
        C = math.floor(eps * n / 2)
    if gamma is None:
        gamma = Q(math.log(n) ** 2 / (3 * n)).limit_denominator(10**6)
    gamma = Q(gamma)
    rep = degree_report(H)
    hyp = {
        "essential_min_codegree": rep.essential_min_codegree,
        "min_shadow_degree": rep.min_shadow_degree,
        "shadow_condition": rep.min_shadow_degree >= (1 - eps) * n,
    }
    aux = build_aux(H)
    psi_aux = regularize(aux.hypergraph, C, gamma, oracle=oracle)
    weights = {aux.source_triple(e): w for e, w in psi_aux.weights.items()}
    out = WeightFn(n, weights, meta={**psi_aux.meta, "hypotheses": hyp})
    if not is_perfect_fstss(out, H):
        raise AssertionError("pulled-back weights are not a perfect fractional STS")
    return out


def aux_image(psi: WeightFn, H: TripleSystem):
    """Push a weight function on H's triples to the auxiliary 3-graph."""
    aux = build_aux(H)
    return aux, WeightFn(aux.hypergraph.n, {aux.aux_edge(t): w for t, w in psi.weights.items()})


# ---------------------------------------------------------------------------
# discretization and pseudorandomness

@dataclass(frozen=True)
class PseudoParams:
    D: Fraction
    tau: Fraction
    delta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "D", Q(self.D))
        object.__setattr__(self, "tau", Q(self.tau))
        object.__setattr__(self, "delta", Q(self.delta))
        if self.D <= 0 or self.tau < 0 or self.delta < 0:
            raise ValueError("need D > 0, tau >= 0, delta >= 0")


def check_pseudorandom(X, p: PseudoParams, vertices: Iterable[int] | None = None) -> dict:
    """Degree window (1 ± τ)D and codegree cap δD, for a multi-hypergraph or a weight function."""
    if isinstance(X, WeightFn):
        deg = X.degrees()
        codeg = X.codegrees()
    else:
        deg = [Q(d) for d in X.degrees()]
        codeg = {pr: Q(c) for pr, c in X.pair_codegrees().items()}
    vs = list(range(len(deg))) if vertices is None else sorted(vertices)
    lo, hi = (1 - p.tau) * p.D, (1 + p.tau) * p.D
    cap = p.delta * p.D
    bad_deg = [(v, deg[v]) for v in vs if not (lo <= deg[v] <= hi)]
    bad_cod = sorted(((pr, c) for pr, c in codeg.items() if c > cap), key=lambda x: -x[1])
    worst_v = max(vs, key=lambda v: abs(deg[v] - p.D)) if vs else None
    return {
        "passed": not bad_deg and not bad_cod,
        "D": p.D, "tau": p.tau, "delta": p.delta,
        "min_degree": min((deg[v] for v in vs), default=None),
        "max_degree": max((deg[v] for v in vs), default=None),
        "max_codegree": max(codeg.values(), default=Q(0)),
        "worst_vertex": worst_v,
        "degree_violations": bad_deg[:10],
        "codegree_violations": bad_cod[:10],
    }


def discretize(H3: MultiHypergraph, psi: WeightFn, D: int, d=1) -> tuple[MultiHypergraph, dict]:
    """Replace each edge e by ⌊(D/d)ψ(e)⌋ parallel copies and check the result.

    τ is taken as Δ(H3)/D (the smallest value the rounding argument needs)
    and δ as the largest weighted codegree of ψ divided by d.
    """
    d = Q(d)
    factor = Q(D) / d
    mult = {}
    for e in H3.edges:
        m = math.floor(factor * psi[e])
        if m:
            mult[e] = m
    F = MultiHypergraph(H3.n, H3.k, mult) if H3.k != 3 else TripleSystem(H3.n, mult)
    max_deg_h = max(H3.simplify().degrees(), default=0)
    tau = Q(max_deg_h, D)
    wdeg = psi.degrees()
    tau_psi = max((abs(x - d) / d for x in wdeg), default=Q(0))
    delta = max(psi.codegrees().values(), default=Q(0)) / d
    params = PseudoParams(D, 2 * tau if tau_psi <= tau else 2 * tau_psi + tau, delta)
    report = check_pseudorandom(F, params)
    # rounding loses less than one copy per edge at each vertex
    real = [factor * x for x in wdeg]
    fdeg = F.degrees()
    err = max((abs(Q(a) - b) for a, b in zip(fdeg, real)), default=Q(0))
    report["rounding_error"] = err
    report["rounding_ok"] = err <= max_deg_h
    report["tau_source"] = tau
    report["subhypergraph"] = all(e in H3.mult for e in F.mult)
    return F, report


# ---------------------------------------------------------------------------
# the threshold constant

def _poly_mul(p, q):
    out = [Q(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_add(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def _poly_neg(p):
    return [-a for a in p]


def threshold_constant() -> dict:
    """Boundary of the final inequality -(1 + δ) < 1 - δ² + δ(2 - 5δ).

    Moving everything to one side gives 2 + 3δ - 6δ² > 0; the positive root
    of 6δ² - 3δ - 2 is (3 + √57)/12.
    """
    x = [Q(0), Q(1)]
    lhs = _poly_neg(_poly_add([Q(1)], x))
    rhs = _poly_add(_poly_add([Q(1)], _poly_neg(_poly_mul(x, x))), _poly_mul(x, [Q(2), Q(-5)]))
    slack = _poly_add(rhs, _poly_neg(lhs))  # > 0 on the feasible side
    quad = [-c for c in slack]  # 6δ² - 3δ - 2
    while quad and quad[-1] == 0:
        quad.pop()
    c0, c1, c2 = quad
    disc = c1 * c1 - 4 * c2 * c0
    root = (-float(c1) + math.sqrt(float(disc))) / (2 * float(c2))
    closed = (3 + math.sqrt(57)) / 12
    residual = abs(float(c2) * root * root + float(c1) * root + float(c0))
    out = {
        "quadratic": [int(c2), int(c1), int(c0)],
        "discriminant": int(disc),
        "root": root,
        "closed_form": "(3 + sqrt(57)) / 12",
        "closed_form_value": closed,
        "difference": abs(root - closed),
        "residual": residual,
        "below_0_88": root < 0.88,
        "decimal": f"{root:.12f}",
        # the constant is 0.87915..., so the familiar 0.8792 is its 4-place rounding
        "rounded_4": f"{root:.4f}",
    }
    if not (out["difference"] < 1e-12 and residual < 1e-12 and root < 0.88):
        raise AssertionError(f"threshold constant check failed: {out}")
    if not (out["decimal"].startswith("0.879") and out["rounded_4"] == "0.8792"):
        raise AssertionError("unexpected decimal expansion")
    return out
