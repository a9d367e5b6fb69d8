"""End-to-end toy run: vortex, color bookkeeping, level-by-level rainbow covers.

At desk scale the final set U_ℓ has at most a handful of vertices, so the
absorbers for every divisible leftover are only enumerated and checked, not
embedded (A_0 = W_0 = ∅).  Each level covers the uncovered edges of G_i
outside U_{i+1} by an exact rainbow cover in which edges inside U_{i+1} (but
not inside U_{i+2}) may be used as well; the colors come from the X^{(i)}_j
bookkeeping, and X^{(i)}_1 must be used up.
"""

from __future__ import annotations

import json
import math
import platform
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import kernels
from .designs import Budget, Decomposition, rainbow_exact_cover, verify_sts
from .errors import DivisibilityViolation, RainbowSTSError, StageFailure
from .extremal import build_extremal, default_spec
from .gadgets import build_absorber, verify_absorber
from .hypercore import Family, PairGraph, TripleSystem, degree_report, k3_divisible
from .vortex import as_fraction, levels, sample_transversal_vortex

__all__ = ["generate_family", "PipelineConfig", "PipelineState", "run_pipeline", "emit_report",
           "color_blocks", "divisible_graphs"]

MODELS = ("complete", "minus-p", "minus-k", "extremal")


# ---------------------------------------------------------------------------
# instance generators

def generate_family(n: int, model: str = "complete", params: dict | None = None, seed: int = 0,
                    N: int | None = None) -> tuple[Family, list[dict]]:
    """A family of N = C(n,2)/3 members (or ``N`` if given) plus a degree report per distinct member.

    complete  every color is K_n^(3)
    minus-p   each member drops every triple independently with probability p
    minus-k   each member drops exactly k random triples
    extremal  a fraction q of the colors get the parity-obstructed construction, the rest K_n^(3)

    ``params["pool"]`` caps the number of distinct random members (shared round robin).
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    params = dict(params or {})
    if N is None:
        N = max(1, n * (n - 1) // 6)
    rng = np.random.default_rng(seed)
    full = TripleSystem.complete(n)
    all_t = np.array(list(combinations(range(n), 3)), dtype=np.int64)
    pool = int(params.get("pool", N))
    if model == "complete":
        members = [full] * N
    elif model in ("minus-p", "minus-k"):
        distinct = []
        for _ in range(min(pool, N)):
            if model == "minus-p":
                p = float(params.get("p", 0.0))
                keep = rng.random(len(all_t)) >= p
            else:
                k = int(params.get("k", 0))
                keep = np.ones(len(all_t), dtype=bool)
                keep[rng.choice(len(all_t), size=min(k, len(all_t)), replace=False)] = False
            distinct.append(full if keep.all() else TripleSystem(n, [tuple(t) for t in all_t[keep]]))
        members = [distinct[c % len(distinct)] for c in range(N)]
    elif model == "extremal":
        q = as_fraction(params.get("q", Fraction(1, 2)))
        spec = default_spec(n) if "sizes" not in params else None
        if spec is None:
            from .extremal import ExtremalSpec
            spec = ExtremalSpec(n, tuple(params["sizes"]))
        ext = build_extremal(spec)
        hits = set(int(c) for c in rng.permutation(N)[: math.floor(q * N)])
        members = [ext if c in hits else full for c in range(N)]
    else:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    fam = Family(n, members)
    reports = []
    for rep, cols in fam.distinct_members().items():
        d = degree_report(fam[rep]).as_dict()
        d["colors"] = len(cols)
        d["first_color"] = rep
        d["size"] = fam[rep].size
        reports.append(d)
    return fam, reports


# ---------------------------------------------------------------------------
# bookkeeping

def color_blocks(sizes: list[int]) -> list[range]:
    """D_0, …, D_{ℓ-1} as consecutive color ranges.

    |D_i| = (C(n_i,2) - C(n_{i+1},2))/3 for i < ℓ-1 and |D_{ℓ-1}| = C(n_{ℓ-1},2)/3.
    """
    ell = len(sizes) - 1
    out, start = [], 0
    for i in range(ell):
        num = math.comb(sizes[i], 2) - (math.comb(sizes[i + 1], 2) if i < ell - 1 else 0)
        if num % 3:
            raise StageFailure("colors", f"|D_{i}| = {num}/3 is not an integer")
        out.append(range(start, start + num // 3))
        start += num // 3
    return out


def divisible_graphs(vertices) -> list[PairGraph]:
    """Every K_3-divisible graph on the given vertices (the leftovers an absorber must handle)."""
    vs = sorted(vertices)
    if len(vs) > 6:
        raise StageFailure("absorbers", f"|U_ℓ| = {len(vs)} > 6; enumeration is infeasible")
    n = max(vs) + 1 if vs else 0
    pairs = list(combinations(vs, 2))
    out = []
    for mask in range(1 << len(pairs)):
        G = PairGraph(n, [p for k, p in enumerate(pairs) if mask >> k & 1])
        if k3_divisible(G):
            out.append(G)
    return out


@dataclass
class PipelineConfig:
    n: int
    model: str = "complete"
    params: dict = field(default_factory=dict)
    seed: int = 0
    eps: Fraction = Fraction(1, 2)
    m_prime: int = 2
    alpha: Fraction = Fraction(0)
    max_nodes: int = 2 * 10**6
    max_seconds: float = 60.0
    level_solutions: int = 25
    absorber_cap: int = 3
    fallback: bool = True

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        for key in ("eps", "alpha"):
            if key in d:
                d[key] = as_fraction(d[key]) if not isinstance(d[key], str) else Fraction(d[key])
        return cls(**d)

    def as_dict(self) -> dict:
        return {"n": self.n, "model": self.model, "params": self.params, "seed": self.seed,
                "eps": str(self.eps), "m_prime": self.m_prime, "alpha": str(self.alpha),
                "max_nodes": self.max_nodes, "max_seconds": self.max_seconds,
                "level_solutions": self.level_solutions, "absorber_cap": self.absorber_cap,
                "fallback": self.fallback}


@dataclass
class PipelineState:
    """Snapshot before level i: uncovered graph G_i, used colors W_i, the X^{(i)}_j and S_i."""

    i: int
    U: list
    D: list
    S: list
    A: list = field(default_factory=list)  # (triple, color) pairs placed so far
    X: list = field(default_factory=lambda: [set() for _ in range(9)])
    eps: Fraction = Fraction(1, 2)
    n: int = 0

    @property
    def W(self) -> set:
        return {c for _, c in self.A}

    def covered_pairs(self) -> set:
        return {p for t, _ in self.A for p in combinations(t, 2)}

    def G(self) -> PairGraph:
        cov = self.covered_pairs()
        return PairGraph(self.n, [p for p in combinations(sorted(self.U[self.i]), 2) if p not in cov])

    def D_prime(self, i: int) -> set:
        return set(self.D[i]) - set(self.S[i]) if i < len(self.D) else set()

    def check(self) -> dict:
        """Invariants (a)-(g); set relations are hard, numeric bounds are margins."""
        i, n, eps = self.i, self.n, self.eps
        D = [set(d) for d in self.D]
        W = self.W
        Ui = set(self.U[i])
        out = {}
        low = set().union(*D[: max(0, i - 8)]) if i - 8 > 0 else set()
        high = set().union(*D[: i + 1]) if D else set()
        out["a"] = {"passed": low <= W <= high}
        K_out = {p for p in combinations(range(n), 2) if not (p[0] in Ui and p[1] in Ui)}
        cov = self.covered_pairs()
        out["b"] = {"passed": K_out <= cov}
        colors = [c for _, c in self.A]
        pair_count = sum(3 for _ in self.A)
        out["c"] = {"passed": len(set(colors)) == len(colors) and len(cov) == pair_count}
        G = self.G()
        n_i = len(Ui)
        if n_i > 1:
            mind = min(G.degree(v) for v in Ui)
            out["d"] = {"passed": True, "min_degree": mind, "required": float((1 - eps) * n_i),
                        "level": "pass" if mind >= (1 - eps) * n_i else "warn"}
        else:
            out["d"] = {"passed": True, "level": "pass"}
        if i + 1 < len(self.U):
            U1 = sorted(self.U[i + 1])
            out["e"] = {"passed": all(p in G.edges for p in combinations(U1, 2))}
        else:
            out["e"] = {"passed": True}
        X_low = set().union(*self.X[:8])
        S_i = set(self.S[i]) if i < len(self.S) else set()
        Dp = self.D_prime(i)
        out["f"] = {"passed": S_i <= W | self.X[7] and not Dp & (W | X_low) and Dp <= self.X[8]}
        ok_g = True
        for k in range(1, 9):
            if i - k < 0:
                break
            allowed = self.X[8 - k] | (self.X[7 - k] if 7 - k >= 0 else set())
            if not D[i - k] - W <= allowed:
                ok_g = False
        sizes = [len(x) for x in self.X]
        bounds = [float(eps * Fraction(n_i) ** Fraction(j + 1, 4)) if n_i else 0.0 for j in range(9)]
        out["g"] = {"passed": ok_g, "sizes": sizes,
                    "level": "pass" if all(s <= b for s, b in zip(sizes[:8], bounds[:8])) else "warn"}
        return out


def _first_broken(inv: dict):
    for key in "abcdefg":
        if not inv[key]["passed"]:
            return key
    return None


def _level_rows(state: PipelineState, fam: Family, rng):
    """Rows (triangle, color) for one level, with the column layout of the exact cover."""
    i = state.i
    G = state.G()
    U1 = set(state.U[i + 1]) if i + 1 < len(state.U) else set()
    U2 = set(state.U[i + 2]) if i + 2 < len(state.U) else set()
    prim_pairs, sec_pairs = [], []
    for p in sorted(G.edges):
        if p[0] in U1 and p[1] in U1:
            if not (p[0] in U2 and p[1] in U2):
                sec_pairs.append(p)
        else:
            prim_pairs.append(p)
    pairs = prim_pairs + sec_pairs
    col = {p: k for k, p in enumerate(pairs)}
    avail = sorted(set().union(*state.X))
    must = set(state.X[0])
    ccol = {c: len(pairs) + k for k, c in enumerate(avail)}
    primary = [k < len(prim_pairs) for k in range(len(pairs))] + [c in must for c in avail]
    prim_set = set(prim_pairs)
    rows, labels = [], []
    groups = fam.distinct_members()
    for t in G.triangles():
        ps = list(combinations(t, 2))
        if any(p not in col for p in ps) or not any(p in prim_set for p in ps):
            continue
        for rep, cols in groups.items():
            if t not in fam[rep]:
                continue
            for c in cols:
                if c in ccol:
                    rows.append([col[p] for p in ps] + [ccol[c]])
                    labels.append((t, c))
    order = rng.permutation(len(rows)) if rows else []
    rows = [rows[k] for k in order]
    labels = [labels[k] for k in order]
    return len(pairs) + len(avail), rows, labels, primary, {"primary_pairs": len(prim_pairs),
                                                            "secondary_pairs": len(sec_pairs),
                                                            "colors": len(avail), "forced_colors": len(must)}


def _advance(state: PipelineState, placed: list) -> PipelineState:
    used = {c for _, c in placed}
    i = state.i + 1
    X = [state.X[j + 1] - used for j in range(8)]
    X.append(state.D_prime(i) | (set(state.S[i + 1]) if i + 1 < len(state.S) else set()))
    return PipelineState(i, state.U, state.D, state.S, state.A + placed, X, state.eps, state.n)


def _solve_levels(state, fam, cfg, rng, trace, deadline):
    """Depth-first over levels; each level offers up to cfg.level_solutions covers."""
    ell = len(state.U) - 1
    inv = state.check()
    trace.append({"level": state.i, "invariants": inv})
    broken = _first_broken(inv)
    if broken:
        raise StageFailure(f"invariant ({broken})", f"broken before level {state.i}")
    if state.i == ell:
        return state
    n_cols, rows, labels, primary, shape = _level_rows(state, fam, rng)
    left = max(0.0, deadline - _now())
    status, sols, count, nodes = kernels.exact_cover(
        n_cols, rows, primary, max_nodes=cfg.max_nodes, max_seconds=left or 1e-3,
        max_solutions=cfg.level_solutions)
    trace[-1]["search"] = {**shape, "rows": len(rows), "solutions": len(sols), "nodes": nodes}
    for sol in sols:
        placed = sorted(labels[r] for r in sol)
        try:
            return _solve_levels(_advance(state, placed), fam, cfg, rng, trace, deadline)
        except StageFailure as exc:
            if exc.stage.startswith("invariant"):
                raise
            if _now() > deadline:
                break
    raise StageFailure(f"level {state.i}", f"no cover of the level extends to a full design "
                                            f"({len(sols)} tried, status {status})")


def _now() -> float:
    import time
    return time.monotonic()


def _absorber_report(U_last, cap: int) -> dict:
    graphs = divisible_graphs(U_last)
    built = []
    for G in [g for g in graphs if g.edges][:cap]:
        A = build_absorber(G)
        built.append({"edges": len(G.edges), "triples": A.gadget.size,
                      "verified": bool(verify_absorber(A, G))})
    return {"divisible_graphs": len(graphs), "built": built, "embedded": False}


def _check_final(triples, colors, fam, n) -> dict:
    S = Decomposition(triples, colors)
    return {"sts": verify_sts(S, n),
            "injective": len(set(colors)) == len(colors),
            "membership": all(t in fam[c] for t, c in zip(S.triples, S.colors))}


def run_pipeline(cfg: PipelineConfig | dict, fam: Family | None = None) -> dict:
    """Run the toy pipeline; returns a report dict with ``status`` Found or Failed."""
    if isinstance(cfg, dict):
        cfg = PipelineConfig.from_dict(cfg)
    n = cfg.n
    if n % 6 not in (1, 3):
        raise DivisibilityViolation(f"n = {n} is not 1 or 3 mod 6")
    report = {"config": cfg.as_dict(), "status": "Failed"}
    if fam is None:
        fam, reports = generate_family(n, cfg.model, cfg.params, cfg.seed)
        report["family"] = reports
    deadline = _now() + cfg.max_seconds
    rng = np.random.default_rng(cfg.seed)
    try:
        ell, sizes = levels(n, cfg.m_prime, cfg.eps)
        D = color_blocks(sizes)
        report["levels"] = {"ell": ell, "sizes": sizes, "D_sizes": [len(d) for d in D]}
        if sum(len(d) for d in D) != fam.N:
            raise StageFailure("colors", f"blocks cover {sum(len(d) for d in D)} colors, family has {fam.N}")
        C = [sorted(set().union(*[set(D[j]) for j in range(max(0, i - 10), ell)])) for i in range(ell)]
        try:
            chain = sample_transversal_vortex(fam, cfg.eps, cfg.m_prime, cfg.alpha, C, seed=cfg.seed)
        except RainbowSTSError as exc:
            raise StageFailure("vortex", str(exc)) from exc
        report["vortex"] = chain.as_dict()
        U = [sorted(u) for u in chain.vertex_sets]
        report["absorbers"] = _absorber_report(U[-1], cfg.absorber_cap)
        # toy scale: S_{i+1} is all of D_{i+1}
        S = [[]] + [list(D[i]) for i in range(1, ell)]
        state = PipelineState(0, U, [list(d) for d in D], S, [], [set() for _ in range(8)] + [set()], cfg.eps, n)
        state.X[8] = state.D_prime(0) | (set(S[1]) if ell > 1 else set())
        trace = []
        report["trace"] = trace
        final = _solve_levels(state, fam, cfg, rng, trace, deadline)
        T = final.G()
        Z = sorted(set(range(fam.N)) - final.W)
        out = rainbow_exact_cover(T, fam, Z, Budget(cfg.max_nodes, max(1.0, deadline - _now())))
        if not out.found:
            raise StageFailure("final", f"rainbow cover of the leftover inside U_ℓ: {out.status}")
        placed = final.A + list(zip(out.witness.triples, out.witness.colors))
        placed.sort()
        triples = [t for t, _ in placed]
        colors = [c for _, c in placed]
        check = _check_final(triples, colors, fam, n)
        report["result"] = {"triples": [list(t) for t in triples], "colors": colors, "check": check}
        report["status"] = "Found" if all(check.values()) else "Failed"
        if not all(check.values()):
            report["failure"] = {"stage": "verify", "reason": str(check)}
    except StageFailure as exc:
        report["failure"] = {"stage": exc.stage, "reason": exc.reason}
    if n <= 15 and cfg.fallback:
        out = rainbow_exact_cover(PairGraph.complete(n), fam,
                                  budget=Budget(cfg.max_nodes, max(1.0, cfg.max_seconds)))
        fb = {"status": out.status, "nodes": out.nodes_explored}
        if out.found:
            fb["check"] = _check_final(list(out.witness.triples), list(out.witness.colors), fam, n)
            fb["triples"] = [list(t) for t in out.witness.triples]
            fb["colors"] = list(out.witness.colors)
        fb["agrees"] = out.found == (report["status"] == "Found") if out.status != "TimedOut" else None
        report["fallback"] = fb
        if report["status"] != "Found" and out.found and all(fb["check"].values()):
            report["status"] = "Found"
            report["found_by"] = "fallback"
    if report["status"] == "Found":
        report.setdefault("found_by", "levels")
    return report


# ---------------------------------------------------------------------------
# reports

def _jsonable(x):
    if hasattr(x, "as_dict"):
        return _jsonable(x.as_dict())
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset, range)):
        items = [_jsonable(v) for v in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def provenance(seed=None) -> dict:
    from . import __version__
    return {"package": "artifact", "version": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "kernels": kernels.BACKEND, "seed": seed}


def _text_lines(x, prefix="") -> list[str]:
    if isinstance(x, dict):
        out = []
        for k in sorted(x):
            out += _text_lines(x[k], f"{prefix}{k}.")
        return out
    if isinstance(x, list) and len(x) > 12:
        return [f"{prefix[:-1]}: [{len(x)} items]"]
    return [f"{prefix[:-1]}: {json.dumps(x, sort_keys=True)}"]


def emit_report(obj, path=None, seed=None, kind: str | None = None) -> tuple[str, str]:
    """JSON (sorted keys) and a flat human summary; written to ``path`` and ``path``.txt if given."""
    body = {"provenance": provenance(seed), "report": _jsonable(obj)}
    if kind:
        body["kind"] = kind
    text_json = json.dumps(body, sort_keys=True, indent=1)
    text = "\n".join(_text_lines(body)) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text_json + "\n")
        with open(str(path) + ".txt", "w") as fh:
            fh.write(text)
    return text_json, text


def load_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


if __name__ == "__main__":  # pragma: no cover
    print(emit_report(run_pipeline(PipelineConfig(int(sys.argv[1]) if len(sys.argv) > 1 else 9)))[1])
