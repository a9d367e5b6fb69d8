"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Workloads: counting all K_3-decompositions of K_9 (840, full enumeration),
finding one STS(15), the node-limited search on the n=15 extremal
construction, and codegree matrices of K_n^(3) for a few n.
"""

from __future__ import annotations

import argparse
import json
import statistics
import time
from itertools import combinations

import numpy as np

from rainbow_sts import kernels
from rainbow_sts.extremal import ExtremalSpec, build_extremal
from rainbow_sts.hypercore import PairGraph, TripleSystem


def k3_rows(n, allowed=None):
    G = PairGraph.complete(n)
    idx = G.edge_index()
    triples = allowed.edges if allowed is not None else list(combinations(range(n), 3))
    rows = [tuple(idx[p] for p in combinations(t, 2)) for t in triples]
    return len(idx), rows


def timed(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def exact_cover_cases():
    n9 = k3_rows(9)
    n15 = k3_rows(15)
    ext = k3_rows(15, build_extremal(ExtremalSpec(15, (4, 3, 3, 5))))
    return [
        ("count K9", n9, dict(max_solutions=10**6, collect=False), 840),
        ("one STS(15)", n15, dict(max_solutions=1), None),
        ("extremal n=15, 2e5 nodes", ext, dict(max_solutions=1, max_nodes=200_000), None),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json")
    args = ap.parse_args(argv)

    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    if len(backends) == 1:
        print("compiled kernels unavailable; timing the Python fallback only")
    results = []

    for name, (n_cols, rows), kw, expect in exact_cover_cases():
        row = {"workload": name}
        for b in backends:
            (status, _, count, nodes), t = timed(
                lambda: kernels.exact_cover(n_cols, rows, None, backend=b, **kw), args.repeat)
            if expect is not None and count != expect:
                raise SystemExit(f"{name}: {b} counted {count}, expected {expect}")
            row[b] = {"seconds": t, "nodes": nodes, "status": status}
        results.append(row)

    for n in (12, 24, 40):
        H = TripleSystem.complete(n)
        edges = np.array(H.edges, dtype=np.int64)
        mult = np.ones(len(edges), dtype=np.int64)
        row = {"workload": f"codegree K{n}^(3)"}
        ref = None
        for b in backends:
            M, t = timed(lambda: kernels.codegree_matrix(n, edges, mult, backend=b), args.repeat)
            ref = M if ref is None else ref
            if not np.array_equal(M, ref):
                raise SystemExit(f"codegree K{n}: backends disagree")
            row[b] = {"seconds": t}
        results.append(row)

    width = max(len(r["workload"]) for r in results)
    head = f"{'workload':<{width}}  " + "  ".join(f"{b:>10}" for b in backends)
    if "cython" in backends:
        head += "  speedup"
    print(head)
    for r in results:
        line = f"{r['workload']:<{width}}  " + "  ".join(f"{r[b]['seconds']:>9.4f}s" for b in backends)
        if "cython" in backends:
            line += f"  {r['python']['seconds'] / max(r['cython']['seconds'], 1e-9):>6.1f}x"
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
