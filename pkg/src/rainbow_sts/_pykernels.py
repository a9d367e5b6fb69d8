"""Pure-Python hot kernels.  ``_ckernels.pyx`` mirrors this module line for line."""

import time

import numpy as np

# status codes shared with the compiled kernel
EXHAUSTED = 0
SOLUTION_LIMIT = 1
NODE_LIMIT = 2
TIME_LIMIT = 3

_TIME_CHECK_MASK = (1 << 12) - 1


def codegree_matrix(n, edges, mult):
    out = np.zeros((n, n), dtype=np.int64)
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 3)
    mult = np.asarray(mult, dtype=np.int64)
    for (a, b, c), m in zip(edges.tolist(), mult.tolist()):
        out[a, b] += m
        out[a, c] += m
        out[b, c] += m
    return out + out.T


def exact_cover(n_cols, rows, primary, max_nodes, max_seconds, max_solutions, collect):
    """Algorithm X over counters.

    ``rows`` is a sequence of column tuples; ``primary[c]`` says whether
    column ``c`` must be covered (secondary columns are covered at most once).
    Column choice: fewest live rows, ties to the lowest index.  Rows of a
    column are tried in increasing index order, so runs are deterministic.

    Returns ``(status, solutions, count, nodes)``.
    """
    rows = [tuple(int(c) for c in r) for r in rows]
    n_rows = len(rows)
    col_rows = [[] for _ in range(n_cols)]
    for r, cols in enumerate(rows):
        for c in cols:
            col_rows[c].append(r)
    col_size = [len(x) for x in col_rows]
    dead = [0] * n_rows
    covered = [False] * n_cols
    prim = [bool(p) for p in primary] if primary is not None else [True] * n_cols
    open_primary = [c for c in range(n_cols) if prim[c]]

    solutions = []
    chosen = []
    state = {"count": 0, "nodes": 0, "status": EXHAUSTED}
    start = time.monotonic()

    def cover_row(r):
        for c in rows[r]:
            covered[c] = True
        for c in rows[r]:
            for r2 in col_rows[c]:
                dead[r2] += 1
                if dead[r2] == 1:
                    for c2 in rows[r2]:
                        col_size[c2] -= 1

    def uncover_row(r):
        for c in reversed(rows[r]):
            for r2 in reversed(col_rows[c]):
                dead[r2] -= 1
                if dead[r2] == 0:
                    for c2 in rows[r2]:
                        col_size[c2] += 1
        for c in rows[r]:
            covered[c] = False

    def search():
        state["nodes"] += 1
        if state["nodes"] > max_nodes:
            state["status"] = NODE_LIMIT
            return True
        if max_seconds > 0 and (state["nodes"] & _TIME_CHECK_MASK) == 0:
            if time.monotonic() - start > max_seconds:
                state["status"] = TIME_LIMIT
                return True
        best = -1
        best_size = n_rows + 1
        for c in open_primary:
            if not covered[c] and col_size[c] < best_size:
                best, best_size = c, col_size[c]
                if best_size <= 1:
                    break
        if best < 0:
            state["count"] += 1
            if collect:
                solutions.append(list(chosen))
            if state["count"] >= max_solutions:
                state["status"] = SOLUTION_LIMIT
                return True
            return False
        if best_size == 0:
            return False
        candidates = [r for r in col_rows[best] if dead[r] == 0]
        for r in candidates:
            chosen.append(r)
            cover_row(r)
            stop = search()
            uncover_row(r)
            chosen.pop()
            if stop:
                return True
        return False

    import sys
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * n_cols + 1000))
    try:
        search()
    finally:
        sys.setrecursionlimit(limit)
    return state["status"], solutions, state["count"], state["nodes"]
