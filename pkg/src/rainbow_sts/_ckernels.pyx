# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of ``_pykernels``: same search order, same node counts."""

import time

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef long long TIME_CHECK_MASK = 4095

EXHAUSTED = 0
SOLUTION_LIMIT = 1
NODE_LIMIT = 2
TIME_LIMIT = 3


def codegree_matrix(int n, edges, mult):
    cdef cnp.int64_t[:, ::1] e = np.ascontiguousarray(np.asarray(edges, dtype=np.int64).reshape(-1, 3))
    cdef cnp.int64_t[::1] m = np.ascontiguousarray(np.asarray(mult, dtype=np.int64))
    out = np.zeros((n, n), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] o = out
    cdef Py_ssize_t i
    cdef cnp.int64_t a, b, c, w
    for i in range(e.shape[0]):
        a = e[i, 0]; b = e[i, 1]; c = e[i, 2]; w = m[i]
        o[a, b] += w
        o[a, c] += w
        o[b, c] += w
    return out + out.T


cdef class _Solver:
    cdef int n_cols, n_rows, n_prim
    cdef int *row_ptr
    cdef int *row_idx
    cdef int *col_ptr
    cdef int *col_idx
    cdef int *col_size
    cdef int *dead
    cdef char *covered
    cdef int *prim_cols
    cdef int *chosen
    cdef int *cand
    cdef int depth
    cdef long long nodes, count, max_nodes, max_solutions
    cdef double max_seconds, start
    cdef int status
    cdef bint collect
    cdef list solutions

    def __cinit__(self):
        self.row_ptr = NULL; self.row_idx = NULL; self.col_ptr = NULL; self.col_idx = NULL
        self.col_size = NULL; self.dead = NULL; self.covered = NULL; self.prim_cols = NULL
        self.chosen = NULL; self.cand = NULL

    def __dealloc__(self):
        free(self.row_ptr); free(self.row_idx); free(self.col_ptr); free(self.col_idx)
        free(self.col_size); free(self.dead); free(self.covered); free(self.prim_cols)
        free(self.chosen); free(self.cand)

    cdef void cover_row(self, int r):
        cdef int i, j, k, c, r2
        for i in range(self.row_ptr[r], self.row_ptr[r + 1]):
            self.covered[self.row_idx[i]] = 1
        for i in range(self.row_ptr[r], self.row_ptr[r + 1]):
            c = self.row_idx[i]
            for j in range(self.col_ptr[c], self.col_ptr[c + 1]):
                r2 = self.col_idx[j]
                self.dead[r2] += 1
                if self.dead[r2] == 1:
                    for k in range(self.row_ptr[r2], self.row_ptr[r2 + 1]):
                        self.col_size[self.row_idx[k]] -= 1

    cdef void uncover_row(self, int r):
        cdef int i, j, k, c, r2
        i = self.row_ptr[r + 1] - 1
        while i >= self.row_ptr[r]:
            c = self.row_idx[i]
            j = self.col_ptr[c + 1] - 1
            while j >= self.col_ptr[c]:
                r2 = self.col_idx[j]
                self.dead[r2] -= 1
                if self.dead[r2] == 0:
                    for k in range(self.row_ptr[r2], self.row_ptr[r2 + 1]):
                        self.col_size[self.row_idx[k]] += 1
                j -= 1
            i -= 1
        for i in range(self.row_ptr[r], self.row_ptr[r + 1]):
            self.covered[self.row_idx[i]] = 0

    cdef int search(self, int cand_base) except -1:
        cdef int i, c, best, best_size, r, n_cand, stop
        self.nodes += 1
        if self.nodes > self.max_nodes:
            self.status = NODE_LIMIT
            return 1
        if self.max_seconds > 0 and (self.nodes & TIME_CHECK_MASK) == 0:
            if time.monotonic() - self.start > self.max_seconds:
                self.status = TIME_LIMIT
                return 1
        best = -1
        best_size = self.n_rows + 1
        for i in range(self.n_prim):
            c = self.prim_cols[i]
            if not self.covered[c] and self.col_size[c] < best_size:
                best = c
                best_size = self.col_size[c]
                if best_size <= 1:
                    break
        if best < 0:
            self.count += 1
            if self.collect:
                self.solutions.append([self.chosen[i] for i in range(self.depth)])
            if self.count >= self.max_solutions:
                self.status = SOLUTION_LIMIT
                return 1
            return 0
        if best_size == 0:
            return 0
        n_cand = 0
        for i in range(self.col_ptr[best], self.col_ptr[best + 1]):
            r = self.col_idx[i]
            if self.dead[r] == 0:
                self.cand[cand_base + n_cand] = r
                n_cand += 1
        for i in range(n_cand):
            r = self.cand[cand_base + i]
            self.chosen[self.depth] = r
            self.depth += 1
            self.cover_row(r)
            stop = self.search(cand_base + n_cand)
            self.uncover_row(r)
            self.depth -= 1
            if stop:
                return 1
        return 0


def exact_cover(int n_cols, rows, primary, long long max_nodes, double max_seconds,
                long long max_solutions, bint collect):
    cdef _Solver s = _Solver()
    cdef int r, c, i, total, pos
    row_list = [tuple(int(x) for x in row) for row in rows]
    s.n_cols = n_cols
    s.n_rows = len(row_list)
    total = sum(len(x) for x in row_list)
    s.row_ptr = <int *> malloc((s.n_rows + 1) * sizeof(int))
    s.row_idx = <int *> malloc((total + 1) * sizeof(int))
    s.col_ptr = <int *> malloc((n_cols + 1) * sizeof(int))
    s.col_idx = <int *> malloc((total + 1) * sizeof(int))
    s.col_size = <int *> malloc((n_cols + 1) * sizeof(int))
    s.dead = <int *> malloc((s.n_rows + 1) * sizeof(int))
    s.covered = <char *> malloc((n_cols + 1) * sizeof(char))
    s.prim_cols = <int *> malloc((n_cols + 1) * sizeof(int))
    s.chosen = <int *> malloc((s.n_rows + 1) * sizeof(int))
    # candidate stack: every row appears at most once per branch level set
    s.cand = <int *> malloc((total + s.n_rows + 1) * sizeof(int))
    if (s.row_ptr == NULL or s.row_idx == NULL or s.col_ptr == NULL or s.col_idx == NULL
            or s.col_size == NULL or s.dead == NULL or s.covered == NULL
            or s.prim_cols == NULL or s.chosen == NULL or s.cand == NULL):
        raise MemoryError()
    pos = 0
    for r in range(s.n_rows):
        s.row_ptr[r] = pos
        for c in row_list[r]:
            s.row_idx[pos] = c
            pos += 1
        s.dead[r] = 0
    s.row_ptr[s.n_rows] = pos
    for c in range(n_cols + 1):
        s.col_ptr[c] = 0
    for r in range(s.n_rows):
        for c in row_list[r]:
            s.col_ptr[c + 1] += 1
    for c in range(n_cols):
        s.col_ptr[c + 1] += s.col_ptr[c]
        s.col_size[c] = s.col_ptr[c + 1] - s.col_ptr[c]
        s.covered[c] = 0
    fill = [s.col_ptr[c] for c in range(n_cols)]
    for r in range(s.n_rows):
        for c in row_list[r]:
            s.col_idx[fill[c]] = r
            fill[c] += 1
    s.n_prim = 0
    for c in range(n_cols):
        if primary is None or primary[c]:
            s.prim_cols[s.n_prim] = c
            s.n_prim += 1
    s.depth = 0
    s.nodes = 0
    s.count = 0
    s.max_nodes = max_nodes
    s.max_solutions = max_solutions
    s.max_seconds = max_seconds
    s.collect = collect
    s.solutions = []
    s.status = EXHAUSTED
    s.start = time.monotonic()
    s.search(0)
    return s.status, s.solutions, s.count, s.nodes
